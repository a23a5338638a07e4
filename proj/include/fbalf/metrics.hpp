#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "fbalf/data.hpp"

namespace fbalf {

struct MetricPair {
    double mae = 0.0;
    double rmse = 0.0;
    std::size_t n = 0;
    std::size_t cold = 0;  // entries scored with the scale midpoint
};

/// Predictor returns nullopt for cold (u, i) pairs, which are scored with the
/// rating-scale midpoint.
using Predictor = std::function<std::optional<double>(int user, int item)>;

MetricPair score(const RatingDataset& test, const Predictor& predictor, double r_min,
                 double r_max, bool clamp_enabled = true);

struct LossWin {
    int losses = 0;
    int wins = 0;
    int ties = 0;
};

LossWin loss_win(const std::vector<double>& ours, const std::vector<double>& theirs,
                 bool lower_is_better = true);

/// One-sided exact Wilcoxon signed-rank p-value for "ours better" (lower).
/// Zero differences are dropped; returns nullopt when all differences are zero.
std::optional<double> wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs);

/// Friedman mean ranks: `table` is models x cases; within each case, models
/// are ranked 1..m (average ranks on ties, lower value = better rank), then
/// ranks are averaged per model across cases.
std::vector<double> friedman_ranks(const std::vector<std::vector<double>>& table);

}  // namespace fbalf
