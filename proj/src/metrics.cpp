#include "fbalf/metrics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fbalf/model.hpp"

namespace fbalf {

MetricPair score(const RatingDataset& test, const Predictor& predictor, double r_min,
                 double r_max, bool clamp_enabled) {
    if (test.triples.empty()) throw std::invalid_argument("score: empty test set");
    const double midpoint = 0.5 * (r_min + r_max);
    double abs_sum = 0.0, sq_sum = 0.0;
    std::size_t cold = 0;
    for (const auto& t : test.triples) {
        std::optional<double> p = predictor(t.user, t.item);
        double pred;
        if (p.has_value()) {
            pred = clamp_enabled ? clamp(*p, r_min, r_max) : *p;
        } else {
            pred = midpoint;
            ++cold;
        }
        const double err = t.rating - pred;
        abs_sum += std::abs(err);
        sq_sum += err * err;
    }
    MetricPair m;
    m.n = test.triples.size();
    m.cold = cold;
    m.mae = abs_sum / static_cast<double>(m.n);
    m.rmse = std::sqrt(sq_sum / static_cast<double>(m.n));
    assert(m.mae <= m.rmse + 1e-12);
    return m;
}

LossWin loss_win(const std::vector<double>& ours, const std::vector<double>& theirs,
                 bool lower_is_better) {
    if (ours.size() != theirs.size())
        throw std::invalid_argument("loss_win: length mismatch");
    LossWin lw;
    for (std::size_t i = 0; i < ours.size(); ++i) {
        if (ours[i] == theirs[i]) {
            ++lw.ties;
            continue;
        }
        const bool we_win = lower_is_better ? ours[i] < theirs[i] : ours[i] > theirs[i];
        (we_win ? lw.wins : lw.losses)++;
    }
    return lw;
}

std::optional<double> wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs) {
    // differences d = ours - theirs; d < 0 favors "ours" (lower is better)
    std::vector<double> diffs;
    for (const auto& [ours, theirs] : pairs) {
        const double d = ours - theirs;
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.empty()) return std::nullopt;

    const std::size_t n = diffs.size();
    if (n > 25) throw std::invalid_argument("wilcoxon_signed_rank: exact test limited to n <= 25");

    // ranks of |d| with average ranks on ties; doubled so they stay integral
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(diffs[a]) < std::abs(diffs[b]);
    });
    std::vector<long> rank2(n, 0);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
        const long avg2 = static_cast<long>(i + 1 + j);  // 2 * average rank of the tie group
        for (std::size_t k = i; k < j; ++k) rank2[order[k]] = avg2;
        i = j;
    }

    long w_plus2 = 0;  // doubled rank sum over positive differences (ours worse)
    long total2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        total2 += rank2[i];
        if (diffs[i] > 0.0) w_plus2 += rank2[i];
    }

    // exact null distribution of the doubled rank sum over all 2^n sign vectors
    std::vector<double> count(static_cast<std::size_t>(total2) + 1, 0.0);
    count[0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (long s = total2; s >= rank2[i]; --s)
            count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - rank2[i])];
    }
    double at_most = 0.0;
    for (long s = 0; s <= w_plus2; ++s) at_most += count[static_cast<std::size_t>(s)];
    return at_most / std::ldexp(1.0, static_cast<int>(n));
}

std::vector<double> friedman_ranks(const std::vector<std::vector<double>>& table) {
    if (table.empty()) throw std::invalid_argument("friedman_ranks: empty table");
    const std::size_t models = table.size();
    const std::size_t cases = table[0].size();
    if (cases == 0) throw std::invalid_argument("friedman_ranks: no cases");
    for (const auto& row : table)
        if (row.size() != cases) throw std::invalid_argument("friedman_ranks: ragged table");

    std::vector<double> mean_rank(models, 0.0);
    for (std::size_t c = 0; c < cases; ++c) {
        std::vector<std::size_t> order(models);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return table[a][c] < table[b][c]; });
        for (std::size_t i = 0; i < models;) {
            std::size_t j = i;
            while (j < models && table[order[j]][c] == table[order[i]][c]) ++j;
            const double avg = 0.5 * static_cast<double>(i + 1 + j);  // average rank of ties
            for (std::size_t k = i; k < j; ++k) mean_rank[order[k]] += avg;
            i = j;
        }
    }
    for (double& r : mean_rank) r /= static_cast<double>(cases);
    return mean_rank;
}

}  // namespace fbalf
