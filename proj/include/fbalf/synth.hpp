#pragma once

#include <cstdint>
#include <string>

#include "fbalf/data.hpp"

namespace fbalf {

/// Planted-model rating generator for fixtures: ratings are
/// clamp(round_to_half(c_u·s_i + a_u + b_i + mu + eps)) on a 1-5 scale.
struct SynthSpec {
    int users = 50;
    int items = 40;
    int rank = 3;
    double user_bias_spread = 0.0;  // a_u ~ U(-spread, spread)
    double item_bias_spread = 0.0;
    double noise_sigma = 0.1;
    double density = 0.5;
    double global_mean = 3.0;
    std::uint64_t seed = 7;
};

RatingDataset generate_synthetic(const SynthSpec& spec);

/// Write a dataset as generic "user,item,rating" CSV.
void write_ratings_csv(const RatingDataset& ds, const std::string& path);

/// The 50x40 rank-3 fixture with user/item offsets and sigma=0.1 noise used
/// throughout the test suites.
RatingDataset standard_fixture(std::uint64_t seed = 7);

}  // namespace fbalf
