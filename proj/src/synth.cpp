#include "fbalf/synth.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "fbalf/model.hpp"
#include "fbalf/rng.hpp"

namespace fbalf {

namespace {

double gaussian(Rng& rng, double sigma) {
    // Box-Muller; one draw per call keeps the stream layout simple
    double u1 = rng.uniform();
    double u2 = rng.uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double round_to_half(double x) { return std::round(x * 2.0) / 2.0; }

}  // namespace

RatingDataset generate_synthetic(const SynthSpec& spec) {
    if (spec.users < 1 || spec.items < 1 || spec.rank < 1)
        throw std::invalid_argument("generate_synthetic: users, items, rank must be >= 1");
    Rng rng = Rng::derive(spec.seed, stream::kSynthData);

    FactorMatrix user_factors(spec.users, spec.rank);
    FactorMatrix item_factors(spec.items, spec.rank);
    Eigen::VectorXd user_bias(spec.users), item_bias(spec.items);
    const double scale = 1.0 / std::sqrt(static_cast<double>(spec.rank));
    for (int u = 0; u < spec.users; ++u)
        for (int k = 0; k < spec.rank; ++k) user_factors(u, k) = rng.uniform(-scale, scale);
    for (int i = 0; i < spec.items; ++i)
        for (int k = 0; k < spec.rank; ++k) item_factors(i, k) = rng.uniform(-scale, scale);
    for (int u = 0; u < spec.users; ++u)
        user_bias(u) = rng.uniform(-spec.user_bias_spread, spec.user_bias_spread);
    for (int i = 0; i < spec.items; ++i)
        item_bias(i) = rng.uniform(-spec.item_bias_spread, spec.item_bias_spread);

    RatingDataset ds;
    for (int u = 0; u < spec.users; ++u) ds.user_ids.push_back("u" + std::to_string(u));
    for (int i = 0; i < spec.items; ++i) ds.item_ids.push_back("i" + std::to_string(i));
    ds.r_min = 1.0;
    ds.r_max = 5.0;
    for (int u = 0; u < spec.users; ++u) {
        for (int i = 0; i < spec.items; ++i) {
            if (rng.uniform() >= spec.density) continue;
            double value = user_factors.row(u).dot(item_factors.row(i)) + user_bias(u) +
                           item_bias(i) + spec.global_mean + gaussian(rng, spec.noise_sigma);
            ds.triples.push_back({u, i, clamp(round_to_half(value), ds.r_min, ds.r_max)});
        }
    }
    ds.rebuild_adjacency();
    return ds;
}

void write_ratings_csv(const RatingDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& t : ds.triples) {
        out << ds.user_ids[static_cast<std::size_t>(t.user)] << ','
            << ds.item_ids[static_cast<std::size_t>(t.item)] << ',' << t.rating << '\n';
    }
}

RatingDataset standard_fixture(std::uint64_t seed) {
    SynthSpec spec;
    spec.users = 50;
    spec.items = 40;
    spec.rank = 3;
    spec.user_bias_spread = 1.0;
    spec.item_bias_spread = 0.5;
    spec.noise_sigma = 0.1;
    spec.density = 0.5;
    spec.seed = seed;
    return generate_synthetic(spec);
}

}  // namespace fbalf
