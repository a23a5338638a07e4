#include "fbalf/client.hpp"

#include <algorithm>
#include <cmath>

namespace fbalf {

std::vector<RatedItem> ClientState::combined_items() const {
    std::vector<RatedItem> all = rated;
    for (int item : synthetic) all.push_back({item, -1.0});
    std::sort(all.begin(), all.end(),
              [](const RatedItem& a, const RatedItem& b) { return a.item < b.item; });
    return all;
}

std::vector<int> ClientState::item_keys() const {
    std::vector<int> keys;
    keys.reserve(rated.size() + synthetic.size());
    for (const auto& r : rated) keys.push_back(r.item);
    keys.insert(keys.end(), synthetic.begin(), synthetic.end());
    std::sort(keys.begin(), keys.end());
    return keys;
}

ClientState init_client(int user_index, const std::vector<RatedItem>& ratings,
                        const HyperParams& hp, int item_universe_size) {
    ClientState state;
    state.user_index = user_index;
    state.rng = Rng::derive(hp.seed, stream::kClient, static_cast<std::uint64_t>(user_index));
    state.factors.resize(hp.factors);
    for (int k = 0; k < hp.factors; ++k) state.factors(k) = state.rng.uniform(0.0, 0.05);
    state.bias = 0.0;

    if (ratings.empty()) return state;  // inactive; never uploads
    state.active = true;

    state.rated = ratings;
    std::sort(state.rated.begin(), state.rated.end(),
              [](const RatedItem& a, const RatedItem& b) { return a.item < b.item; });
    double sum = 0.0;
    for (const auto& r : state.rated) sum += r.rating;
    state.user_mean = sum / static_cast<double>(state.rated.size());

    const std::size_t n_rated = state.rated.size();
    const std::size_t cap = static_cast<std::size_t>(item_universe_size) - n_rated;
    const std::size_t want = std::min(static_cast<std::size_t>(hp.effective_rho()) * n_rated, cap);
    if (want > 0) {
        std::vector<char> is_rated(static_cast<std::size_t>(item_universe_size), 0);
        for (const auto& r : state.rated) is_rated[static_cast<std::size_t>(r.item)] = 1;
        std::vector<int> candidates;
        candidates.reserve(cap);
        for (int i = 0; i < item_universe_size; ++i)
            if (!is_rated[static_cast<std::size_t>(i)]) candidates.push_back(i);
        state.synthetic = state.rng.sample_without_replacement(std::move(candidates), want);
        std::sort(state.synthetic.begin(), state.synthetic.end());
    }
    return state;
}

double synthetic_rating(const ClientState& state, int item_index, int round,
                        const ServerSnapshot& server, const HyperParams& hp, double r_min,
                        double r_max) {
    if (!std::binary_search(state.synthetic.begin(), state.synthetic.end(), item_index))
        throw std::invalid_argument("synthetic_rating called for an item outside Î_u");
    if (round <= hp.t_hf) return state.user_mean;
    const double pred = predict(state.factors, state.bias, server.item_factors(item_index),
                                server.item_bias(item_index), hp.bias_enabled);
    return clamp(pred, r_min, r_max);
}

GradientUpload local_train_round(ClientState& state, const ServerSnapshot& server, int round,
                                 const HyperParams& hp, double r_min, double r_max) {
    GradientUpload upload;
    upload.user_index = state.user_index;
    if (!state.active) return upload;

    const std::vector<RatedItem> base = state.combined_items();

    for (int pass = 1; pass <= hp.t_local; ++pass) {
        std::vector<RatedItem> order = base;
        state.rng.shuffle(order);
        const bool final_pass = (pass == hp.t_local);
        for (const auto& slot : order) {
            const bool is_real = slot.rating >= 0.0;
            const Eigen::VectorXd s_i = server.item_factors(slot.item);
            const double b_i = server.item_bias(slot.item);
            const double target =
                is_real ? slot.rating
                        : synthetic_rating(state, slot.item, round, server, hp, r_min, r_max);

            double delta = residual(
                target, predict(state.factors, state.bias, s_i, b_i, hp.bias_enabled));
            UserGradients ug =
                user_side_gradients(delta, state.factors, state.bias, s_i, hp.lambda, hp.eta);
            state.factors -= ug.factors;
            if (hp.bias_enabled) state.bias -= ug.bias;
            if (!state.factors.allFinite() || !std::isfinite(state.bias))
                throw DivergenceError(round, state.user_index,
                                      "divergence at round " + std::to_string(round) +
                                          ", user " + std::to_string(state.user_index));

            if (final_pass) {
                // Item gradients reflect the post-update c_u, a_u.
                delta = residual(
                    target, predict(state.factors, state.bias, s_i, b_i, hp.bias_enabled));
                ItemGradients ig =
                    item_side_gradients(delta, s_i, b_i, state.factors, hp.lambda, hp.eta);
                if (!hp.bias_enabled) ig.bias = 0.0;
                upload.entries.push_back({slot.item, std::move(ig.factors), ig.bias});
            }
        }
    }
    return upload;
}

}  // namespace fbalf
