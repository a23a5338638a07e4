#pragma once

#include <vector>

#include "fbalf/model.hpp"
#include "fbalf/rng.hpp"
#include "fbalf/server.hpp"

namespace fbalf {

struct RatedItem {
    int item = 0;
    double rating = 0.0;
};

struct DivergenceError : std::runtime_error {
    DivergenceError(int round, int user, const std::string& what)
        : std::runtime_error(what), round(round), user(user) {}
    int round;
    int user;
};

/// One user's private state. Raw ratings and the rated/synthetic distinction
/// never leave this struct.
struct ClientState {
    int user_index = 0;
    FactorVector factors;          // c_u
    double bias = 0.0;             // a_u
    std::vector<RatedItem> rated;  // I_u, sorted by item index
    std::vector<int> synthetic;    // Î_u, sorted by item index
    double user_mean = 0.0;
    Rng rng{0};
    bool active = false;

    /// Sorted I_u ∪ Î_u; rating < 0 marks a synthetic slot.
    std::vector<RatedItem> combined_items() const;
    std::vector<int> item_keys() const;
};

/// Initialize a client: c_u ~ U(0, 0.05) from the per-client stream, a_u = 0,
/// Î_u sampled once, uniformly without replacement from unrated items, with
/// |Î_u| = min(rho*|I_u|, |I| - |I_u|).
ClientState init_client(int user_index, const std::vector<RatedItem>& ratings,
                        const HyperParams& hp, int item_universe_size);

/// Target for a synthetic item: user mean while t <= T_HF, afterwards the
/// clamped current prediction.
double synthetic_rating(const ClientState& state, int item_index, int round,
                        const ServerSnapshot& server, const HyperParams& hp, double r_min,
                        double r_max);

/// T_local passes of user-side SGD against a fixed server snapshot; the final
/// pass also records item-side gradients, which form the upload.
GradientUpload local_train_round(ClientState& state, const ServerSnapshot& server, int round,
                                 const HyperParams& hp, double r_min, double r_max);

}  // namespace fbalf
