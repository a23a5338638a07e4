#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "fbalf/model.hpp"

namespace fbalf {

struct GradientEntry {
    int item = 0;
    FactorVector grad_factors;
    double grad_bias = 0.0;
};

/// One client's per-round message. The key set is I_u ∪ Î_u; no rating value
/// and no rated/synthetic flag exists in this type.
struct GradientUpload {
    int user_index = 0;
    std::vector<GradientEntry> entries;
};

struct ServerState {
    FactorMatrix item_factors;  // |I| x f
    Eigen::VectorXd item_bias;  // |I|
    int round_counter = 0;

    Eigen::Index num_items() const { return item_factors.rows(); }
    int factors() const { return static_cast<int>(item_factors.cols()); }
};

/// Immutable item-keyed copy of (s_i, b_i) handed to clients for one round.
class ServerSnapshot {
public:
    ServerSnapshot() = default;
    ServerSnapshot(const ServerState& state, const std::vector<int>& item_indices);

    bool has(int item) const { return index_.count(item) > 0; }
    Eigen::VectorXd item_factors(int item) const { return factors_.row(lookup(item)).transpose(); }
    double item_bias(int item) const { return bias_(lookup(item)); }
    std::size_t size() const { return index_.size(); }

private:
    Eigen::Index lookup(int item) const;

    std::unordered_map<int, Eigen::Index> index_;
    FactorMatrix factors_;
    Eigen::VectorXd bias_;
};

ServerState init_server(Eigen::Index item_count, const HyperParams& hp);

ServerSnapshot snapshot(const ServerState& state, const std::vector<int>& item_indices);

/// s_i <- s_i - grad_s, b_i <- b_i - grad_b for each uploaded entry.
/// Rejects out-of-range keys and non-finite gradients.
void apply_upload(ServerState& state, const GradientUpload& upload);

void save_server(const ServerState& state, const std::string& path);
ServerState load_server(const std::string& path);

}  // namespace fbalf
