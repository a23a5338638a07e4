#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fbalf/client.hpp"
#include "fbalf/data.hpp"
#include "fbalf/metrics.hpp"
#include "fbalf/server.hpp"

namespace fbalf {

struct RoundRecord {
    int round = 0;
    double objective = 0.0;  // regularized train objective summed over users
    double mae = 0.0;
    double rmse = 0.0;
    double seconds = 0.0;
    std::size_t cold = 0;
};

struct TrainReport {
    std::vector<RoundRecord> rounds;
    ServerState server;
    std::vector<ClientState> clients;
    int stopped_round = 0;  // last round actually run
};

using RoundObserver =
    std::function<void(const RoundRecord&, const std::vector<ClientState>&, const ServerState&)>;

/// Federated training over hp.rounds global rounds. Sequential mode updates the
/// server after each client; parallel_round mode trains every client against the
/// round-start state and applies uploads in client-index order.
TrainReport run_training(const RatingDataset& train, const RatingDataset& test,
                         const HyperParams& hp, const RoundObserver& observer = nullptr);

struct CentralizedModel {
    FactorMatrix user_factors;   // |U| x f
    Eigen::VectorXd user_bias;   // |U|
    FactorMatrix item_factors;   // |I| x f
    Eigen::VectorXd item_bias;   // |I|
};

using OracleObserver = std::function<void(int round, const CentralizedModel&)>;

/// Centralized SGD baseline over the biased (or plain, when bias is off)
/// objective, with no filling. Visitation order and update timing mirror
/// sequential federated training, which makes the two trajectories comparable
/// round by round.
CentralizedModel centralized_oracle(const RatingDataset& train, const HyperParams& hp,
                                    const OracleObserver& observer = nullptr);

/// Held-out metrics for a finished federated run.
MetricPair evaluate(const RatingDataset& train, const RatingDataset& test,
                    const std::vector<ClientState>& clients, const ServerState& server,
                    const HyperParams& hp);

/// Total number of item keys uploaded per round across all clients
/// (the privacy surface).
std::size_t upload_surface(const std::vector<ClientState>& clients);

struct AblationCell {
    std::string variant;
    int fold = 0;
    double mae = 0.0;
    double rmse = 0.0;
    std::size_t upload_keys = 0;
};

/// Cross-validated comparison of internal variants (bias on/off, rho grid).
std::vector<AblationCell> ablation_suite(
    const RatingDataset& ds, const std::vector<std::pair<std::string, HyperParams>>& variants,
    int folds, std::uint64_t split_seed);

}  // namespace fbalf
