#include "fbalf/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace fbalf {

namespace {

std::vector<ClientState> build_clients(const RatingDataset& train, const HyperParams& hp) {
    std::vector<ClientState> clients;
    clients.reserve(train.num_users());
    for (std::size_t u = 0; u < train.num_users(); ++u) {
        std::vector<RatedItem> ratings;
        for (std::size_t idx : train.user_triples[u])
            ratings.push_back({train.triples[idx].item, train.triples[idx].rating});
        clients.push_back(init_client(static_cast<int>(u), ratings, hp,
                                      static_cast<int>(train.num_items())));
    }
    return clients;
}

std::vector<int> visitation_order(std::size_t num_users, const HyperParams& hp, int round) {
    std::vector<int> order(num_users);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = Rng::derive(hp.seed, stream::kVisitOrder, static_cast<std::uint64_t>(round));
    rng.shuffle(order);
    return order;
}

double train_objective(const std::vector<ClientState>& clients, const ServerState& server,
                       int round, const HyperParams& hp, double r_min, double r_max) {
    double total = 0.0;
    for (const auto& client : clients) {
        if (!client.active) continue;
        ServerSnapshot snap = snapshot(server, client.item_keys());
        for (const auto& slot : client.combined_items()) {
            const double target =
                slot.rating >= 0.0
                    ? slot.rating
                    : synthetic_rating(client, slot.item, round, snap, hp, r_min, r_max);
            total += element_loss(target, client.factors,
                                  hp.bias_enabled ? client.bias : 0.0,
                                  snap.item_factors(slot.item), snap.item_bias(slot.item),
                                  hp.lambda);
        }
    }
    return total;
}

}  // namespace

MetricPair evaluate(const RatingDataset& train, const RatingDataset& test,
                    const std::vector<ClientState>& clients, const ServerState& server,
                    const HyperParams& hp) {
    std::vector<char> item_warm(train.num_items(), 0);
    for (const auto& t : train.triples) item_warm[static_cast<std::size_t>(t.item)] = 1;
    Predictor predictor = [&](int u, int i) -> std::optional<double> {
        if (u < 0 || static_cast<std::size_t>(u) >= clients.size()) return std::nullopt;
        if (i < 0 || i >= server.num_items()) return std::nullopt;
        if (!clients[static_cast<std::size_t>(u)].active || !item_warm[static_cast<std::size_t>(i)])
            return std::nullopt;
        const auto& c = clients[static_cast<std::size_t>(u)];
        return predict(c.factors, c.bias, server.item_factors.row(i).transpose(),
                       server.item_bias(i), hp.bias_enabled);
    };
    return score(test, predictor, test.r_min, test.r_max, hp.clamp_predictions);
}

std::size_t upload_surface(const std::vector<ClientState>& clients) {
    std::size_t total = 0;
    for (const auto& c : clients)
        if (c.active) total += c.rated.size() + c.synthetic.size();
    return total;
}

TrainReport run_training(const RatingDataset& train, const RatingDataset& test,
                         const HyperParams& hp, const RoundObserver& observer) {
    hp.validate();
    TrainReport report;
    report.clients = build_clients(train, hp);
    report.server = init_server(static_cast<Eigen::Index>(train.num_items()), hp);

    const double r_min = train.r_min, r_max = train.r_max;
    double best_rmse = std::numeric_limits<double>::infinity();
    int rounds_since_best = 0;

    for (int t = 1; t <= hp.rounds; ++t) {
        const auto start = std::chrono::steady_clock::now();
        if (hp.mode == ScheduleMode::kSequential) {
            for (int u : visitation_order(train.num_users(), hp, t)) {
                ClientState& client = report.clients[static_cast<std::size_t>(u)];
                if (!client.active) continue;
                ServerSnapshot snap = snapshot(report.server, client.item_keys());
                GradientUpload upload = local_train_round(client, snap, t, hp, r_min, r_max);
                apply_upload(report.server, upload);
            }
        } else {
            const ServerState round_start = report.server;
            std::vector<GradientUpload> uploads;
            for (auto& client : report.clients) {
                if (!client.active) continue;
                ServerSnapshot snap = snapshot(round_start, client.item_keys());
                uploads.push_back(local_train_round(client, snap, t, hp, r_min, r_max));
            }
            for (const auto& upload : uploads) apply_upload(report.server, upload);
        }
        report.server.round_counter = t;

        RoundRecord rec;
        rec.round = t;
        rec.objective = train_objective(report.clients, report.server, t, hp, r_min, r_max);
        const MetricPair m = evaluate(train, test, report.clients, report.server, hp);
        rec.mae = m.mae;
        rec.rmse = m.rmse;
        rec.cold = m.cold;
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.rounds.push_back(rec);
        report.stopped_round = t;
        if (observer) observer(rec, report.clients, report.server);

        if (hp.patience > 0) {
            if (m.rmse < best_rmse) {
                best_rmse = m.rmse;
                rounds_since_best = 0;
            } else if (++rounds_since_best >= hp.patience) {
                break;
            }
        }
    }
    return report;
}

CentralizedModel centralized_oracle(const RatingDataset& train, const HyperParams& hp,
                                    const OracleObserver& observer) {
    hp.validate();
    HyperParams chp = hp;
    chp.rho = 0;
    chp.filling_enabled = false;

    // Shared initialization: identical factor draws as the federated path.
    std::vector<ClientState> users = build_clients(train, chp);
    ServerState items = init_server(static_cast<Eigen::Index>(train.num_items()), chp);

    CentralizedModel model;
    model.user_factors.resize(static_cast<Eigen::Index>(train.num_users()), chp.factors);
    model.user_bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(train.num_users()));

    for (int t = 1; t <= chp.rounds; ++t) {
        for (int u : visitation_order(train.num_users(), chp, t)) {
            ClientState& user = users[static_cast<std::size_t>(u)];
            if (!user.active) continue;

            // Item rows are frozen while this user's passes run; the item-side
            // steps from the final pass are applied afterwards, in visitation
            // order, matching the federated upload timing.
            const std::vector<RatedItem> base = user.rated;
            std::vector<GradientEntry> pending;
            for (int pass = 1; pass <= chp.t_local; ++pass) {
                std::vector<RatedItem> order = base;
                user.rng.shuffle(order);
                const bool final_pass = (pass == chp.t_local);
                for (const auto& elem : order) {
                    const Eigen::VectorXd s_i = items.item_factors.row(elem.item).transpose();
                    const double b_i = items.item_bias(elem.item);
                    double delta = residual(
                        elem.rating,
                        predict(user.factors, user.bias, s_i, b_i, chp.bias_enabled));
                    UserGradients ug = user_side_gradients(delta, user.factors, user.bias, s_i,
                                                           chp.lambda, chp.eta);
                    user.factors -= ug.factors;
                    if (chp.bias_enabled) user.bias -= ug.bias;
                    if (!user.factors.allFinite() || !std::isfinite(user.bias))
                        throw DivergenceError(t, u,
                                              "divergence at round " + std::to_string(t) +
                                                  ", user " + std::to_string(u));
                    if (final_pass) {
                        delta = residual(
                            elem.rating,
                            predict(user.factors, user.bias, s_i, b_i, chp.bias_enabled));
                        ItemGradients ig = item_side_gradients(delta, s_i, b_i, user.factors,
                                                               chp.lambda, chp.eta);
                        if (!chp.bias_enabled) ig.bias = 0.0;
                        pending.push_back({elem.item, std::move(ig.factors), ig.bias});
                    }
                }
            }
            for (const auto& e : pending) {
                items.item_factors.row(e.item) -= e.grad_factors.transpose();
                items.item_bias(e.item) -= e.grad_bias;
            }
        }
        items.round_counter = t;
        if (observer) {
            for (std::size_t u = 0; u < users.size(); ++u) {
                model.user_factors.row(static_cast<Eigen::Index>(u)) = users[u].factors;
                model.user_bias(static_cast<Eigen::Index>(u)) = users[u].bias;
            }
            model.item_factors = items.item_factors;
            model.item_bias = items.item_bias;
            observer(t, model);
        }
    }

    for (std::size_t u = 0; u < users.size(); ++u) {
        model.user_factors.row(static_cast<Eigen::Index>(u)) = users[u].factors;
        model.user_bias(static_cast<Eigen::Index>(u)) = users[u].bias;
    }
    model.item_factors = std::move(items.item_factors);
    model.item_bias = std::move(items.item_bias);
    return model;
}

std::vector<AblationCell> ablation_suite(
    const RatingDataset& ds, const std::vector<std::pair<std::string, HyperParams>>& variants,
    int folds, std::uint64_t split_seed) {
    SplitPlan plan = make_kfold(ds, folds, split_seed);
    std::vector<AblationCell> table;
    for (const auto& [name, hp] : variants) {
        for (int f = 0; f < folds; ++f) {
            auto [train, test] = fold_datasets(ds, plan, f);
            TrainReport report = run_training(train, test, hp);
            AblationCell cell;
            cell.variant = name;
            cell.fold = f;
            cell.mae = report.rounds.back().mae;
            cell.rmse = report.rounds.back().rmse;
            cell.upload_keys = upload_surface(report.clients);
            table.push_back(cell);
        }
    }
    return table;
}

}  // namespace fbalf
