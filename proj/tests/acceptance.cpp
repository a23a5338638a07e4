// Acceptance suite: one pass/fail line per criterion. Exit code is the number
// of failed criteria (skipped criteria do not fail).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "fbalf/client.hpp"
#include "fbalf/data.hpp"
#include "fbalf/metrics.hpp"
#include "fbalf/synth.hpp"
#include "fbalf/trainer.hpp"

using namespace fbalf;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name.c_str());
    if (!ok) ++g_failures;
}

void report_skip(const std::string& name, const std::string& why) {
    std::printf("[SKIP] %s (%s)\n", name.c_str(), why.c_str());
}

double rel_err(double got, double want) {
    const double scale = std::max({std::abs(got), std::abs(want), 1e-8});
    return std::abs(got - want) / scale;
}

// Criterion 1: 100 random f=20 instances, every analytic partial of the
// element loss within 1e-5 relative of central finite differences.
void criterion_gradient_oracle() {
    const int f = 20;
    const double h = 1e-6;
    Rng rng(20240601);
    bool ok = true;
    for (int trial = 0; trial < 100 && ok; ++trial) {
        const double lambda = trial % 2 ? 0.06 : 0.0;
        FactorVector c(f), s(f);
        for (int k = 0; k < f; ++k) {
            c(k) = rng.uniform(-1.0, 1.0);
            s(k) = rng.uniform(-1.0, 1.0);
        }
        const double a = rng.uniform(-1.0, 1.0);
        const double b = rng.uniform(-1.0, 1.0);
        const double target = rng.uniform(1.0, 5.0);

        const double delta = residual(target, predict(c, a, s, b));
        UserGradients ug = user_side_gradients(delta, c, a, s, lambda, 1.0);
        ItemGradients ig = item_side_gradients(delta, s, b, c, lambda, 1.0);

        auto loss = [&](const FactorVector& cc, double aa, const FactorVector& ss, double bb) {
            return element_loss(target, cc, aa, ss, bb, lambda);
        };
        for (int k = 0; k < f && ok; ++k) {
            FactorVector cp = c, cm = c, sp = s, sm = s;
            cp(k) += h;
            cm(k) -= h;
            sp(k) += h;
            sm(k) -= h;
            ok = ok && rel_err(ug.factors(k),
                               (loss(cp, a, s, b) - loss(cm, a, s, b)) / (2 * h)) < 1e-5;
            ok = ok && rel_err(ig.factors(k),
                               (loss(c, a, sp, b) - loss(c, a, sm, b)) / (2 * h)) < 1e-5;
        }
        ok = ok && rel_err(ug.bias, (loss(c, a + h, s, b) - loss(c, a - h, s, b)) / (2 * h)) < 1e-5;
        ok = ok && rel_err(ig.bias, (loss(c, a, s, b + h) - loss(c, a, s, b - h)) / (2 * h)) < 1e-5;
    }
    report("1. gradient oracle: analytic vs central finite differences (100 instances)", ok);
}

// Criterion 2: federated == centralized, rho=0, sequential, T_local in {1,10},
// 5 rounds, bit-identical trajectories.
void criterion_equivalence() {
    RatingDataset ds = standard_fixture();
    auto [train, test] = split_holdout(ds, 0.8, 42);
    bool ok = true;
    for (int t_local : {1, 10}) {
        HyperParams hp;
        hp.factors = 8;
        hp.eta = 0.002;
        hp.lambda = 0.06;
        hp.rho = 0;
        hp.filling_enabled = false;
        hp.rounds = 5;
        hp.t_local = t_local;
        hp.seed = 1234;

        std::vector<std::pair<std::vector<ClientState>, ServerState>> fed;
        run_training(train, test, hp,
                     [&](const RoundRecord&, const std::vector<ClientState>& clients,
                         const ServerState& server) { fed.push_back({clients, server}); });
        std::vector<CentralizedModel> oracle;
        centralized_oracle(train, hp,
                           [&](int, const CentralizedModel& m) { oracle.push_back(m); });

        ok = ok && fed.size() == oracle.size();
        for (std::size_t r = 0; ok && r < fed.size(); ++r) {
            const auto& [clients, server] = fed[r];
            const auto& m = oracle[r];
            for (std::size_t u = 0; ok && u < clients.size(); ++u) {
                ok = (clients[u].factors -
                      m.user_factors.row(static_cast<Eigen::Index>(u)).transpose())
                             .norm() == 0.0 &&
                     clients[u].bias == m.user_bias(static_cast<Eigen::Index>(u));
            }
            ok = ok && (server.item_factors - m.item_factors).norm() == 0.0 &&
                 (server.item_bias - m.item_bias).norm() == 0.0;
        }
    }
    report("2. federated == centralized trajectories (rho=0, sequential, T_local in {1,10})", ok);
}

// Criterion 3: hybrid-filling contract on a 20-user fixture, rho in {1,2,3}.
void criterion_hybrid_filling() {
    SynthSpec spec;
    spec.users = 20;
    spec.items = 30;
    spec.density = 0.3;
    spec.user_bias_spread = 0.5;
    spec.seed = 3030;
    RatingDataset ds = generate_synthetic(spec);

    bool ok = true;
    for (int rho : {1, 2, 3}) {
        HyperParams hp;
        hp.factors = 4;
        hp.eta = 0.005;
        hp.lambda = 0.06;
        hp.rho = rho;
        hp.rounds = 1;
        hp.t_hf = 10;
        hp.t_local = 1;
        hp.seed = 99 + static_cast<std::uint64_t>(rho);

        ServerState server = init_server(static_cast<Eigen::Index>(ds.num_items()), hp);
        for (std::size_t u = 0; u < ds.num_users() && ok; ++u) {
            std::vector<RatedItem> ratings;
            for (std::size_t idx : ds.user_triples[u])
                ratings.push_back({ds.triples[idx].item, ds.triples[idx].rating});
            if (ratings.empty()) continue;
            ClientState client =
                init_client(static_cast<int>(u), ratings, hp, static_cast<int>(ds.num_items()));

            // filling size
            const std::size_t expected_fill =
                std::min(static_cast<std::size_t>(rho) * client.rated.size(),
                         ds.num_items() - client.rated.size());
            ok = ok && client.synthetic.size() == expected_fill;

            // upload key set = I_u union I_hat_u, for an early and a late round
            for (int t : {1, 10, 11}) {
                ClientState copy = client;
                ServerSnapshot snap = snapshot(server, copy.item_keys());
                GradientUpload up = local_train_round(copy, snap, t, hp, ds.r_min, ds.r_max);
                std::set<int> keys;
                for (const auto& e : up.entries) keys.insert(e.item);
                std::set<int> expected;
                for (const auto& r : copy.rated) expected.insert(r.item);
                for (int i : copy.synthetic) expected.insert(i);
                ok = ok && keys == expected;
            }

            // synthetic target schedule, boundary t = T_HF included
            ServerSnapshot snap = snapshot(server, client.item_keys());
            for (int i : client.synthetic) {
                ok = ok && synthetic_rating(client, i, 1, snap, hp, ds.r_min, ds.r_max) ==
                               client.user_mean;
                ok = ok && synthetic_rating(client, i, 10, snap, hp, ds.r_min, ds.r_max) ==
                               client.user_mean;
                const double expect_pred =
                    clamp(predict(client.factors, client.bias, snap.item_factors(i),
                                  snap.item_bias(i)),
                          ds.r_min, ds.r_max);
                ok = ok && synthetic_rating(client, i, 11, snap, hp, ds.r_min, ds.r_max) ==
                               expect_pred;
            }
        }
    }
    report("3. hybrid-filling contract: key sets, |I_hat| rule, schedule boundary t <= T_HF", ok);
}

// Criterion 4: bias on beats bias off on the planted-offset fixture after
// T=100 rounds, for 3 independent seeds.
void criterion_bias_ablation() {
    bool ok = true;
    for (std::uint64_t seed : {11u, 22u, 33u}) {
        SynthSpec spec;
        spec.users = 50;
        spec.items = 40;
        spec.rank = 3;
        spec.user_bias_spread = 1.0;
        spec.item_bias_spread = 0.0;
        spec.noise_sigma = 0.1;
        spec.density = 0.3;
        spec.seed = 1000 + seed;
        RatingDataset ds = generate_synthetic(spec);
        auto [train, test] = split_holdout(ds, 0.8, seed);

        HyperParams hp;
        hp.factors = 8;
        hp.eta = 0.001;
        hp.lambda = 0.06;
        hp.rho = 0;
        hp.filling_enabled = false;
        hp.rounds = 100;
        hp.t_local = 1;
        hp.seed = seed;

        TrainReport with_bias = run_training(train, test, hp);
        HyperParams hp_off = hp;
        hp_off.bias_enabled = false;
        TrainReport without_bias = run_training(train, test, hp_off);
        ok = ok && with_bias.rounds.back().rmse < without_bias.rounds.back().rmse;
    }
    report("4. bias ablation: bias-on RMSE < bias-off after T=100, 3 seeds", ok);
}

// Criterion 5: six uniform wins -> Wilcoxon p = 0.015625, Friedman rank 1.0000.
void criterion_statistics() {
    std::vector<double> ours{0.6639, 0.8442, 0.7021, 0.8811, 0.6522, 0.8305};
    std::vector<double> theirs{0.6830, 0.8625, 0.7233, 0.9043, 0.6711, 0.8522};
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < 6; ++i) pairs.push_back({ours[i], theirs[i]});
    auto p = wilcoxon_signed_rank(pairs);
    bool ok = p.has_value() && *p == 0.015625;
    std::vector<double> ranks = friedman_ranks({ours, theirs});
    ok = ok && std::abs(ranks[0] - 1.0) == 0.0 && std::abs(ranks[1] - 2.0) == 0.0;
    LossWin lw = loss_win(ours, theirs, true);
    ok = ok && lw.losses == 0 && lw.wins == 6;
    report("5. statistics: 6 uniform wins -> p = 0.015625, F-rank 1.0000, loss/win 0/6", ok);
}

// Criterion 6: ML1M bookkeeping, skipped when the raw file is absent.
void criterion_ml1m() {
    const char* env = std::getenv("FBALF_ML1M");
    std::vector<std::string> candidates;
    if (env) candidates.push_back(env);
    candidates.push_back("data/ml-1m/ratings.dat");
    candidates.push_back("../data/ml-1m/ratings.dat");
    std::string path;
    for (const auto& c : candidates)
        if (std::filesystem::exists(c)) {
            path = c;
            break;
        }
    if (path.empty()) {
        report_skip("6. ML1M bookkeeping: |U|=6040, |I|=3706, |R|=1000209, density 4.47%",
                    "raw file not found; set FBALF_ML1M or place data/ml-1m/ratings.dat");
        return;
    }
    ParseFormat fmt;
    fmt.separator = "::";
    RatingDataset ds = parse_ratings_file(path, fmt);
    bool ok = ds.num_users() == 6040 && ds.num_items() == 3706 && ds.triples.size() == 1000209;
    ok = ok && std::abs(ds.density() * 100.0 - 4.47) <= 0.01;
    report("6. ML1M bookkeeping: |U|=6040, |I|=3706, |R|=1000209, density 4.47%", ok);
}

// Criterion 7: Table-style headline on ML1M (hours of compute). Run only on
// request; otherwise the mandatory substitutes run: MAE <= RMSE invariant and
// the objective-decrease check on the fixture.
void criterion_headline() {
    const char* env = std::getenv("FBALF_ML1M");
    const char* release = std::getenv("FBALF_RELEASE_GATE");
    if (!(env && release && std::filesystem::exists(env))) {
        report_skip("7. ML1M headline: 5-fold mean MAE <= 0.68, RMSE <= 0.86",
                    "release gate; set FBALF_ML1M and FBALF_RELEASE_GATE to run");

        // mandatory substitute checks
        RatingDataset ds = standard_fixture();
        auto [train, test] = split_holdout(ds, 0.8, 42);
        HyperParams hp;
        hp.factors = 8;
        hp.eta = 0.002;
        hp.lambda = 0.06;
        hp.rho = 0;
        hp.filling_enabled = false;
        hp.rounds = 20;
        hp.t_local = 2;
        hp.seed = 100;
        TrainReport report_run = run_training(train, test, hp);
        bool mae_le_rmse = true;
        for (const auto& rec : report_run.rounds) mae_le_rmse = mae_le_rmse && rec.mae <= rec.rmse;
        report("7a. substitute: MAE <= RMSE on every evaluated round", mae_le_rmse);
        report("7b. substitute: objective at round 20 < 50% of round 1",
               report_run.rounds[19].objective < 0.5 * report_run.rounds[0].objective);
        return;
    }

    ParseFormat fmt;
    fmt.separator = "::";
    RatingDataset ds = parse_ratings_file(env, fmt);
    ds = filter_min_degree(ds, 10);
    SplitPlan plan = make_kfold(ds, 5, 42);
    double mae_sum = 0.0, rmse_sum = 0.0;
    for (int f = 0; f < 5; ++f) {
        auto [train, test] = fold_datasets(ds, plan, f);
        HyperParams hp;  // grid-tuned values
        hp.factors = 20;
        hp.eta = 0.002;
        hp.lambda = 0.06;
        hp.rho = 1;
        hp.rounds = 300;
        hp.t_hf = 10;
        hp.t_local = 10;
        hp.seed = 42;
        TrainReport rep = run_training(train, test, hp);
        mae_sum += rep.rounds.back().mae;
        rmse_sum += rep.rounds.back().rmse;
    }
    report("7. ML1M headline: 5-fold mean MAE <= 0.68, RMSE <= 0.86",
           mae_sum / 5.0 <= 0.68 && rmse_sum / 5.0 <= 0.86);
}

}  // namespace

int main() {
    criterion_gradient_oracle();
    criterion_equivalence();
    criterion_hybrid_filling();
    criterion_bias_ablation();
    criterion_statistics();
    criterion_ml1m();
    criterion_headline();
    if (g_failures == 0)
        std::printf("all acceptance criteria passed\n");
    else
        std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures;
}
