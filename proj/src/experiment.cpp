#include "fbalf/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fbalf/metrics.hpp"
#include "fbalf/trainer.hpp"

namespace fbalf {

namespace {

using nlohmann::json;

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

struct GridPoint {
    double eta;
    double lambda;
    int rho;
    std::string tag() const {
        return "eta" + num(eta) + "_lam" + num(lambda) + "_rho" + std::to_string(rho);
    }
};

struct RunResult {
    bool diverged = false;
    std::string error;
    double mae = 0.0;
    double rmse = 0.0;
    int rounds_run = 0;
};

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

json config_echo(const ExperimentConfig& c) {
    json j;
    j["dataset"] = c.dataset_path;
    j["separator"] = c.separator;
    j["has_header"] = c.has_header;
    j["min_ratings"] = c.min_ratings;
    j["folds"] = c.folds;
    j["train_fraction"] = c.train_fraction;
    j["eta_grid"] = c.eta_grid;
    j["lambda_grid"] = c.lambda_grid;
    j["rho_grid"] = c.rho_grid;
    j["factors"] = c.factors;
    j["rounds"] = c.rounds;
    j["t_hf"] = c.t_hf;
    j["t_local"] = c.t_local;
    j["seed"] = c.seed;
    j["bias_enabled"] = c.bias_enabled;
    j["mode"] = c.mode == ScheduleMode::kSequential ? "sequential" : "parallel_round";
    j["patience"] = c.patience;
    j["with_ablation"] = c.with_ablation;
    j["out_dir"] = c.out_dir;
    return j;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (dataset_path.empty()) throw std::invalid_argument("dataset path is required");
    if (!std::filesystem::exists(dataset_path))
        throw std::invalid_argument("dataset not found: " + dataset_path);
    if (eta_grid.empty() || lambda_grid.empty() || rho_grid.empty())
        throw std::invalid_argument("hyperparameter grids must be non-empty");
    if (folds != 0 && folds < 2) throw std::invalid_argument("folds must be 0 or >= 2");
    if (folds == 0 && !(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train fraction must be in (0, 1)");
    if (factors < 1 || rounds < 1 || t_local < 1 || t_hf < 0)
        throw std::invalid_argument("invalid training counts");
}

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
    ExperimentOutcome outcome;
    try {
        config.validate();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        outcome.exit_code = 1;
        return outcome;
    }

    std::filesystem::create_directories(config.out_dir);

    ParseFormat format;
    format.separator = config.separator;
    format.has_header = config.has_header;
    RatingDataset ds = parse_ratings_file(config.dataset_path, format);
    if (config.min_ratings > 0) ds = filter_min_degree(ds, config.min_ratings);
    if (ds.triples.empty()) {
        std::fprintf(stderr, "config error: dataset is empty after filtering\n");
        outcome.exit_code = 1;
        return outcome;
    }

    const int n_folds = config.folds == 0 ? 1 : config.folds;
    SplitPlan plan;
    if (config.folds > 0) plan = make_kfold(ds, config.folds, config.seed);

    std::vector<GridPoint> grid;
    for (double eta : config.eta_grid)
        for (double lambda : config.lambda_grid)
            for (int rho : config.rho_grid) grid.push_back({eta, lambda, rho});

    std::vector<std::pair<std::string, bool>> variants{{"fbalf", true}};
    if (config.with_ablation) variants.push_back({"nobias-nofill", false});

    json summary;
    summary["config"] = config_echo(config);
    summary["dataset_stats"] = {{"users", ds.num_users()},
                                {"items", ds.num_items()},
                                {"ratings", ds.triples.size()},
                                {"density", ds.density()},
                                {"duplicates_dropped", ds.report.duplicates_dropped}};
    summary["note"] =
        "best grid point selected by mean cross-validation test RMSE; "
        "no separate validation split is held out";

    // per variant: per grid point: per fold metrics
    json variants_json = json::array();
    // metric cells per variant for the cross-variant statistics, aligned as
    // fold-major {mae..., rmse...} of each variant's best grid point
    std::vector<std::vector<double>> variant_cells;
    std::vector<std::string> variant_names;

    for (const auto& [variant_name, bias_on] : variants) {
        json vj;
        vj["name"] = variant_name;
        json grid_json = json::array();
        std::string best_tag;
        double best_rmse = std::numeric_limits<double>::infinity();
        std::vector<double> best_cells;

        for (const auto& gp : grid) {
            HyperParams hp;
            hp.factors = config.factors;
            hp.eta = gp.eta;
            hp.lambda = gp.lambda;
            hp.rho = bias_on ? gp.rho : 0;
            hp.rounds = config.rounds;
            hp.t_hf = config.t_hf;
            hp.t_local = config.t_local;
            hp.seed = config.seed;
            hp.bias_enabled = bias_on && config.bias_enabled;
            hp.filling_enabled = bias_on;
            hp.mode = config.mode;
            hp.patience = config.patience;

            json gj;
            gj["eta"] = gp.eta;
            gj["lambda"] = gp.lambda;
            gj["rho"] = hp.rho;
            json folds_json = json::array();
            std::vector<double> maes, rmses;

            for (int f = 0; f < n_folds; ++f) {
                RatingDataset train, test;
                if (config.folds > 0) {
                    std::tie(train, test) = fold_datasets(ds, plan, f);
                } else {
                    std::tie(train, test) = split_holdout(ds, config.train_fraction, config.seed);
                }

                const std::string tag =
                    variant_name + "_" + gp.tag() + "_fold" + std::to_string(f);
                const std::string csv_path =
                    (std::filesystem::path(config.out_dir) / ("rounds_" + tag + ".csv")).string();
                std::ofstream csv(csv_path);
                csv << "round,objective,mae,rmse,seconds\n";

                RunResult rr;
                try {
                    TrainReport report = run_training(
                        train, test, hp,
                        [&](const RoundRecord& rec, const auto&, const auto&) {
                            csv << rec.round << ',' << fmt(rec.objective, 6) << ','
                                << fmt(rec.mae) << ',' << fmt(rec.rmse) << ','
                                << fmt(rec.seconds, 3) << '\n';
                        });
                    rr.mae = report.rounds.back().mae;
                    rr.rmse = report.rounds.back().rmse;
                    rr.rounds_run = report.stopped_round;
                    ++outcome.runs_completed;
                } catch (const DivergenceError& e) {
                    rr.diverged = true;
                    rr.error = e.what();
                    ++outcome.runs_diverged;
                }
                outcome.round_csv_paths.push_back(csv_path);

                json fj;
                fj["fold"] = f;
                fj["diverged"] = rr.diverged;
                if (rr.diverged) {
                    fj["error"] = rr.error;
                } else {
                    fj["mae"] = fmt(rr.mae);
                    fj["rmse"] = fmt(rr.rmse);
                    fj["rounds_run"] = rr.rounds_run;
                    maes.push_back(rr.mae);
                    rmses.push_back(rr.rmse);
                }
                folds_json.push_back(fj);
            }

            gj["folds"] = folds_json;
            if (!maes.empty()) {
                gj["mae_mean"] = fmt(mean(maes));
                gj["mae_std"] = fmt(stddev(maes));
                gj["rmse_mean"] = fmt(mean(rmses));
                gj["rmse_std"] = fmt(stddev(rmses));
                if (mean(rmses) < best_rmse && maes.size() == static_cast<std::size_t>(n_folds)) {
                    best_rmse = mean(rmses);
                    best_tag = gp.tag();
                    best_cells.clear();
                    best_cells.insert(best_cells.end(), maes.begin(), maes.end());
                    best_cells.insert(best_cells.end(), rmses.begin(), rmses.end());
                }
            }
            grid_json.push_back(gj);
        }

        vj["grid"] = grid_json;
        if (!best_tag.empty()) {
            vj["best_grid_point"] = best_tag;
            vj["best_rmse_mean"] = fmt(best_rmse);
            variant_cells.push_back(best_cells);
            variant_names.push_back(variant_name);
        }
        variants_json.push_back(vj);
    }
    summary["variants"] = variants_json;

    if (variant_cells.size() >= 2) {
        json stats;
        const auto& ours = variant_cells[0];
        for (std::size_t v = 1; v < variant_cells.size(); ++v) {
            const auto& theirs = variant_cells[v];
            if (theirs.size() != ours.size()) continue;
            json cmp;
            LossWin lw = loss_win(ours, theirs, true);
            cmp["losses"] = lw.losses;
            cmp["wins"] = lw.wins;
            cmp["ties"] = lw.ties;
            std::vector<std::pair<double, double>> pairs;
            for (std::size_t i = 0; i < ours.size(); ++i) pairs.push_back({ours[i], theirs[i]});
            auto p = wilcoxon_signed_rank(pairs);
            if (p.has_value())
                cmp["wilcoxon_p"] = *p;
            else
                cmp["wilcoxon_p"] = "undefined (all differences zero)";
            stats[variant_names[0] + "_vs_" + variant_names[v]] = cmp;
        }
        std::vector<std::vector<double>> table;
        for (const auto& cells : variant_cells) table.push_back(cells);
        std::vector<double> ranks = friedman_ranks(table);
        json fr;
        for (std::size_t v = 0; v < variant_names.size(); ++v)
            fr[variant_names[v]] = fmt(ranks[v]);
        stats["friedman_mean_rank"] = fr;
        summary["stats"] = stats;
    }

    outcome.summary_path =
        (std::filesystem::path(config.out_dir) / "summary.json").string();
    std::ofstream out(outcome.summary_path);
    out << summary.dump(2) << '\n';

    if (outcome.runs_completed == 0 && outcome.runs_diverged > 0) outcome.exit_code = 2;
    return outcome;
}

}  // namespace fbalf
