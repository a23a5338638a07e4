// fbalf command-line experiment runner.
//
//   fbalf train --dataset r.csv --out runs/        single run, holdout split
//   fbalf cv --dataset r.csv --folds 5 ...         grid search x k-fold CV
//   fbalf synth --users 50 --items 40 --out f.csv  fixture generator
//   fbalf stats --table cells.json                 loss/win, Wilcoxon, Friedman

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fbalf/experiment.hpp"
#include "fbalf/metrics.hpp"
#include "fbalf/synth.hpp"

namespace {

std::string decode_sep(const std::string& s) {
    if (s == "tab" || s == "\\t") return "\t";
    return s;
}

void add_common(CLI::App* cmd, fbalf::ExperimentConfig& cfg, std::string& sep,
                std::string& mode, bool& no_bias) {
    cmd->add_option("--dataset", cfg.dataset_path, "rating file")->required();
    cmd->add_option("--sep", sep, "field separator: '::', tab or ',' (default)");
    cmd->add_flag("--header", cfg.has_header, "first row is a header");
    cmd->add_option("--min-ratings", cfg.min_ratings, "drop users/items below this degree");
    cmd->add_option("--eta", cfg.eta_grid, "learning rate grid");
    cmd->add_option("--lambda", cfg.lambda_grid, "regularization grid");
    cmd->add_option("--rho", cfg.rho_grid, "filling multiplier grid");
    cmd->add_option("--factors", cfg.factors, "latent dimension f");
    cmd->add_option("--rounds", cfg.rounds, "global rounds T");
    cmd->add_option("--t-hf", cfg.t_hf, "hybrid-filling switch round");
    cmd->add_option("--t-local", cfg.t_local, "local passes per round");
    cmd->add_option("--seed", cfg.seed, "global seed");
    cmd->add_option("--mode", mode, "sequential | parallel")->check(
        CLI::IsMember({"sequential", "parallel"}));
    cmd->add_flag("--no-bias", no_bias, "disable the bias terms");
    cmd->add_option("--patience", cfg.patience, "early-stop patience (0 = off)");
    cmd->add_flag("--ablation", cfg.with_ablation, "also run the no-bias/no-filling variant");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->set_config("--config", "", "INI config file");
}

int finish(fbalf::ExperimentConfig& cfg, const std::string& sep, const std::string& mode,
           bool no_bias) {
    cfg.separator = decode_sep(sep);
    cfg.mode = mode == "parallel" ? fbalf::ScheduleMode::kParallelRound
                                  : fbalf::ScheduleMode::kSequential;
    cfg.bias_enabled = !no_bias;
    fbalf::ExperimentOutcome outcome = fbalf::run_experiment(cfg);
    if (outcome.exit_code == 0) {
        std::printf("completed %d run(s)", outcome.runs_completed);
        if (outcome.runs_diverged > 0) std::printf(" (%d diverged)", outcome.runs_diverged);
        std::printf("; summary: %s\n", outcome.summary_path.c_str());
    }
    return outcome.exit_code;
}

int run_stats(const std::string& table_path) {
    std::ifstream in(table_path);
    if (!in) {
        std::fprintf(stderr, "cannot open %s\n", table_path.c_str());
        return 1;
    }
    nlohmann::json j;
    in >> j;
    // expected shape: {"models": ["a","b"], "cells": [[...],[...]]}
    std::vector<std::string> names = j.at("models").get<std::vector<std::string>>();
    std::vector<std::vector<double>> cells =
        j.at("cells").get<std::vector<std::vector<double>>>();
    if (names.size() != cells.size() || names.empty()) {
        std::fprintf(stderr, "models/cells mismatch\n");
        return 1;
    }

    for (std::size_t v = 1; v < cells.size(); ++v) {
        fbalf::LossWin lw = fbalf::loss_win(cells[0], cells[v], true);
        std::printf("%s vs %s: loss/win %d/%d (ties %d)\n", names[0].c_str(), names[v].c_str(),
                    lw.losses, lw.wins, lw.ties);
        std::vector<std::pair<double, double>> pairs;
        for (std::size_t i = 0; i < cells[0].size(); ++i)
            pairs.push_back({cells[0][i], cells[v][i]});
        auto p = fbalf::wilcoxon_signed_rank(pairs);
        if (p.has_value())
            std::printf("  wilcoxon one-sided p = %.6f\n", *p);
        else
            std::printf("  wilcoxon undefined (all differences zero)\n");
    }
    std::vector<double> ranks = fbalf::friedman_ranks(cells);
    for (std::size_t v = 0; v < names.size(); ++v)
        std::printf("F-rank %s = %.4f\n", names[v].c_str(), ranks[v]);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"federated bias-aware latent factor trainer"};
    app.require_subcommand(1);

    fbalf::ExperimentConfig cfg;
    std::string sep = ",";
    std::string mode = "sequential";
    bool no_bias = false;

    auto* train = app.add_subcommand("train", "single training run (holdout split)");
    add_common(train, cfg, sep, mode, no_bias);
    train->add_option("--train-fraction", cfg.train_fraction, "holdout train fraction");

    auto* cv = app.add_subcommand("cv", "grid search with k-fold cross-validation");
    add_common(cv, cfg, sep, mode, no_bias);
    cv->add_option("--folds", cfg.folds, "fold count")->default_val(5);

    fbalf::SynthSpec spec;
    std::string synth_out = "synthetic.csv";
    auto* synth = app.add_subcommand("synth", "generate a planted-model rating fixture");
    synth->add_option("--users", spec.users);
    synth->add_option("--items", spec.items);
    synth->add_option("--rank", spec.rank);
    synth->add_option("--user-bias-spread", spec.user_bias_spread);
    synth->add_option("--item-bias-spread", spec.item_bias_spread);
    synth->add_option("--noise-sigma", spec.noise_sigma);
    synth->add_option("--density", spec.density);
    synth->add_option("--seed", spec.seed);
    synth->add_option("--out", synth_out, "output CSV path");

    std::string table_path;
    auto* stats = app.add_subcommand("stats", "loss/win, Wilcoxon and Friedman over a table");
    stats->add_option("--table", table_path, "JSON with models + cells matrix")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(train)) {
            cfg.folds = 0;
            return finish(cfg, sep, mode, no_bias);
        }
        if (app.got_subcommand(cv)) {
            if (cfg.folds < 2) {
                std::fprintf(stderr, "config error: cv needs --folds >= 2\n");
                return 1;
            }
            return finish(cfg, sep, mode, no_bias);
        }
        if (app.got_subcommand(synth)) {
            fbalf::RatingDataset ds = fbalf::generate_synthetic(spec);
            fbalf::write_ratings_csv(ds, synth_out);
            std::printf("wrote %zu ratings (%zu users, %zu items) to %s\n", ds.triples.size(),
                        ds.num_users(), ds.num_items(), synth_out.c_str());
            return 0;
        }
        if (app.got_subcommand(stats)) return run_stats(table_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
