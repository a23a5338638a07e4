#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fbalf/data.hpp"
#include "fbalf/model.hpp"

namespace fbalf {

struct ExperimentConfig {
    std::string dataset_path;
    std::string separator = ",";
    bool has_header = false;
    std::size_t min_ratings = 0;

    int folds = 0;                // 0 -> holdout split
    double train_fraction = 0.8;

    std::vector<double> eta_grid{0.002};
    std::vector<double> lambda_grid{0.06};
    std::vector<int> rho_grid{1};
    int factors = 20;
    int rounds = 300;
    int t_hf = 10;
    int t_local = 10;
    std::uint64_t seed = 42;
    bool bias_enabled = true;
    ScheduleMode mode = ScheduleMode::kSequential;
    int patience = 0;

    /// Also run the bias-off / filling-off ablation variant alongside the
    /// main one and compare the two in the summary.
    bool with_ablation = false;

    std::string out_dir = ".";

    void validate() const;
};

struct ExperimentOutcome {
    int exit_code = 0;  // 0 ok, 1 config error, 2 all runs diverged
    std::string summary_path;
    std::vector<std::string> round_csv_paths;
    int runs_completed = 0;
    int runs_diverged = 0;
};

/// Runs fold x grid-point x variant, writes rounds_<tag>.csv per run and a
/// summary.json with per-fold metrics, grid means, the best grid point and
/// cross-variant statistics.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

}  // namespace fbalf
