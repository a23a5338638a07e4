#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fbalf/experiment.hpp"
#include "fbalf/synth.hpp"

using namespace fbalf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string write_fixture(const fs::path& dir) {
    SynthSpec spec;
    spec.seed = 77;
    spec.user_bias_spread = 1.0;
    RatingDataset ds = generate_synthetic(spec);
    const std::string path = (dir / "fixture.csv").string();
    write_ratings_csv(ds, path);
    return path;
}

std::string file_contents(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ExperimentConfig smoke_config(const fs::path& dir, const std::string& dataset) {
    ExperimentConfig cfg;
    cfg.dataset_path = dataset;
    cfg.folds = 2;
    cfg.eta_grid = {0.01};
    cfg.lambda_grid = {0.06};
    cfg.rho_grid = {1};
    cfg.factors = 8;
    cfg.rounds = 30;
    cfg.t_hf = 10;
    cfg.t_local = 2;
    cfg.seed = 5;
    cfg.out_dir = (dir / "out").string();
    return cfg;
}

}  // namespace

TEST_CASE("smoke config emits two round CSVs and one summary") {
    TempDir tmp("fbalf_exp_smoke");
    ExperimentConfig cfg = smoke_config(tmp.path, write_fixture(tmp.path));
    ExperimentOutcome outcome = run_experiment(cfg);
    CHECK(outcome.exit_code == 0);
    CHECK(outcome.runs_completed == 2);
    CHECK(outcome.round_csv_paths.size() == 2);
    for (const auto& p : outcome.round_csv_paths) {
        CHECK(fs::exists(p));
        std::string contents = file_contents(p);
        CHECK(contents.rfind("round,objective,mae,rmse,seconds", 0) == 0);
        // header + 30 rounds
        CHECK(std::count(contents.begin(), contents.end(), '\n') == 31);
    }
    REQUIRE(fs::exists(outcome.summary_path));
    nlohmann::json summary = nlohmann::json::parse(file_contents(outcome.summary_path));
    CHECK(summary["variants"].size() == 1);
    CHECK(summary["variants"][0]["grid"][0]["folds"].size() == 2);
    CHECK(summary["config"]["seed"] == 5);
    CHECK(summary["variants"][0].contains("best_grid_point"));
}

TEST_CASE("same config twice gives byte-identical summaries") {
    TempDir tmp("fbalf_exp_det");
    const std::string dataset = write_fixture(tmp.path);
    ExperimentConfig cfg = smoke_config(tmp.path, dataset);
    cfg.rounds = 5;
    cfg.out_dir = (tmp.path / "a").string();
    ExperimentOutcome o1 = run_experiment(cfg);
    cfg.out_dir = (tmp.path / "b").string();
    ExperimentOutcome o2 = run_experiment(cfg);
    REQUIRE(o1.exit_code == 0);
    REQUIRE(o2.exit_code == 0);
    std::string s1 = file_contents(o1.summary_path);
    std::string s2 = file_contents(o2.summary_path);
    // the config echo carries the differing out_dir; normalize it away
    const std::string a = (tmp.path / "a").string(), b = (tmp.path / "b").string();
    std::size_t pos;
    while ((pos = s2.find(b)) != std::string::npos) s2.replace(pos, b.size(), a);
    CHECK(s1 == s2);
}

TEST_CASE("ablation variant adds cross-variant statistics") {
    TempDir tmp("fbalf_exp_abl");
    ExperimentConfig cfg = smoke_config(tmp.path, write_fixture(tmp.path));
    cfg.rounds = 40;
    cfg.with_ablation = true;
    ExperimentOutcome outcome = run_experiment(cfg);
    REQUIRE(outcome.exit_code == 0);
    nlohmann::json summary = nlohmann::json::parse(file_contents(outcome.summary_path));
    REQUIRE(summary.contains("stats"));
    CHECK(summary["stats"].contains("fbalf_vs_nobias-nofill"));
    CHECK(summary["stats"].contains("friedman_mean_rank"));
}

TEST_CASE("invalid config exits with code 1") {
    ExperimentConfig cfg;
    cfg.dataset_path = "/nonexistent/ratings.csv";
    ExperimentOutcome outcome = run_experiment(cfg);
    CHECK(outcome.exit_code == 1);
}

TEST_CASE("grid sizing multiplies out") {
    ExperimentConfig cfg;
    cfg.eta_grid = {0.001, 0.002, 0.003};
    cfg.lambda_grid = {0.02, 0.04, 0.06, 0.08, 0.1};
    cfg.rho_grid = {0, 1, 2, 3};
    CHECK(cfg.eta_grid.size() * cfg.lambda_grid.size() * cfg.rho_grid.size() == 60);
}
