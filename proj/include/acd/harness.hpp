#pragma once

// Experiment driver: seeded training runs, grid search, the mean-last-10
// metric and learning-curve export.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "acd/dqn.hpp"
#include "acd/env.hpp"
#include "acd/ppo.hpp"

namespace acd {

inline constexpr std::size_t kMetricWindow = 10;

enum class Algorithm { Ppo, Dqn, Random };
Algorithm algorithm_from_string(std::string_view name);
std::string_view to_string(Algorithm a);

struct RunConfig {
    Algorithm algorithm = Algorithm::Ppo;
    EnvConfig env;
    PpoConfig ppo = PpoConfig::optimized();
    DqnConfig dqn = DqnConfig::best_grid_preset();
    std::size_t episodes = 150;
    std::size_t seeds = 5;
    std::optional<std::filesystem::path> output_dir;

    void validate() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);
RunConfig load_run_config(const std::filesystem::path& path);

struct Metrics {
    std::uint64_t seed = 0;
    std::vector<double> raw_returns;
    std::vector<double> norm_returns;
    std::size_t env_steps = 0;

    // Mean normalized return over the final kMetricWindow episodes.
    double final_metric() const;
};

double last_window_mean(const std::vector<double>& returns, std::size_t window = kMetricWindow);
// Mean over runs of each run's final-window mean (normalized returns).
double summarize(const std::vector<Metrics>& runs);
// Ordinary least-squares slope of return against episode index.
double episode_trend(const std::vector<double>& returns);

// Full training loop. Writes run_seed<N>.csv and model_seed<N>.json into
// config.output_dir when one is set.
Metrics train_run(const RunConfig& config, std::uint64_t seed);

std::string metrics_csv(const Metrics& m);
void write_metrics_csv(const Metrics& m, const std::filesystem::path& path);
Metrics read_metrics_csv(const std::filesystem::path& path);

enum class CurveScale { Raw, Normalized };
void emit_learning_curve(const std::vector<Metrics>& runs, const std::filesystem::path& path,
                         CurveScale scale = CurveScale::Normalized);
std::vector<Metrics> load_runs(const std::filesystem::path& dir);

// --- grid search -----------------------------------------------------------

struct GridSpec {
    std::vector<std::pair<std::string, std::vector<nlohmann::json>>> params;

    std::size_t size() const;
    // Mixed-radix decode, first parameter varying slowest.
    nlohmann::ordered_json combination(std::size_t index) const;

    static GridSpec from_json(const nlohmann::ordered_json& j);
    static GridSpec load(const std::filesystem::path& path);
    static GridSpec builtin_ppo();
    static GridSpec builtin_dqn();
};

// Applies name=value pairs onto the algorithm section of `base`.
RunConfig apply_combination(const RunConfig& base, const nlohmann::ordered_json& combo);

struct GridRow {
    std::size_t cell = 0;
    nlohmann::ordered_json params;
    std::vector<double> run_metrics;  // one per seed
    double aggregate = 0.0;
    std::optional<std::string> error;
};

struct GridResult {
    std::vector<GridRow> rows;  // ranked: aggregate descending, failures last
    std::size_t runs_performed = 0;
};

struct GridOptions {
    std::size_t seeds = 5;
    std::uint64_t base_seed = 0;
    std::size_t workers = 1;
    // Evaluate a uniform sample of this many distinct cells instead of all.
    std::optional<std::size_t> random_samples;
};

GridResult grid_search(const GridSpec& grid, const RunConfig& base, const GridOptions& options);
void write_grid_results(const GridResult& result, const GridSpec& grid, const std::filesystem::path& dir);

std::size_t workers_from_env(const char* var = "ACD_WORKERS");

// --- evaluation ------------------------------------------------------------

// Greedy rollout of a persisted model.
Metrics evaluate_model(const ModelFile& model, const EnvConfig& env_config, std::size_t episodes,
                       std::uint64_t seed);

}  // namespace acd
