// Command-line front end: simulate, train, grid-search, calibrate-floor,
// eval and curve.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "acd/errors.hpp"
#include "acd/harness.hpp"

using namespace acd;

namespace {

EnvConfig load_env_config(const std::string& path) {
    if (path.empty()) return EnvConfig{};
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open env config " + path);
    auto j = nlohmann::json::parse(in);
    // A full run config is accepted too.
    if (j.contains("env")) j = j.at("env");
    return j.get<EnvConfig>();
}

int cmd_simulate(const std::string& env_path, std::uint64_t seed, std::size_t episodes, const std::string& blue,
                 int fixed_action, const std::string& model_path, const std::string& csv_path) {
    Env env(load_env_config(env_path), seed);
    std::optional<ModelFile> model;
    if (blue == "model") {
        if (model_path.empty()) throw ConfigError("--blue model requires --model");
        model = load_model(model_path);
        check_model_compatible(*model, feature_layout_fingerprint(env.state()), action_encoding_fingerprint(env.state()));
    }
    if (blue == "fixed" && (fixed_action < 0 || static_cast<std::size_t>(fixed_action) >= env.action_count()))
        throw ConfigError("--action must lie in [0, " + std::to_string(env.action_count()) + ")");

    std::ofstream file;
    if (!csv_path.empty()) {
        file.open(csv_path, std::ios::binary);
        if (!file) throw std::runtime_error("cannot write " + csv_path);
    }
    std::ostream& out = csv_path.empty() ? std::cout : file;
    TraceWriter trace(out);
    Rng rng(seed ^ 0x5bd1e995ULL);
    std::uniform_int_distribution<std::size_t> pick(0, env.action_count() - 1);

    for (std::size_t ep = 0; ep < episodes; ++ep) {
        auto obs = env.reset();
        while (!env.done()) {
            std::size_t a = 0;
            if (blue == "random") {
                a = pick(rng);
            } else if (blue == "fixed") {
                a = static_cast<std::size_t>(fixed_action);
            } else {
                const auto& net = model->networks.at(model->algorithm == "ppo" ? "actor" : "q");
                a = argmax(net.forward(obs));
            }
            const auto r = env.step(a);
            trace.write(r, env.state());
            obs = r.observation;
        }
    }
    return 0;
}

int cmd_train(const std::string& algo, const std::string& config_path, std::uint64_t seed,
              std::optional<std::size_t> episodes, const std::string& out_dir) {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (!algo.empty()) cfg.algorithm = algorithm_from_string(algo);
    if (episodes) cfg.episodes = *episodes;
    cfg.output_dir = out_dir;
    cfg.validate();
    const auto m = train_run(cfg, seed);
    std::printf("algorithm=%s seed=%llu episodes=%zu steps=%zu mean_last_%zu=%.6f\n",
                std::string(to_string(cfg.algorithm)).c_str(), static_cast<unsigned long long>(seed),
                m.norm_returns.size(), m.env_steps, kMetricWindow, m.final_metric());
    return 0;
}

int cmd_grid(const std::string& algo, const std::string& grid_path, bool builtin_grid, const std::string& config_path,
             std::size_t seeds, std::uint64_t base_seed, std::optional<std::size_t> samples,
             std::optional<std::size_t> episodes, const std::string& out_dir) {
    RunConfig base = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    base.algorithm = algorithm_from_string(algo);
    if (episodes) base.episodes = *episodes;

    GridSpec grid;
    if (builtin_grid) {
        if (base.algorithm == Algorithm::Ppo) {
            grid = GridSpec::builtin_ppo();
            if (config_path.empty()) base.ppo = PpoConfig::original();
        } else if (base.algorithm == Algorithm::Dqn) {
            grid = GridSpec::builtin_dqn();
        } else {
            throw ConfigError("no built-in grid for the random baseline");
        }
    } else {
        if (grid_path.empty()) throw ConfigError("grid-search needs --grid FILE or --builtin-grid");
        grid = GridSpec::load(grid_path);
    }

    GridOptions opts;
    opts.seeds = seeds;
    opts.base_seed = base_seed;
    opts.workers = workers_from_env();
    opts.random_samples = samples;
    const auto result = grid_search(grid, base, opts);
    write_grid_results(result, grid, out_dir);
    std::printf("cells=%zu runs=%zu workers=%zu\n", result.rows.size(), result.runs_performed, opts.workers);
    if (!result.rows.empty() && !result.rows.front().error)
        std::printf("best %s mean_reward=%.6f\n", result.rows.front().params.dump().c_str(),
                    result.rows.front().aggregate);
    return 0;
}

int cmd_calibrate(const std::string& env_path, std::size_t timesteps, std::uint64_t seed) {
    const auto cfg = load_env_config(env_path);
    const auto t0 = std::chrono::steady_clock::now();
    const auto cal = run_floor_calibration(cfg, timesteps, seed);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::size_t inside = 0;
    for (double r : cal.raw_rewards) {
        const double n = normalize_reward(r, cal.floor);
        if (n >= -2.5 - 1e-12 && n <= 2.5 + 1e-12) ++inside;
    }
    std::printf("floor=%.6f\n", cal.floor);
    std::printf("timesteps=%zu within_range=%.6f seconds=%.3f\n", cal.raw_rewards.size(),
                cal.raw_rewards.empty() ? 0.0 : static_cast<double>(inside) / cal.raw_rewards.size(), secs);
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& env_path, std::size_t episodes, std::uint64_t seed) {
    const auto model = load_model(model_path);
    const auto m = evaluate_model(model, load_env_config(env_path), episodes, seed);
    double raw = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < m.raw_returns.size(); ++i) {
        raw += m.raw_returns[i];
        norm += m.norm_returns[i];
    }
    const double n = static_cast<double>(episodes);
    std::printf("episodes=%zu mean_raw_return=%.6f mean_norm_return=%.6f\n", episodes, raw / n, norm / n);
    return 0;
}

int cmd_curve(const std::string& runs_dir, const std::string& out, const std::string& scale) {
    if (scale != "raw" && scale != "normalized") throw ConfigError("--scale must be raw or normalized");
    const auto runs = load_runs(runs_dir);
    emit_learning_curve(runs, out, scale == "raw" ? CurveScale::Raw : CurveScale::Normalized);
    std::printf("runs=%zu episodes=%zu\n", runs.size(), runs.empty() ? 0 : runs.front().norm_returns.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Autonomous cyber defense simulator and training harness"};
    app.require_subcommand(1);

    std::string env_path;
    std::uint64_t seed = 0;

    auto* sim = app.add_subcommand("simulate", "Scripted rollout, CSV step trace");
    std::size_t sim_episodes = 1;
    std::string blue = "random", sim_model, sim_csv;
    int fixed_action = 0;
    sim->add_option("--env", env_path, "Environment config JSON");
    sim->add_option("--seed", seed);
    sim->add_option("--episodes", sim_episodes)->check(CLI::PositiveNumber);
    sim->add_option("--blue", blue, "Blue policy")->check(CLI::IsMember({"random", "fixed", "model"}));
    sim->add_option("--action", fixed_action, "Action index for --blue fixed");
    sim->add_option("--model", sim_model, "Model JSON for --blue model");
    sim->add_option("--csv", sim_csv, "Write the trace here instead of stdout");

    auto* train = app.add_subcommand("train", "Train one seeded run");
    std::string algo, config_path, out_dir;
    std::optional<std::size_t> episodes;
    train->add_option("--algo", algo)->check(CLI::IsMember({"ppo", "dqn", "random"}));
    train->add_option("--config", config_path, "Run config JSON");
    train->add_option("--seed", seed);
    train->add_option("--episodes", episodes);
    train->add_option("--out", out_dir)->required();

    auto* grid = app.add_subcommand("grid-search", "Hyperparameter grid over seeded runs");
    std::string grid_path;
    bool builtin_grid = false;
    std::size_t seeds = 5;
    std::optional<std::size_t> samples;
    grid->add_option("--algo", algo)->required()->check(CLI::IsMember({"ppo", "dqn"}));
    grid->add_option("--grid", grid_path, "Grid JSON: {name: [values...]}");
    grid->add_flag("--builtin-grid", builtin_grid, "Use the built-in grid for --algo");
    grid->add_option("--config", config_path, "Base run config JSON");
    grid->add_option("--seeds", seeds)->check(CLI::PositiveNumber);
    grid->add_option("--seed", seed, "First seed");
    grid->add_option("--episodes", episodes);
    grid->add_option("--random-samples", samples, "Evaluate this many random cells");
    grid->add_option("--out", out_dir)->required();

    auto* cal = app.add_subcommand("calibrate-floor", "Estimate the reward floor under a random blue policy");
    std::size_t timesteps = 100000;
    cal->add_option("--env", env_path);
    cal->add_option("--timesteps", timesteps)->check(CLI::PositiveNumber);
    cal->add_option("--seed", seed);

    auto* ev = app.add_subcommand("eval", "Greedy rollouts of a saved model");
    std::string model_path;
    std::size_t eval_episodes = 10;
    ev->add_option("--model", model_path)->required();
    ev->add_option("--env", env_path);
    ev->add_option("--episodes", eval_episodes)->check(CLI::PositiveNumber);
    ev->add_option("--seed", seed);

    auto* curve = app.add_subcommand("curve", "Mean and standard-error learning curve across runs");
    std::string runs_dir, curve_out, scale = "normalized";
    curve->add_option("--runs", runs_dir)->required();
    curve->add_option("--out", curve_out)->required();
    curve->add_option("--scale", scale)->check(CLI::IsMember({"raw", "normalized"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) return cmd_simulate(env_path, seed, sim_episodes, blue, fixed_action, sim_model, sim_csv);
        if (*train) return cmd_train(algo, config_path, seed, episodes, out_dir);
        if (*grid)
            return cmd_grid(algo, grid_path, builtin_grid, config_path, seeds, seed, samples, episodes, out_dir);
        if (*cal) return cmd_calibrate(env_path, timesteps, seed);
        if (*ev) return cmd_eval(model_path, env_path, eval_episodes, seed);
        if (*curve) return cmd_curve(runs_dir, curve_out, scale);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
