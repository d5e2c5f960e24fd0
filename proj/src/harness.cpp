#include "acd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "acd/errors.hpp"

namespace acd {

Algorithm algorithm_from_string(std::string_view name) {
    if (name == "ppo") return Algorithm::Ppo;
    if (name == "dqn") return Algorithm::Dqn;
    if (name == "random") return Algorithm::Random;
    throw ConfigError("unknown algorithm '" + std::string(name) + "' (expected ppo|dqn|random)");
}

std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Ppo: return "ppo";
        case Algorithm::Dqn: return "dqn";
        case Algorithm::Random: return "random";
    }
    return "?";
}

void RunConfig::validate() const {
    if (episodes < kMetricWindow)
        throw ConfigError("episodes must be >= " + std::to_string(kMetricWindow) + " for the final-window metric");
    if (seeds == 0) throw ConfigError("seeds must be >= 1");
    env.validate();
    ppo.validate();
    dqn.validate();
}

void to_json(nlohmann::json& j, const RunConfig& c) {
    j = {{"algorithm", std::string(to_string(c.algorithm))},
         {"episodes", c.episodes},
         {"seeds", c.seeds},
         {"env", c.env},
         {"ppo", c.ppo},
         {"dqn", c.dqn}};
    if (c.output_dir) j["output_dir"] = c.output_dir->string();
}

void from_json(const nlohmann::json& j, RunConfig& c) {
    c = RunConfig{};
    c.algorithm = algorithm_from_string(j.value("algorithm", std::string("ppo")));
    c.episodes = j.value("episodes", c.episodes);
    c.seeds = j.value("seeds", c.seeds);
    if (j.contains("env")) c.env = j.at("env").get<EnvConfig>();
    if (j.contains("ppo")) c.ppo = j.at("ppo").get<PpoConfig>();
    if (j.contains("dqn")) c.dqn = j.at("dqn").get<DqnConfig>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    c.validate();
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    try {
        return nlohmann::json::parse(in).get<RunConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid config file " + path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Metrics

double last_window_mean(const std::vector<double>& returns, std::size_t window) {
    if (returns.size() < window)
        throw InputError("need at least " + std::to_string(window) + " episodes, got " + std::to_string(returns.size()));
    return std::accumulate(returns.end() - static_cast<std::ptrdiff_t>(window), returns.end(), 0.0) /
           static_cast<double>(window);
}

double Metrics::final_metric() const { return last_window_mean(norm_returns); }

double summarize(const std::vector<Metrics>& runs) {
    if (runs.empty()) throw InputError("summarize needs at least one run");
    double sum = 0.0;
    for (const auto& r : runs) sum += r.final_metric();
    return sum / static_cast<double>(runs.size());
}

double episode_trend(const std::vector<double>& returns) {
    const std::size_t n = returns.size();
    if (n < 2) return 0.0;
    const double mean_x = (static_cast<double>(n) - 1.0) / 2.0;
    const double mean_y = std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = static_cast<double>(i) - mean_x;
        sxy += dx * (returns[i] - mean_y);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 step
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct EpisodeTotals {
    double raw = 0.0;
    double norm = 0.0;
    std::size_t steps = 0;
};

template <typename Policy>
EpisodeTotals run_episode(Env& env, Policy&& policy) {
    EpisodeTotals t;
    auto obs = env.reset();
    while (!env.done()) {
        const auto r = policy(obs, env);
        t.raw += r.raw_reward;
        t.norm += r.normalized_reward;
        ++t.steps;
        obs = r.observation;
    }
    return t;
}

}  // namespace

Metrics train_run(const RunConfig& config, std::uint64_t seed) {
    config.validate();
    Env env(config.env, seed);
    Rng agent_rng(derive_seed(seed, 1));
    Metrics m;
    m.seed = seed;

    ModelFile model;
    model.algorithm = std::string(to_string(config.algorithm));
    model.feature_layout = feature_layout_fingerprint(env.state());
    model.action_encoding = action_encoding_fingerprint(env.state());

    auto record = [&](const EpisodeTotals& t) {
        m.raw_returns.push_back(t.raw);
        m.norm_returns.push_back(t.norm);
        m.env_steps += t.steps;
    };

    switch (config.algorithm) {
        case Algorithm::Ppo: {
            PpoAgent agent(env.observation_size(), env.action_count(), config.ppo, agent_rng);
            for (std::size_t ep = 0; ep < config.episodes; ++ep) {
                record(run_episode(env, [&](const FeatureVector& obs, Env& e) {
                    const auto s = agent.act(obs, agent_rng);
                    auto r = e.step(s.action);
                    agent.observe(obs, s, r.reward, r.done, r.observation, agent_rng);
                    return r;
                }));
            }
            model.networks["actor"] = agent.actor();
            model.networks["critic"] = agent.critic();
            model.metadata["ppo"] = agent.config();
            break;
        }
        case Algorithm::Dqn: {
            DqnAgent agent(env.observation_size(), env.action_count(), config.dqn, agent_rng);
            for (std::size_t ep = 0; ep < config.episodes; ++ep) {
                record(run_episode(env, [&](const FeatureVector& obs, Env& e) {
                    const auto a = agent.act(obs, agent_rng);
                    auto r = e.step(a);
                    agent.observe({obs, a, r.reward, r.observation, r.done}, agent_rng);
                    return r;
                }));
                agent.end_episode();
            }
            model.networks["q"] = agent.network();
            model.metadata["dqn"] = agent.config();
            model.metadata["final_epsilon"] = agent.epsilon();
            break;
        }
        case Algorithm::Random: {
            std::uniform_int_distribution<std::size_t> pick(0, env.action_count() - 1);
            for (std::size_t ep = 0; ep < config.episodes; ++ep)
                record(run_episode(env, [&](const FeatureVector&, Env& e) { return e.step(pick(agent_rng)); }));
            break;
        }
    }

    if (config.output_dir) {
        std::error_code ec;
        std::filesystem::create_directories(*config.output_dir, ec);
        if (ec) throw std::runtime_error("cannot create output directory " + config.output_dir->string());
        const auto stem = "seed" + std::to_string(seed);
        write_metrics_csv(m, *config.output_dir / ("run_" + stem + ".csv"));
        if (!model.networks.empty()) {
            model.metadata["seed"] = seed;
            model.metadata["env"] = config.env;
            save_model(*config.output_dir / ("model_" + stem + ".json"), model);
        }
    }
    return m;
}

std::string metrics_csv(const Metrics& m) {
    std::string out = "episode,raw_return,norm_return\n";
    for (std::size_t i = 0; i < m.raw_returns.size(); ++i)
        out += std::to_string(i + 1) + ',' + fmt(m.raw_returns[i]) + ',' + fmt(m.norm_returns[i]) + '\n';
    return out;
}

void write_metrics_csv(const Metrics& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write metrics file " + path.string());
    out << metrics_csv(m);
    if (!out) throw std::runtime_error("failed writing metrics file " + path.string());
}

Metrics read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open metrics file " + path.string());
    Metrics m;
    std::string line;
    std::getline(in, line);
    if (line.rfind("episode,raw_return,norm_return", 0) != 0)
        throw InputError("unexpected metrics header in " + path.string());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string ep, raw, norm;
        if (!std::getline(ss, ep, ',') || !std::getline(ss, raw, ',') || !std::getline(ss, norm, ','))
            throw InputError("malformed metrics row in " + path.string() + ": " + line);
        m.raw_returns.push_back(std::stod(raw));
        m.norm_returns.push_back(std::stod(norm));
    }
    const auto name = path.stem().string();
    if (auto pos = name.find("seed"); pos != std::string::npos) {
        try {
            m.seed = std::stoull(name.substr(pos + 4));
        } catch (const std::exception&) {
        }
    }
    return m;
}

void emit_learning_curve(const std::vector<Metrics>& runs, const std::filesystem::path& path, CurveScale scale) {
    if (runs.size() < 2) throw InputError("a learning curve needs at least 2 runs");
    auto series = [&](const Metrics& m) -> const std::vector<double>& {
        return scale == CurveScale::Raw ? m.raw_returns : m.norm_returns;
    };
    const std::size_t episodes = series(runs.front()).size();
    for (const auto& r : runs)
        if (series(r).size() != episodes) throw InputError("runs have different episode counts");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write curve file " + path.string());
    out << "episode,mean_return,se_return\n";
    const double n = static_cast<double>(runs.size());
    for (std::size_t e = 0; e < episodes; ++e) {
        double mean = 0.0;
        for (const auto& r : runs) mean += series(r)[e];
        mean /= n;
        double ss = 0.0;
        for (const auto& r : runs) ss += (series(r)[e] - mean) * (series(r)[e] - mean);
        const double se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
        out << e + 1 << ',' << fmt(mean) << ',' << fmt(se) << '\n';
    }
    if (!out) throw std::runtime_error("failed writing curve file " + path.string());
}

std::vector<Metrics> load_runs(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw InputError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.rfind("run_", 0) == 0 && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Metrics> runs;
    for (const auto& f : files) runs.push_back(read_metrics_csv(f));
    return runs;
}

// ---------------------------------------------------------------------------
// Grid search

std::size_t GridSpec::size() const {
    if (params.empty()) return 0;
    std::size_t n = 1;
    for (const auto& [name, values] : params) n *= values.size();
    return n;
}

nlohmann::ordered_json GridSpec::combination(std::size_t index) const {
    if (index >= size()) throw InputError("grid combination index out of range");
    nlohmann::ordered_json combo = nlohmann::ordered_json::object();
    std::vector<std::size_t> digits(params.size());
    for (std::size_t k = params.size(); k-- > 0;) {
        digits[k] = index % params[k].second.size();
        index /= params[k].second.size();
    }
    for (std::size_t k = 0; k < params.size(); ++k) combo[params[k].first] = params[k].second[digits[k]];
    return combo;
}

GridSpec GridSpec::from_json(const nlohmann::ordered_json& j) {
    if (!j.is_object() || j.empty()) throw ConfigError("grid must be a non-empty JSON object of value lists");
    GridSpec g;
    for (const auto& [name, values] : j.items()) {
        if (!values.is_array() || values.empty())
            throw ConfigError("grid entry '" + name + "' must be a non-empty array");
        std::vector<nlohmann::json> vs;
        for (const auto& v : values) vs.push_back(nlohmann::json::parse(v.dump()));
        g.params.emplace_back(name, std::move(vs));
    }
    return g;
}

GridSpec GridSpec::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open grid file " + path.string());
    try {
        return from_json(nlohmann::ordered_json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid grid file " + path.string() + ": " + e.what());
    }
}

GridSpec GridSpec::builtin_ppo() {
    const std::vector<nlohmann::json> lrs = {1e-4, 5e-4, 1e-3};
    GridSpec g;
    g.params = {{"batch_size", {8, 16}},
                {"training_interval", {16, 32, 64}},
                {"critic_lr", lrs},
                {"policy_lr", lrs},
                {"policy_clip", {0.1, 0.15, 0.2}}};
    return g;
}

GridSpec GridSpec::builtin_dqn() {
    GridSpec g;
    g.params = {{"batch_size", {8, 16}},
                {"queue_size", {100, 200, 300}},
                {"learning_rate", {1e-4, 5e-4, 1e-3}},
                {"gamma", {0.85, 0.9, 0.95}},
                {"epsilon", {0.9, 0.95, 0.99}},
                {"epsilon_decay", {0.98, 0.99, 0.995}}};
    return g;
}

RunConfig apply_combination(const RunConfig& base, const nlohmann::ordered_json& combo) {
    RunConfig out = base;
    auto apply = [&](auto& section, const char* label) {
        nlohmann::json j = section;
        for (const auto& [raw_key, value] : combo.items()) {
            const std::string key = raw_key == "actor_lr" ? "policy_lr" : raw_key == "lr" ? "learning_rate" : raw_key;
            if (!j.contains(key)) throw ConfigError(std::string("unknown ") + label + " hyperparameter '" + raw_key + "'");
            j[key] = nlohmann::json::parse(value.dump());
        }
        j.get_to(section);
    };
    switch (base.algorithm) {
        case Algorithm::Ppo: apply(out.ppo, "ppo"); break;
        case Algorithm::Dqn: apply(out.dqn, "dqn"); break;
        case Algorithm::Random:
            if (!combo.empty()) throw ConfigError("the random baseline has no hyperparameters");
            break;
    }
    return out;
}

std::size_t workers_from_env(const char* var) {
    if (const char* v = std::getenv(var)) {
        try {
            const long n = std::stol(v);
            if (n >= 1) return static_cast<std::size_t>(n);
        } catch (const std::exception&) {
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

GridResult grid_search(const GridSpec& grid, const RunConfig& base, const GridOptions& options) {
    const std::size_t total = grid.size();
    if (total == 0) throw InputError("grid search needs a non-empty grid");
    if (options.seeds == 0) throw InputError("grid search needs at least one seed");

    std::vector<std::size_t> cells(total);
    std::iota(cells.begin(), cells.end(), 0);
    if (options.random_samples && *options.random_samples < total) {
        Rng rng(derive_seed(options.base_seed, 7));
        std::shuffle(cells.begin(), cells.end(), rng);
        cells.resize(*options.random_samples);
        std::sort(cells.begin(), cells.end());
    }

    RunConfig run_base = base;
    run_base.output_dir.reset();

    const std::size_t jobs = cells.size() * options.seeds;
    std::vector<double> values(jobs, 0.0);
    std::vector<std::optional<std::string>> errors(jobs);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> performed{0};

    auto worker = [&] {
        for (std::size_t job; (job = next.fetch_add(1)) < jobs;) {
            const std::size_t c = job / options.seeds;
            const std::size_t s = job % options.seeds;
            try {
                const auto cfg = apply_combination(run_base, grid.combination(cells[c]));
                values[job] = train_run(cfg, options.base_seed + s).final_metric();
                ++performed;
            } catch (const std::exception& e) {
                errors[job] = e.what();
            }
        }
    };
    const std::size_t n_threads = std::max<std::size_t>(1, std::min(options.workers, jobs));
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();

    GridResult result;
    result.runs_performed = performed.load();
    for (std::size_t c = 0; c < cells.size(); ++c) {
        GridRow row;
        row.cell = cells[c];
        row.params = grid.combination(cells[c]);
        for (std::size_t s = 0; s < options.seeds; ++s) {
            const std::size_t job = c * options.seeds + s;
            if (errors[job] && !row.error) row.error = errors[job];
            row.run_metrics.push_back(values[job]);
        }
        if (!row.error)
            row.aggregate = std::accumulate(row.run_metrics.begin(), row.run_metrics.end(), 0.0) /
                            static_cast<double>(row.run_metrics.size());
        result.rows.push_back(std::move(row));
    }
    std::stable_sort(result.rows.begin(), result.rows.end(), [](const GridRow& a, const GridRow& b) {
        if (a.error.has_value() != b.error.has_value()) return !a.error.has_value();
        return a.aggregate > b.aggregate;
    });
    return result;
}

void write_grid_results(const GridResult& result, const GridSpec& grid, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string());

    nlohmann::ordered_json summary;
    summary["grid_size"] = grid.size();
    summary["cells_evaluated"] = result.rows.size();
    summary["runs_performed"] = result.runs_performed;
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const auto& r = result.rows[i];
        nlohmann::ordered_json jr;
        jr["rank"] = i + 1;
        jr["cell"] = r.cell;
        jr["params"] = r.params;
        jr["mean_reward"] = r.error ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.aggregate);
        jr["run_metrics"] = r.run_metrics;
        if (r.error) jr["error"] = *r.error;
        rows.push_back(jr);
    }
    summary["rows"] = rows;
    {
        std::ofstream out(dir / "grid_results.json", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (dir / "grid_results.json").string());
        out << summary.dump(2) << '\n';
    }

    std::ofstream csv(dir / "grid_results.csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + (dir / "grid_results.csv").string());
    csv << "rank";
    for (const auto& [name, values] : grid.params) csv << ',' << name;
    csv << ",mean_reward,error\n";
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const auto& r = result.rows[i];
        csv << i + 1;
        for (const auto& [name, values] : grid.params) csv << ',' << r.params.at(name).dump();
        csv << ',' << (r.error ? std::string() : fmt(r.aggregate)) << ',' << (r.error ? "\"" + *r.error + "\"" : "")
            << '\n';
    }
}

// ---------------------------------------------------------------------------

Metrics evaluate_model(const ModelFile& model, const EnvConfig& env_config, std::size_t episodes,
                       std::uint64_t seed) {
    Env env(env_config, seed);
    check_model_compatible(model, feature_layout_fingerprint(env.state()), action_encoding_fingerprint(env.state()));
    const char* key = model.algorithm == "ppo" ? "actor" : model.algorithm == "dqn" ? "q" : nullptr;
    if (!key || !model.networks.count(key))
        throw InputError("model file has no policy network for algorithm '" + model.algorithm + "'");
    const Mlp& policy = model.networks.at(key);

    Metrics m;
    m.seed = seed;
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        const auto t = run_episode(env, [&](const FeatureVector& obs, Env& e) { return e.step(argmax(policy.forward(obs))); });
        m.raw_returns.push_back(t.raw);
        m.norm_returns.push_back(t.norm);
        m.env_steps += t.steps;
    }
    return m;
}

}  // namespace acd
