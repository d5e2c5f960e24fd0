// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "acd/harness.hpp"

using namespace acd;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::pair<int, std::string> run_command(const std::string& cmd) {
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, out};
    char buf[512];
    while (std::fgets(buf, sizeof buf, pipe)) out += buf;
    const int status = pclose(pipe);
    return {status, out};
}

double parse_field(const std::string& text, const std::string& key) {
    const auto pos = text.find(key + "=");
    if (pos == std::string::npos) return std::nan("");
    return std::stod(text.substr(pos + key.size() + 1));
}

// --- criteria ----------------------------------------------------------------

Outcome reward_normalization() {
    const double lo = normalize_reward(-13.1, 13.1), hi = normalize_reward(0.0, 13.1);
    return {std::abs(lo + 2.5) <= 1e-9 && std::abs(hi - 2.5) <= 1e-9,
            "lo=" + fmt("%.12f", lo) + " hi=" + fmt("%.12f", hi)};
}

Outcome scale_conversion() {
    const double a = episode_return_conversion(-200.0, 32, 13.1);
    const double b = episode_return_conversion(-50.0, 32, 13.1);
    return {std::abs(a - 3.68) <= 0.02 && std::abs(b - 60.92) <= 0.02,
            "-200 -> " + fmt("%.4f", a) + ", -50 -> " + fmt("%.4f", b)};
}

Outcome patch_mechanics() {
    const auto t0 = Clock::now();
    const auto cfg = default_scenario_config();
    const HostId src = cfg.foothold, dst = cfg.host_by_name("Enterprise0");
    Rng rng(2024);
    const int trials = 10000;
    int successes = 0;
    bool decrement_exact = true;
    std::uniform_real_distribution<double> score(0.0, 1.0);
    for (int i = 0; i < trials; ++i) {
        NetworkState s(cfg);
        s.hosts[dst].patch_score = 0.5;
        if (red_exploit(s, cfg, src, dst, rng).success) ++successes;
        decrement_exact &= s.hosts[dst].patch_score == 0.5 - 0.35;

        // Arbitrary scores, both attempt kinds.
        NetworkState t(cfg);
        const double before = score(rng);
        t.hosts[dst].patch_score = before;
        if (i % 2 == 0) {
            red_exploit(t, cfg, src, dst, rng);
        } else {
            t.grant_session(dst, CompromiseLevel::UserLevel);
            red_privilege_escalate(t, cfg, dst, rng);
        }
        const double expected = before - std::min(0.35, before);
        decrement_exact &= std::abs(t.hosts[dst].patch_score - expected) <= 1e-15;
    }
    const double freq = successes / double(trials);
    const double secs = seconds_since(t0);
    return {std::abs(freq - 0.5) <= 0.015 && decrement_exact && secs < 1.0,
            "success rate " + fmt("%.4f", freq) + (decrement_exact ? ", decrements exact" : ", decrement mismatch") +
                ", " + fmt("%.3fs", secs)};
}

Outcome isolation_soundness() {
    const auto t0 = Clock::now();
    const auto cfg = default_scenario_config();
    Rng rng(77);
    std::uniform_int_distribution<std::size_t> host(0, 12), kind(0, 4), subnet(0, 2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t actions = 120000;
    std::size_t violations = 0, successes = 0, sweeps_checked = 0;
    NetworkState s(cfg);
    for (std::size_t i = 0; i < actions; ++i) {
        if (i % 8 == 0) {
            s = NetworkState(cfg);
            const double p_iso = unit(rng), p_sess = unit(rng);
            for (HostId h = 0; h < s.host_count(); ++h) {
                s.isolation_bits[h] = unit(rng) < p_iso;
                if (unit(rng) < p_sess)
                    s.grant_session(h, unit(rng) < 0.5 ? CompromiseLevel::UserLevel : CompromiseLevel::Privileged);
                s.hosts[h].patch_score = unit(rng) < 0.5 ? 0.0 : unit(rng);
            }
        }
        RedAction a;
        switch (kind(rng)) {
            case 0: a = RedAction::discover_systems(subnet(rng)); break;
            case 1: a = RedAction::discover_services(host(rng)); break;
            case 2: a = RedAction::exploit(host(rng), host(rng)); break;
            case 3: a = RedAction::escalate(host(rng)); break;
            default: a = RedAction::impact(host(rng)); break;
        }
        const auto r = apply_red(s, cfg, a, rng);
        if (a.kind == RedActionKind::DiscoverRemoteSystems) {
            ++sweeps_checked;
            for (HostId v : r.visible)
                if (s.isolation_bits[v]) ++violations;
            continue;
        }
        if (!r.outcome.success) continue;
        ++successes;
        if (s.isolation_bits[a.target]) ++violations;
        if (a.kind == RedActionKind::ExploitRemoteService && s.isolation_bits[a.source]) ++violations;
    }
    const double secs = seconds_since(t0);
    return {violations == 0 && secs < 10.0,
            std::to_string(actions) + " actions, " + std::to_string(successes) + " successes, " +
                std::to_string(sweeps_checked) + " sweeps, " + std::to_string(violations) + " violations, " +
                fmt("%.2fs", secs)};
}

Outcome gradient_correctness() {
    const auto t0 = Clock::now();
    const std::vector<std::vector<std::size_t>> archs = {{54, 64, 64, 78}, {54, 64, 64, 1}};
    const int cases = 100, params_per_case = 40;
    const double h = 1e-5;
    Rng rng(5);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    std::size_t checks = 0;

    for (const auto& dims : archs) {
        for (int c = 0; c < cases; ++c) {
            Mlp net(dims, rng);
            // Inputs in the observation range; resample if a hidden unit sits on the rectifier kink.
            Eigen::VectorXd x(54);
            ForwardCache cache;
            for (;;) {
                for (auto& v : x) v = unit(rng);
                cache = net.forward_cached(x);
                double closest = 1e9;
                for (std::size_t l = 0; l + 1 < cache.pre_activation.size(); ++l)
                    closest = std::min(closest, cache.pre_activation[l].cwiseAbs().minCoeff());
                if (closest > 1e-3) break;
            }
            Eigen::VectorXd w(static_cast<Eigen::Index>(dims.back()));
            for (auto& v : w) v = normal(rng);
            const auto grads = net.backward(cache, w);
            auto loss = [&] { return net.forward(x).dot(w); };

            auto& layers = net.mutable_layers();
            for (int k = 0; k < params_per_case; ++k) {
                const std::size_t l = std::uniform_int_distribution<std::size_t>(0, layers.size() - 1)(rng);
                const bool bias = unit(rng) < 0.2;
                double* p;
                double analytic;
                if (bias) {
                    const auto i = std::uniform_int_distribution<Eigen::Index>(0, layers[l].bias.size() - 1)(rng);
                    p = &layers[l].bias(i);
                    analytic = grads.layers[l].bias(i);
                } else {
                    const auto i = std::uniform_int_distribution<Eigen::Index>(0, layers[l].weights.size() - 1)(rng);
                    p = layers[l].weights.data() + i;
                    analytic = grads.layers[l].weights.data()[i];
                }
                const double saved = *p;
                *p = saved + h;
                const double up = loss();
                *p = saved - h;
                const double down = loss();
                *p = saved;
                const double numeric = (up - down) / (2 * h);
                const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
                worst = std::max(worst, std::abs(numeric - analytic) / scale);
                ++checks;
            }
        }
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-4 && secs < 10.0,
            std::to_string(checks) + " parameter checks over 2 architectures x 100 cases, max rel err " +
                fmt("%.2e", worst) + ", " + fmt("%.2fs", secs)};
}

Outcome gae_oracle() {
    Rng rng(31);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> len(1, 64);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int T = len(rng);
        std::vector<double> r(T), v(T + 1);
        for (auto& x : r) x = normal(rng);
        for (auto& x : v) x = normal(rng);
        std::vector<bool> d(T, false);
        d.back() = true;
        const auto g = compute_gae(r, v, d, 1.0, 1.0);
        double tail = 0.0;
        for (int t = T - 1; t >= 0; --t) {
            tail += r[t];
            worst = std::max(worst, std::abs(g.advantages[t] - (tail - v[t])));
        }
    }
    const auto hand = compute_gae({1.0, 1.0}, {0.5, 0.5, 0.0}, {false, true}, 0.9, 0.8);
    const bool hand_ok = std::abs(hand.advantages[0] - 1.31) <= 1e-12 && std::abs(hand.advantages[1] - 0.5) <= 1e-12;
    return {worst <= 1e-9 && hand_ok,
            "max |GAE - MC| " + fmt("%.2e", worst) + ", hand case [" + fmt("%.6f", hand.advantages[0]) + ", " +
                fmt("%.6f", hand.advantages[1]) + "]"};
}

struct TrainingRuns {
    std::vector<Metrics> ppo, dqn, random;
    double seconds = 0.0;
};

TrainingRuns run_training() {
    const auto t0 = Clock::now();
    TrainingRuns out;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        RunConfig cfg;
        cfg.episodes = 150;
        cfg.algorithm = Algorithm::Ppo;
        cfg.ppo = PpoConfig::optimized();
        out.ppo.push_back(train_run(cfg, seed));
        cfg.algorithm = Algorithm::Dqn;
        cfg.dqn = DqnConfig::best_grid_preset();
        out.dqn.push_back(train_run(cfg, seed));
        cfg.algorithm = Algorithm::Random;
        out.random.push_back(train_run(cfg, seed));
    }
    out.seconds = seconds_since(t0);
    return out;
}

Outcome training_signal(const TrainingRuns& runs) {
    const double ppo = summarize(runs.ppo), rnd = summarize(runs.random);
    int positive = 0;
    std::size_t steps = 0;
    for (const auto& m : runs.ppo) {
        if (episode_trend(m.norm_returns) > 0.0) ++positive;
        steps += m.env_steps;
    }
    return {ppo - rnd >= 20.0 && positive >= 4 && steps == 5 * 150 * 32,
            "PPO " + fmt("%.3f", ppo) + " vs random " + fmt("%.3f", rnd) + " (margin " + fmt("%.3f", ppo - rnd) +
                "), positive slope in " + std::to_string(positive) + "/5 seeds"};
}

Outcome ppo_beats_dqn(const TrainingRuns& runs) {
    int wins = 0;
    std::string pairs;
    for (std::size_t i = 0; i < runs.ppo.size(); ++i) {
        const double p = runs.ppo[i].final_metric(), d = runs.dqn[i].final_metric();
        if (p > d && runs.ppo[i].env_steps == runs.dqn[i].env_steps) ++wins;
        pairs += (i ? " " : "") + fmt("%.1f", p) + "/" + fmt("%.1f", d);
    }
    return {wins >= 4, "PPO wins " + std::to_string(wins) + "/5 pairings (ppo/dqn: " + pairs + "), training " +
                           fmt("%.1fs", runs.seconds)};
}

Outcome determinism() {
    const auto base = fs::temp_directory_path() / "acd_acceptance_determinism";
    fs::remove_all(base);
    const auto a = base / "a", b = base / "b";
    const std::string cli = ACD_CLI_PATH;
    const auto r1 = run_command(cli + " train --algo ppo --seed 7 --episodes 150 --out " + a.string());
    const auto r2 = run_command(cli + " train --algo ppo --seed 7 --episodes 150 --out " + b.string());
    const auto fa = slurp(a / "run_seed7.csv"), fb = slurp(b / "run_seed7.csv");
    const bool ok = r1.first == 0 && r2.first == 0 && !fa.empty() && fa == fb;
    const auto lines = std::count(fa.begin(), fa.end(), '\n');
    fs::remove_all(base);
    return {ok, std::string(fa == fb ? "identical" : "different") + " metrics CSVs (" + std::to_string(lines) +
                    " lines each)"};
}

Outcome epsilon_schedule() {
    DqnConfig cfg;
    cfg.epsilon_start = 0.95;
    cfg.epsilon_decay = 0.98;
    Rng rng(0);
    DqnAgent agent(54, 78, cfg, rng);
    for (int ep = 0; ep < 150; ++ep) agent.end_episode();
    const double e = agent.epsilon();
    return {std::abs(e - 0.0459) <= 0.0005 && std::abs(e - 0.0469) <= 0.004,
            "epsilon after 150 episodes " + fmt("%.5f", e)};
}

Outcome calibration() {
    const std::string cli = ACD_CLI_PATH;
    const auto t0 = Clock::now();
    const auto [status, text] = run_command(cli + " calibrate-floor --timesteps 100000 --seed 1");
    const double secs = seconds_since(t0);
    const double floor = parse_field(text, "floor");
    const double within = parse_field(text, "within_range");

    // Independent recount with the reported floor.
    const auto cal = run_floor_calibration(EnvConfig{}, 100000, 1);
    std::size_t inside = 0;
    for (double r : cal.raw_rewards) {
        const double n = normalize_reward(r, floor);
        if (n >= -2.5 - 1e-12 && n <= 2.5 + 1e-12) ++inside;
    }
    const double frac = inside / double(cal.raw_rewards.size());
    return {status == 0 && secs < 60.0 && floor >= 10.0 && frac >= 0.999 && std::abs(frac - within) < 1e-9,
            "floor " + fmt("%.3f", floor) + ", " + fmt("%.4f", 100 * frac) + "% within range, " + fmt("%.2fs", secs)};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* name, const Outcome& o) {
        std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    };
    auto guarded = [](const std::function<Outcome()>& f) {
        try {
            return f();
        } catch (const std::exception& e) {
            return Outcome{false, std::string("exception: ") + e.what()};
        }
    };

    report(1, "reward normalization", guarded(reward_normalization));
    report(2, "scale conversion", guarded(scale_conversion));
    report(3, "patch mechanics", guarded(patch_mechanics));
    report(4, "isolation soundness", guarded(isolation_soundness));
    report(5, "gradient correctness", guarded(gradient_correctness));
    report(6, "GAE oracle", guarded(gae_oracle));
    TrainingRuns runs;
    bool trained = true;
    std::string train_error;
    try {
        runs = run_training();
    } catch (const std::exception& e) {
        trained = false;
        train_error = e.what();
    }
    report(7, "training signal", trained ? guarded([&] { return training_signal(runs); })
                                         : Outcome{false, "exception: " + train_error});
    report(8, "PPO beats DQN", trained ? guarded([&] { return ppo_beats_dqn(runs); })
                                       : Outcome{false, "exception: " + train_error});
    report(9, "determinism", guarded(determinism));
    report(10, "epsilon schedule", guarded(epsilon_schedule));
    report(11, "floor calibration", guarded(calibration));

    std::printf("%d/11 criteria passed\n", 11 - failures);
    return failures == 0 ? 0 : 1;
}
