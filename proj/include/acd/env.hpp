#pragma once

// Episodic defense environment. One step = red turn, blue turn, reward.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "acd/actions.hpp"
#include "acd/features.hpp"
#include "acd/netmodel.hpp"
#include "acd/redpolicy.hpp"

namespace acd {

inline constexpr double kDefaultRewardFloor = 13.1;

struct PriorityTable {
    double user = 0.0;
    double enterprise = 0.0;
    double operational = 0.0;

    double at(HostPriority p) const;
};

struct EnvConfig {
    std::size_t episode_length = 32;
    double reward_floor = kDefaultRewardFloor;
    PriorityTable availability{0.1, 1.0, 1.0};
    double impact_penalty = 10.0;
    double restore_cost = 1.0;
    PriorityTable isolation{0.2, 0.4, 0.5};
    std::string red_policy = "bline";
    bool normalize = true;
    ScenarioConfig scenario = default_scenario_config();

    void validate() const;
};

void to_json(nlohmann::json& j, const EnvConfig& c);
void from_json(const nlohmann::json& j, EnvConfig& c);

struct PenaltyBreakdown {
    double availability = 0.0;
    double impact = 0.0;
    double restore = 0.0;
    double isolation = 0.0;

    double total() const { return availability + impact + restore + isolation; }
};

struct StepInfo {
    RedAction red_action;
    ActionOutcome red_outcome;
    BlueAction blue_action;
    ActionOutcome blue_outcome;
    PenaltyBreakdown penalties;
    bool foothold_restored = false;
};

struct StepResult {
    FeatureVector observation;
    double raw_reward = 0.0;
    double normalized_reward = 0.0;
    // What the agent trains on: normalized_reward when normalization is on.
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

PenaltyBreakdown reward_breakdown(const NetworkState& state, const EnvConfig& config);
double compute_raw_reward(const NetworkState& state, const EnvConfig& config);
double normalize_reward(double raw, double floor);
// Sum of per-step normalized rewards for an episode of `steps` with raw total `raw_total`.
double episode_return_conversion(double raw_total, std::size_t steps, double floor);

class Env {
public:
    Env(EnvConfig config, std::uint64_t seed);

    FeatureVector reset();
    StepResult step(const BlueAction& action);
    StepResult step(std::size_t action_index);

    const EnvConfig& config() const { return config_; }
    const ScenarioConfig& scenario() const { return config_.scenario; }
    const NetworkState& state() const { return state_; }
    NetworkState& mutable_state() { return state_; }
    const RedAgent& red() const { return red_; }

    std::size_t host_count() const { return state_.host_count(); }
    std::size_t action_count() const { return blue_action_count(host_count()); }
    std::size_t observation_size() const { return feature_length(host_count()); }
    bool done() const { return done_; }
    // Number of resets so far; the running episode has index episodes_started() - 1.
    std::uint64_t episodes_started() const { return episodes_; }

private:
    EnvConfig config_;
    RedPolicyKind red_kind_;
    std::uint64_t seed_;
    std::uint64_t episodes_ = 0;
    NetworkState state_;
    RedAgent red_;
    Rng rng_;
    bool done_ = true;
};

std::pair<Env, FeatureVector> reset(const EnvConfig& config, std::uint64_t seed);

struct FloorCalibration {
    double floor = 0.0;
    std::vector<double> raw_rewards;
};

// Random blue policy against the configured red policy, episodes back to back.
FloorCalibration run_floor_calibration(const EnvConfig& config, std::size_t timesteps, std::uint64_t seed);
double calibrate_floor(const EnvConfig& config, std::size_t timesteps, std::uint64_t seed);

// CSV step trace: timestep, red action, blue action, rewards, penalty breakdown.
class TraceWriter {
public:
    explicit TraceWriter(std::ostream& out);
    void write(const StepResult& r, const NetworkState& state);

private:
    std::ostream& out_;
};

}  // namespace acd
