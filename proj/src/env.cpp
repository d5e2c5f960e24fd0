#include "acd/env.hpp"

#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "acd/errors.hpp"

namespace acd {

double PriorityTable::at(HostPriority p) const {
    switch (p) {
        case HostPriority::User: return user;
        case HostPriority::Enterprise: return enterprise;
        case HostPriority::Operational: return operational;
    }
    return 0.0;
}

void EnvConfig::validate() const {
    if (episode_length < 1) throw ConfigError("episode_length must be >= 1");
    if (!(reward_floor > 0.0)) throw ConfigError("reward_floor must be > 0");
    for (double v : {availability.user, availability.enterprise, availability.operational, impact_penalty,
                     restore_cost, isolation.user, isolation.enterprise, isolation.operational})
        if (!(v >= 0.0)) throw ConfigError("penalties must be >= 0");
    red_policy_from_string(red_policy);
    scenario.validate();
}

namespace {

nlohmann::json table_json(const PriorityTable& t) {
    return {{"user", t.user}, {"enterprise", t.enterprise}, {"operational", t.operational}};
}

void read_table(const nlohmann::json& j, PriorityTable& t) {
    t.user = j.value("user", t.user);
    t.enterprise = j.value("enterprise", t.enterprise);
    t.operational = j.value("operational", t.operational);
}

}  // namespace

void to_json(nlohmann::json& j, const EnvConfig& c) {
    j = {{"episode_length", c.episode_length},
         {"reward_floor", c.reward_floor},
         {"availability_penalty", table_json(c.availability)},
         {"impact_penalty", c.impact_penalty},
         {"restore_cost", c.restore_cost},
         {"isolation_penalty", table_json(c.isolation)},
         {"red_policy", c.red_policy},
         {"normalize", c.normalize},
         {"scenario", c.scenario}};
}

// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, EnvConfig& c) {
    c = EnvConfig{};
    c.episode_length = j.value("episode_length", c.episode_length);
    c.reward_floor = j.value("reward_floor", c.reward_floor);
    if (j.contains("availability_penalty")) read_table(j.at("availability_penalty"), c.availability);
    c.impact_penalty = j.value("impact_penalty", c.impact_penalty);
    c.restore_cost = j.value("restore_cost", c.restore_cost);
    if (j.contains("isolation_penalty")) read_table(j.at("isolation_penalty"), c.isolation);
    c.red_policy = j.value("red_policy", c.red_policy);
    c.normalize = j.value("normalize", c.normalize);
    if (j.contains("scenario")) c.scenario = j.at("scenario").get<ScenarioConfig>();
    c.validate();
}

// ---------------------------------------------------------------------------
// Reward

PenaltyBreakdown reward_breakdown(const NetworkState& state, const EnvConfig& config) {
    PenaltyBreakdown p;
    for (std::size_t i = 0; i < state.host_count(); ++i) {
        const Host& h = state.hosts[i];
        if (h.true_compromise == CompromiseLevel::Privileged) p.availability -= config.availability.at(h.priority);
        if (state.isolation_bits[i]) p.isolation -= config.isolation.at(h.priority);
    }
    if (state.impacted_this_step) p.impact -= config.impact_penalty;
    if (state.restore_used_this_step) p.restore -= config.restore_cost;
    return p;
}

double compute_raw_reward(const NetworkState& state, const EnvConfig& config) {
    return reward_breakdown(state, config).total();
}

double normalize_reward(double raw, double floor) { return (raw + floor) / floor * 5.0 - 2.5; }

double episode_return_conversion(double raw_total, std::size_t steps, double floor) {
    return 5.0 * raw_total / floor + 2.5 * static_cast<double>(steps);
}

// ---------------------------------------------------------------------------
// Env

Env::Env(EnvConfig config, std::uint64_t seed)
    : config_((config.validate(), std::move(config))),
      red_kind_(red_policy_from_string(config_.red_policy)),
      seed_(seed),
      state_(config_.scenario),
      red_(red_kind_, config_.scenario) {}

FeatureVector Env::reset() {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(episodes_), static_cast<std::uint32_t>(episodes_ >> 32)};
    rng_.seed(seq);
    ++episodes_;
    state_ = NetworkState(config_.scenario);
    red_ = RedAgent(red_kind_, config_.scenario);
    done_ = false;
    return encode(state_);
}

StepResult Env::step(std::size_t action_index) { return step(decode_blue_action(action_index, host_count())); }

StepResult Env::step(const BlueAction& action) {
    if (done_) throw StateError("step() called on a finished episode; call reset()");
    if (!state_.valid_host(action.target)) throw InputError("blue action target out of range");

    state_.begin_timestep();
    StepResult r;
    const auto turn = red_.act(state_, config_.scenario, rng_);
    r.info.red_action = turn.action;
    r.info.red_outcome = turn.result.outcome;
    r.info.foothold_restored = turn.foothold_restored;
    r.info.blue_action = action;
    r.info.blue_outcome = apply_blue(state_, action);

    r.info.penalties = reward_breakdown(state_, config_);
    r.raw_reward = r.info.penalties.total();
    r.normalized_reward = normalize_reward(r.raw_reward, config_.reward_floor);
    r.reward = config_.normalize ? r.normalized_reward : r.raw_reward;

    ++state_.timestep;
    done_ = state_.timestep >= config_.episode_length;
    r.done = done_;
    r.observation = encode(state_);
    return r;
}

std::pair<Env, FeatureVector> reset(const EnvConfig& config, std::uint64_t seed) {
    Env env(config, seed);
    auto obs = env.reset();
    return {std::move(env), std::move(obs)};
}

// ---------------------------------------------------------------------------

FloorCalibration run_floor_calibration(const EnvConfig& config, std::size_t timesteps, std::uint64_t seed) {
    if (timesteps < 1) throw InputError("calibration needs at least one timestep");
    Env env(config, seed);
    Rng blue_rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_int_distribution<std::size_t> pick(0, env.action_count() - 1);

    FloorCalibration out;
    out.raw_rewards.reserve(timesteps);
    env.reset();
    for (std::size_t t = 0; t < timesteps; ++t) {
        if (env.done()) env.reset();
        const auto r = env.step(pick(blue_rng));
        out.raw_rewards.push_back(r.raw_reward);
        out.floor = std::max(out.floor, std::abs(r.raw_reward));
    }
    return out;
}

double calibrate_floor(const EnvConfig& config, std::size_t timesteps, std::uint64_t seed) {
    return run_floor_calibration(config, timesteps, seed).floor;
}

// ---------------------------------------------------------------------------

TraceWriter::TraceWriter(std::ostream& out) : out_(out) {
    out_ << "timestep,red_action,red_outcome,blue_action,blue_outcome,raw_reward,normalized_reward,"
            "availability,impact,restore,isolation\n";
}

void TraceWriter::write(const StepResult& r, const NetworkState& state) {
    const auto& p = r.info.penalties;
    out_ << state.timestep << ',' << describe(r.info.red_action, state) << ',' << to_string(r.info.red_outcome.detail)
         << ',' << describe(r.info.blue_action, state) << ',' << to_string(r.info.blue_outcome.detail) << ','
         << r.raw_reward << ',' << r.normalized_reward << ',' << p.availability << ',' << p.impact << ','
         << p.restore << ',' << p.isolation << '\n';
}

}  // namespace acd
