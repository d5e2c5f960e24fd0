#include "acd/redpolicy.hpp"

#include <algorithm>

#include "acd/errors.hpp"

namespace acd {

std::vector<PathStep> build_attack_path(const ScenarioConfig& scenario) {
    const auto& hops = scenario.attack_path;
    std::vector<PathStep> path;
    for (std::size_t j = 1; j < hops.size(); ++j) {
        const HostId from = hops[j - 1];
        const HostId to = hops[j];
        const SubnetId subnet = scenario.hosts.at(to).subnet;
        path.push_back({PathStage::Discover, to, from, subnet});
        path.push_back({PathStage::Scan, to, from, subnet});
        path.push_back({PathStage::Exploit, to, from, subnet});
        path.push_back({PathStage::Escalate, to, to, subnet});
    }
    const HostId last = hops.back();
    path.push_back({PathStage::Impact, last, last, scenario.hosts.at(last).subnet});
    return path;
}

BLineState BLineState::start(const ScenarioConfig& scenario) {
    BLineState s;
    s.attack_path = build_attack_path(scenario);
    return s;
}

RedAction stage_action(const PathStep& step) {
    switch (step.stage) {
        case PathStage::Discover: return RedAction::discover_systems(step.subnet);
        case PathStage::Scan: return RedAction::discover_services(step.host);
        case PathStage::Exploit: return RedAction::exploit(step.from, step.host);
        case PathStage::Escalate: return RedAction::escalate(step.host);
        case PathStage::Impact: return RedAction::impact(step.host);
    }
    return RedAction::discover_systems(step.subnet);
}

namespace {

bool stage_ready(const NetworkState& state, const PathStep& step) {
    switch (step.stage) {
        case PathStage::Discover:
        case PathStage::Scan:
        case PathStage::Exploit: return state.has_session(step.from);
        case PathStage::Escalate: return state.has_session(step.host);
        case PathStage::Impact: return state.red_sessions[step.host] == CompromiseLevel::Privileged;
    }
    return false;
}

std::size_t effective_stage(const NetworkState& state, const BLineState& mem) {
    if (mem.attack_path.empty()) throw StateError("B-line memory has no attack path");
    const std::size_t cursor = std::min(mem.cursor, mem.attack_path.size() - 1);
    return stage_ready(state, mem.attack_path[cursor]) ? cursor : fallback_stage(state, mem);
}

}  // namespace

std::size_t fallback_stage(const NetworkState& state, const BLineState& mem) {
    // Path hosts in order: the `from` of the first step, then each hop target.
    const auto& path = mem.attack_path;
    const std::size_t hops = (path.size() - 1) / 4;
    if (hops == 0) return 0;
    auto hop_host = [&](std::size_t k) { return k == 0 ? path[0].from : path[4 * (k - 1)].host; };

    for (std::size_t k = hops + 1; k-- > 0;) {
        const HostId h = hop_host(k);
        if (!state.has_session(h)) continue;
        const bool privileged = state.red_sessions[h] == CompromiseLevel::Privileged;
        if (k == 0) return 1;  // foothold survives: rescan the first hop
        if (!privileged) return 4 * (k - 1) + 3;
        if (k == hops) return path.size() - 1;
        return 4 * k + 1;
    }
    return 0;
}

RedAction bline_next(const NetworkState& state, const BLineState& mem) {
    return stage_action(mem.attack_path[effective_stage(state, mem)]);
}

BLineState bline_observe(BLineState mem, const NetworkState& state, const RedAction& action,
                         const ActionOutcome& outcome) {
    const auto& path = mem.attack_path;
    auto it = std::find_if(path.begin(), path.end(),
                           [&](const PathStep& s) { return stage_action(s) == action; });
    mem.last_action = action;
    if (it == path.end()) return mem;
    const auto stage = static_cast<std::size_t>(it - path.begin());

    switch (outcome.detail) {
        case OutcomeDetail::Ok:
        case OutcomeDetail::NoEffect: mem.cursor = std::min(stage + 1, path.size() - 1); break;
        case OutcomeDetail::FailedPatchCheck:
        case OutcomeDetail::BlockedByIsolation:
        case OutcomeDetail::InvalidTarget: mem.cursor = stage; break;
        case OutcomeDetail::NoSession: mem.cursor = std::min(stage, fallback_stage(state, mem)); break;
    }
    return mem;
}

// ---------------------------------------------------------------------------

std::vector<RedAction> legal_red_actions(const NetworkState& state, const ScenarioConfig& scenario,
                                         const RedKnowledge& knowledge) {
    std::vector<RedAction> legal;
    for (SubnetId s = 0; s < state.subnet_count(); ++s)
        if (pick_red_source(state, s).detail == OutcomeDetail::Ok) legal.push_back(RedAction::discover_systems(s));

    for (HostId h : knowledge.discovered_hosts) {
        if (!scenario.is_red_target(h) || state.isolation_bits[h]) continue;
        if (pick_red_source(state, state.hosts[h].subnet_id).detail == OutcomeDetail::Ok)
            legal.push_back(RedAction::discover_services(h));
    }

    for (HostId dst : knowledge.scanned_hosts) {
        if (!scenario.is_red_target(dst) || state.has_session(dst)) continue;
        for (HostId src = 0; src < state.host_count(); ++src)
            if (src != dst && state.has_session(src) && reachable(state, src, dst))
                legal.push_back(RedAction::exploit(src, dst));
    }

    for (HostId h = 0; h < state.host_count(); ++h) {
        if (state.isolation_bits[h] || !scenario.is_red_target(h)) continue;
        if (state.red_sessions[h] == CompromiseLevel::UserLevel) legal.push_back(RedAction::escalate(h));
    }

    const HostId t = scenario.impact_target;
    if (state.red_sessions[t] == CompromiseLevel::Privileged && !state.isolation_bits[t])
        legal.push_back(RedAction::impact(t));
    return legal;
}

RedAction random_red_next(const NetworkState& state, const ScenarioConfig& scenario,
                          const RedKnowledge& knowledge, Rng& rng) {
    const auto legal = legal_red_actions(state, scenario, knowledge);
    if (legal.empty()) return RedAction::discover_systems(scenario.hosts.at(scenario.foothold).subnet);
    std::uniform_int_distribution<std::size_t> pick(0, legal.size() - 1);
    return legal[pick(rng)];
}

RedPolicyKind red_policy_from_string(std::string_view name) {
    if (name == "bline") return RedPolicyKind::BLine;
    if (name == "random") return RedPolicyKind::Random;
    throw ConfigError("unknown red policy '" + std::string(name) + "' (expected bline|random)");
}

std::string_view to_string(RedPolicyKind k) { return k == RedPolicyKind::BLine ? "bline" : "random"; }

// ---------------------------------------------------------------------------

RedAgent::RedAgent(RedPolicyKind kind, const ScenarioConfig& scenario)
    : kind_(kind), bline_(BLineState::start(scenario)) {}

RedAgent::Turn RedAgent::act(NetworkState& state, const ScenarioConfig& scenario, Rng& rng) {
    Turn turn;
    if (!state.red_has_any_session()) {
        if (idle_turns_ >= kFootholdIdleTurns) {
            state.grant_session(scenario.foothold, scenario.foothold_level);
            bline_ = BLineState::start(scenario);
            idle_turns_ = 0;
            turn.foothold_restored = true;
        } else {
            ++idle_turns_;
        }
    } else {
        idle_turns_ = 0;
    }

    turn.action = kind_ == RedPolicyKind::BLine ? bline_next(state, bline_)
                                                : random_red_next(state, scenario, knowledge_, rng);
    turn.result = apply_red(state, scenario, turn.action, rng);
    learn(turn.action, turn.result);
    if (kind_ == RedPolicyKind::BLine) bline_ = bline_observe(std::move(bline_), state, turn.action, turn.result.outcome);
    return turn;
}

void RedAgent::learn(const RedAction& action, const DiscoveryResult& result) {
    if (!result.outcome.success) return;
    switch (action.kind) {
        case RedActionKind::DiscoverRemoteSystems:
            knowledge_.discovered_hosts.insert(result.visible.begin(), result.visible.end());
            break;
        case RedActionKind::DiscoverNetworkServices: knowledge_.scanned_hosts.insert(action.target); break;
        case RedActionKind::ExploitRemoteService:
            knowledge_.discovered_hosts.insert(action.target);
            knowledge_.scanned_hosts.insert(action.target);
            break;
        default: break;
    }
}

}  // namespace acd
