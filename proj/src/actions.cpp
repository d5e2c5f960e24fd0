#include "acd/actions.hpp"

#include <algorithm>

#include "acd/errors.hpp"

namespace acd {

std::string_view to_string(BlueActionKind k) {
    switch (k) {
        case BlueActionKind::Analyze: return "Analyze";
        case BlueActionKind::Remove: return "Remove";
        case BlueActionKind::Restore: return "Restore";
        case BlueActionKind::Patch: return "Patch";
        case BlueActionKind::Isolate: return "Isolate";
        case BlueActionKind::Unisolate: return "Unisolate";
    }
    return "?";
}

std::string_view to_string(RedActionKind k) {
    switch (k) {
        case RedActionKind::DiscoverRemoteSystems: return "DiscoverRemoteSystems";
        case RedActionKind::DiscoverNetworkServices: return "DiscoverNetworkServices";
        case RedActionKind::ExploitRemoteService: return "ExploitRemoteService";
        case RedActionKind::PrivilegeEscalate: return "PrivilegeEscalate";
        case RedActionKind::Impact: return "Impact";
    }
    return "?";
}

std::string_view to_string(OutcomeDetail d) {
    switch (d) {
        case OutcomeDetail::Ok: return "Ok";
        case OutcomeDetail::BlockedByIsolation: return "BlockedByIsolation";
        case OutcomeDetail::FailedPatchCheck: return "FailedPatchCheck";
        case OutcomeDetail::NoSession: return "NoSession";
        case OutcomeDetail::InvalidTarget: return "InvalidTarget";
        case OutcomeDetail::NoEffect: return "NoEffect";
    }
    return "?";
}

std::size_t blue_action_count(std::size_t host_count) { return kBlueActionKinds * host_count; }

std::size_t encode_blue_action(const BlueAction& a, std::size_t host_count) {
    if (a.target >= host_count) throw InputError("blue action target out of range");
    return static_cast<std::size_t>(a.kind) * host_count + a.target;
}

BlueAction decode_blue_action(std::size_t index, std::size_t host_count) {
    if (host_count == 0 || index >= blue_action_count(host_count))
        throw InputError("blue action index " + std::to_string(index) + " out of range");
    return {kAllBlueActionKinds[index / host_count], index % host_count};
}

std::string action_encoding_fingerprint(const NetworkState& state) {
    std::string fp = "kind*H+host;kinds=";
    for (std::size_t k = 0; k < kBlueActionKinds; ++k) {
        if (k) fp += ',';
        fp += to_string(kAllBlueActionKinds[k]);
    }
    fp += ";H=" + std::to_string(state.host_count());
    return fp;
}

// ---------------------------------------------------------------------------
// Blue

ActionOutcome apply_patch(NetworkState& state, HostId target) {
    if (!state.valid_host(target)) return ActionOutcome::fail(OutcomeDetail::InvalidTarget);
    auto& h = state.hosts[target];
    h.patch_score = std::min(1.0, h.patch_score + kPatchIncrement);
    return ActionOutcome::ok();
}

ActionOutcome apply_isolate(NetworkState& state, HostId target) {
    if (!state.valid_host(target)) return ActionOutcome::fail(OutcomeDetail::InvalidTarget);
    if (state.isolation_bits[target]) return ActionOutcome::fail(OutcomeDetail::NoEffect);
    state.isolation_bits[target] = true;
    return ActionOutcome::ok();
}

ActionOutcome apply_unisolate(NetworkState& state, HostId target) {
    if (!state.valid_host(target)) return ActionOutcome::fail(OutcomeDetail::InvalidTarget);
    if (!state.isolation_bits[target]) return ActionOutcome::fail(OutcomeDetail::NoEffect);
    state.isolation_bits[target] = false;
    return ActionOutcome::ok();
}

ActionOutcome apply_analyze(NetworkState& state, HostId target) {
    if (!state.valid_host(target)) return ActionOutcome::fail(OutcomeDetail::InvalidTarget);
    auto& h = state.hosts[target];
    switch (h.true_compromise) {
        case CompromiseLevel::Clean: h.blue_belief = BlueBelief::BelievedClean; break;
        case CompromiseLevel::UserLevel: h.blue_belief = BlueBelief::BelievedUser; break;
        case CompromiseLevel::Privileged: h.blue_belief = BlueBelief::BelievedPrivileged; break;
    }
    return ActionOutcome::ok();
}

ActionOutcome apply_remove(NetworkState& state, HostId target) {
    if (!state.valid_host(target)) return ActionOutcome::fail(OutcomeDetail::InvalidTarget);
    if (state.red_sessions[target] != CompromiseLevel::UserLevel)
        return ActionOutcome::fail(OutcomeDetail::NoEffect);
    state.clear_session(target);
    state.hosts[target].blue_belief = BlueBelief::BelievedClean;
    return ActionOutcome::ok();
}

ActionOutcome apply_restore(NetworkState& state, HostId target) {
    if (!state.valid_host(target)) return ActionOutcome::fail(OutcomeDetail::InvalidTarget);
    state.clear_session(target);
    auto& h = state.hosts[target];
    h.blue_belief = BlueBelief::BelievedClean;
    h.patch_score = 0.0;
    state.restore_used_this_step = true;
    return ActionOutcome::ok();
}

ActionOutcome apply_blue(NetworkState& state, const BlueAction& action) {
    switch (action.kind) {
        case BlueActionKind::Analyze: return apply_analyze(state, action.target);
        case BlueActionKind::Remove: return apply_remove(state, action.target);
        case BlueActionKind::Restore: return apply_restore(state, action.target);
        case BlueActionKind::Patch: return apply_patch(state, action.target);
        case BlueActionKind::Isolate: return apply_isolate(state, action.target);
        case BlueActionKind::Unisolate: return apply_unisolate(state, action.target);
    }
    return ActionOutcome::fail(OutcomeDetail::InvalidTarget);
}

// ---------------------------------------------------------------------------
// Red

SourcePick pick_red_source(const NetworkState& state, SubnetId subnet) {
    bool any_routed = false;
    for (HostId h = 0; h < state.host_count(); ++h) {
        if (!state.red_sessions[h] || !subnet_routable(state, h, subnet)) continue;
        any_routed = true;
        if (!state.isolation_bits[h]) return {OutcomeDetail::Ok, h};
    }
    return {any_routed ? OutcomeDetail::BlockedByIsolation : OutcomeDetail::NoSession, 0};
}

DiscoveryResult red_discover_systems(const NetworkState& state, SubnetId subnet) {
    if (subnet >= state.subnet_count()) return {ActionOutcome::fail(OutcomeDetail::InvalidTarget), {}};
    const auto pick = pick_red_source(state, subnet);
    if (pick.detail != OutcomeDetail::Ok) return {ActionOutcome::fail(pick.detail), {}};
    DiscoveryResult result{ActionOutcome::ok(), {}};
    for (HostId h : state.hosts_in_subnet(subnet))
        if (reachable(state, pick.source, h)) result.visible.push_back(h);
    return result;
}

namespace {

bool targetable(const NetworkState& state, const ScenarioConfig& scenario, HostId h) {
    return state.valid_host(h) && scenario.is_red_target(h);
}

// Patch check then decrement. Returns true when the attempt passes the check.
bool patch_check(Host& host, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    const bool passed = !(u < host.patch_score);
    host.patch_score = std::max(0.0, host.patch_score - kRedPatchDecrement);
    return passed;
}

}  // namespace

ActionOutcome red_discover_services(NetworkState& state, const ScenarioConfig& scenario, HostId target) {
    if (!targetable(state, scenario, target)) return ActionOutcome::fail(OutcomeDetail::InvalidTarget);
    const auto pick = pick_red_source(state, state.hosts[target].subnet_id);
    if (pick.detail == OutcomeDetail::NoSession) return ActionOutcome::fail(OutcomeDetail::NoSession);
    if (pick.detail != OutcomeDetail::Ok || state.isolation_bits[target])
        return ActionOutcome::fail(OutcomeDetail::BlockedByIsolation);
    state.hosts[target].activity = Activity::Scan;
    return ActionOutcome::ok();
}

ActionOutcome red_exploit(NetworkState& state, const ScenarioConfig& scenario, HostId src, HostId dst, Rng& rng) {
    if (!targetable(state, scenario, dst) || !state.valid_host(src) || src == dst)
        return ActionOutcome::fail(OutcomeDetail::InvalidTarget);
    if (!state.red_sessions[src]) return ActionOutcome::fail(OutcomeDetail::NoSession);
    if (state.isolation_bits[src] || state.isolation_bits[dst])
        return ActionOutcome::fail(OutcomeDetail::BlockedByIsolation);
    if (!reachable(state, src, dst)) return ActionOutcome::fail(OutcomeDetail::NoSession);

    auto& host = state.hosts[dst];
    if (!patch_check(host, rng)) return ActionOutcome::fail(OutcomeDetail::FailedPatchCheck);

    state.grant_session(dst, CompromiseLevel::UserLevel);
    std::bernoulli_distribution detected(kExploitDetectionProbability);
    if (detected(rng)) {
        host.activity = Activity::Exploit;
        if (host.blue_belief == BlueBelief::BelievedClean) host.blue_belief = BlueBelief::Unknown;
    }
    return ActionOutcome::ok();
}

ActionOutcome red_privilege_escalate(NetworkState& state, const ScenarioConfig& scenario, HostId target, Rng& rng) {
    if (!targetable(state, scenario, target)) return ActionOutcome::fail(OutcomeDetail::InvalidTarget);
    const auto s = state.red_sessions[target];
    if (!s) return ActionOutcome::fail(OutcomeDetail::NoSession);
    if (*s == CompromiseLevel::Privileged) return ActionOutcome::fail(OutcomeDetail::NoEffect);
    if (state.isolation_bits[target]) return ActionOutcome::fail(OutcomeDetail::BlockedByIsolation);
    if (!patch_check(state.hosts[target], rng)) return ActionOutcome::fail(OutcomeDetail::FailedPatchCheck);
    state.grant_session(target, CompromiseLevel::Privileged);
    return ActionOutcome::ok();
}

ActionOutcome red_impact(NetworkState& state, const ScenarioConfig& scenario, HostId target) {
    if (!state.valid_host(target) || target != scenario.impact_target)
        return ActionOutcome::fail(OutcomeDetail::InvalidTarget);
    if (state.red_sessions[target] != CompromiseLevel::Privileged)
        return ActionOutcome::fail(OutcomeDetail::NoSession);
    if (state.isolation_bits[target]) return ActionOutcome::fail(OutcomeDetail::BlockedByIsolation);
    state.impacted_this_step = true;
    return ActionOutcome::ok();
}

DiscoveryResult apply_red(NetworkState& state, const ScenarioConfig& scenario, const RedAction& action, Rng& rng) {
    switch (action.kind) {
        case RedActionKind::DiscoverRemoteSystems: return red_discover_systems(state, action.subnet);
        case RedActionKind::DiscoverNetworkServices: return {red_discover_services(state, scenario, action.target), {}};
        case RedActionKind::ExploitRemoteService:
            return {red_exploit(state, scenario, action.source, action.target, rng), {}};
        case RedActionKind::PrivilegeEscalate: return {red_privilege_escalate(state, scenario, action.target, rng), {}};
        case RedActionKind::Impact: return {red_impact(state, scenario, action.target), {}};
    }
    return {ActionOutcome::fail(OutcomeDetail::InvalidTarget), {}};
}

// ---------------------------------------------------------------------------

namespace {
std::string host_name(const NetworkState& state, HostId h) {
    return state.valid_host(h) ? state.hosts[h].name : "#" + std::to_string(h);
}
}  // namespace

std::string describe(const RedAction& a, const NetworkState& state) {
    std::string out(to_string(a.kind));
    switch (a.kind) {
        case RedActionKind::DiscoverRemoteSystems: return out + "(S" + std::to_string(a.subnet + 1) + ")";
        case RedActionKind::ExploitRemoteService:
            return out + "(" + host_name(state, a.source) + "->" + host_name(state, a.target) + ")";
        default: return out + "(" + host_name(state, a.target) + ")";
    }
}

std::string describe(const BlueAction& a, const NetworkState& state) {
    return std::string(to_string(a.kind)) + "(" + host_name(state, a.target) + ")";
}

}  // namespace acd
