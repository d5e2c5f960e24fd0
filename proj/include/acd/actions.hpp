#pragma once

// Blue and red action semantics over a caller-owned NetworkState.

#include <array>
#include <cstddef>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "acd/netmodel.hpp"

namespace acd {

using Rng = std::mt19937_64;

inline constexpr double kPatchIncrement = 0.3;
inline constexpr double kRedPatchDecrement = 0.35;
inline constexpr double kExploitDetectionProbability = 0.95;

enum class BlueActionKind { Analyze, Remove, Restore, Patch, Isolate, Unisolate };
inline constexpr std::size_t kBlueActionKinds = 6;
inline constexpr std::array<BlueActionKind, kBlueActionKinds> kAllBlueActionKinds = {
    BlueActionKind::Analyze, BlueActionKind::Remove,  BlueActionKind::Restore,
    BlueActionKind::Patch,   BlueActionKind::Isolate, BlueActionKind::Unisolate};

std::string_view to_string(BlueActionKind k);

struct BlueAction {
    BlueActionKind kind = BlueActionKind::Analyze;
    HostId target = 0;

    friend bool operator==(const BlueAction&, const BlueAction&) = default;
};

// Flat encoding: index = kind_index * host_count + host_index.
std::size_t blue_action_count(std::size_t host_count);
std::size_t encode_blue_action(const BlueAction& a, std::size_t host_count);
BlueAction decode_blue_action(std::size_t index, std::size_t host_count);
// Persisted with model weights so a policy is never replayed against a
// different action ordering.
std::string action_encoding_fingerprint(const NetworkState& state);

enum class RedActionKind {
    DiscoverRemoteSystems,
    DiscoverNetworkServices,
    ExploitRemoteService,
    PrivilegeEscalate,
    Impact,
};

std::string_view to_string(RedActionKind k);

struct RedAction {
    RedActionKind kind = RedActionKind::DiscoverRemoteSystems;
    SubnetId subnet = 0;  // DiscoverRemoteSystems only
    HostId source = 0;    // ExploitRemoteService only
    HostId target = 0;    // every kind except DiscoverRemoteSystems

    static RedAction discover_systems(SubnetId s) { return {RedActionKind::DiscoverRemoteSystems, s, 0, 0}; }
    static RedAction discover_services(HostId h) { return {RedActionKind::DiscoverNetworkServices, 0, 0, h}; }
    static RedAction exploit(HostId src, HostId dst) { return {RedActionKind::ExploitRemoteService, 0, src, dst}; }
    static RedAction escalate(HostId h) { return {RedActionKind::PrivilegeEscalate, 0, 0, h}; }
    static RedAction impact(HostId h) { return {RedActionKind::Impact, 0, 0, h}; }

    friend bool operator==(const RedAction&, const RedAction&) = default;
};

enum class OutcomeDetail { Ok, BlockedByIsolation, FailedPatchCheck, NoSession, InvalidTarget, NoEffect };

std::string_view to_string(OutcomeDetail d);

struct ActionOutcome {
    bool success = false;
    OutcomeDetail detail = OutcomeDetail::NoEffect;

    static constexpr ActionOutcome ok() { return {true, OutcomeDetail::Ok}; }
    static constexpr ActionOutcome fail(OutcomeDetail d) { return {d == OutcomeDetail::Ok, d}; }
    friend bool operator==(const ActionOutcome&, const ActionOutcome&) = default;
};

// --- blue ------------------------------------------------------------------

ActionOutcome apply_patch(NetworkState& state, HostId target);
ActionOutcome apply_isolate(NetworkState& state, HostId target);
ActionOutcome apply_unisolate(NetworkState& state, HostId target);
ActionOutcome apply_analyze(NetworkState& state, HostId target);
ActionOutcome apply_remove(NetworkState& state, HostId target);
ActionOutcome apply_restore(NetworkState& state, HostId target);
ActionOutcome apply_blue(NetworkState& state, const BlueAction& action);

// --- red -------------------------------------------------------------------

struct DiscoveryResult {
    ActionOutcome outcome;
    std::vector<HostId> visible;
};

DiscoveryResult red_discover_systems(const NetworkState& state, SubnetId subnet);
ActionOutcome red_discover_services(NetworkState& state, const ScenarioConfig& scenario, HostId target);
ActionOutcome red_exploit(NetworkState& state, const ScenarioConfig& scenario, HostId src, HostId dst, Rng& rng);
ActionOutcome red_privilege_escalate(NetworkState& state, const ScenarioConfig& scenario, HostId target, Rng& rng);
ActionOutcome red_impact(NetworkState& state, const ScenarioConfig& scenario, HostId target);

// Dispatches on kind. `visible` is filled only for DiscoverRemoteSystems.
DiscoveryResult apply_red(NetworkState& state, const ScenarioConfig& scenario, const RedAction& action, Rng& rng);

// First non-isolated session host with a route into `subnet`. Used for the
// actions whose source is implicit.
struct SourcePick {
    OutcomeDetail detail = OutcomeDetail::NoSession;
    HostId source = 0;
};
SourcePick pick_red_source(const NetworkState& state, SubnetId subnet);

std::string describe(const RedAction& a, const NetworkState& state);
std::string describe(const BlueAction& a, const NetworkState& state);

}  // namespace acd
