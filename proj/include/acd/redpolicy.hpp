#pragma once

// Scripted attackers: a fixed-path "B-line" policy and a uniform-random one.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "acd/actions.hpp"

namespace acd {

// Idle red turns (no session anywhere) before the foothold is re-established.
inline constexpr std::size_t kFootholdIdleTurns = 3;

struct RedKnowledge {
    std::set<HostId> discovered_hosts;
    std::set<HostId> scanned_hosts;
};

enum class PathStage { Discover, Scan, Exploit, Escalate, Impact };

struct PathStep {
    PathStage stage;
    HostId host;      // host the stage acts on
    HostId from;      // pivot host supplying the session
    SubnetId subnet;  // subnet of `host`
};

// Ordered attack path derived from a scenario's attack_path hosts. For each
// hop: Discover(subnet) -> Scan -> Exploit -> Escalate; then Impact forever.
std::vector<PathStep> build_attack_path(const ScenarioConfig& scenario);

struct BLineState {
    std::vector<PathStep> attack_path;
    std::size_t cursor = 0;
    std::optional<RedAction> last_action;

    static BLineState start(const ScenarioConfig& scenario);
    bool at_impact_loop() const { return cursor + 1 >= attack_path.size(); }
};

RedAction stage_action(const PathStep& step);

// Earliest stage to resume from given which path sessions survive.
std::size_t fallback_stage(const NetworkState& state, const BLineState& mem);

RedAction bline_next(const NetworkState& state, const BLineState& mem);
BLineState bline_observe(BLineState mem, const NetworkState& state, const RedAction& action,
                         const ActionOutcome& outcome);

// Every red action currently legal given sessions, isolation and knowledge.
std::vector<RedAction> legal_red_actions(const NetworkState& state, const ScenarioConfig& scenario,
                                         const RedKnowledge& knowledge);
RedAction random_red_next(const NetworkState& state, const ScenarioConfig& scenario,
                          const RedKnowledge& knowledge, Rng& rng);

enum class RedPolicyKind { BLine, Random };
RedPolicyKind red_policy_from_string(std::string_view name);
std::string_view to_string(RedPolicyKind k);

// Episode-scoped attacker: policy memory, knowledge and the foothold
// re-establishment timer.
class RedAgent {
public:
    RedAgent(RedPolicyKind kind, const ScenarioConfig& scenario);

    RedPolicyKind kind() const { return kind_; }

    // Runs one red turn against `state`.
    struct Turn {
        RedAction action;
        DiscoveryResult result;
        bool foothold_restored = false;
    };
    Turn act(NetworkState& state, const ScenarioConfig& scenario, Rng& rng);

    const BLineState& bline() const { return bline_; }
    const RedKnowledge& knowledge() const { return knowledge_; }
    std::size_t idle_turns() const { return idle_turns_; }

private:
    void learn(const RedAction& action, const DiscoveryResult& result);

    RedPolicyKind kind_;
    BLineState bline_;
    RedKnowledge knowledge_;
    std::size_t idle_turns_ = 0;
};

}  // namespace acd
