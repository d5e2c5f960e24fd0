#pragma once

// Ground-truth model of the defended network: hosts, subnets, isolation
// bits, patch scores and red sessions. The blue agent never reads
// true_compromise; it sees blue_belief and activity only.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace acd {

using HostId = std::size_t;
using SubnetId = std::size_t;

enum class HostPriority { User, Enterprise, Operational };
enum class CompromiseLevel { Clean, UserLevel, Privileged };
enum class BlueBelief { BelievedClean, Unknown, BelievedUser, BelievedPrivileged };
enum class Activity { NoActivity, Scan, Exploit };

std::string_view to_string(HostPriority p);
std::string_view to_string(CompromiseLevel c);
std::string_view to_string(BlueBelief b);
std::string_view to_string(Activity a);
HostPriority priority_from_string(std::string_view s);

struct Host {
    HostId host_id = 0;
    std::string name;
    SubnetId subnet_id = 0;
    HostPriority priority = HostPriority::User;
    double patch_score = 0.0;
    CompromiseLevel true_compromise = CompromiseLevel::Clean;
    BlueBelief blue_belief = BlueBelief::BelievedClean;
    Activity activity = Activity::NoActivity;
};

struct HostSpec {
    std::string name;
    SubnetId subnet = 0;
    HostPriority priority = HostPriority::User;
};

struct ScenarioConfig {
    std::vector<std::string> subnet_names;
    std::vector<HostSpec> hosts;
    std::vector<std::pair<SubnetId, SubnetId>> adjacency;
    HostId foothold = 0;
    CompromiseLevel foothold_level = CompromiseLevel::Privileged;
    std::vector<HostId> red_targets;
    HostId impact_target = 0;
    // Hosts the scripted attacker pivots through, foothold first.
    std::vector<HostId> attack_path;

    // Throws ConfigError when an invariant is violated.
    void validate() const;
    std::optional<HostId> find_host(std::string_view name) const;
    HostId host_by_name(std::string_view name) const;
    bool is_red_target(HostId h) const;
};

class NetworkState {
public:
    NetworkState() = default;
    explicit NetworkState(const ScenarioConfig& scenario);

    std::vector<Host> hosts;
    std::vector<bool> isolation_bits;
    // One entry per host: nullopt, UserLevel or Privileged.
    std::vector<std::optional<CompromiseLevel>> red_sessions;
    std::size_t timestep = 0;
    bool impacted_this_step = false;
    bool restore_used_this_step = false;

    std::size_t host_count() const { return hosts.size(); }
    std::size_t subnet_count() const { return adjacency_.size(); }
    bool subnets_adjacent(SubnetId a, SubnetId b) const;
    bool valid_host(HostId h) const { return h < hosts.size(); }
    void require_host(HostId h) const;

    bool has_session(HostId h) const;
    std::optional<CompromiseLevel> session(HostId h) const;
    bool red_has_any_session() const;
    // Upgrades to `level` if higher than the current session; keeps ground truth in sync.
    void grant_session(HostId h, CompromiseLevel level);
    void clear_session(HostId h);

    // Start-of-timestep housekeeping: flags and detected activity cleared.
    void begin_timestep();

    std::vector<HostId> hosts_in_subnet(SubnetId s) const;

private:
    std::vector<std::vector<bool>> adjacency_;
};

std::pair<ScenarioConfig, NetworkState> build_default_scenario();
ScenarioConfig default_scenario_config();

// Isolation on either endpoint blocks; distinct non-adjacent subnets block.
bool reachable(const NetworkState& state, HostId src, HostId dst);
// Whether a host can reach anything in `subnet` at the routing level.
bool subnet_routable(const NetworkState& state, HostId src, SubnetId subnet);

std::size_t count_isolated(const NetworkState& state);
std::size_t count_believed_compromised(const NetworkState& state);

void to_json(nlohmann::json& j, const ScenarioConfig& s);
void from_json(const nlohmann::json& j, ScenarioConfig& s);

}  // namespace acd
