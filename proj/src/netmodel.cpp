#include "acd/netmodel.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "acd/errors.hpp"

namespace acd {

std::string_view to_string(HostPriority p) {
    switch (p) {
        case HostPriority::User: return "user";
        case HostPriority::Enterprise: return "enterprise";
        case HostPriority::Operational: return "operational";
    }
    return "?";
}

std::string_view to_string(CompromiseLevel c) {
    switch (c) {
        case CompromiseLevel::Clean: return "clean";
        case CompromiseLevel::UserLevel: return "user";
        case CompromiseLevel::Privileged: return "privileged";
    }
    return "?";
}

std::string_view to_string(BlueBelief b) {
    switch (b) {
        case BlueBelief::BelievedClean: return "clean";
        case BlueBelief::Unknown: return "unknown";
        case BlueBelief::BelievedUser: return "user";
        case BlueBelief::BelievedPrivileged: return "privileged";
    }
    return "?";
}

std::string_view to_string(Activity a) {
    switch (a) {
        case Activity::NoActivity: return "none";
        case Activity::Scan: return "scan";
        case Activity::Exploit: return "exploit";
    }
    return "?";
}

HostPriority priority_from_string(std::string_view s) {
    if (s == "user") return HostPriority::User;
    if (s == "enterprise") return HostPriority::Enterprise;
    if (s == "operational") return HostPriority::Operational;
    throw InputError("unknown host priority '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// ScenarioConfig

void ScenarioConfig::validate() const {
    if (hosts.empty()) throw ConfigError("scenario has no hosts");
    if (subnet_names.empty()) throw ConfigError("scenario has no subnets");
    for (const auto& h : hosts) {
        if (h.subnet >= subnet_names.size())
            throw ConfigError("host '" + h.name + "' references unknown subnet");
    }
    for (std::size_t i = 0; i < hosts.size(); ++i)
        for (std::size_t k = i + 1; k < hosts.size(); ++k)
            if (hosts[i].name == hosts[k].name)
                throw ConfigError("duplicate host name '" + hosts[i].name + "'");
    for (auto [a, b] : adjacency) {
        if (a >= subnet_names.size() || b >= subnet_names.size())
            throw ConfigError("adjacency references unknown subnet");
        if (a == b) throw ConfigError("adjacency must be irreflexive");
    }
    if (foothold >= hosts.size()) throw ConfigError("red foothold host does not exist");
    if (foothold_level == CompromiseLevel::Clean)
        throw ConfigError("red foothold must hold a session");
    if (impact_target >= hosts.size()) throw ConfigError("impact target does not exist");
    for (HostId t : red_targets)
        if (t >= hosts.size()) throw ConfigError("red target does not exist");
    if (attack_path.empty() || attack_path.front() != foothold)
        throw ConfigError("attack path must start at the foothold");
    for (HostId h : attack_path)
        if (h >= hosts.size()) throw ConfigError("attack path host does not exist");
    if (attack_path.back() != impact_target)
        throw ConfigError("attack path must end at the impact target");
}

std::optional<HostId> ScenarioConfig::find_host(std::string_view name) const {
    for (std::size_t i = 0; i < hosts.size(); ++i)
        if (hosts[i].name == name) return i;
    return std::nullopt;
}

HostId ScenarioConfig::host_by_name(std::string_view name) const {
    if (auto h = find_host(name)) return *h;
    throw InputError("unknown host '" + std::string(name) + "'");
}

bool ScenarioConfig::is_red_target(HostId h) const {
    return std::find(red_targets.begin(), red_targets.end(), h) != red_targets.end();
}

ScenarioConfig default_scenario_config() {
    ScenarioConfig s;
    s.subnet_names = {"S1", "S2", "S3"};
    for (int i = 0; i < 5; ++i)
        s.hosts.push_back({"User" + std::to_string(i), 0, HostPriority::User});
    for (int i = 0; i < 3; ++i)
        s.hosts.push_back({"Enterprise" + std::to_string(i), 1, HostPriority::Enterprise});
    s.hosts.push_back({"Defender", 1, HostPriority::Enterprise});
    s.hosts.push_back({"Op_Server0", 2, HostPriority::Operational});
    for (int i = 0; i < 3; ++i)
        s.hosts.push_back({"Op_Host" + std::to_string(i), 2, HostPriority::Operational});
    s.adjacency = {{0, 1}, {1, 2}};
    s.foothold = s.host_by_name("User0");
    s.foothold_level = CompromiseLevel::Privileged;
    for (HostId h = 0; h < s.hosts.size(); ++h)
        if (s.hosts[h].name != "Defender") s.red_targets.push_back(h);
    s.impact_target = s.host_by_name("Op_Server0");
    s.attack_path = {s.foothold, s.host_by_name("Enterprise0"), s.impact_target};
    return s;
}

std::pair<ScenarioConfig, NetworkState> build_default_scenario() {
    auto scenario = default_scenario_config();
    NetworkState state(scenario);
    return {std::move(scenario), std::move(state)};
}

// ---------------------------------------------------------------------------
// NetworkState

NetworkState::NetworkState(const ScenarioConfig& scenario) {
    scenario.validate();
    hosts.reserve(scenario.hosts.size());
    for (std::size_t i = 0; i < scenario.hosts.size(); ++i) {
        const auto& spec = scenario.hosts[i];
        Host h;
        h.host_id = i;
        h.name = spec.name;
        h.subnet_id = spec.subnet;
        h.priority = spec.priority;
        hosts.push_back(std::move(h));
    }
    isolation_bits.assign(hosts.size(), false);
    red_sessions.assign(hosts.size(), std::nullopt);

    const auto n = scenario.subnet_names.size();
    adjacency_.assign(n, std::vector<bool>(n, false));
    for (auto [a, b] : scenario.adjacency) {
        adjacency_[a][b] = true;
        adjacency_[b][a] = true;
    }
    grant_session(scenario.foothold, scenario.foothold_level);
}

bool NetworkState::subnets_adjacent(SubnetId a, SubnetId b) const {
    if (a >= adjacency_.size() || b >= adjacency_.size()) return false;
    return adjacency_[a][b];
}

void NetworkState::require_host(HostId h) const {
    if (!valid_host(h)) throw InputError("invalid host id " + std::to_string(h));
}

bool NetworkState::has_session(HostId h) const {
    return valid_host(h) && red_sessions[h].has_value();
}

std::optional<CompromiseLevel> NetworkState::session(HostId h) const {
    require_host(h);
    return red_sessions[h];
}

bool NetworkState::red_has_any_session() const {
    return std::any_of(red_sessions.begin(), red_sessions.end(),
                       [](const auto& s) { return s.has_value(); });
}

void NetworkState::grant_session(HostId h, CompromiseLevel level) {
    require_host(h);
    if (level == CompromiseLevel::Clean) return;
    auto& s = red_sessions[h];
    if (!s || static_cast<int>(*s) < static_cast<int>(level)) s = level;
    hosts[h].true_compromise = *s;
}

void NetworkState::clear_session(HostId h) {
    require_host(h);
    red_sessions[h].reset();
    hosts[h].true_compromise = CompromiseLevel::Clean;
}

void NetworkState::begin_timestep() {
    impacted_this_step = false;
    restore_used_this_step = false;
    for (auto& h : hosts) h.activity = Activity::NoActivity;
}

std::vector<HostId> NetworkState::hosts_in_subnet(SubnetId s) const {
    std::vector<HostId> out;
    for (const auto& h : hosts)
        if (h.subnet_id == s) out.push_back(h.host_id);
    return out;
}

// ---------------------------------------------------------------------------

bool subnet_routable(const NetworkState& state, HostId src, SubnetId subnet) {
    state.require_host(src);
    const SubnetId from = state.hosts[src].subnet_id;
    return from == subnet || state.subnets_adjacent(from, subnet);
}

bool reachable(const NetworkState& state, HostId src, HostId dst) {
    state.require_host(src);
    state.require_host(dst);
    if (state.isolation_bits[src] || state.isolation_bits[dst]) return false;
    return subnet_routable(state, src, state.hosts[dst].subnet_id);
}

std::size_t count_isolated(const NetworkState& state) {
    return static_cast<std::size_t>(
        std::count(state.isolation_bits.begin(), state.isolation_bits.end(), true));
}

std::size_t count_believed_compromised(const NetworkState& state) {
    return static_cast<std::size_t>(std::count_if(
        state.hosts.begin(), state.hosts.end(),
        [](const Host& h) { return h.blue_belief != BlueBelief::BelievedClean; }));
}

// ---------------------------------------------------------------------------
// JSON: hosts and path entries are referenced by name.

void to_json(nlohmann::json& j, const ScenarioConfig& s) {
    j = nlohmann::json::object();
    j["subnets"] = s.subnet_names;
    auto hosts = nlohmann::json::array();
    for (const auto& h : s.hosts)
        hosts.push_back({{"name", h.name},
                         {"subnet", s.subnet_names.at(h.subnet)},
                         {"priority", std::string(to_string(h.priority))}});
    j["hosts"] = hosts;
    auto adj = nlohmann::json::array();
    for (auto [a, b] : s.adjacency) adj.push_back({s.subnet_names.at(a), s.subnet_names.at(b)});
    j["adjacency"] = adj;
    j["foothold"] = {{"host", s.hosts.at(s.foothold).name},
                     {"level", std::string(to_string(s.foothold_level))}};
    auto targets = nlohmann::json::array();
    for (HostId t : s.red_targets) targets.push_back(s.hosts.at(t).name);
    j["red_targets"] = targets;
    j["impact_target"] = s.hosts.at(s.impact_target).name;
    auto path = nlohmann::json::array();
    for (HostId h : s.attack_path) path.push_back(s.hosts.at(h).name);
    j["attack_path"] = path;
}

void from_json(const nlohmann::json& j, ScenarioConfig& s) {
    s = ScenarioConfig{};
    s.subnet_names = j.at("subnets").get<std::vector<std::string>>();
    auto subnet_index = [&](const std::string& name) -> SubnetId {
        auto it = std::find(s.subnet_names.begin(), s.subnet_names.end(), name);
        if (it == s.subnet_names.end()) throw ConfigError("unknown subnet '" + name + "'");
        return static_cast<SubnetId>(it - s.subnet_names.begin());
    };
    for (const auto& h : j.at("hosts")) {
        s.hosts.push_back({h.at("name").get<std::string>(),
                           subnet_index(h.at("subnet").get<std::string>()),
                           priority_from_string(h.at("priority").get<std::string>())});
    }
    for (const auto& pair : j.at("adjacency")) {
        if (!pair.is_array() || pair.size() != 2) throw ConfigError("adjacency entries are pairs");
        s.adjacency.emplace_back(subnet_index(pair[0].get<std::string>()),
                                 subnet_index(pair[1].get<std::string>()));
    }
    const auto& foot = j.at("foothold");
    s.foothold = s.host_by_name(foot.at("host").get<std::string>());
    const auto level = foot.value("level", std::string("privileged"));
    if (level == "privileged") s.foothold_level = CompromiseLevel::Privileged;
    else if (level == "user") s.foothold_level = CompromiseLevel::UserLevel;
    else throw ConfigError("foothold level must be 'user' or 'privileged'");
    if (j.contains("red_targets")) {
        for (const auto& t : j.at("red_targets")) s.red_targets.push_back(s.host_by_name(t.get<std::string>()));
    } else {
        for (HostId h = 0; h < s.hosts.size(); ++h) s.red_targets.push_back(h);
    }
    s.impact_target = s.host_by_name(j.at("impact_target").get<std::string>());
    for (const auto& h : j.at("attack_path")) s.attack_path.push_back(s.host_by_name(h.get<std::string>()));
    s.validate();
}

}  // namespace acd
