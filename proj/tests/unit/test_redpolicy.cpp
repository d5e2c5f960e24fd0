#include "doctest.h"

#include <algorithm>

#include "acd/redpolicy.hpp"

using namespace acd;

namespace {

struct Fixture {
    ScenarioConfig cfg = default_scenario_config();
    NetworkState state{cfg};
    HostId id(const char* name) const { return cfg.host_by_name(name); }
};

}  // namespace

TEST_CASE("attack path order") {
    Fixture f;
    const auto path = build_attack_path(f.cfg);
    REQUIRE(path.size() == 9);
    const HostId u0 = f.id("User0"), e0 = f.id("Enterprise0"), op = f.id("Op_Server0");
    const std::vector<RedAction> want = {
        RedAction::discover_systems(1), RedAction::discover_services(e0), RedAction::exploit(u0, e0),
        RedAction::escalate(e0),        RedAction::discover_systems(2),   RedAction::discover_services(op),
        RedAction::exploit(e0, op),     RedAction::escalate(op),          RedAction::impact(op)};
    for (std::size_t i = 0; i < path.size(); ++i) CHECK(stage_action(path[i]) == want[i]);
}

TEST_CASE("b-line runs the path and then impacts forever") {
    Fixture f;
    RedAgent red(RedPolicyKind::BLine, f.cfg);
    Rng rng(5);
    CHECK(bline_next(f.state, red.bline()) == RedAction::discover_systems(1));
    const auto op = f.id("Op_Server0");
    for (int turn = 1; turn <= 8; ++turn) {
        const auto t = red.act(f.state, f.cfg, rng);
        CHECK(t.result.outcome.success);
    }
    CHECK(f.state.session(op) == CompromiseLevel::Privileged);
    for (int turn = 9; turn <= 20; ++turn) {
        f.state.begin_timestep();
        const auto t = red.act(f.state, f.cfg, rng);
        CHECK(t.action == RedAction::impact(op));
        CHECK(t.result.outcome.success);
    }
}

TEST_CASE("b-line retries a failed exploit") {
    Fixture f;
    Rng rng(6);
    auto mem = BLineState::start(f.cfg);
    mem.cursor = 2;
    const auto a = bline_next(f.state, mem);
    CHECK(a == RedAction::exploit(f.cfg.foothold, f.id("Enterprise0")));
    mem = bline_observe(mem, f.state, a, ActionOutcome::fail(OutcomeDetail::FailedPatchCheck));
    CHECK(bline_next(f.state, mem) == a);

    const auto r = apply_red(f.state, f.cfg, a, rng);
    REQUIRE(r.outcome.success);
    mem = bline_observe(mem, f.state, a, r.outcome);
    CHECK(bline_next(f.state, mem) == RedAction::escalate(f.id("Enterprise0")));
}

TEST_CASE("b-line retries impact while isolated") {
    Fixture f;
    const auto op = f.id("Op_Server0");
    f.state.grant_session(f.id("Enterprise0"), CompromiseLevel::Privileged);
    f.state.grant_session(op, CompromiseLevel::Privileged);
    auto mem = BLineState::start(f.cfg);
    mem.cursor = 8;
    f.state.isolation_bits[op] = true;
    const auto a = bline_next(f.state, mem);
    CHECK(a == RedAction::impact(op));
    mem = bline_observe(mem, f.state, a, ActionOutcome::fail(OutcomeDetail::BlockedByIsolation));
    CHECK(bline_next(f.state, mem) == RedAction::impact(op));
    CHECK(f.state.session(op) == CompromiseLevel::Privileged);
}

TEST_CASE("b-line falls back after a restore") {
    Fixture f;
    RedAgent red(RedPolicyKind::BLine, f.cfg);
    Rng rng(7);
    for (int t = 0; t < 5; ++t) red.act(f.state, f.cfg, rng);
    apply_restore(f.state, f.id("Enterprise0"));
    CHECK(bline_next(f.state, red.bline()) == RedAction::discover_services(f.id("Enterprise0")));
}

TEST_CASE("fallback stage table") {
    Fixture f;
    auto mem = BLineState::start(f.cfg);
    const auto e0 = f.id("Enterprise0"), op = f.id("Op_Server0");
    CHECK(fallback_stage(f.state, mem) == 1);
    f.state.grant_session(e0, CompromiseLevel::UserLevel);
    CHECK(fallback_stage(f.state, mem) == 3);
    f.state.grant_session(e0, CompromiseLevel::Privileged);
    CHECK(fallback_stage(f.state, mem) == 5);
    f.state.grant_session(op, CompromiseLevel::UserLevel);
    CHECK(fallback_stage(f.state, mem) == 7);
    f.state.grant_session(op, CompromiseLevel::Privileged);
    CHECK(fallback_stage(f.state, mem) == 8);
    for (HostId h = 0; h < f.state.host_count(); ++h) f.state.clear_session(h);
    CHECK(fallback_stage(f.state, mem) == 0);
}

TEST_CASE("foothold re-established after idle turns") {
    Fixture f;
    RedAgent red(RedPolicyKind::BLine, f.cfg);
    Rng rng(8);
    f.state.clear_session(f.cfg.foothold);
    for (std::size_t i = 0; i < kFootholdIdleTurns; ++i) {
        const auto t = red.act(f.state, f.cfg, rng);
        CHECK_FALSE(t.foothold_restored);
        CHECK_FALSE(t.result.outcome.success);
        CHECK_FALSE(f.state.red_has_any_session());
    }
    const auto t = red.act(f.state, f.cfg, rng);
    CHECK(t.foothold_restored);
    CHECK(f.state.session(f.cfg.foothold) == CompromiseLevel::Privileged);
    CHECK(t.action == RedAction::discover_systems(1));
}

TEST_CASE("random red policy legality") {
    Fixture f;
    RedKnowledge k;
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        const auto a = random_red_next(f.state, f.cfg, k, rng);
        const auto legal = legal_red_actions(f.state, f.cfg, k);
        CHECK(std::find(legal.begin(), legal.end(), a) != legal.end());
        if (a.kind == RedActionKind::ExploitRemoteService) CHECK(a.source == f.cfg.foothold);
    }

    for (HostId h = 0; h < f.state.host_count(); ++h) f.state.isolation_bits[h] = true;
    CHECK(legal_red_actions(f.state, f.cfg, k).empty());
    CHECK(random_red_next(f.state, f.cfg, k, rng) == RedAction::discover_systems(0));
}

TEST_CASE("random red policy is reproducible") {
    Fixture a, b;
    RedAgent ra(RedPolicyKind::Random, a.cfg), rb(RedPolicyKind::Random, b.cfg);
    Rng g1(42), g2(42);
    for (int t = 0; t < 40; ++t) {
        a.state.begin_timestep();
        b.state.begin_timestep();
        const auto x = ra.act(a.state, a.cfg, g1);
        const auto y = rb.act(b.state, b.cfg, g2);
        CHECK(x.action == y.action);
        CHECK(x.result.outcome == y.result.outcome);
    }
    CHECK(red_policy_from_string("random") == RedPolicyKind::Random);
    CHECK(red_policy_from_string("bline") == RedPolicyKind::BLine);
    CHECK_THROWS(red_policy_from_string("meander"));
}
