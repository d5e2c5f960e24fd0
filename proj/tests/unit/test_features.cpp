#include "doctest.h"

#include "acd/actions.hpp"
#include "acd/features.hpp"

using namespace acd;

TEST_CASE("scalar encodings") {
    CHECK(activity_to_value(Activity::NoActivity) == 0.0);
    CHECK(activity_to_value(Activity::Scan) == 0.3);
    CHECK(activity_to_value(Activity::Exploit) == 1.0);
    CHECK(belief_to_value(BlueBelief::BelievedClean) == 0.0);
    CHECK(belief_to_value(BlueBelief::Unknown) == 0.25);
    CHECK(belief_to_value(BlueBelief::BelievedUser) == 0.5);
    CHECK(belief_to_value(BlueBelief::BelievedPrivileged) == 1.0);
}

TEST_CASE("fresh state encodes to zeros") {
    auto [cfg, state] = build_default_scenario();
    const auto x = encode(state);
    CHECK(x.size() == 54);
    CHECK(feature_length(13) == 54);
    for (double v : x) CHECK(v == 0.0);
}

TEST_CASE("per-host quad and global slots") {
    auto [cfg, state] = build_default_scenario();
    const HostId e0 = cfg.host_by_name("Enterprise0");
    state.hosts[e0].activity = Activity::Scan;
    apply_patch(state, e0);
    auto x = encode(state);
    const std::size_t base = e0 * kFeaturesPerHost;
    CHECK(x[base + 0] == doctest::Approx(0.3));
    CHECK(x[base + 1] == 0.0);
    CHECK(x[base + 2] == 0.0);
    CHECK(x[base + 3] == doctest::Approx(0.3));

    apply_isolate(state, 4);
    state.hosts[7].blue_belief = BlueBelief::BelievedUser;
    x = encode(state);
    CHECK(x[4 * kFeaturesPerHost + 2] == 1.0);
    CHECK(x[52] == doctest::Approx(1.0 / 13.0));
    CHECK(x[53] == doctest::Approx(1.0 / 13.0));
}

TEST_CASE("features stay in the unit interval") {
    auto [cfg, state] = build_default_scenario();
    Rng rng(3);
    std::uniform_int_distribution<int> pick(0, 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        for (auto& h : state.hosts) {
            h.activity = static_cast<Activity>(pick(rng) % 3);
            h.blue_belief = static_cast<BlueBelief>(pick(rng));
            h.patch_score = unit(rng);
        }
        for (std::size_t h = 0; h < state.host_count(); ++h) state.isolation_bits[h] = pick(rng) == 0;
        for (double v : encode(state)) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("layout fingerprint names the roster") {
    auto [cfg, state] = build_default_scenario();
    const auto fp = feature_layout_fingerprint(state);
    CHECK(fp.find("Op_Server0") != std::string::npos);
    auto other = state;
    std::swap(other.hosts[0].name, other.hosts[1].name);
    CHECK(feature_layout_fingerprint(other) != fp);
}
