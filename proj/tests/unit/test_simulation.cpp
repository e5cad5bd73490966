#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "fbs/simulation.hpp"

using namespace fbs;

namespace {

Scenario small_scenario(int users, bool stationary, int obstacles = 4) {
    Scenario sc;
    sc.region = {1000.0, 1000.0};
    sc.base = {0.0, 0.0, 0.0};
    sc.user_params.count = users;
    if (stationary) {
        sc.user_params.mix = {100.0, 0.0, 0.0, 1.0, 10.0};
    }
    sc.obstacle_params.count = obstacles;
    return sc;
}

SimulationConfig small_config(int snapshots) {
    SimulationConfig cfg;
    cfg.snapshots = snapshots;
    cfg.dt = 15.0;
    cfg.placement.time_limit_s = 2.0;
    return cfg;
}

void check_invariants(const EpisodeTimeline& tl) {
    REQUIRE_FALSE(tl.snapshots.empty());
    const std::size_t pool = tl.snapshots.front().fleet_after.members.size();
    const double scale = std::max(1.0, tl.initial_energy);
    CHECK(std::abs(tl.ledger_imbalance()) <= 1e-9 * scale);
    for (const auto& s : tl.snapshots) {
        CHECK(s.fleet_after.members.size() == pool);
        for (const auto& m : s.fleet_after.members) {
            CHECK(m.energy >= -1e-9);
            CHECK(m.energy <= m.capacity * (1.0 + 1e-12));
        }
        CHECK(s.metrics.serving <= s.metrics.required);
        CHECK(s.metrics.unserved_points >= 0);
        std::vector<Route> flown;
        for (const auto& mv : s.moves) {
            CHECK(mv.distance <= tl.dist_th + 1e-6);
            flown.push_back(mv.route);
            for (std::size_t k = 1; k < mv.route.waypoints.size(); ++k) {
                for (const auto& b : tl.scenario.obstacles) {
                    CHECK_FALSE(segment_intersects_box(mv.route.waypoints[k - 1], mv.route.waypoints[k], b));
                }
            }
        }
        REQUIRE(s.departure_offsets.size() == flown.size());
        const auto& fp = tl.scenario.fleet;
        CHECK(detect_collisions(flown, fp.speed, fp.safety_radius, s.departure_offsets, tl.dt).empty());
    }
}

}  // namespace

TEST_CASE("stationary users keep every station in place") {
    const auto sc = make_scenario(small_scenario(30, true), 3);
    const auto cfg = small_config(2);
    const auto tl = run_episode(sc, cfg, 3);
    REQUIRE(tl.snapshots.size() == 2);
    const auto& a = tl.snapshots[0];
    const auto& b = tl.snapshots[1];
    CHECK(a.required == b.required);
    CHECK(b.ledger.flight == 0.0);
    CHECK(b.metrics.flight_distance == 0.0);
    CHECK(b.ledger.hover == doctest::Approx(b.metrics.required * cfg.energy.e_hover));
    CHECK(b.metrics.serving == b.metrics.required);
    CHECK(b.metrics.unserved_points == 0);
    for (const auto& mv : b.moves) {
        CHECK(mv.distance == 0.0);
        CHECK(mv.before == FbsStatus::serving);
        CHECK(mv.after == FbsStatus::serving);
    }
    check_invariants(tl);
}

TEST_CASE("a single snapshot flies nothing") {
    const auto sc = make_scenario(small_scenario(25, false), 9);
    const auto tl = run_episode(sc, small_config(1), 9);
    REQUIRE(tl.snapshots.size() == 1);
    CHECK(tl.snapshots[0].metrics.flight_distance == 0.0);
    CHECK(tl.snapshots[0].moves.empty());
    CHECK(tl.dt == 15.0);
    CHECK(tl.dist_th == doctest::Approx(225.0));
}

TEST_CASE("drained stations are relieved and flown home") {
    const auto sc = make_scenario(small_scenario(20, true, 0), 4);
    auto cfg = small_config(6);
    cfg.energy.e_hover = 0.3 * cfg.energy.capacity();
    const auto tl = run_episode(sc, cfg, 4);
    bool went_home = false;
    bool launched = false;
    for (const auto& s : tl.snapshots) {
        for (const auto& mv : s.moves) {
            const auto& m = s.fleet_after.members[static_cast<std::size_t>(mv.fbs)];
            const bool homeward = m.destination < 0 && mv.after != FbsStatus::serving;
            went_home = went_home || (mv.before == FbsStatus::serving && homeward);
            launched = launched || (mv.before == FbsStatus::at_base && mv.after != FbsStatus::at_base);
        }
    }
    CHECK(went_home);
    CHECK(launched);
    check_invariants(tl);
}

TEST_CASE("episodes are deterministic in the seed") {
    const auto sc = make_scenario(small_scenario(40, false), 21);
    const auto cfg = small_config(4);
    const auto a = run_episode(sc, cfg, 21);
    const auto b = run_episode(sc, cfg, 21);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        CHECK(a.snapshots[k].required == b.snapshots[k].required);
        CHECK(a.snapshots[k].assignment == b.snapshots[k].assignment);
        CHECK(a.snapshots[k].ledger.flight == b.snapshots[k].ledger.flight);
        CHECK(a.snapshots[k].metrics.served_demand == b.snapshots[k].metrics.served_demand);
    }
    const auto c = run_episode(sc, cfg, 22);
    CHECK(c.snapshots[0].users.front().pos != a.snapshots[0].users.front().pos);
}

TEST_CASE("randomized episodes keep the ledger and fleet invariants") {
    for (std::uint64_t seed = 100; seed < 108; ++seed) {
        const auto sc = make_scenario(small_scenario(15 + static_cast<int>(seed % 4) * 10, false), seed);
        const auto tl = run_episode(sc, small_config(5), seed);
        CHECK(tl.snapshots.size() == 5);
        check_invariants(tl);
    }
}

TEST_CASE("recharge fills packs and never overshoots") {
    Rng rng(77);
    for (int step = 0; step < 1000; ++step) {
        FleetState f;
        for (int k = 0; k < 4; ++k) {
            FbsState m;
            m.id = k;
            m.capacity = 1000.0;
            m.energy = rng.uniform(0.0, 1000.0);
            m.status = static_cast<FbsStatus>(rng.index(4));
            f.members.push_back(m);
        }
        const double dt = rng.uniform(0.0, 30.0);
        const double rate = rng.uniform(0.0, 50.0);
        const auto g = apply_recharge(f, dt, rate);
        for (std::size_t k = 0; k < 4; ++k) {
            const auto& before = f.members[k];
            const auto& after = g.members[k];
            CHECK(after.energy <= after.capacity);
            if (before.status != FbsStatus::charging) {
                CHECK(after.energy == before.energy);
                CHECK(after.status == before.status);
            } else {
                CHECK(after.energy == doctest::Approx(std::min(before.capacity, before.energy + rate * dt)));
                CHECK((after.status == FbsStatus::at_base) == (after.energy >= after.capacity));
            }
        }
    }
    CHECK_THROWS_AS(apply_recharge({}, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("configuration checks") {
    SimulationConfig cfg;
    cfg.snapshots = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SimulationConfig{};
    cfg.dt = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    auto sc = small_scenario(10, true);
    cfg = SimulationConfig{};
    CHECK_THROWS(resolve_interval(sc, cfg));
    sc.user_params.mix = {50.0, 30.0, 20.0, 1.0, 10.0};
    CHECK(resolve_interval(sc, cfg) == doctest::Approx(sc.fleet.r_min() / 2.3));
}

TEST_CASE("an undersized pool aborts with the partial timeline") {
    const auto sc = make_scenario(small_scenario(60, false), 5);
    auto cfg = small_config(3);
    cfg.pool_size = 1;
    try {
        run_episode(sc, cfg, 5);
        FAIL("expected an abort");
    } catch (const EpisodeAborted& e) {
        CHECK(std::string(e.what()).find("pool") != std::string::npos);
        CHECK(e.partial().snapshots.empty());
    }
}
