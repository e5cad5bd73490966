#include <cmath>

#include <stdexcept>

#include "doctest.h"
#include "fbs/scenario.hpp"

using namespace fbs;

TEST_CASE("spawn users") {
    const Region region{5000.0, 5000.0};
    UserSpawnParams up;
    const auto users = spawn_users(region, up, 11);
    REQUIRE(users.size() == 80);
    for (const auto& u : users) {
        CHECK(region.contains(u.pos.x, u.pos.y));
        CHECK(u.pos.z >= 0.0);
        CHECK(u.pos.z <= up.max_user_altitude);
        CHECK(u.demand_mbps > 0.0);
        CHECK(u.demand_mbps <= up.max_demand_mbps);
    }
    const auto again = spawn_users(region, up, 11);
    for (std::size_t k = 0; k < users.size(); ++k) {
        CHECK(users[k].pos == again[k].pos);
        CHECK(users[k].demand_mbps == again[k].demand_mbps);
        CHECK(users[k].mobility == again[k].mobility);
    }
    up.count = 0;
    CHECK_THROWS_AS(spawn_users(region, up, 1), std::invalid_argument);
}

TEST_CASE("mean demand converges to half the maximum") {
    UserSpawnParams up;
    up.count = 100000;
    const auto users = spawn_users({5000, 5000}, up, 5);
    double sum = 0.0;
    int rooftop = 0;
    for (const auto& u : users) {
        sum += u.demand_mbps;
        rooftop += u.pos.z > 0.0 ? 1 : 0;
    }
    CHECK(std::abs(sum / users.size() - 3.0) < 0.05);
    CHECK(std::abs(rooftop / 100000.0 - up.rooftop_fraction) < 0.01);
}

TEST_CASE("mean speed and snapshot interval") {
    CHECK(mean_speed({100, 0, 0, 1, 10}) == 0.0);
    CHECK(mean_speed({50, 30, 20, 1, 10}) == doctest::Approx(2.3).epsilon(1e-14));
    CHECK(mean_speed({0, 100, 0, 1, 10}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(snapshot_interval(110.0, {50, 30, 20, 1, 10}) == doctest::Approx(47.82608695652174).epsilon(1e-13));
    CHECK(snapshot_interval(225.0, {0, 100, 0, 15, 10}) == doctest::Approx(15.0).epsilon(1e-14));
    CHECK_THROWS_AS(snapshot_interval(110.0, {100, 0, 0, 1, 10}), std::domain_error);
    CHECK_THROWS_AS(MobilityMix({50, 30, 30, 1, 10}).validate(), std::invalid_argument);
    CHECK(FleetParams{}.r_min() == doctest::Approx(110.0).epsilon(1e-12));
}

TEST_CASE("random waypoint step") {
    const Region region{5000.0, 5000.0};
    const MobilityMix mix;
    User ped;
    ped.pos = {0, 0, 0};
    ped.mobility = MobilityClass::pedestrian;
    ped.waypoint = Point3{100, 0, 0};
    ped.demand_mbps = 1.0;
    User still;
    still.id = 1;
    still.pos = {10, 20, 30};
    still.demand_mbps = 2.0;
    const auto next = step_random_waypoint({ped, still}, region, mix, 15.0, 3);
    CHECK(next[0].pos.x == doctest::Approx(15.0).epsilon(1e-14));
    CHECK(next[0].pos.y == 0.0);
    CHECK(next[1].pos == still.pos);
    CHECK_THROWS_AS(step_random_waypoint({ped}, region, mix, 0.0, 3), std::invalid_argument);
}

TEST_CASE("random waypoint keeps users inside and bounds displacement") {
    const Region region{1000.0, 800.0};
    UserSpawnParams up;
    up.count = 200;
    auto users = spawn_users(region, up, 9);
    for (int step = 0; step < 50; ++step) {
        const double dt = 20.0 + step;
        const auto next = step_random_waypoint(users, region, up.mix, dt, derive_seed(9, 100 + step));
        for (std::size_t k = 0; k < users.size(); ++k) {
            const double moved = distance3(users[k].pos, next[k].pos);
            CHECK(moved <= up.mix.speed_of(users[k].mobility) * dt + 1e-9);
            CHECK(region.contains(next[k].pos.x, next[k].pos.y));
            CHECK(next[k].pos.z == users[k].pos.z);
            CHECK(next[k].demand_mbps == users[k].demand_mbps);
        }
        users = next;
    }
}

TEST_CASE("obstacles respect bounds, clearance and the base") {
    const Region region{5000, 5000};
    const ObstacleParams op;
    const Point3 base{0, 0, 0};
    const auto boxes = generate_obstacles(region, op, base, 21);
    REQUIRE(boxes.size() == static_cast<std::size_t>(op.count));
    for (std::size_t a = 0; a < boxes.size(); ++a) {
        const auto& b = boxes[a];
        CHECK_NOTHROW(b.validate());
        CHECK(b.height() >= op.min_height);
        CHECK(b.height() <= op.max_height);
        CHECK(region.contains(b.min_corner.x, b.min_corner.y));
        CHECK(region.contains(b.max_corner.x, b.max_corner.y));
        CHECK_FALSE(b.footprint_contains(base.x, base.y, op.clearance));
        for (std::size_t c = a + 1; c < boxes.size(); ++c) {
            const auto& o = boxes[c];
            const bool apart = b.max_corner.x + op.clearance <= o.min_corner.x ||
                               o.max_corner.x + op.clearance <= b.min_corner.x ||
                               b.max_corner.y + op.clearance <= o.min_corner.y ||
                               o.max_corner.y + op.clearance <= b.min_corner.y;
            CHECK(apart);
        }
    }
    const auto again = generate_obstacles(region, op, base, 21);
    for (std::size_t a = 0; a < boxes.size(); ++a) {
        CHECK(boxes[a].min_corner == again[a].min_corner);
        CHECK(boxes[a].max_corner == again[a].max_corner);
    }
}
