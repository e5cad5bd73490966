#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "fbs/routing.hpp"
#include "fbs/scenario.hpp"

using namespace fbs;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Exhaustive simple-path search: shortest length and the lexicographically smallest
// vertex sequence of that length.
std::pair<double, std::vector<int>> enumerate_paths(const VisibilityGraph& g, int s, int t) {
    double best = kInf;
    std::vector<int> best_path;
    std::vector<int> path{s};
    std::vector<char> on(static_cast<std::size_t>(g.size()), 0);
    on[static_cast<std::size_t>(s)] = 1;
    std::function<void(int, double)> dfs = [&](int v, double len) {
        if (v == t) {
            if (len < best - 1e-9 || (std::abs(len - best) <= 1e-9 && path < best_path)) {
                best = std::min(best, len);
                best_path = path;
            }
            return;
        }
        for (int u = 0; u < g.size(); ++u) {
            if (on[static_cast<std::size_t>(u)] || !g.adjacent(v, u)) {
                continue;
            }
            on[static_cast<std::size_t>(u)] = 1;
            path.push_back(u);
            dfs(u, len + distance3(g.vertex(v), g.vertex(u)));
            path.pop_back();
            on[static_cast<std::size_t>(u)] = 0;
        }
    };
    dfs(s, 0.0);
    return {best, best_path};
}

bool route_clear(const Route& r, const std::vector<BoxObstacle>& boxes) {
    for (std::size_t k = 1; k < r.waypoints.size(); ++k) {
        for (const auto& b : boxes) {
            if (segment_intersects_box(r.waypoints[k - 1], r.waypoints[k], b)) {
                return false;
            }
        }
    }
    return true;
}

double polyline_length(const Route& r) {
    double len = 0.0;
    for (std::size_t k = 1; k < r.waypoints.size(); ++k) {
        len += distance3(r.waypoints[k - 1], r.waypoints[k]);
    }
    return len;
}

Route straight(const Point3& a, const Point3& b) {
    Route r;
    r.waypoints = {a, b};
    r.length = distance3(a, b);
    return r;
}

}  // namespace

TEST_CASE("free space graph") {
    const Point3 a{0, 0, 100};
    const Point3 b{300, 400, 100};
    const auto g = build_graph({a}, {b}, {0, 0, 0}, {}, 10.0);
    CHECK(g.size() == 3);
    CHECK(g.adjacent(g.origin_vertex(0), g.destination_vertex(0)));
    CHECK(g.weight(g.origin_vertex(0), g.destination_vertex(0)) == doctest::Approx(500.0));
    const auto r = shortest_path(g, g.origin_vertex(0), g.destination_vertex(0));
    CHECK(r.waypoints.size() == 2);
    CHECK(r.length == doctest::Approx(500.0));
    const auto self = shortest_path(g, g.origin_vertex(0), g.origin_vertex(0));
    CHECK(self.waypoints.size() == 1);
    CHECK(self.length == 0.0);
}

TEST_CASE("box between two points blocks the direct edge") {
    const std::vector<BoxObstacle> boxes{{{0, 0, 0}, {100, 100, 150}, 0}};
    const Point3 s{-50, 50, 100};
    const Point3 t{150, 50, 100};
    const auto g = build_graph({s}, {t}, {-200, -200, 0}, boxes, 10.0);
    const int vs = g.origin_vertex(0);
    const int vt = g.destination_vertex(0);
    CHECK_FALSE(g.adjacent(vs, vt));
    int visible_edge_points = 0;
    for (int v = 0; v < g.size(); ++v) {
        if (v != vs && v != vt && v != g.base_vertex() && g.adjacent(vs, v)) {
            ++visible_edge_points;
        }
    }
    CHECK(visible_edge_points > 0);
    // Every edge agrees with a per-pair intersection check.
    for (int u = 0; u < g.size(); ++u) {
        for (int v = u + 1; v < g.size(); ++v) {
            CHECK(g.adjacent(u, v) == !segment_intersects_box(g.vertex(u), g.vertex(v), boxes[0]));
            CHECK(g.adjacent(u, v) == g.adjacent(v, u));
        }
    }
    CHECK_THROWS_AS(build_graph({{50, 50, 20}}, {t}, {-200, -200, 0}, boxes, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(build_graph({s}, {t}, {-200, -200, 0}, boxes, 0.0), std::invalid_argument);
}

TEST_CASE("shortest path equals exhaustive enumeration on small graphs") {
    Rng rng(99);
    int checked = 0;
    for (int inst = 0; inst < 25; ++inst) {
        const double x0 = rng.uniform(20, 80);
        const double y0 = rng.uniform(20, 80);
        const double w = rng.uniform(20, 60);
        const double d = rng.uniform(20, 60);
        const double h = rng.uniform(30, 150);
        // Spacing wider than every edge keeps only the 8 corners: 11 vertices in all.
        const std::vector<BoxObstacle> boxes{{{x0, y0, 0}, {x0 + w, y0 + d, h}, 0}};
        auto outside = [&]() {
            while (true) {
                const Point3 p{rng.uniform(0, 160), rng.uniform(0, 160), rng.uniform(0, 180)};
                if (!boxes[0].contains_strictly(p)) {
                    return p;
                }
            }
        };
        const auto g = build_graph({outside()}, {outside()}, outside(), boxes, 1000.0);
        REQUIRE(g.size() <= 12);
        for (int s = 0; s < g.size(); ++s) {
            for (int t = 0; t < g.size(); ++t) {
                const auto [best, best_path] = enumerate_paths(g, s, t);
                if (!std::isfinite(best)) {
                    CHECK_THROWS_AS(shortest_path(g, s, t), Unreachable);
                    continue;
                }
                const auto r = shortest_path(g, s, t);
                CHECK(std::abs(r.length - best) <= 1e-9 * std::max(1.0, best));
                CHECK(r.vertices == best_path);
                ++checked;
            }
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("one-corner wrap converges to the analytic optimum") {
    const double spacing = 10.0;
    const std::vector<BoxObstacle> boxes{{{0, 0, 0}, {100, 100, 150}, 0}};
    // The straight line x + y = 30 cuts the corner at the origin.
    const Point3 s{-50, 80, 105};
    const Point3 t{80, -50, 105};
    const Point3 corner{0, 0, 105};
    const double analytic = distance3(s, corner) + distance3(corner, t);
    for (double sp : {spacing, 5.0, 2.5}) {
        const auto g = build_graph({s}, {t}, {-300, -300, 0}, boxes, sp);
        const auto r = shortest_path(g, g.origin_vertex(0), g.destination_vertex(0));
        CHECK(r.length >= analytic - 1e-9);
        CHECK(r.length <= analytic + 2.0 * sp);
        CHECK(route_clear(r, boxes));
    }
}

TEST_CASE("two-corner wrap uses two edge points and beats every single detour") {
    const double spacing = 10.0;
    const std::vector<BoxObstacle> boxes{{{0, 0, 0}, {100, 100, 150}, 0}};
    const Point3 s{-50, 30, 105};
    const Point3 t{150, 30, 105};
    const double analytic = distance3(s, {0, 0, 105}) + 100.0 + distance3({100, 0, 105}, t);
    const auto g = build_graph({s}, {t}, {-300, -300, 0}, boxes, spacing);
    const int vs = g.origin_vertex(0);
    const int vt = g.destination_vertex(0);
    const auto r = shortest_path(g, vs, vt);
    CHECK(r.length >= analytic - 1e-9);
    CHECK(r.length <= analytic + 2.0 * spacing);
    CHECK(r.vertices.size() >= 4);
    double single = kInf;
    for (int v = 0; v < g.size(); ++v) {
        if (g.adjacent(vs, v) && g.adjacent(v, vt)) {
            single = std::min(single, g.weight(vs, v) + g.weight(v, vt));
        }
    }
    CHECK(r.length <= single + 1e-9);
}

TEST_CASE("all pairs matches pairwise searches") {
    const Region region{1500, 1500};
    ObstacleParams op;
    op.count = 6;
    const Point3 base{0, 0, 0};
    const auto boxes = generate_obstacles(region, op, base, 4);
    Rng rng(8);
    auto free_point = [&]() {
        while (true) {
            const Point3 p{rng.uniform(0, 1500), rng.uniform(0, 1500), rng.uniform(110, 200)};
            bool ok = true;
            for (const auto& b : boxes) {
                ok = ok && !b.contains_strictly(p);
            }
            if (ok) {
                return p;
            }
        }
    };
    std::vector<Point3> origins, targets;
    for (int k = 0; k < 5; ++k) {
        origins.push_back(free_point());
        targets.push_back(free_point());
    }
    targets.push_back(origins[1]);  // shared vertex
    const auto g = build_graph(origins, targets, base, boxes, 25.0);
    const auto table = all_pairs(g);
    REQUIRE(table.rows == origins.size() + 1);
    REQUIRE(table.cols == targets.size() + 1);
    CHECK(table.length(table.base_row(), table.base_col()) == 0.0);
    for (std::size_t r = 0; r < table.rows; ++r) {
        const int vr = r < origins.size() ? g.origin_vertex(r) : g.base_vertex();
        for (std::size_t c = 0; c < table.cols; ++c) {
            const int vc = c < targets.size() ? g.destination_vertex(c) : g.base_vertex();
            const auto& route = table.at(r, c);
            REQUIRE(route);
            const auto direct = shortest_path(g, vr, vc);
            CHECK(route->length == doctest::Approx(direct.length).epsilon(1e-12));
            CHECK(route->vertices == direct.vertices);
            CHECK(route->length >= distance3(g.vertex(vr), g.vertex(vc)) - 1e-9);
            CHECK(route->length == doctest::Approx(polyline_length(*route)).epsilon(1e-12));
            CHECK(route_clear(*route, boxes));
            const auto back = shortest_path(g, vc, vr);
            CHECK(back.length == doctest::Approx(route->length).epsilon(1e-12));
        }
    }
}

TEST_CASE("collision detection on closed-form cases") {
    const double speed = 10.0;
    const double radius = 5.0;
    const std::vector<Route> parallel{straight({0, 0, 200}, {1000, 0, 200}), straight({0, 500, 200}, {1000, 500, 200})};
    CHECK(detect_collisions(parallel, speed, 10.0, {0.0, 0.0}).empty());

    const std::vector<Route> crossing{straight({-100, 0, 200}, {100, 0, 200}), straight({0, -100, 200}, {0, 100, 200})};
    const auto c = detect_collisions(crossing, speed, radius, {0.0, 0.0});
    REQUIRE(c.size() == 1);
    CHECK(c[0].first == 0);
    CHECK(c[0].second == 1);
    CHECK(c[0].time == doctest::Approx(10.0));
    CHECK(c[0].separation == doctest::Approx(0.0));
    const double half = radius / std::sqrt(2.0) / speed;
    CHECK(c[0].window_start == doctest::Approx(10.0 - half));
    CHECK(c[0].window_end == doctest::Approx(10.0 + half));

    CHECK(detect_collisions(crossing, speed, radius, {0.0, 2.0 * radius / speed}).empty());

    const auto offsets = stagger_departures(c, crossing, speed, radius, 60.0);
    CHECK(offsets[0] == 0.0);
    CHECK(offsets[1] == doctest::Approx(2.0 * half + 1e-6).epsilon(1e-9));
    CHECK(detect_collisions(crossing, speed, radius, offsets).empty());
    CHECK(crossing[1].waypoints.front() == Point3{0, -100, 200});

    CHECK(stagger_departures({}, crossing, speed, radius, 60.0) == std::vector<double>{0.0, 0.0});
    CHECK_THROWS_AS(stagger_departures(c, crossing, speed, radius, 20.0), ScheduleOverrun);
}

TEST_CASE("landed FBSs do not conflict") {
    Route landed;
    landed.waypoints = {{0, 0, 0}};
    Route other;
    other.waypoints = {{0, 0, 0}};
    CHECK(detect_collisions({landed, other}, 10.0, 5.0, {0.0, 0.0}).empty());
    Route hover1;
    hover1.waypoints = {{0, 0, 100}};
    Route hover2;
    hover2.waypoints = {{1, 0, 100}};
    const auto c = detect_collisions({hover1, hover2}, 10.0, 5.0, {0.0, 0.0});
    CHECK(c.size() == 1);
    CHECK_THROWS_AS(stagger_departures(c, {hover1, hover2}, 10.0, 5.0, 15.0), ScheduleOverrun);
}

TEST_CASE("staggering random crossings leaves no conflict") {
    Rng rng(31);
    for (int inst = 0; inst < 100; ++inst) {
        std::vector<Route> routes;
        for (int k = 0; k < 6; ++k) {
            const Point3 a{rng.uniform(0, 200), rng.uniform(0, 200), 150};
            const Point3 b{rng.uniform(0, 200), rng.uniform(0, 200), 150};
            routes.push_back(straight(a, b));
        }
        const auto c = detect_collisions(routes, 15.0, 5.0, std::vector<double>(routes.size(), 0.0), 1000.0);
        try {
            const auto off = stagger_departures(c, routes, 15.0, 5.0, 1000.0);
            CHECK(detect_collisions(routes, 15.0, 5.0, off, 1000.0).empty());
            for (double o : off) {
                CHECK(o >= 0.0);
            }
        } catch (const ScheduleOverrun&) {
            // Two routes ending within the radius of each other cannot be separated by waiting.
        }
    }
}

TEST_CASE("waypoint CSV") {
    std::ostringstream os;
    write_waypoints_csv(os, {7}, {straight({0, 0, 0}, {1.5, 2, 3})});
    CHECK(os.str() == "fbs_id,seq,x,y,z\n7,0,0,0,0\n7,1,1.5,2,3\n");
    CHECK_THROWS_AS(write_waypoints_csv(os, {1, 2}, {straight({0, 0, 0}, {1, 1, 1})}), std::invalid_argument);
}
