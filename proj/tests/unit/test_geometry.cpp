#include <cmath>
#include <set>
#include <tuple>

#include <stdexcept>

#include "doctest.h"
#include "fbs/geometry.hpp"
#include "fbs/scenario.hpp"

using namespace fbs;

namespace {

BoxObstacle unit_box() { return {{0, 0, 0}, {1, 1, 1}, 0}; }

// Slab test written independently: the open segment meets the open box.
bool slab_oracle(const Point3& a, const Point3& b, const BoxObstacle& box) {
    const double lo[3] = {box.min_corner.x, box.min_corner.y, box.min_corner.z};
    const double hi[3] = {box.max_corner.x, box.max_corner.y, box.max_corner.z};
    const double p[3] = {a.x, a.y, a.z};
    const double d[3] = {b.x - a.x, b.y - a.y, b.z - a.z};
    double t0 = 0.0;
    double t1 = 1.0;
    for (int k = 0; k < 3; ++k) {
        if (d[k] == 0.0) {
            if (p[k] <= lo[k] || p[k] >= hi[k]) {
                return false;
            }
            continue;
        }
        double ta = (lo[k] - p[k]) / d[k];
        double tb = (hi[k] - p[k]) / d[k];
        if (ta > tb) {
            std::swap(ta, tb);
        }
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    return t0 < t1;
}

}  // namespace

TEST_CASE("distance3 basic values") {
    CHECK(distance3({0, 0, 0}, {0, 0, 0}) == 0.0);
    CHECK(distance3({0, 0, 0}, {3, 4, 0}) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(distance3({1, 2, 3}, {4, 6, 15}) == doctest::Approx(13.0).epsilon(1e-15));
}

TEST_CASE("distance3 is a metric on random triples") {
    Rng rng(42);
    for (int k = 0; k < 10000; ++k) {
        const Point3 p{rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3), rng.uniform(0, 600)};
        const Point3 q{rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3), rng.uniform(0, 600)};
        const Point3 r{rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3), rng.uniform(0, 600)};
        CHECK(distance3(p, q) == distance3(q, p));
        CHECK(distance3(p, r) <= distance3(p, q) + distance3(q, r) + 1e-9);
        CHECK(distance3(p, p) == 0.0);
    }
}

TEST_CASE("segment_intersects_box examples") {
    const auto box = unit_box();
    CHECK(segment_intersects_box({-1, 0.5, 0.5}, {2, 0.5, 0.5}, box));
    CHECK_FALSE(segment_intersects_box({-1, 5, 5}, {2, 5, 5}, box));
    CHECK_FALSE(segment_intersects_box({0, 0, 1}, {1, 1, 1}, box));
    // Along an edge and through a corner only.
    CHECK_FALSE(segment_intersects_box({0, 0, -1}, {0, 0, 2}, box));
    CHECK(segment_intersects_box({-1, -1, 0.5}, {1, 1, 0.5}, box) == slab_oracle({-1, -1, 0.5}, {1, 1, 0.5}, box));
    // Segment ending inside the box.
    CHECK(segment_intersects_box({-1, 0.5, 0.5}, {0.5, 0.5, 0.5}, box));
}

TEST_CASE("segment_intersects_box agrees with the slab oracle and is symmetric") {
    Rng rng(7);
    const auto box = BoxObstacle{{10, 20, 0}, {50, 45, 80}, 0};
    int hits = 0;
    for (int k = 0; k < 20000; ++k) {
        // Snap to a coarse grid so faces, edges and corners are hit exactly.
        auto coord = [&](double lo, double hi) { return std::round(rng.uniform(lo, hi) / 5.0) * 5.0; };
        const Point3 a{coord(-20, 80), coord(-10, 80), coord(0, 120)};
        const Point3 b{coord(-20, 80), coord(-10, 80), coord(0, 120)};
        if (a == b) {
            continue;
        }
        const bool got = segment_intersects_box(a, b, box);
        CHECK(got == slab_oracle(a, b, box));
        CHECK(got == segment_intersects_box(b, a, box));
        hits += got ? 1 : 0;
    }
    CHECK(hits > 1000);
}

TEST_CASE("discretize_edges of a unit box gives the corners") {
    const auto pts = discretize_edges(unit_box(), 10.0);
    CHECK(pts.size() == 8);
    std::set<std::tuple<double, double, double>> uniq;
    for (const auto& p : pts) {
        uniq.insert({p.x, p.y, p.z});
        CHECK((p.x == 0.0 || p.x == 1.0));
        CHECK((p.y == 0.0 || p.y == 1.0));
        CHECK((p.z == 0.0 || p.z == 1.0));
    }
    CHECK(uniq.size() == 8);
}

TEST_CASE("discretize_edges counts on a tall box") {
    const BoxObstacle box{{0, 0, 0}, {40, 40, 100}, 0};
    const auto pts = discretize_edges(box, 10.0);
    // Oracle count: each vertical edge 0..100 step 10 (11 points), each top edge adds
    // 3 interior points; corners counted once.
    const std::size_t expected = 4 * 11 + 4 * 3;
    CHECK(pts.size() == expected);
    int on_first_vertical = 0;
    for (const auto& p : pts) {
        CHECK(p.z >= 0.0);
        CHECK(distance_to_edges(p, box) <= 1e-9);
        if (p.x == 0.0 && p.y == 0.0) {
            ++on_first_vertical;
        }
    }
    CHECK(on_first_vertical == 11);
}

TEST_CASE("discretize_edges spacing bound and validation") {
    const BoxObstacle box{{3, 7, 0}, {38.5, 71.25, 47.3}, 0};
    const double spacing = 6.0;
    const auto pts = discretize_edges(box, spacing);
    for (const auto& p : pts) {
        CHECK(distance_to_edges(p, box) <= 1e-9);
        // Every point has a neighbour on its edge no farther than the spacing.
        double nearest = 1e300;
        for (const auto& q : pts) {
            if (!(q == p)) {
                nearest = std::min(nearest, distance3(p, q));
            }
        }
        CHECK(nearest <= spacing + 1e-9);
    }
    CHECK_THROWS_AS(discretize_edges(box, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(discretize_edges(box, -1.0), std::invalid_argument);
}

TEST_CASE("box validation") {
    CHECK_NOTHROW(unit_box().validate());
    CHECK_THROWS_AS((BoxObstacle{{0, 0, 1}, {1, 1, 2}, 0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((BoxObstacle{{0, 0, 0}, {0, 1, 2}, 0}).validate(), std::invalid_argument);
}
