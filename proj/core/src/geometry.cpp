#include "fbs/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fbs {

namespace {

// Points closer than this to a face count as touching it.
constexpr double kTouchTolerance = 1e-9;

}  // namespace

double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

double distance3(const Point3& p, const Point3& q) {
    const double dx = p.x - q.x;
    const double dy = p.y - q.y;
    const double dz = p.z - q.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double horizontal_distance(const Point3& p, const Point3& q) { return std::hypot(p.x - q.x, p.y - q.y); }

Point3 lerp(const Point3& a, const Point3& b, double s) {
    return {a.x + s * (b.x - a.x), a.y + s * (b.y - a.y), a.z + s * (b.z - a.z)};
}

bool Region::contains(double x, double y) const { return x >= 0.0 && x <= width && y >= 0.0 && y <= height; }

double Region::diagonal() const { return std::hypot(width, height); }

bool BoxObstacle::contains_strictly(const Point3& p) const {
    return p.x > min_corner.x + kTouchTolerance && p.x < max_corner.x - kTouchTolerance &&
           p.y > min_corner.y + kTouchTolerance && p.y < max_corner.y - kTouchTolerance &&
           p.z > min_corner.z + kTouchTolerance && p.z < max_corner.z - kTouchTolerance;
}

bool BoxObstacle::footprint_contains(double x, double y, double margin) const {
    return x >= min_corner.x - margin && x <= max_corner.x + margin && y >= min_corner.y - margin &&
           y <= max_corner.y + margin;
}

void BoxObstacle::validate() const {
    if (min_corner.z != 0.0) {
        throw std::invalid_argument("obstacle must stand on the ground (min z = 0)");
    }
    if (!(min_corner.x < max_corner.x && min_corner.y < max_corner.y && min_corner.z < max_corner.z)) {
        throw std::invalid_argument("obstacle min corner must be below max corner on every axis");
    }
}

bool segment_intersects_box(const Point3& a, const Point3& b, const BoxObstacle& box) {
    const std::array<double, 3> origin{a.x, a.y, a.z};
    const std::array<double, 3> dir{b.x - a.x, b.y - a.y, b.z - a.z};
    const std::array<double, 3> lo{box.min_corner.x, box.min_corner.y, box.min_corner.z};
    const std::array<double, 3> hi{box.max_corner.x, box.max_corner.y, box.max_corner.z};

    // Open parameter interval (enter, leave) on which the segment is strictly inside.
    double enter = 0.0;
    double leave = 1.0;
    for (int axis = 0; axis < 3; ++axis) {
        const double inner_lo = lo[axis] + kTouchTolerance;
        const double inner_hi = hi[axis] - kTouchTolerance;
        if (std::abs(dir[axis]) < 1e-15) {
            if (!(origin[axis] > inner_lo && origin[axis] < inner_hi)) {
                return false;
            }
            continue;
        }
        double s1 = (inner_lo - origin[axis]) / dir[axis];
        double s2 = (inner_hi - origin[axis]) / dir[axis];
        if (s1 > s2) {
            std::swap(s1, s2);
        }
        enter = std::max(enter, s1);
        leave = std::min(leave, s2);
        if (enter >= leave) {
            return false;
        }
    }
    return enter < leave;
}

std::vector<Point3> discretize_edges(const BoxObstacle& box, double spacing) {
    if (!(spacing > 0.0)) {
        throw std::invalid_argument("edge spacing must be positive");
    }
    const double x0 = box.min_corner.x;
    const double x1 = box.max_corner.x;
    const double y0 = box.min_corner.y;
    const double y1 = box.max_corner.y;
    const double top = box.max_corner.z;

    std::vector<Point3> points;
    const std::array<std::array<double, 2>, 4> footprint{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};

    // Vertical edges, ground corner to top corner inclusive.
    const auto vertical_steps = static_cast<int>(std::ceil(top / spacing - 1e-12));
    for (const auto& c : footprint) {
        for (int k = 0; k <= vertical_steps; ++k) {
            const double z = (k == vertical_steps) ? top : top * k / vertical_steps;
            points.push_back({c[0], c[1], z});
        }
    }
    // Top edges, interior points only (corners already emitted).
    for (std::size_t e = 0; e < footprint.size(); ++e) {
        const auto& p = footprint[e];
        const auto& q = footprint[(e + 1) % footprint.size()];
        const double length = std::hypot(q[0] - p[0], q[1] - p[1]);
        const auto steps = static_cast<int>(std::ceil(length / spacing - 1e-12));
        for (int k = 1; k < steps; ++k) {
            const double s = static_cast<double>(k) / steps;
            points.push_back({p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1]), top});
        }
    }
    return points;
}

double distance_to_segment(const Point3& p, const Point3& a, const Point3& b) {
    const Point3 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) {
        return distance3(p, a);
    }
    const double s = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance3(p, lerp(a, b, s));
}

double distance_to_edges(const Point3& p, const BoxObstacle& box) {
    const Point3& lo = box.min_corner;
    const Point3& hi = box.max_corner;
    const std::array<Point3, 8> c{{{lo.x, lo.y, lo.z},
                                   {hi.x, lo.y, lo.z},
                                   {hi.x, hi.y, lo.z},
                                   {lo.x, hi.y, lo.z},
                                   {lo.x, lo.y, hi.z},
                                   {hi.x, lo.y, hi.z},
                                   {hi.x, hi.y, hi.z},
                                   {lo.x, hi.y, hi.z}}};
    constexpr std::array<std::array<int, 2>, 12> edges{
        {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}}};
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : edges) {
        best = std::min(best, distance_to_segment(p, c[e[0]], c[e[1]]));
    }
    return best;
}

}  // namespace fbs
