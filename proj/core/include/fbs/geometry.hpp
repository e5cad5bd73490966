#pragma once

#include <cstddef>
#include <vector>

namespace fbs {

/// A point in the world frame, metres. z is height above ground.
struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Point3&, const Point3&) = default;
};

inline Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Point3 operator*(double s, const Point3& p) { return {s * p.x, s * p.y, s * p.z}; }

double dot(const Point3& a, const Point3& b);

/// Euclidean distance between two points.
double distance3(const Point3& p, const Point3& q);

/// Distance between the horizontal projections of two points.
double horizontal_distance(const Point3& p, const Point3& q);

/// Linear interpolation a + s (b - a).
Point3 lerp(const Point3& a, const Point3& b, double s);

/// Axis-aligned rectangular region on the ground, [0, width] x [0, height].
struct Region {
    double width = 5000.0;
    double height = 5000.0;

    bool contains(double x, double y) const;
    double diagonal() const;
};

/// A building: axis-aligned box standing on the ground.
struct BoxObstacle {
    Point3 min_corner;  // z must be 0
    Point3 max_corner;
    int id = 0;

    double height() const { return max_corner.z; }

    /// Strict interior test (points on a face or edge are outside).
    bool contains_strictly(const Point3& p) const;

    /// Closed test on the horizontal footprint, grown by `margin` on every side.
    bool footprint_contains(double x, double y, double margin = 0.0) const;

    /// Throws std::invalid_argument unless min_corner < max_corner component-wise and min z = 0.
    void validate() const;
};

/// True iff the open segment (a, b) passes through the interior of the box.
/// Segments that only touch a face, edge or corner are not blocked.
bool segment_intersects_box(const Point3& a, const Point3& b, const BoxObstacle& box);

/// Points on the 4 vertical edges and the 4 top edges of the box, no more than
/// `spacing` apart along each edge. Corners appear exactly once.
/// Throws std::invalid_argument for spacing <= 0.
std::vector<Point3> discretize_edges(const BoxObstacle& box, double spacing);

/// Distance from p to the nearest of the box's 12 edges.
double distance_to_edges(const Point3& p, const BoxObstacle& box);

/// Distance from p to the segment [a, b].
double distance_to_segment(const Point3& p, const Point3& a, const Point3& b);

}  // namespace fbs
