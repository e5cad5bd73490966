#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fbs/geometry.hpp"

namespace fbs {

/// Undirected graph over hovering points, the base and obstacle edge points.
/// Two vertices are adjacent iff the segment between them clears every obstacle.
class VisibilityGraph {
public:
    int size() const { return static_cast<int>(vertices_.size()); }
    const Point3& vertex(int v) const { return vertices_.at(static_cast<std::size_t>(v)); }
    const std::vector<Point3>& vertices() const { return vertices_; }

    bool adjacent(int u, int v) const { return adjacency_[index(u, v)] != 0; }
    /// Euclidean length of edge (u, v); infinity when the pair is blocked.
    double weight(int u, int v) const;
    int edge_count() const;

    /// Vertex ids of the inputs passed to build_graph, in input order.
    int origin_vertex(std::size_t k) const { return origin_ids_.at(k); }
    int destination_vertex(std::size_t k) const { return destination_ids_.at(k); }
    int base_vertex() const { return base_id_; }
    std::size_t origin_count() const { return origin_ids_.size(); }
    std::size_t destination_count() const { return destination_ids_.size(); }

private:
    friend VisibilityGraph build_graph(const std::vector<Point3>&, const std::vector<Point3>&, const Point3&,
                                       const std::vector<BoxObstacle>&, double);
    std::size_t index(int u, int v) const { return static_cast<std::size_t>(u) * vertices_.size() + v; }

    std::vector<Point3> vertices_;
    std::vector<unsigned char> adjacency_;
    std::vector<int> origin_ids_;
    std::vector<int> destination_ids_;
    int base_id_ = -1;
};

/// Coincident input points share a vertex. Throws std::invalid_argument when
/// an input point lies strictly inside an obstacle or spacing <= 0.
VisibilityGraph build_graph(const std::vector<Point3>& origins, const std::vector<Point3>& destinations,
                            const Point3& base, const std::vector<BoxObstacle>& obstacles, double spacing);

struct Route {
    std::vector<Point3> waypoints;
    std::vector<int> vertices;  // graph vertex ids along the path
    double length = 0.0;
    int origin = -1;
    int destination = -1;
};

class Unreachable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Single-target distances: dist[v] is the shortest path length from v to t (infinity when cut off).
std::vector<double> distances_to(const VisibilityGraph& graph, int t);

/// Minimum-length route from s to t. Among equal-length routes the lexicographically
/// smallest vertex sequence is returned. Throws Unreachable.
Route shortest_path(const VisibilityGraph& graph, int s, int t);

/// Route from s given the distances to its target; nullopt when unreachable.
std::optional<Route> trace_route(const VisibilityGraph& graph, int s, int t, const std::vector<double>& dist_to_t);

/// Shortest routes for every (origin or base) x (destination or base) pair.
/// Row k < origin_count is origin k, the last row is the base; columns likewise.
struct RouteTable {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::optional<Route>> routes;  // row-major

    const std::optional<Route>& at(std::size_t r, std::size_t c) const { return routes.at(r * cols + c); }
    double length(std::size_t r, std::size_t c) const;
    std::size_t base_row() const { return rows - 1; }
    std::size_t base_col() const { return cols - 1; }
};

RouteTable all_pairs(const VisibilityGraph& graph);

/// A route flown at constant speed after `offset` seconds of waiting at its origin.
struct Conflict {
    int first = 0;   // index of the earlier route
    int second = 0;  // index of the later route
    double time = 0.0;          // instant of closest approach, s
    double separation = 0.0;    // closest approach, m
    double window_start = 0.0;  // earliest time the pair is closer than the safety radius
    double window_end = 0.0;    // latest such time
};

/// Every pair of routes closer than `safety_radius` at some instant in [0, horizon].
/// Before departure an FBS waits at its first waypoint and after arrival it hovers at
/// its last. An FBS standing still on the ground (z = 0) is landed and never conflicts.
std::vector<Conflict> detect_collisions(const std::vector<Route>& routes, double speed, double safety_radius,
                                        const std::vector<double>& offsets,
                                        double horizon = std::numeric_limits<double>::infinity());

class ScheduleOverrun : public std::runtime_error {
public:
    ScheduleOverrun(const std::string& what, std::vector<double> offsets)
        : std::runtime_error(what), offsets_(std::move(offsets)) {}
    const std::vector<double>& offsets() const { return offsets_; }

private:
    std::vector<double> offsets_;
};

/// Greedy departure delays: for each conflict the higher-indexed route waits until just
/// past the conflict window, repeated until no conflict remains. Throws ScheduleOverrun
/// (carrying the offsets reached) when some route can no longer finish within `window`.
std::vector<double> stagger_departures(const std::vector<Conflict>& conflicts, const std::vector<Route>& routes,
                                       double speed, double safety_radius, double window);

/// Waypoint records `fbs_id,seq,x,y,z`, one line per waypoint, with a header row.
void write_waypoints_csv(std::ostream& out, const std::vector<int>& fbs_ids, const std::vector<Route>& routes);

}  // namespace fbs
