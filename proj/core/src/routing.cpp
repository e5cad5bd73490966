#include "fbs/routing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <tuple>

namespace fbs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool boxes_apart(const Point3& a, const Point3& b, const BoxObstacle& box) {
    return std::max(a.x, b.x) <= box.min_corner.x || std::min(a.x, b.x) >= box.max_corner.x ||
           std::max(a.y, b.y) <= box.min_corner.y || std::min(a.y, b.y) >= box.max_corner.y ||
           std::max(a.z, b.z) <= box.min_corner.z || std::min(a.z, b.z) >= box.max_corner.z;
}

}  // namespace

double VisibilityGraph::weight(int u, int v) const {
    if (!adjacent(u, v)) {
        return kInf;
    }
    return distance3(vertex(u), vertex(v));
}

int VisibilityGraph::edge_count() const {
    int n = 0;
    for (int u = 0; u < size(); ++u) {
        for (int v = u + 1; v < size(); ++v) {
            n += adjacent(u, v) ? 1 : 0;
        }
    }
    return n;
}

VisibilityGraph build_graph(const std::vector<Point3>& origins, const std::vector<Point3>& destinations,
                            const Point3& base, const std::vector<BoxObstacle>& obstacles, double spacing) {
    if (!(spacing > 0.0)) {
        throw std::invalid_argument("edge point spacing must be positive");
    }
    VisibilityGraph g;
    std::map<std::tuple<double, double, double>, int> seen;
    auto intern = [&](const Point3& p) {
        const auto key = std::make_tuple(p.x, p.y, p.z);
        const auto it = seen.find(key);
        if (it != seen.end()) {
            return it->second;
        }
        const int id = static_cast<int>(g.vertices_.size());
        g.vertices_.push_back(p);
        seen.emplace(key, id);
        return id;
    };
    auto check_free = [&](const Point3& p, const char* what) {
        for (const auto& box : obstacles) {
            if (box.contains_strictly(p)) {
                throw std::invalid_argument(std::string(what) + " lies inside obstacle " + std::to_string(box.id));
            }
        }
    };
    for (const auto& p : origins) {
        check_free(p, "origin");
        g.origin_ids_.push_back(intern(p));
    }
    for (const auto& p : destinations) {
        check_free(p, "destination");
        g.destination_ids_.push_back(intern(p));
    }
    check_free(base, "base");
    g.base_id_ = intern(base);
    for (const auto& box : obstacles) {
        for (const auto& p : discretize_edges(box, spacing)) {
            intern(p);
        }
    }

    const std::size_t n = g.vertices_.size();
    g.adjacency_.assign(n * n, 0);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            const Point3& a = g.vertices_[u];
            const Point3& b = g.vertices_[v];
            bool blocked = false;
            for (const auto& box : obstacles) {
                if (!boxes_apart(a, b, box) && segment_intersects_box(a, b, box)) {
                    blocked = true;
                    break;
                }
            }
            if (!blocked) {
                g.adjacency_[u * n + v] = 1;
                g.adjacency_[v * n + u] = 1;
            }
        }
    }
    return g;
}

std::vector<double> distances_to(const VisibilityGraph& graph, int t) {
    const int n = graph.size();
    if (t < 0 || t >= n) {
        throw std::out_of_range("target vertex out of range");
    }
    std::vector<double> dist(static_cast<std::size_t>(n), kInf);
    std::vector<char> done(static_cast<std::size_t>(n), 0);
    dist[static_cast<std::size_t>(t)] = 0.0;
    for (int round = 0; round < n; ++round) {
        int u = -1;
        for (int v = 0; v < n; ++v) {
            if (!done[static_cast<std::size_t>(v)] && dist[static_cast<std::size_t>(v)] < kInf &&
                (u < 0 || dist[static_cast<std::size_t>(v)] < dist[static_cast<std::size_t>(u)])) {
                u = v;
            }
        }
        if (u < 0) {
            break;
        }
        done[static_cast<std::size_t>(u)] = 1;
        const Point3& pu = graph.vertex(u);
        for (int v = 0; v < n; ++v) {
            if (done[static_cast<std::size_t>(v)] || !graph.adjacent(u, v)) {
                continue;
            }
            const double alt = dist[static_cast<std::size_t>(u)] + distance3(pu, graph.vertex(v));
            if (alt < dist[static_cast<std::size_t>(v)]) {
                dist[static_cast<std::size_t>(v)] = alt;
            }
        }
    }
    return dist;
}

std::optional<Route> trace_route(const VisibilityGraph& graph, int s, int t, const std::vector<double>& dist_to_t) {
    const int n = graph.size();
    if (s < 0 || s >= n || t < 0 || t >= n) {
        throw std::out_of_range("route endpoint out of range");
    }
    if (!(dist_to_t[static_cast<std::size_t>(s)] < kInf)) {
        return std::nullopt;
    }
    Route route;
    route.origin = s;
    route.destination = t;
    int v = s;
    route.vertices.push_back(v);
    route.waypoints.push_back(graph.vertex(v));
    for (int step = 0; v != t && step < n; ++step) {
        const double dv = dist_to_t[static_cast<std::size_t>(v)];
        const double tol = 1e-9 * std::max(1.0, dv);
        int next = -1;
        for (int u = 0; u < n; ++u) {
            if (u == v || !graph.adjacent(v, u)) {
                continue;
            }
            const double w = distance3(graph.vertex(v), graph.vertex(u));
            if (std::abs(w + dist_to_t[static_cast<std::size_t>(u)] - dv) <= tol &&
                dist_to_t[static_cast<std::size_t>(u)] < dv) {
                next = u;
                break;
            }
        }
        if (next < 0) {
            return std::nullopt;
        }
        route.length += distance3(graph.vertex(v), graph.vertex(next));
        v = next;
        route.vertices.push_back(v);
        route.waypoints.push_back(graph.vertex(v));
    }
    if (v != t) {
        return std::nullopt;
    }
    return route;
}

Route shortest_path(const VisibilityGraph& graph, int s, int t) {
    auto route = trace_route(graph, s, t, distances_to(graph, t));
    if (!route) {
        throw Unreachable("no obstacle-free path from vertex " + std::to_string(s) + " to vertex " +
                          std::to_string(t));
    }
    return *route;
}

double RouteTable::length(std::size_t r, std::size_t c) const {
    const auto& route = at(r, c);
    return route ? route->length : kInf;
}

RouteTable all_pairs(const VisibilityGraph& graph) {
    RouteTable table;
    table.rows = graph.origin_count() + 1;
    table.cols = graph.destination_count() + 1;
    table.routes.resize(table.rows * table.cols);
    auto row_vertex = [&](std::size_t r) {
        return r < graph.origin_count() ? graph.origin_vertex(r) : graph.base_vertex();
    };
    auto col_vertex = [&](std::size_t c) {
        return c < graph.destination_count() ? graph.destination_vertex(c) : graph.base_vertex();
    };
    std::map<int, std::vector<double>> cache;
    for (std::size_t c = 0; c < table.cols; ++c) {
        const int t = col_vertex(c);
        auto it = cache.find(t);
        if (it == cache.end()) {
            it = cache.emplace(t, distances_to(graph, t)).first;
        }
        for (std::size_t r = 0; r < table.rows; ++r) {
            table.routes[r * table.cols + c] = trace_route(graph, row_vertex(r), t, it->second);
        }
    }
    return table;
}

namespace {

struct Timeline {
    std::vector<double> times;   // breakpoints, non-decreasing
    std::vector<Point3> points;  // position at each breakpoint
};

Timeline timeline_of(const Route& route, double speed, double offset) {
    Timeline tl;
    if (route.waypoints.empty()) {
        return tl;
    }
    tl.times.push_back(0.0);
    tl.points.push_back(route.waypoints.front());
    double t = offset;
    tl.times.push_back(t);
    tl.points.push_back(route.waypoints.front());
    for (std::size_t k = 1; k < route.waypoints.size(); ++k) {
        t += distance3(route.waypoints[k - 1], route.waypoints[k]) / speed;
        tl.times.push_back(t);
        tl.points.push_back(route.waypoints[k]);
    }
    return tl;
}

Point3 position_at(const Timeline& tl, double t) {
    if (t <= tl.times.front()) {
        return tl.points.front();
    }
    if (t >= tl.times.back()) {
        return tl.points.back();
    }
    const auto it = std::upper_bound(tl.times.begin(), tl.times.end(), t);
    const auto k = static_cast<std::size_t>(it - tl.times.begin());
    const double t0 = tl.times[k - 1];
    const double t1 = tl.times[k];
    if (t1 <= t0) {
        return tl.points[k];
    }
    return lerp(tl.points[k - 1], tl.points[k], (t - t0) / (t1 - t0));
}

bool landed_between(const Point3& a, const Point3& b) { return a == b && a.z <= 0.0; }

}  // namespace

std::vector<Conflict> detect_collisions(const std::vector<Route>& routes, double speed, double safety_radius,
                                        const std::vector<double>& offsets, double horizon) {
    if (!(speed > 0.0)) {
        throw std::invalid_argument("speed must be positive");
    }
    if (offsets.size() != routes.size()) {
        throw std::invalid_argument("one departure offset per route is required");
    }
    std::vector<Timeline> tls;
    tls.reserve(routes.size());
    for (std::size_t k = 0; k < routes.size(); ++k) {
        tls.push_back(timeline_of(routes[k], speed, offsets[k]));
    }
    std::vector<Conflict> out;
    const double r2 = safety_radius * safety_radius;
    for (std::size_t a = 0; a < routes.size(); ++a) {
        for (std::size_t b = a + 1; b < routes.size(); ++b) {
            const Timeline& ta = tls[a];
            const Timeline& tb = tls[b];
            if (ta.times.empty() || tb.times.empty()) {
                continue;
            }
            std::vector<double> cuts = ta.times;
            cuts.insert(cuts.end(), tb.times.begin(), tb.times.end());
            const double end = std::min(horizon, std::max(ta.times.back(), tb.times.back()));
            cuts.push_back(end);
            std::sort(cuts.begin(), cuts.end());
            cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
            cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [&](double t) { return t > end; }), cuts.end());

            bool hit = false;
            Conflict c{static_cast<int>(a), static_cast<int>(b), 0.0, kInf, kInf, -kInf};
            for (std::size_t k = 0; k + 1 < cuts.size() || (k == 0 && cuts.size() == 1); ++k) {
                const double t0 = cuts[k];
                const double t1 = cuts.size() == 1 ? t0 : cuts[k + 1];
                const Point3 a0 = position_at(ta, t0);
                const Point3 a1 = position_at(ta, t1);
                const Point3 b0 = position_at(tb, t0);
                const Point3 b1 = position_at(tb, t1);
                if (landed_between(a0, a1) || landed_between(b0, b1)) {
                    continue;
                }
                // Relative motion d(s) = d0 + v s over s in [0, span].
                const double span = t1 - t0;
                const Point3 d0 = a0 - b0;
                const Point3 v = span > 0.0 ? (1.0 / span) * ((a1 - b1) - d0) : Point3{};
                const double vv = dot(v, v);
                double s_min = 0.0;
                if (vv > 0.0) {
                    s_min = std::clamp(-dot(d0, v) / vv, 0.0, span);
                }
                const Point3 dm = d0 + s_min * v;
                const double sep = std::sqrt(dot(dm, dm));
                if (sep < c.separation) {
                    c.separation = sep;
                    c.time = t0 + s_min;
                }
                if (dot(dm, dm) >= r2) {
                    continue;
                }
                hit = true;
                double lo = t0;
                double hi = t1;
                if (vv > 0.0) {
                    // vv s^2 + 2 (d0.v) s + |d0|^2 - r^2 = 0
                    const double bq = dot(d0, v);
                    const double disc = std::sqrt(std::max(bq * bq - vv * (dot(d0, d0) - r2), 0.0));
                    lo = t0 + std::max(0.0, (-bq - disc) / vv);
                    hi = t0 + std::min(span, (-bq + disc) / vv);
                }
                c.window_start = std::min(c.window_start, lo);
                c.window_end = std::max(c.window_end, hi);
            }
            if (hit) {
                out.push_back(c);
            }
        }
    }
    return out;
}

std::vector<double> stagger_departures(const std::vector<Conflict>& conflicts, const std::vector<Route>& routes,
                                       double speed, double safety_radius, double window) {
    constexpr double kNudge = 1e-6;
    constexpr int kMaxRounds = 10000;
    std::vector<double> offsets(routes.size(), 0.0);
    std::vector<Conflict> pending = conflicts;
    for (int round = 0; round < kMaxRounds && !pending.empty(); ++round) {
        const Conflict& c = *std::min_element(pending.begin(), pending.end(), [](const Conflict& x, const Conflict& y) {
            return std::tie(x.first, x.second) < std::tie(y.first, y.second);
        });
        auto late = static_cast<std::size_t>(c.second);
        if (routes[late].length <= 0.0 && routes[static_cast<std::size_t>(c.first)].length > 0.0) {
            late = static_cast<std::size_t>(c.first);  // waiting does not help a hovering FBS
        }
        if (routes[late].length <= 0.0) {
            throw ScheduleOverrun("FBS " + std::to_string(c.first) + " and " + std::to_string(c.second) +
                                      " hover closer than the safety radius",
                                  offsets);
        }
        offsets[late] += (c.window_end - c.window_start) + kNudge;
        if (offsets[late] + routes[late].length / speed > window + 1e-9) {
            throw ScheduleOverrun("route " + std::to_string(late) + " cannot finish within the snapshot window",
                                  offsets);
        }
        pending = detect_collisions(routes, speed, safety_radius, offsets, window);
    }
    if (!pending.empty()) {
        throw ScheduleOverrun("departure staggering did not converge", offsets);
    }
    return offsets;
}

void write_waypoints_csv(std::ostream& out, const std::vector<int>& fbs_ids, const std::vector<Route>& routes) {
    if (fbs_ids.size() != routes.size()) {
        throw std::invalid_argument("one FBS id per route is required");
    }
    out << "fbs_id,seq,x,y,z\n";
    const auto old_precision = out.precision(17);
    for (std::size_t k = 0; k < routes.size(); ++k) {
        for (std::size_t s = 0; s < routes[k].waypoints.size(); ++s) {
            const auto& p = routes[k].waypoints[s];
            out << fbs_ids[k] << ',' << s << ',' << p.x << ',' << p.y << ',' << p.z << '\n';
        }
    }
    out.precision(old_precision);
}

}  // namespace fbs
