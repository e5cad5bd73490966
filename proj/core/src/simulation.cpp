#include "fbs/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

namespace fbs {

namespace {

using Seconds = std::chrono::duration<double>;

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return Seconds(std::chrono::steady_clock::now() - t0).count();
}

// First `distance` metres of a route.
Route cut_route(const Route& route, double distance) {
    Route out;
    out.origin = route.origin;
    out.destination = route.destination;
    if (route.waypoints.empty()) {
        return out;
    }
    out.waypoints.push_back(route.waypoints.front());
    double left = distance;
    for (std::size_t k = 1; k < route.waypoints.size() && left > 0.0; ++k) {
        const double seg = distance3(route.waypoints[k - 1], route.waypoints[k]);
        if (seg <= left) {
            out.waypoints.push_back(route.waypoints[k]);
            out.length += seg;
            left -= seg;
        } else {
            out.waypoints.push_back(lerp(route.waypoints[k - 1], route.waypoints[k], left / seg));
            out.length += left;
            left = 0.0;
        }
    }
    return out;
}

bool airborne(FbsStatus s) { return s == FbsStatus::serving || s == FbsStatus::in_transit; }

std::vector<Point3> hover_points(const FleetSizeResult& placement, const CandidateSet& candidates) {
    std::vector<Point3> pts;
    for (std::size_t k = 0; k < placement.solution.selected.size(); ++k) {
        pts.push_back(placement.solution.position_of(candidates, k));
    }
    return pts;
}

FleetSizeResult place(const std::vector<User>& users, const Scenario& sc, const CandidateSet& candidates,
                      const SimulationConfig& config, const FleetSizeResult* previous) {
    SolveOptions options = config.placement;
    if (previous != nullptr) {
        for (const auto& s : previous->solution.selected) {
            options.preferred.push_back(s.candidate);
        }
    }
    return min_fbs_count(make_problem({users}, candidates, sc.env, sc.fleet), options);
}

double served_demand(const std::vector<User>& users, const FleetSizeResult& placement,
                     const std::vector<char>& point_served) {
    std::map<int, std::size_t> slot_of;
    for (std::size_t k = 0; k < placement.solution.selected.size(); ++k) {
        slot_of[placement.solution.selected[k].candidate] = k;
    }
    double total = 0.0;
    for (std::size_t j = 0; j < users.size(); ++j) {
        const auto it = slot_of.find(placement.solution.assignment[j]);
        if (it != slot_of.end() && point_served[it->second]) {
            total += users[j].demand_mbps;
        }
    }
    return total;
}

}  // namespace

void SimulationConfig::validate() const {
    if (snapshots < 1) {
        throw std::invalid_argument("snapshot count must be at least 1");
    }
    if (dt && !(*dt > 0.0)) {
        throw std::invalid_argument("pinned snapshot interval must be positive");
    }
    if (r_min && !(*r_min > 0.0)) {
        throw std::invalid_argument("r_min must be positive");
    }
    if (!(candidate_spacing > 0.0) || candidate_margin < 0.0) {
        throw std::invalid_argument("candidate spacing must be positive and margin non-negative");
    }
    if (recharge_rate && !(*recharge_rate >= 0.0)) {
        throw std::invalid_argument("recharge rate must be non-negative");
    }
    if (pool_size && *pool_size < 1) {
        throw std::invalid_argument("fleet pool size must be positive");
    }
    if (!(placement.time_limit_s > 0.0)) {
        throw std::invalid_argument("placement time limit must be positive");
    }
    energy.validate();
}

double EpisodeTimeline::final_energy() const {
    return snapshots.empty() ? initial_energy : snapshots.back().fleet_after.total_energy();
}

double EpisodeTimeline::ledger_imbalance() const {
    double flows = 0.0;
    for (const auto& s : snapshots) {
        flows += s.ledger.recharge - s.ledger.flight - s.ledger.hover;
    }
    return initial_energy + flows - final_energy();
}

Scenario make_scenario(const Scenario& base_description, std::uint64_t seed) {
    Scenario sc = base_description;
    sc.obstacles = generate_obstacles(sc.region, sc.obstacle_params, sc.base, derive_seed(seed, 2));
    return sc;
}

double resolve_interval(const Scenario& scenario, const SimulationConfig& config) {
    if (config.dt) {
        return *config.dt;
    }
    return snapshot_interval(config.r_min.value_or(scenario.fleet.r_min()), scenario.user_params.mix);
}

FleetState apply_recharge(const FleetState& fleet, double dt, double rate) {
    if (!(rate >= 0.0) || dt < 0.0) {
        throw std::invalid_argument("recharge rate and interval must be non-negative");
    }
    FleetState out = fleet;
    for (auto& m : out.members) {
        if (m.status != FbsStatus::charging) {
            continue;
        }
        const double gain = rate * dt;
        m.energy = (gain >= m.capacity - m.energy) ? m.capacity : m.energy + gain;
        if (m.energy >= m.capacity) {
            m.status = FbsStatus::at_base;
        }
    }
    return out;
}

EpisodeTimeline run_episode(const Scenario& scenario, const SimulationConfig& config, std::uint64_t seed) {
    config.validate();
    scenario.env.validate();
    scenario.fleet.validate();
    for (const auto& box : scenario.obstacles) {
        box.validate();
    }
    EpisodeTimeline tl;
    tl.seed = seed;
    tl.scenario = scenario;
    tl.dt = resolve_interval(scenario, config);
    tl.dist_th = distance_threshold(scenario.fleet.speed, tl.dt);
    tl.candidates = exclude_footprints(generate_candidates(scenario.region, config.candidate_spacing),
                                       scenario.obstacles, config.candidate_margin);
    if (tl.candidates.empty()) {
        throw std::invalid_argument("every candidate point lies over a building");
    }
    const EnergyModel& em = config.energy;
    const double capacity = em.capacity();
    const double rate = config.recharge_rate.value_or(capacity / (4.0 * tl.dt));
    const Point3 base = scenario.base;

    std::vector<User> users = spawn_users(scenario.region, scenario.user_params, derive_seed(seed, 1));

    // Snapshot 0: the first placement is flown into position before the clock starts.
    SnapshotRecord first;
    first.index = 0;
    first.users = users;
    auto t0 = std::chrono::steady_clock::now();
    try {
        first.placement = place(users, scenario, tl.candidates, config, nullptr);
    } catch (const NoFeasibleFleet& e) {
        throw EpisodeAborted(std::string("snapshot 0: ") + e.what(), tl);
    }
    first.metrics.placement_seconds = elapsed_since(t0);
    first.required = hover_points(first.placement, tl.candidates);
    const int p0 = first.placement.fleet_size;
    const int pool = config.pool_size.value_or(2 * static_cast<int>(std::ceil(1.5 * p0)));
    if (pool < p0) {
        throw EpisodeAborted("fleet pool of " + std::to_string(pool) + " cannot cover the first snapshot's " +
                                 std::to_string(p0) + " stations",
                             tl);
    }
    FleetState fleet;
    for (int k = 0; k < pool; ++k) {
        FbsState m;
        m.id = k;
        m.capacity = capacity;
        m.energy = capacity;
        if (k < p0) {
            m.position = first.required[static_cast<std::size_t>(k)];
            m.status = FbsStatus::serving;
            m.destination = k;
        } else {
            m.position = base;
            m.status = FbsStatus::at_base;
        }
        fleet.members.push_back(m);
    }
    tl.initial_energy = fleet.total_energy();
    for (auto& m : fleet.members) {
        if (m.status == FbsStatus::serving) {
            m.energy -= em.e_hover;
            first.ledger.hover += em.e_hover;
        }
    }
    first.fleet_after = fleet;
    first.metrics.users = static_cast<int>(users.size());
    first.metrics.required = p0;
    first.metrics.serving = p0;
    first.metrics.energy_spent = first.ledger.hover;
    first.metrics.served_demand =
        served_demand(users, first.placement, std::vector<char>(static_cast<std::size_t>(p0), 1));
    tl.snapshots.push_back(std::move(first));

    for (int s = 1; s < config.snapshots; ++s) {
        SnapshotRecord rec;
        rec.index = s;
        users = step_random_waypoint(users, scenario.region, scenario.user_params.mix, tl.dt,
                                     derive_seed(seed, 1000 + static_cast<std::uint64_t>(s)));
        rec.users = users;
        t0 = std::chrono::steady_clock::now();
        try {
            rec.placement = place(users, scenario, tl.candidates, config, &tl.snapshots.back().placement);
        } catch (const NoFeasibleFleet& e) {
            throw EpisodeAborted("snapshot " + std::to_string(s) + ": " + e.what(), tl);
        }
        rec.metrics.placement_seconds = elapsed_since(t0);
        rec.required = hover_points(rec.placement, tl.candidates);

        // Routes from every airborne member and the base to every required point and the base.
        t0 = std::chrono::steady_clock::now();
        std::vector<Point3> origins;
        std::vector<std::size_t> rows(fleet.members.size(), 0);
        std::vector<std::size_t> airborne_rows;
        for (std::size_t k = 0; k < fleet.members.size(); ++k) {
            if (airborne(fleet.members[k].status)) {
                rows[k] = origins.size();
                origins.push_back(fleet.members[k].position);
            }
        }
        const auto graph = build_graph(origins, rec.required, base, scenario.obstacles,
                                       scenario.obstacle_params.edge_spacing);
        const auto table = all_pairs(graph);
        for (std::size_t k = 0; k < fleet.members.size(); ++k) {
            if (!airborne(fleet.members[k].status)) {
                rows[k] = table.base_row();
            }
        }
        rec.metrics.routing_seconds = elapsed_since(t0);

        TransitionInputs in;
        in.fleet = &fleet;
        in.required = rec.required;
        in.origin_rows = rows;
        in.routes = &table;
        in.base = base;
        in.model = em;
        in.dist_th = tl.dist_th;
        const auto problem = build_assignment(in);
        t0 = std::chrono::steady_clock::now();
        const auto solution = solve_assignment(problem);
        rec.metrics.assignment_seconds = elapsed_since(t0);
        if (!solution) {
            throw EpisodeAborted("snapshot " + std::to_string(s) + ": no feasible assignment of " +
                                     std::to_string(fleet.members.size()) + " FBSs to " +
                                     std::to_string(rec.required.size()) + " required points",
                                 tl);
        }
        rec.assignment_size = problem.n;
        rec.assignment = solution->destination_of;
        rec.assignment_energy = solution->total_energy;

        // Planned legs, cut at the distance flyable in one interval.
        struct Plan {
            std::size_t member = 0;
            int destination = -1;
            bool reaches = false;
            Route route;
        };
        std::vector<Plan> plans;
        for (std::size_t k = 0; k < fleet.members.size(); ++k) {
            const auto& dest = problem.destinations[solution->destination_of[k]];
            if (!airborne(fleet.members[k].status) && dest.position < 0) {
                continue;
            }
            const auto& full = table.at(rows[k], dest.route_col);
            const bool reaches = full->length <= tl.dist_th + 1e-9;
            plans.push_back({k, dest.position, reaches, reaches ? *full : cut_route(*full, tl.dist_th)});
        }

        // Departure delays. When they cannot all finish inside the interval, delayed
        // legs are flown only as far as the remaining time allows.
        std::vector<Route> planned;
        for (const auto& pl : plans) {
            planned.push_back(pl.route);
        }
        const double speed = scenario.fleet.speed;
        const double radius = scenario.fleet.safety_radius;
        const auto conflicts = detect_collisions(planned, speed, radius, std::vector<double>(planned.size(), 0.0), tl.dt);
        std::vector<double> offsets;
        try {
            offsets = stagger_departures(conflicts, planned, speed, radius, tl.dt);
        } catch (const ScheduleOverrun&) {
            rec.metrics.schedule_overrun = true;
            const double extended = tl.dt * static_cast<double>(planned.size() + 1);
            try {
                offsets = stagger_departures(conflicts, planned, speed, radius, extended);
            } catch (const ScheduleOverrun& e) {
                offsets = e.offsets();
            }
        }

        // What each leg covers inside the interval. Pairs that waiting cannot separate
        // hold their start positions, which were clear of each other when the last
        // interval ended.
        std::vector<Route> flown(plans.size());
        std::vector<char> hold(plans.size(), 0);
        auto refresh = [&]() {
            for (std::size_t q = 0; q < plans.size(); ++q) {
                const double reach = speed * std::max(0.0, tl.dt - offsets[q]);
                if (hold[q]) {
                    flown[q] = cut_route(plans[q].route, 0.0);
                } else if (plans[q].route.length > reach + 1e-9) {
                    flown[q] = cut_route(plans[q].route, reach);
                } else {
                    flown[q] = plans[q].route;
                }
            }
        };
        refresh();
        if (rec.metrics.schedule_overrun) {
            while (true) {
                const auto left = detect_collisions(flown, speed, radius, offsets, tl.dt);
                if (left.empty()) {
                    break;
                }
                bool changed = false;
                for (const auto& c : left) {
                    const auto a = static_cast<std::size_t>(c.first);
                    const auto b = static_cast<std::size_t>(c.second);
                    if (!hold[b]) {
                        hold[b] = 1;
                        changed = true;
                    } else if (!hold[a]) {
                        hold[a] = 1;
                        changed = true;
                    }
                }
                if (!changed) {
                    break;
                }
                refresh();
            }
        }

        std::vector<char> point_served(rec.required.size(), 0);
        for (std::size_t q = 0; q < plans.size(); ++q) {
            const auto& pl = plans[q];
            auto& m = fleet.members[pl.member];
            const bool landed = !airborne(m.status);
            const bool delayed = flown[q].length < pl.route.length - 1e-9;
            if (landed && delayed && flown[q].length <= 0.0) {
                continue;
            }
            Move mv;
            mv.fbs = static_cast<int>(pl.member);
            mv.before = m.status;
            mv.route = flown[q];
            mv.distance = mv.route.length;
            const Point3 start = mv.route.waypoints.front();
            const Point3 end = mv.route.waypoints.back();
            mv.energy = edge_energy(mv.distance, end.z - start.z, em);
            m.energy -= mv.energy;
            rec.ledger.flight += mv.energy;
            m.position = end;
            m.destination = pl.destination;
            if (!pl.reaches || delayed) {
                m.status = FbsStatus::in_transit;
            } else if (pl.destination >= 0) {
                m.status = FbsStatus::serving;
                point_served[static_cast<std::size_t>(pl.destination)] = 1;
            } else {
                m.status = m.energy < m.capacity ? FbsStatus::charging : FbsStatus::at_base;
                m.position = base;
            }
            mv.after = m.status;
            rec.metrics.flight_distance += mv.distance;
            rec.moves.push_back(std::move(mv));
            rec.departure_offsets.push_back(offsets[q]);
        }
        for (auto& m : fleet.members) {
            if (m.status == FbsStatus::serving) {
                m.energy -= em.e_hover;
                rec.ledger.hover += em.e_hover;
            }
        }
        const double before_recharge = fleet.total_energy();
        fleet = apply_recharge(fleet, tl.dt, rate);
        rec.ledger.recharge = fleet.total_energy() - before_recharge;

        rec.fleet_after = fleet;
        rec.metrics.users = static_cast<int>(users.size());
        rec.metrics.required = rec.placement.fleet_size;
        rec.metrics.serving = fleet.count(FbsStatus::serving);
        rec.metrics.unserved_points =
            static_cast<int>(std::count(point_served.begin(), point_served.end(), 0));
        rec.metrics.energy_spent = rec.ledger.flight + rec.ledger.hover;
        rec.metrics.served_demand = served_demand(users, rec.placement, point_served);
        tl.snapshots.push_back(std::move(rec));
    }
    return tl;
}

}  // namespace fbs
