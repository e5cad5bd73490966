#include "fbs/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fbs/branch_and_bound.hpp"

namespace fbs {

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;
constexpr double kTol = 1e-6;

double cot_deg(double deg) { return 1.0 / std::tan(deg * kDegree); }

struct Window {
    double lo = 0.0;
    double hi = 0.0;
    bool empty() const { return lo > hi + 1e-9; }
};

Window pair_window(const PlacementProblem& p, const PairTerms& t) {
    return {std::max(p.fleet.h_min, t.cone_altitude), std::min(p.fleet.h_max, t.max_altitude())};
}

std::string pair_suffix(int i, int j) { return std::to_string(i) + "_" + std::to_string(j); }

}  // namespace

CandidateSet generate_candidates(const Region& region, double spacing) {
    if (!(spacing > 0.0)) {
        throw std::invalid_argument("candidate spacing must be positive");
    }
    const double dy = spacing * std::sqrt(3.0) / 2.0;
    const double ox = std::min(spacing / 2.0, region.width / 2.0);
    const double oy = std::min(dy / 2.0, region.height / 2.0);
    CandidateSet set;
    for (int row = 0;; ++row) {
        const double y = oy + row * dy;
        if (y > region.height + 1e-9) {
            break;
        }
        const double shift = (row % 2 == 1) ? spacing / 2.0 : 0.0;
        for (int col = 0;; ++col) {
            const double x = ox + shift + col * spacing;
            if (x > region.width + 1e-9) {
                break;
            }
            set.points.push_back({static_cast<int>(set.points.size()), x, y});
        }
    }
    return set;
}

CandidateSet exclude_footprints(const CandidateSet& candidates, const std::vector<BoxObstacle>& obstacles,
                                double margin) {
    CandidateSet kept;
    for (const auto& c : candidates.points) {
        const bool blocked = std::any_of(obstacles.begin(), obstacles.end(),
                                         [&](const BoxObstacle& b) { return b.footprint_contains(c.x, c.y, margin); });
        if (!blocked) {
            kept.points.push_back({static_cast<int>(kept.points.size()), c.x, c.y});
        }
    }
    return kept;
}

double linearized_loss(const PairTerms& pair, double h) { return std::max(0.0, pair.x_coef + pair.t_coef * h); }

double PlacementProblem::big_m_loss() const {
    const double worst_excess = std::max(env.delta_los_db, env.delta_nlos_db);
    const double h0 = fleet.h0();
    return 10.0 * free_space_coefficient(env) * db_to_linear(worst_excess) *
           (diagonal * diagonal + 2.0 * h0 * fleet.h_max);
}

double PlacementProblem::big_m_altitude() const {
    double worst = fleet.h_max;
    for (const auto& p : pairs) {
        worst = std::max(worst, std::abs(p.gate));
    }
    return 10.0 * worst;
}

PlacementProblem make_problem(const Snapshot& snapshot, const CandidateSet& candidates, const Environment& env,
                              const FleetParams& fleet) {
    if (candidates.empty()) {
        throw std::invalid_argument("candidate set is empty");
    }
    env.validate();
    fleet.validate();
    PlacementProblem p;
    p.users = snapshot.users;
    p.candidates = candidates;
    p.env = env;
    p.fleet = fleet;

    double min_x = std::numeric_limits<double>::infinity();
    double min_y = min_x;
    double max_x = -min_x;
    double max_y = -min_x;
    auto extend = [&](double x, double y) {
        min_x = std::min(min_x, x);
        min_y = std::min(min_y, y);
        max_x = std::max(max_x, x);
        max_y = std::max(max_y, y);
    };
    for (const auto& c : candidates.points) {
        extend(c.x, c.y);
    }
    for (const auto& u : p.users) {
        extend(u.pos.x, u.pos.y);
    }
    p.diagonal = std::hypot(max_x - min_x, max_y - min_y);

    const double gain = free_space_coefficient(env);
    const double h0 = fleet.h0();
    const double cot = cot_deg(fleet.elevation_deg);
    const int n_users = p.num_users();
    p.pairs.resize(static_cast<std::size_t>(p.num_candidates() * n_users));
    for (int i = 0; i < p.num_candidates(); ++i) {
        const auto& c = candidates.points[static_cast<std::size_t>(i)];
        for (int j = 0; j < n_users; ++j) {
            const auto& u = p.users[static_cast<std::size_t>(j)];
            const double g0 = h0 - u.pos.z;
            if (!(g0 > 0.0)) {
                throw std::invalid_argument("Taylor altitude must lie above every user");
            }
            PairTerms t;
            t.horizontal = std::hypot(c.x - u.pos.x, c.y - u.pos.y);
            const double theta0 = t.horizontal == 0.0 ? 90.0 : std::atan2(g0, t.horizontal) / kDegree;
            t.excess_db = excess_loss_db(theta0, env);
            t.weight = gain * db_to_linear(t.excess_db);
            t.x_coef = t.weight * (t.horizontal * t.horizontal - g0 * g0 - 2.0 * g0 * u.pos.z);
            t.t_coef = t.weight * 2.0 * g0;
            t.cone_altitude = u.pos.z + std::max(cot * t.horizontal, 1e-6);
            t.gate = u.pos.z + taylor_gate(t.horizontal, g0, env, t.excess_db);
            t.admissible = u.demand_mbps <= fleet.backhaul_mbps && !pair_window(p, t).empty();
            p.pairs[static_cast<std::size_t>(i * n_users + j)] = t;
        }
    }
    return p;
}

int PlacementMilp::binary_count() const {
    int n = 0;
    for (const auto& c : model.columns()) {
        n += c.integer ? 1 : 0;
    }
    return n;
}

int PlacementMilp::continuous_count() const { return model.num_columns() - binary_count(); }

namespace {

PlacementMilp assemble(const PlacementProblem& problem, int fleet_size, bool presolve) {
    if (fleet_size < 1) {
        throw std::invalid_argument("fleet size must be at least 1");
    }
    PlacementMilp milp;
    milp.problem = problem;
    milp.fleet_size = fleet_size;
    milp.big_m = problem.big_m_loss();
    milp.big_m_altitude = problem.big_m_altitude();
    milp.loss_scale = milp.big_m / 1e4;

    const int n_c = problem.num_candidates();
    const int n_u = problem.num_users();
    const auto& fleet = problem.fleet;
    const double scale = milp.loss_scale;
    auto& model = milp.model;
    auto& lay = milp.layout;
    lay.m.assign(static_cast<std::size_t>(n_c), -1);
    lay.h.assign(static_cast<std::size_t>(n_c), -1);
    lay.x.assign(static_cast<std::size_t>(n_c * n_u), -1);
    lay.t = lay.x;
    lay.k = lay.x;

    auto keep = [&](int i, int j) { return !presolve || problem.pair(i, j).admissible; };

    // Binaries first so the incumbent tie-break reads (m, x) lexicographically.
    for (int i = 0; i < n_c; ++i) {
        lay.m[static_cast<std::size_t>(i)] = model.add_column({"m_" + std::to_string(i), 0.0, 1.0, 0.0, true, 0});
    }
    for (int i = 0; i < n_c; ++i) {
        for (int j = 0; j < n_u; ++j) {
            if (keep(i, j)) {
                lay.x[static_cast<std::size_t>(i * n_u + j)] =
                    model.add_column({"x_" + pair_suffix(i, j), 0.0, 1.0, 0.0, true, 0});
            }
        }
    }
    for (int i = 0; i < n_c; ++i) {
        lay.h[static_cast<std::size_t>(i)] =
            model.add_column({"h_" + std::to_string(i), 0.0, fleet.h_max, 0.0, false, 0});
    }
    for (int i = 0; i < n_c; ++i) {
        for (int j = 0; j < n_u; ++j) {
            if (keep(i, j)) {
                const auto idx = static_cast<std::size_t>(i * n_u + j);
                lay.t[idx] = model.add_column({"t_" + pair_suffix(i, j), 0.0, fleet.h_max, 0.0, false, 0});
                lay.k[idx] = model.add_column({"k_" + pair_suffix(i, j), 0.0, milp.big_m / scale, 1.0, false, 0});
            }
        }
    }

    auto& fam = milp.row_families;
    auto add = [&](const std::string& family, lp::Row row) {
        ++fam[family];
        model.add_row(std::move(row));
    };

    for (int j = 0; j < n_u; ++j) {
        lp::Row row{"serve_once_" + std::to_string(j), {}, lp::Sense::less_equal, 1.0};
        for (int i = 0; i < n_c; ++i) {
            const int x = lay.x[static_cast<std::size_t>(i * n_u + j)];
            if (x >= 0) {
                row.terms.push_back({x, 1.0});
            }
        }
        add("serve_once", std::move(row));
    }
    for (int i = 0; i < n_c; ++i) {
        lp::Row channels{"channels_" + std::to_string(i), {}, lp::Sense::less_equal, static_cast<double>(fleet.channels)};
        lp::Row backhaul{"backhaul_" + std::to_string(i), {}, lp::Sense::less_equal, 0.0};
        for (int j = 0; j < n_u; ++j) {
            const int x = lay.x[static_cast<std::size_t>(i * n_u + j)];
            if (x >= 0) {
                channels.terms.push_back({x, 1.0});
                backhaul.terms.push_back({x, problem.users[static_cast<std::size_t>(j)].demand_mbps});
            }
        }
        backhaul.terms.push_back({lay.m[static_cast<std::size_t>(i)], -fleet.backhaul_mbps});
        if (!presolve || !channels.terms.empty()) {
            add("channels", std::move(channels));
        }
        add("backhaul", std::move(backhaul));
    }
    {
        lp::Row cover{"cover_all", {}, lp::Sense::equal, static_cast<double>(n_u)};
        for (int x : lay.x) {
            if (x >= 0) {
                cover.terms.push_back({x, 1.0});
            }
        }
        add("cover_all", std::move(cover));
        lp::Row count{"fleet_count", {}, lp::Sense::equal, static_cast<double>(fleet_size)};
        for (int m : lay.m) {
            count.terms.push_back({m, 1.0});
        }
        add("fleet_count", std::move(count));
    }
    for (int i = 0; i < n_c; ++i) {
        const int m = lay.m[static_cast<std::size_t>(i)];
        const int h = lay.h[static_cast<std::size_t>(i)];
        add("altitude_max", {"altitude_max_" + std::to_string(i), {{h, 1.0}, {m, -fleet.h_max}}, lp::Sense::less_equal, 0.0});
        add("altitude_min", {"altitude_min_" + std::to_string(i), {{h, 1.0}, {m, -fleet.h_min}}, lp::Sense::greater_equal, 0.0});
    }
    const double m_alt = milp.big_m_altitude;
    for (int i = 0; i < n_c; ++i) {
        const int m = lay.m[static_cast<std::size_t>(i)];
        const int h = lay.h[static_cast<std::size_t>(i)];
        for (int j = 0; j < n_u; ++j) {
            const auto idx = static_cast<std::size_t>(i * n_u + j);
            const int x = lay.x[idx];
            if (x < 0) {
                continue;
            }
            const int t = lay.t[idx];
            const int k = lay.k[idx];
            const auto& pt = problem.pair(i, j);
            const std::string s = pair_suffix(i, j);
            add("open_link", {"open_link_" + s, {{x, 1.0}, {m, -1.0}}, lp::Sense::less_equal, 0.0});
            add("cone", {"cone_" + s, {{h, 1.0}, {x, -pt.cone_altitude}}, lp::Sense::greater_equal, 0.0});
            add("loss_floor", {"loss_floor_" + s, {{k, 1.0}, {x, -pt.x_coef / scale}, {t, -pt.t_coef / scale}},
                       lp::Sense::greater_equal, 0.0});
            add("loss_cap", {"loss_cap_" + s, {{k, 1.0}, {x, -milp.big_m / scale}}, lp::Sense::less_equal, 0.0});
            add("product_upper", {"product_upper_" + s, {{t, 1.0}, {h, -1.0}}, lp::Sense::less_equal, 0.0});
            add("product_lower", {"product_lower_" + s, {{t, 1.0}, {h, -1.0}, {x, -fleet.h_max}}, lp::Sense::greater_equal,
                       -fleet.h_max});
            add("product_cap", {"product_cap_" + s, {{t, 1.0}, {x, -fleet.h_max}}, lp::Sense::less_equal, 0.0});
            // A served pair flies no lower than its cone altitude, so t >= floor * x is valid
            // for every integer point and keeps the relaxed loss from collapsing to zero.
            const double floor_alt = std::max(fleet.h_min, pt.cone_altitude);
            add("altitude_floor", {"altitude_floor_" + s, {{t, 1.0}, {x, -floor_alt}}, lp::Sense::greater_equal, 0.0});
            add("gate", {"gate_" + s, {{h, 1.0}, {x, m_alt - pt.gate + 0.5}}, lp::Sense::less_equal, m_alt});
        }
    }
    return milp;
}

}  // namespace

PlacementMilp build_milp(const PlacementProblem& problem, int fleet_size) { return assemble(problem, fleet_size, false); }

PlacementMilp build_milp(const Snapshot& snapshot, const CandidateSet& candidates, int fleet_size,
                         const Environment& env, const FleetParams& fleet) {
    return build_milp(make_problem(snapshot, candidates, env, fleet), fleet_size);
}

Point3 PlacementSolution::position_of(const CandidateSet& candidates, std::size_t k) const {
    const auto& s = selected.at(k);
    const auto& c = candidates.points.at(static_cast<std::size_t>(s.candidate));
    return {c.x, c.y, s.altitude};
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal:
            return "optimal";
        case SolveStatus::infeasible:
            return "infeasible";
        case SolveStatus::timed_out:
            return "timed_out";
    }
    return "unknown";
}

std::optional<double> lowest_altitude(const PlacementProblem& problem, int candidate, const std::vector<int>& users) {
    if (static_cast<int>(users.size()) > problem.fleet.channels) {
        return std::nullopt;
    }
    double lo = problem.fleet.h_min;
    double hi = problem.fleet.h_max;
    double load = 0.0;
    for (int j : users) {
        const auto& pt = problem.pair(candidate, j);
        lo = std::max(lo, pt.cone_altitude);
        hi = std::min(hi, pt.max_altitude());
        load += problem.users[static_cast<std::size_t>(j)].demand_mbps;
    }
    if (lo > hi + kTol || load > problem.fleet.backhaul_mbps + 1e-9) {
        return std::nullopt;
    }
    return lo;
}

namespace {

struct Station {
    int candidate = 0;
    std::vector<int> users;
};

double station_cost(const PlacementProblem& p, const Station& s, double h) {
    double cost = 0.0;
    for (int j : s.users) {
        cost += linearized_loss(p.pair(s.candidate, j), h);
    }
    return cost;
}

// Cost of serving `users` from candidate i at its lowest feasible altitude; +inf when infeasible.
double best_cost(const PlacementProblem& p, int i, const std::vector<int>& users) {
    const auto h = lowest_altitude(p, i, users);
    if (!h) {
        return std::numeric_limits<double>::infinity();
    }
    return station_cost(p, {i, users}, *h);
}

PlacementSolution finish(const PlacementProblem& p, std::vector<Station> stations) {
    std::sort(stations.begin(), stations.end(),
              [](const Station& a, const Station& b) { return a.candidate < b.candidate; });
    PlacementSolution sol;
    sol.assignment.assign(static_cast<std::size_t>(p.num_users()), -1);
    sol.path_loss_db.assign(static_cast<std::size_t>(p.num_users()), 0.0);
    for (const auto& s : stations) {
        const double h = lowest_altitude(p, s.candidate, s.users).value_or(p.fleet.h_min);
        sol.selected.push_back({s.candidate, h});
        const auto& c = p.candidates.points[static_cast<std::size_t>(s.candidate)];
        for (int j : s.users) {
            sol.assignment[static_cast<std::size_t>(j)] = s.candidate;
            sol.path_loss_db[static_cast<std::size_t>(j)] =
                link_path_loss({c.x, c.y, h}, p.users[static_cast<std::size_t>(j)].pos, p.env);
            sol.objective += linearized_loss(p.pair(s.candidate, j), h);
        }
    }
    return sol;
}

// Greedy cover using at most `limit` stations. Returns the non-empty stations or nothing.
// Preferred candidates, when given, are exhausted before any other is opened.
std::optional<std::vector<Station>> greedy_cover(const PlacementProblem& p, int limit,
                                                 const std::vector<int>& preferred = {}) {
    const int n_u = p.num_users();
    const int n_c = p.num_candidates();
    std::vector<int> options(static_cast<std::size_t>(n_u), 0);
    for (int i = 0; i < n_c; ++i) {
        for (int j = 0; j < n_u; ++j) {
            options[static_cast<std::size_t>(j)] += p.pair(i, j).admissible ? 1 : 0;
        }
    }
    if (std::any_of(options.begin(), options.end(), [](int o) { return o == 0; })) {
        return std::nullopt;
    }
    std::vector<int> owner(static_cast<std::size_t>(n_u), -1);
    std::vector<char> used(static_cast<std::size_t>(n_c), 0);
    std::vector<Station> stations;
    int uncovered = n_u;
    auto harder_first = [&](int a, int b) {
        const int oa = options[static_cast<std::size_t>(a)];
        const int ob = options[static_cast<std::size_t>(b)];
        return oa != ob ? oa < ob : a < b;
    };

    std::vector<char> allowed(static_cast<std::size_t>(n_c), preferred.empty() ? 1 : 0);
    for (int i : preferred) {
        if (i >= 0 && i < n_c) {
            allowed[static_cast<std::size_t>(i)] = 1;
        }
    }
    bool restricted = !preferred.empty();
    while (uncovered > 0 && static_cast<int>(stations.size()) < limit) {
        int best_i = -1;
        std::vector<int> best_group;
        for (int i = 0; i < n_c; ++i) {
            if (used[static_cast<std::size_t>(i)] || !allowed[static_cast<std::size_t>(i)]) {
                continue;
            }
            std::vector<int> reach;
            for (int j = 0; j < n_u; ++j) {
                if (owner[static_cast<std::size_t>(j)] < 0 && p.pair(i, j).admissible) {
                    reach.push_back(j);
                }
            }
            if (reach.size() <= best_group.size()) {
                continue;
            }
            std::sort(reach.begin(), reach.end(), harder_first);
            std::vector<double> levels;
            for (int j : reach) {
                levels.push_back(pair_window(p, p.pair(i, j)).lo);
            }
            std::sort(levels.begin(), levels.end());
            levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
            for (double h : levels) {
                std::vector<int> group;
                double load = 0.0;
                for (int j : reach) {
                    const Window w = pair_window(p, p.pair(i, j));
                    const double d = p.users[static_cast<std::size_t>(j)].demand_mbps;
                    if (w.lo <= h + 1e-9 && h <= w.hi + 1e-9 && static_cast<int>(group.size()) < p.fleet.channels &&
                        load + d <= p.fleet.backhaul_mbps + 1e-9) {
                        group.push_back(j);
                        load += d;
                    }
                }
                if (group.size() > best_group.size()) {
                    best_group = std::move(group);
                    best_i = i;
                }
            }
        }
        if (best_i < 0) {
            if (restricted) {
                restricted = false;
                std::fill(allowed.begin(), allowed.end(), 1);
                continue;
            }
            break;
        }
        used[static_cast<std::size_t>(best_i)] = 1;
        for (int j : best_group) {
            owner[static_cast<std::size_t>(j)] = static_cast<int>(stations.size());
        }
        uncovered -= static_cast<int>(best_group.size());
        stations.push_back({best_i, best_group});
    }

    // Squeeze the leftovers into stations that still have room.
    std::vector<int> rest;
    for (int j = 0; j < n_u; ++j) {
        if (owner[static_cast<std::size_t>(j)] < 0) {
            rest.push_back(j);
        }
    }
    std::sort(rest.begin(), rest.end(), harder_first);
    for (int j : rest) {
        int best_s = -1;
        double best_delta = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < stations.size(); ++s) {
            auto& st = stations[s];
            if (!p.pair(st.candidate, j).admissible) {
                continue;
            }
            const double before = best_cost(p, st.candidate, st.users);
            auto with = st.users;
            with.push_back(j);
            const double delta = best_cost(p, st.candidate, with) - before;
            if (delta < best_delta) {
                best_delta = delta;
                best_s = static_cast<int>(s);
            }
        }
        if (best_s < 0) {
            return std::nullopt;
        }
        stations[static_cast<std::size_t>(best_s)].users.push_back(j);
        owner[static_cast<std::size_t>(j)] = best_s;
    }
    return stations;
}

// Move single users between stations while that lowers the total linearized loss.
void improve(const PlacementProblem& p, std::vector<Station>& stations) {
    std::vector<double> cost(stations.size());
    for (std::size_t s = 0; s < stations.size(); ++s) {
        cost[s] = best_cost(p, stations[s].candidate, stations[s].users);
    }
    for (int pass = 0; pass < 50; ++pass) {
        bool moved = false;
        for (std::size_t from = 0; from < stations.size(); ++from) {
            for (std::size_t pos = 0; pos < stations[from].users.size();) {
                const int j = stations[from].users[pos];
                auto without = stations[from].users;
                without.erase(without.begin() + static_cast<std::ptrdiff_t>(pos));
                const double from_after = best_cost(p, stations[from].candidate, without);
                std::size_t best_to = from;
                double best_gain = 1e-9 * std::max(1.0, cost[from]);
                double best_to_after = 0.0;
                for (std::size_t to = 0; to < stations.size(); ++to) {
                    if (to == from || !p.pair(stations[to].candidate, j).admissible) {
                        continue;
                    }
                    auto with = stations[to].users;
                    with.push_back(j);
                    const double to_after = best_cost(p, stations[to].candidate, with);
                    const double gain = cost[from] + cost[to] - from_after - to_after;
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_to = to;
                        best_to_after = to_after;
                    }
                }
                if (best_to == from) {
                    ++pos;
                    continue;
                }
                stations[from].users = std::move(without);
                stations[best_to].users.push_back(j);
                cost[from] = from_after;
                cost[best_to] = best_to_after;
                moved = true;
            }
        }
        if (!moved) {
            break;
        }
    }
}

// Move whole stations onto preferred candidates that can serve the same users.
void adopt_preferred(const PlacementProblem& p, std::vector<Station>& stations, const std::vector<int>& preferred) {
    std::vector<char> is_preferred(static_cast<std::size_t>(p.num_candidates()), 0);
    std::vector<char> taken(static_cast<std::size_t>(p.num_candidates()), 0);
    for (int i : preferred) {
        if (i >= 0 && i < p.num_candidates()) {
            is_preferred[static_cast<std::size_t>(i)] = 1;
        }
    }
    for (const auto& st : stations) {
        taken[static_cast<std::size_t>(st.candidate)] = 1;
    }
    for (auto& st : stations) {
        if (is_preferred[static_cast<std::size_t>(st.candidate)]) {
            continue;
        }
        int best = -1;
        double best_cost_value = std::numeric_limits<double>::infinity();
        for (int i = 0; i < p.num_candidates(); ++i) {
            if (!is_preferred[static_cast<std::size_t>(i)] || taken[static_cast<std::size_t>(i)]) {
                continue;
            }
            const bool serves_all = std::all_of(st.users.begin(), st.users.end(),
                                                [&](int j) { return p.pair(i, j).admissible; });
            if (!serves_all) {
                continue;
            }
            const double c = best_cost(p, i, st.users);
            if (c < best_cost_value) {
                best_cost_value = c;
                best = i;
            }
        }
        if (best >= 0) {
            taken[static_cast<std::size_t>(st.candidate)] = 0;
            taken[static_cast<std::size_t>(best)] = 1;
            st.candidate = best;
        }
    }
}

}  // namespace

std::optional<PlacementSolution> greedy_placement(const PlacementProblem& problem, int fleet_size,
                                                  const std::vector<int>& preferred) {
    if (fleet_size < 1 || fleet_size > problem.num_candidates()) {
        return std::nullopt;
    }
    std::optional<std::vector<Station>> stations;
    if (!preferred.empty()) {
        stations = greedy_cover(problem, fleet_size, preferred);
    }
    if (!stations) {
        stations = greedy_cover(problem, fleet_size);
        if (stations && !preferred.empty()) {
            adopt_preferred(problem, *stations, preferred);
        }
    }
    if (!stations) {
        return std::nullopt;
    }
    std::vector<char> used(static_cast<std::size_t>(problem.num_candidates()), 0);
    for (const auto& s : *stations) {
        used[static_cast<std::size_t>(s.candidate)] = 1;
    }
    // Spare stations go to the candidates nearest to the users they could help most.
    while (static_cast<int>(stations->size()) < fleet_size) {
        int best = -1;
        int best_reach = -1;
        for (int i = 0; i < problem.num_candidates(); ++i) {
            if (used[static_cast<std::size_t>(i)]) {
                continue;
            }
            int reach = 0;
            for (int j = 0; j < problem.num_users(); ++j) {
                reach += problem.pair(i, j).admissible ? 1 : 0;
            }
            if (reach > best_reach) {
                best_reach = reach;
                best = i;
            }
        }
        used[static_cast<std::size_t>(best)] = 1;
        stations->push_back({best, {}});
    }
    improve(problem, *stations);
    return finish(problem, std::move(*stations));
}

int fleet_lower_bound(const PlacementProblem& problem) {
    const int n_u = problem.num_users();
    if (n_u == 0) {
        return 1;
    }
    double demand = 0.0;
    for (const auto& u : problem.users) {
        demand += u.demand_mbps;
    }
    int bound = std::max(1, (n_u + problem.fleet.channels - 1) / problem.fleet.channels);
    bound = std::max(bound, static_cast<int>(std::ceil(demand / problem.fleet.backhaul_mbps - 1e-9)));

    std::vector<int> order(static_cast<std::size_t>(n_u));
    std::vector<int> options(static_cast<std::size_t>(n_u), 0);
    for (int j = 0; j < n_u; ++j) {
        order[static_cast<std::size_t>(j)] = j;
        for (int i = 0; i < problem.num_candidates(); ++i) {
            options[static_cast<std::size_t>(j)] += problem.pair(i, j).admissible ? 1 : 0;
        }
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return options[static_cast<std::size_t>(a)] < options[static_cast<std::size_t>(b)];
    });
    std::vector<char> claimed(static_cast<std::size_t>(problem.num_candidates()), 0);
    int packing = 0;
    for (int j : order) {
        bool clash = false;
        for (int i = 0; i < problem.num_candidates() && !clash; ++i) {
            clash = problem.pair(i, j).admissible && claimed[static_cast<std::size_t>(i)];
        }
        if (clash || options[static_cast<std::size_t>(j)] == 0) {
            continue;
        }
        ++packing;
        for (int i = 0; i < problem.num_candidates(); ++i) {
            if (problem.pair(i, j).admissible) {
                claimed[static_cast<std::size_t>(i)] = 1;
            }
        }
    }
    return std::max(bound, packing);
}

namespace {

bool any_user_stranded(const PlacementProblem& p) {
    for (int j = 0; j < p.num_users(); ++j) {
        bool ok = false;
        for (int i = 0; i < p.num_candidates() && !ok; ++i) {
            ok = p.pair(i, j).admissible;
        }
        if (!ok) {
            return true;
        }
    }
    return false;
}

std::vector<double> to_columns(const PlacementMilp& milp, const PlacementSolution& sol) {
    const auto& p = milp.problem;
    const int n_u = p.num_users();
    std::vector<double> v(static_cast<std::size_t>(milp.model.num_columns()), 0.0);
    for (const auto& s : sol.selected) {
        v[static_cast<std::size_t>(milp.layout.m[static_cast<std::size_t>(s.candidate)])] = 1.0;
        v[static_cast<std::size_t>(milp.layout.h[static_cast<std::size_t>(s.candidate)])] = s.altitude;
    }
    for (int j = 0; j < n_u; ++j) {
        const int i = sol.assignment[static_cast<std::size_t>(j)];
        const auto idx = static_cast<std::size_t>(i * n_u + j);
        double h = 0.0;
        for (const auto& s : sol.selected) {
            if (s.candidate == i) {
                h = s.altitude;
            }
        }
        v[static_cast<std::size_t>(milp.layout.x[idx])] = 1.0;
        v[static_cast<std::size_t>(milp.layout.t[idx])] = h;
        v[static_cast<std::size_t>(milp.layout.k[idx])] = linearized_loss(p.pair(i, j), h) / milp.loss_scale;
    }
    return v;
}

PlacementSolution from_columns(const PlacementMilp& milp, const std::vector<double>& v) {
    const auto& p = milp.problem;
    const int n_u = p.num_users();
    std::vector<Station> stations;
    for (int i = 0; i < p.num_candidates(); ++i) {
        if (std::round(v[static_cast<std::size_t>(milp.layout.m[static_cast<std::size_t>(i)])]) != 1.0) {
            continue;
        }
        Station s{i, {}};
        for (int j = 0; j < n_u; ++j) {
            const int x = milp.layout.x[static_cast<std::size_t>(i * n_u + j)];
            if (x >= 0 && std::round(v[static_cast<std::size_t>(x)]) == 1.0) {
                s.users.push_back(j);
            }
        }
        stations.push_back(std::move(s));
    }
    return finish(p, std::move(stations));
}

double dense_size(const lp::Model& m) {
    const double rows = m.num_rows();
    return rows * (rows + m.num_columns());
}

SolveOutcome solve_with_model(const PlacementMilp& milp, const SolveOptions& options) {
    const auto& p = milp.problem;
    const int fleet_size = milp.fleet_size;
    SolveOutcome out;
    if (fleet_size > p.num_candidates() || any_user_stranded(p) || fleet_size < fleet_lower_bound(p)) {
        out.status = SolveStatus::infeasible;
        return out;
    }
    auto greedy = greedy_placement(p, fleet_size, options.preferred);
    if (dense_size(milp.model) > options.dense_budget) {
        out.status = SolveStatus::timed_out;
        out.solution = std::move(greedy);
        return out;
    }
    std::optional<bnb::Incumbent> start;
    if (greedy) {
        auto cols = to_columns(milp, *greedy);
        if (milp.model.max_violation(cols) <= kTol) {
            start = bnb::Incumbent{cols, milp.model.objective_value(cols)};
        }
    }
    bnb::Options bo;
    bo.time_limit_s = options.time_limit_s;
    const auto result = bnb::solve(milp.model, bo, start);
    out.nodes = result.nodes;
    out.used_branch_and_bound = true;
    switch (result.status) {
        case bnb::Status::optimal:
            out.status = SolveStatus::optimal;
            break;
        case bnb::Status::infeasible:
            out.status = SolveStatus::infeasible;
            return out;
        case bnb::Status::stopped:
            out.status = SolveStatus::timed_out;
            break;
    }
    if (result.incumbent) {
        out.solution = from_columns(milp, result.incumbent->values);
    } else {
        out.solution = std::move(greedy);
    }
    return out;
}

}  // namespace

SolveOutcome solve_exact(const PlacementMilp& milp, double time_limit_s) {
    SolveOptions options;
    options.time_limit_s = time_limit_s;
    options.dense_budget = std::numeric_limits<double>::infinity();
    return solve_with_model(assemble(milp.problem, milp.fleet_size, true), options);
}

SolveOutcome solve_placement(const PlacementProblem& problem, int fleet_size, const SolveOptions& options) {
    if (fleet_size < 1) {
        throw std::invalid_argument("fleet size must be at least 1");
    }
    if (fleet_size > problem.num_candidates() || any_user_stranded(problem) ||
        fleet_size < fleet_lower_bound(problem)) {
        return {};
    }
    // Size of the presolved model, known before assembling it.
    double kept = 0.0;
    for (const auto& pt : problem.pairs) {
        kept += pt.admissible ? 1.0 : 0.0;
    }
    const double n_c = problem.num_candidates();
    const double rows = problem.num_users() + 2.0 + 4.0 * n_c + 8.0 * kept;
    const double cols = 2.0 * n_c + 3.0 * kept;
    if (rows * (rows + cols) > options.dense_budget) {
        SolveOutcome out;
        out.status = SolveStatus::timed_out;
        out.solution = greedy_placement(problem, fleet_size, options.preferred);
        return out;
    }
    return solve_with_model(assemble(problem, fleet_size, true), options);
}

std::vector<std::string> validate_solution(const PlacementProblem& problem, int fleet_size,
                                           const PlacementSolution& solution) {
    std::vector<std::string> issues;
    auto report = [&](const std::string& s) { issues.push_back(s); };
    const auto& fleet = problem.fleet;
    const auto& env = problem.env;
    const int n_u = problem.num_users();
    const int n_c = problem.num_candidates();

    if (static_cast<int>(solution.selected.size()) != fleet_size) {
        report("fleet_count: " + std::to_string(solution.selected.size()) + " stations selected, expected " +
               std::to_string(fleet_size));
    }
    std::vector<int> slot(static_cast<std::size_t>(n_c), -1);
    for (std::size_t s = 0; s < solution.selected.size(); ++s) {
        const auto& st = solution.selected[s];
        if (st.candidate < 0 || st.candidate >= n_c) {
            report("fleet_count: unknown candidate " + std::to_string(st.candidate));
            continue;
        }
        if (slot[static_cast<std::size_t>(st.candidate)] >= 0) {
            report("fleet_count: candidate " + std::to_string(st.candidate) + " selected twice");
        }
        slot[static_cast<std::size_t>(st.candidate)] = static_cast<int>(s);
        if (st.altitude < fleet.h_min - kTol || st.altitude > fleet.h_max + kTol) {
            report("altitude band: altitude " + std::to_string(st.altitude) + " outside band at candidate " +
                   std::to_string(st.candidate));
        }
    }
    if (static_cast<int>(solution.assignment.size()) != n_u) {
        report("cover_all: assignment covers " + std::to_string(solution.assignment.size()) + " of " +
               std::to_string(n_u) + " users");
        return issues;
    }
    std::vector<int> count(solution.selected.size(), 0);
    std::vector<double> load(solution.selected.size(), 0.0);
    const double gain = free_space_coefficient(env);
    const double h0 = fleet.h0();
    const double cot = cot_deg(fleet.elevation_deg);
    double objective = 0.0;
    for (int j = 0; j < n_u; ++j) {
        const int i = solution.assignment[static_cast<std::size_t>(j)];
        if (i < 0 || i >= n_c) {
            report("cover_all: user " + std::to_string(j) + " not served");
            continue;
        }
        const int s = slot[static_cast<std::size_t>(i)];
        if (s < 0) {
            report("open_link: user " + std::to_string(j) + " assigned to unselected candidate " + std::to_string(i));
            continue;
        }
        ++count[static_cast<std::size_t>(s)];
        const auto& u = problem.users[static_cast<std::size_t>(j)];
        load[static_cast<std::size_t>(s)] += u.demand_mbps;
        const auto& c = problem.candidates.points[static_cast<std::size_t>(i)];
        const double h = solution.selected[static_cast<std::size_t>(s)].altitude;
        const double r = std::hypot(c.x - u.pos.x, c.y - u.pos.y);
        if (h - u.pos.z < cot * r - kTol || h <= u.pos.z) {
            report("cone: user " + std::to_string(j) + " outside the elevation cone of candidate " + std::to_string(i));
        }
        const double g0 = h0 - u.pos.z;
        const double excess = excess_loss_db(r == 0.0 ? 90.0 : std::atan2(g0, r) / kDegree, env);
        const double gate = u.pos.z + taylor_gate(r, g0, env, excess);
        if (h > gate - 0.5 + kTol) {
            report("gate: user " + std::to_string(j) + " served above the altitude gate of candidate " +
                   std::to_string(i));
        }
        const double g = h - u.pos.z;
        objective += std::max(0.0, gain * db_to_linear(excess) * (r * r + 2.0 * g0 * g - g0 * g0));
        if (solution.path_loss_db.size() == static_cast<std::size_t>(n_u) && h > u.pos.z) {
            const double pl = link_path_loss({c.x, c.y, h}, u.pos, env);
            if (std::abs(pl - solution.path_loss_db[static_cast<std::size_t>(j)]) > kTol) {
                report("path loss of user " + std::to_string(j) + " does not match its link");
            }
        }
    }
    for (std::size_t s = 0; s < solution.selected.size(); ++s) {
        if (count[s] > fleet.channels) {
            report("channels: candidate " + std::to_string(solution.selected[s].candidate) + " serves " +
                   std::to_string(count[s]) + " users");
        }
        if (load[s] > fleet.backhaul_mbps + kTol) {
            report("backhaul: candidate " + std::to_string(solution.selected[s].candidate) + " carries " +
                   std::to_string(load[s]) + " Mbps");
        }
    }
    if (std::abs(objective - solution.objective) > kTol * std::max(1.0, std::abs(objective))) {
        std::ostringstream os;
        os << "objective: " << solution.objective << " differs from recomputed " << objective;
        report(os.str());
    }
    return issues;
}

FleetSizeResult min_fbs_count(const PlacementProblem& problem, const SolveOptions& options) {
    const int n_c = problem.num_candidates();
    if (any_user_stranded(problem)) {
        throw NoFeasibleFleet("some user is outside every candidate's coverage");
    }
    int lo = fleet_lower_bound(problem);
    if (lo > n_c) {
        throw NoFeasibleFleet("capacity bounds need more stations than there are candidates");
    }
    FleetSizeResult result;
    std::map<int, SolveOutcome> probes;
    auto probe = [&](int p) -> const SolveOutcome& {
        auto it = probes.find(p);
        if (it == probes.end()) {
            ++result.probes;
            it = probes.emplace(p, solve_placement(problem, p, options)).first;
        }
        return it->second;
    };

    int hi = n_c;
    if (auto cover = greedy_cover(problem, n_c)) {
        hi = std::max(lo, static_cast<int>(cover->size()));
    }
    if (!options.preferred.empty()) {
        if (auto cover = greedy_cover(problem, n_c, options.preferred)) {
            hi = std::min(hi, std::max(lo, static_cast<int>(cover->size())));
        }
    }
    if (!probe(hi).feasible()) {
        if (hi == n_c) {
            throw NoFeasibleFleet("no feasible placement even with every candidate in use");
        }
        // The greedy cover proves hi feasible; an unproven probe there cannot happen,
        // but fall back to the full range rather than trusting it.
        hi = n_c;
        if (!probe(hi).feasible()) {
            throw NoFeasibleFleet("no feasible placement even with every candidate in use");
        }
    }
    while (lo < hi) {
        const int mid = lo + (hi - lo) / 2;
        if (probe(mid).feasible()) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    const auto& best = probe(lo);
    result.fleet_size = lo;
    result.solution = *best.solution;
    result.status = best.status;
    return result;
}

FleetSizeResult min_fbs_count(const Snapshot& snapshot, const CandidateSet& candidates, const Environment& env,
                              const FleetParams& fleet, const SolveOptions& options) {
    return min_fbs_count(make_problem(snapshot, candidates, env, fleet), options);
}

double linearization_slack_db(const PairTerms& pair, double user_altitude, double h, const Environment& env) {
    const double g = h - user_altitude;
    if (!(g > 0.0)) {
        throw std::invalid_argument("FBS must be above the user");
    }
    const double theta = pair.horizontal == 0.0 ? 90.0 : std::atan2(g, pair.horizontal) / kDegree;
    const double d = std::hypot(pair.horizontal, g);
    const double linear = pair.x_coef + pair.t_coef * h;
    if (!(linear > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return mean_path_loss(d, theta, env) - linear_to_db(linear);
}

}  // namespace fbs
