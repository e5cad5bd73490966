#include "fbs/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace fbs {

void EnergyModel::validate() const {
    if (zeta_ah < 0.0 || !(volt > 0.0) || !(d_total > 0.0)) {
        throw std::invalid_argument("battery capacity, voltage and flight distance must be positive");
    }
    if (!(mass > 0.0) || !(g > 0.0) || e_hover < 0.0) {
        throw std::invalid_argument("mass and gravity must be positive, hover energy non-negative");
    }
}

double energy_per_meter(const EnergyModel& model) { return model.zeta_ah * model.volt * 3600.0 / model.d_total; }

double edge_energy(double route_length, double dz, const EnergyModel& model) {
    if (route_length < 0.0) {
        throw std::invalid_argument("route length must be non-negative");
    }
    return route_length * energy_per_meter(model) + model.mass * model.g * std::max(dz, 0.0);
}

double distance_threshold(double v_fbs, double dt) {
    if (v_fbs < 0.0 || dt < 0.0) {
        throw std::invalid_argument("speed and interval must be non-negative");
    }
    return v_fbs * dt;
}

double path_energy(double edge, double hover) {
    if (edge < 0.0 || hover < 0.0) {
        throw std::invalid_argument("energies must be non-negative");
    }
    return edge + hover;
}

const char* to_string(FbsStatus s) {
    switch (s) {
        case FbsStatus::serving:
            return "serving";
        case FbsStatus::at_base:
            return "at_base";
        case FbsStatus::charging:
            return "charging";
        case FbsStatus::in_transit:
            return "in_transit";
    }
    return "unknown";
}

int FleetState::count(FbsStatus s) const {
    return static_cast<int>(std::count_if(members.begin(), members.end(), [s](const FbsState& m) { return m.status == s; }));
}

double FleetState::total_energy() const {
    double e = 0.0;
    for (const auto& m : members) {
        e += m.energy;
    }
    return e;
}

double energy_to_base(const RouteTable& routes, std::size_t row, const Point3& from, const Point3& base,
                      const EnergyModel& model) {
    return edge_energy(routes.length(row, routes.base_col()), base.z - from.z, model);
}

namespace {

bool airborne(FbsStatus s) { return s == FbsStatus::serving || s == FbsStatus::in_transit; }

}  // namespace

AssignmentProblem build_assignment(const TransitionInputs& in) {
    if (in.fleet == nullptr || in.routes == nullptr) {
        throw std::invalid_argument("transition inputs need a fleet and a route table");
    }
    const auto& fleet = *in.fleet;
    const auto& routes = *in.routes;
    if (in.origin_rows.size() != fleet.members.size()) {
        throw std::invalid_argument("one route row per fleet member is required");
    }
    if (routes.cols != in.required.size() + 1) {
        throw std::invalid_argument("route table columns must be the required points plus the base");
    }
    const std::size_t active = static_cast<std::size_t>(fleet.count(FbsStatus::serving) + fleet.count(FbsStatus::in_transit));
    const std::size_t required = in.required.size();
    const std::size_t n = std::max(2 * std::max(active, required), fleet.members.size());

    AssignmentProblem p;
    p.n = n;
    const std::size_t base_row = routes.base_row();
    for (std::size_t k = 0; k < fleet.members.size(); ++k) {
        const bool up = airborne(fleet.members[k].status);
        p.origins.push_back({static_cast<int>(k), up ? in.origin_rows[k] : base_row, !up});
    }
    while (p.origins.size() < n) {
        p.origins.push_back({-1, base_row, true});
    }
    for (std::size_t j = 0; j < required; ++j) {
        p.destinations.push_back({static_cast<int>(j), j});
    }
    while (p.destinations.size() < n) {
        p.destinations.push_back({-1, routes.base_col()});
    }

    const double e1 = energy_per_meter(in.model);
    std::vector<double> reserve(required);
    for (std::size_t j = 0; j < required; ++j) {
        // The way home from a hovering point is downhill, so only distance counts.
        reserve[j] = routes.length(base_row, j) * e1;
    }

    p.cost.assign(n * n, 0.0);
    p.feasible.assign(n * n, 0);
    const Point3& base = in.base;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& o = p.origins[i];
        for (std::size_t j = 0; j < n; ++j) {
            const auto& d = p.destinations[j];
            double cost = 0.0;
            bool ok = false;
            if (o.fbs < 0) {
                ok = d.position < 0;
            } else {
                const auto& m = fleet.members[static_cast<std::size_t>(o.fbs)];
                const double length = routes.length(o.route_row, d.route_col);
                if (d.position < 0) {
                    if (o.at_base) {
                        ok = true;
                    } else if (std::isfinite(length)) {
                        cost = edge_energy(length, base.z - m.position.z, in.model);
                        ok = true;
                    }
                } else if (std::isfinite(length)) {
                    const Point3& target = in.required[static_cast<std::size_t>(d.position)];
                    const Point3& from = o.at_base ? base : m.position;
                    cost = edge_energy(length, target.z - from.z, in.model);
                    const bool launch_ready = !o.at_base || m.energy >= m.capacity * (1.0 - 1e-12);
                    const bool in_reach = o.at_base || m.status == FbsStatus::in_transit || length <= in.dist_th + 1e-9;
                    const bool enough =
                        m.energy - path_energy(cost, in.model.e_hover) >= reserve[static_cast<std::size_t>(d.position)];
                    ok = launch_ready && in_reach && enough;
                }
            }
            p.cost[i * n + j] = ok ? cost : 0.0;
            p.feasible[i * n + j] = ok ? 1 : 0;
        }
    }
    return p;
}

std::optional<AssignmentSolution> solve_assignment(const AssignmentProblem& problem) {
    const std::size_t n = problem.n;
    if (problem.cost.size() != n * n || problem.feasible.size() != n * n) {
        throw std::invalid_argument("assignment matrices must be n x n");
    }
    AssignmentSolution sol;
    if (n == 0) {
        return sol;
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < n * n; ++k) {
        if (problem.feasible[k]) {
            worst = std::max(worst, std::abs(problem.cost[k]));
        }
    }
    const double forbidden = (worst + 1.0) * static_cast<double>(n + 1) * 4.0;
    auto c = [&](std::size_t i, std::size_t j) {
        return problem.allowed(i, j) ? problem.cost_at(i, j) : forbidden;
    };

    // Shortest augmenting path with potentials; rows and columns are 1-based inside.
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0);
    std::vector<double> v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0);  // column -> row
    std::vector<std::size_t> way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) {
                    continue;
                }
                const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    sol.destination_of.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j) {
        sol.destination_of[match[j] - 1] = j - 1;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = sol.destination_of[i];
        if (!problem.allowed(i, j)) {
            return std::nullopt;
        }
        sol.total_energy += problem.cost_at(i, j);
    }
    return sol;
}

void write_assignment_record(std::ostream& out, const AssignmentProblem& problem,
                             const std::optional<AssignmentSolution>& solution) {
    nlohmann::json j;
    j["n"] = problem.n;
    for (const auto& o : problem.origins) {
        j["origins"].push_back({{"fbs", o.fbs}, {"route_row", o.route_row}, {"at_base", o.at_base}});
    }
    for (const auto& d : problem.destinations) {
        j["destinations"].push_back({{"position", d.position}, {"route_col", d.route_col}});
    }
    j["cost"] = problem.cost;
    j["feasible"] = problem.feasible;
    if (solution) {
        j["solution"] = {{"destination_of", solution->destination_of}, {"total_energy", solution->total_energy}};
    } else {
        j["solution"] = nullptr;
    }
    out << j.dump(1) << '\n';
}

AssignmentProblem read_assignment_record(std::istream& in) {
    const auto j = nlohmann::json::parse(in);
    AssignmentProblem p;
    p.n = j.at("n").get<std::size_t>();
    for (const auto& o : j.at("origins")) {
        p.origins.push_back({o.at("fbs").get<int>(), o.at("route_row").get<std::size_t>(), o.at("at_base").get<bool>()});
    }
    for (const auto& d : j.at("destinations")) {
        p.destinations.push_back({d.at("position").get<int>(), d.at("route_col").get<std::size_t>()});
    }
    p.cost = j.at("cost").get<std::vector<double>>();
    p.feasible = j.at("feasible").get<std::vector<unsigned char>>();
    if (p.cost.size() != p.n * p.n || p.feasible.size() != p.n * p.n) {
        throw std::invalid_argument("assignment record matrices do not match n");
    }
    return p;
}

}  // namespace fbs
