#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fbs/geometry.hpp"
#include "fbs/routing.hpp"

namespace fbs {

/// Battery and airframe constants of one FBS.
struct EnergyModel {
    double zeta_ah = 15.0;      // battery capacity, Ah
    double volt = 11.1;         // battery voltage
    double d_total = 15000.0;   // flight distance on a full pack, m
    double mass = 8.0;          // kg
    double g = 9.81;            // m/s^2
    double e_hover = 1000.0;    // J per snapshot spent hovering

    /// Throws std::invalid_argument unless every constant is positive (zeta may be 0).
    void validate() const;
    /// zeta * volt * 3600, J.
    double capacity() const { return zeta_ah * volt * 3600.0; }
};

/// E_1 = zeta * V * 3600 / D, J per metre flown.
double energy_per_meter(const EnergyModel& model);

/// length * E_1 + mass * g * max(dz, 0). Descent is not credited.
double edge_energy(double route_length, double dz, const EnergyModel& model);

/// V_FBS * dt, m.
double distance_threshold(double v_fbs, double dt);

/// E_ij + E_hover.
double path_energy(double edge, double hover);

enum class FbsStatus { serving, at_base, charging, in_transit };

const char* to_string(FbsStatus s);

struct FbsState {
    int id = 0;
    Point3 position;
    double energy = 0.0;
    double capacity = 0.0;
    FbsStatus status = FbsStatus::at_base;
    int destination = -1;  // required-point index while in transit
};

struct FleetState {
    std::vector<FbsState> members;

    int count(FbsStatus s) const;
    double total_energy() const;
};

/// One row of the padded assignment: a fleet member or a phantom base slot.
struct OriginSlot {
    int fbs = -1;             // index into FleetState::members; -1 for a phantom base slot
    std::size_t route_row = 0; // row of the route table this slot starts from
    bool at_base = true;
};

/// One column: a required hovering point or a base slot.
struct DestinationSlot {
    int position = -1;        // required-point index; -1 for a base slot
    std::size_t route_col = 0;
};

struct AssignmentProblem {
    std::size_t n = 0;
    std::vector<OriginSlot> origins;
    std::vector<DestinationSlot> destinations;
    std::vector<double> cost;        // row-major n x n, J; meaningful where feasible
    std::vector<unsigned char> feasible;

    double cost_at(std::size_t i, std::size_t j) const { return cost[i * n + j]; }
    bool allowed(std::size_t i, std::size_t j) const { return feasible[i * n + j] != 0; }
};

/// Inputs gathered by the caller for one snapshot transition.
struct TransitionInputs {
    const FleetState* fleet = nullptr;
    std::vector<Point3> required;           // hovering points of the next snapshot
    std::vector<std::size_t> origin_rows;   // route-table row of each fleet member (base row when landed)
    const RouteTable* routes = nullptr;     // rows: airborne origins + base, cols: required + base
    Point3 base;
    EnergyModel model;
    double dist_th = 0.0;
};

/// Energy needed to fly from a point to the base along the table's route, J.
double energy_to_base(const RouteTable& routes, std::size_t row, const Point3& from, const Point3& base,
                      const EnergyModel& model);

/// Pads both sides with base slots to n = max(2 max(active, required), fleet size).
/// Airborne-to-field legs longer than dist_th are forbidden (legs from the base and
/// legs of FBSs already in transit are exempt). A field leg is also forbidden when the
/// FBS would be left with less than the energy needed to return to base after the
/// leg and one hover interval. Only fully charged landed FBSs may launch. Phantom
/// slots reach base slots only. Base-to-base costs nothing.
AssignmentProblem build_assignment(const TransitionInputs& in);

struct AssignmentSolution {
    std::vector<std::size_t> destination_of;  // origin slot -> destination slot
    double total_energy = 0.0;
};

/// Minimum-cost perfect matching over feasible edges (Hungarian algorithm, O(n^3)).
/// Returns nullopt when no perfect matching uses only feasible edges.
std::optional<AssignmentSolution> solve_assignment(const AssignmentProblem& problem);

/// JSON record of an instance and, optionally, its solution.
void write_assignment_record(std::ostream& out, const AssignmentProblem& problem,
                             const std::optional<AssignmentSolution>& solution);
AssignmentProblem read_assignment_record(std::istream& in);

}  // namespace fbs
