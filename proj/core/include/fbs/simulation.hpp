#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbs/placement.hpp"
#include "fbs/routing.hpp"
#include "fbs/scenario.hpp"
#include "fbs/trajectory.hpp"

namespace fbs {

struct SimulationConfig {
    int snapshots = 20;
    std::optional<double> dt;           // pinned interval; nullopt computes r_min / mean speed
    std::optional<double> r_min;        // nullopt uses h_min cot(elevation)
    double candidate_spacing = 225.0;
    double candidate_margin = 5.0;      // keep-out around building footprints
    EnergyModel energy;
    std::optional<double> recharge_rate;  // J/s; nullopt refills a pack in four intervals
    std::optional<int> pool_size;         // nullopt sizes the pool from the first snapshot
    SolveOptions placement{5.0, 4.0e6, {}};

    void validate() const;
};

/// Energy flows of one snapshot, J.
struct EnergyLedger {
    double flight = 0.0;
    double hover = 0.0;
    double recharge = 0.0;
};

/// Movement of one fleet member during a snapshot.
struct Move {
    int fbs = 0;
    Route route;             // the part flown during this snapshot
    double distance = 0.0;
    double energy = 0.0;
    FbsStatus before = FbsStatus::at_base;
    FbsStatus after = FbsStatus::at_base;
};

struct SnapshotMetrics {
    int users = 0;
    int required = 0;          // P* of this snapshot
    int serving = 0;           // FBSs hovering at a required point after the moves
    int unserved_points = 0;   // required points whose FBS is still on the way
    double flight_distance = 0.0;
    double energy_spent = 0.0;
    double served_demand = 0.0;  // Mbps of users whose station is in place
    double assignment_seconds = 0.0;
    double routing_seconds = 0.0;
    double placement_seconds = 0.0;
    bool schedule_overrun = false;
};

struct SnapshotRecord {
    int index = 0;
    std::vector<User> users;
    FleetSizeResult placement;
    std::vector<Point3> required;
    std::vector<Move> moves;
    std::vector<double> departure_offsets;  // parallel to moves
    std::size_t assignment_size = 0;
    std::vector<std::size_t> assignment;    // origin slot -> destination slot
    double assignment_energy = 0.0;
    FleetState fleet_after;
    EnergyLedger ledger;
    SnapshotMetrics metrics;
};

struct EpisodeTimeline {
    std::uint64_t seed = 0;
    double dt = 0.0;
    double dist_th = 0.0;
    double initial_energy = 0.0;
    Scenario scenario;
    CandidateSet candidates;
    std::vector<SnapshotRecord> snapshots;

    double final_energy() const;
    /// initial + recharge - flight - hover - final, J.
    double ledger_imbalance() const;
};

class EpisodeAborted : public std::runtime_error {
public:
    EpisodeAborted(const std::string& reason, EpisodeTimeline partial)
        : std::runtime_error(reason), partial_(std::move(partial)) {}
    const EpisodeTimeline& partial() const { return partial_; }

private:
    EpisodeTimeline partial_;
};

/// Draw obstacles for a scenario from a seed, keeping the base clear.
Scenario make_scenario(const Scenario& base_description, std::uint64_t seed);

/// Interval between snapshots: the pinned value or r_min / mean user speed.
double resolve_interval(const Scenario& scenario, const SimulationConfig& config);

/// Runs the snapshot loop: place, route, assign, stagger, move, debit, recharge.
/// Throws EpisodeAborted on an infeasible placement or assignment.
EpisodeTimeline run_episode(const Scenario& scenario, const SimulationConfig& config, std::uint64_t seed);

/// Charging members gain rate * dt up to capacity; members that fill up become at_base.
FleetState apply_recharge(const FleetState& fleet, double dt, double rate);

}  // namespace fbs
