#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbs/channel.hpp"
#include "fbs/lp.hpp"
#include "fbs/scenario.hpp"

namespace fbs {

struct Candidate {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
};

struct CandidateSet {
    std::vector<Candidate> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Hexagonal lattice over the region: rows `spacing * sqrt(3)/2` apart, odd
/// rows shifted by half a spacing, centred so the margins are symmetric.
/// Throws std::invalid_argument for spacing <= 0.
CandidateSet generate_candidates(const Region& region, double spacing);

/// Drop candidates whose horizontal location lies over (or within `margin` of)
/// a building footprint, then renumber ids from 0.
CandidateSet exclude_footprints(const CandidateSet& candidates, const std::vector<BoxObstacle>& obstacles,
                                double margin);

/// Users observed at one instant.
struct Snapshot {
    std::vector<User> users;
};

/// Per (candidate, user) coefficients of the placement model.
struct PairTerms {
    double horizontal = 0.0;   // r_ij
    double excess_db = 0.0;    // probability-weighted excess loss at the Taylor altitude
    double weight = 1.0;       // A * 10^(excess_db/10)
    double x_coef = 0.0;       // k_ij >= x_coef * x_ij + t_coef * t_ij
    double t_coef = 0.0;
    double cone_altitude = 0.0;  // lowest altitude meeting the elevation cone
    double gate = 0.0;           // Taylor altitude gate a_ij (user altitude included)
    bool admissible = false;     // some altitude in the band satisfies cone and gate

    double max_altitude() const { return gate - 0.5; }
};

/// Linearized loss of a served pair at FBS altitude h, clamped at zero.
double linearized_loss(const PairTerms& pair, double h);

/// Immutable problem data shared by every fleet size P.
struct PlacementProblem {
    std::vector<User> users;
    CandidateSet candidates;
    Environment env;
    FleetParams fleet;
    double diagonal = 0.0;        // of the bounding box of users and candidates
    std::vector<PairTerms> pairs; // index i * U + j

    int num_users() const { return static_cast<int>(users.size()); }
    int num_candidates() const { return static_cast<int>(candidates.size()); }
    const PairTerms& pair(int i, int j) const { return pairs[static_cast<std::size_t>(i * num_users() + j)]; }

    double big_m_loss() const;
    double big_m_altitude() const;
};

PlacementProblem make_problem(const Snapshot& snapshot, const CandidateSet& candidates, const Environment& env,
                              const FleetParams& fleet);

/// Column layout of an assembled model. Indices are -1 for pairs dropped by presolve.
struct MilpLayout {
    std::vector<int> m;  // per candidate
    std::vector<int> h;  // per candidate
    std::vector<int> x;  // per pair
    std::vector<int> t;
    std::vector<int> k;
};

struct PlacementMilp {
    PlacementProblem problem;
    int fleet_size = 1;
    lp::Model model;
    MilpLayout layout;
    double big_m = 0.0;           // k_ij <= big_m x_ij
    double big_m_altitude = 0.0;  // altitude big-M of the gate row
    double loss_scale = 1.0;      // k columns are stored as k_ij / loss_scale
    std::map<std::string, int> row_families;  // family label -> rows instantiated

    int binary_count() const;
    int continuous_count() const;
};

/// Full model: one x/t/k block per (candidate, user) pair and every row family.
PlacementMilp build_milp(const Snapshot& snapshot, const CandidateSet& candidates, int fleet_size,
                         const Environment& env, const FleetParams& fleet);
PlacementMilp build_milp(const PlacementProblem& problem, int fleet_size);

struct PlacedFbs {
    int candidate = 0;
    double altitude = 0.0;
};

struct PlacementSolution {
    std::vector<PlacedFbs> selected;     // ordered by candidate id
    std::vector<int> assignment;         // user index -> candidate id
    std::vector<double> path_loss_db;    // user index -> mean path loss of its link
    double objective = 0.0;              // sum of k_ij

    Point3 position_of(const CandidateSet& candidates, std::size_t k) const;
};

enum class SolveStatus { optimal, infeasible, timed_out };

const char* to_string(SolveStatus s);

struct SolveOutcome {
    SolveStatus status = SolveStatus::infeasible;
    std::optional<PlacementSolution> solution;  // set for optimal, maybe for timed_out
    long nodes = 0;
    bool used_branch_and_bound = false;

    bool feasible() const { return solution.has_value(); }
};

struct SolveOptions {
    double time_limit_s = 60.0;
    /// Presolved models whose dense tableau would exceed this many entries are
    /// not handed to branch and bound; the outcome is then timed_out with the
    /// heuristic incumbent, if any.
    double dense_budget = 4.0e6;
    /// Candidate ids the heuristic tries to reuse before opening others
    /// (typically the previous snapshot's stations). Empty for a fresh start.
    std::vector<int> preferred;
};

/// Exact solve of the placement model for the milp's fleet size. Branching runs on
/// the presolved form, without the pairs that no altitude can serve.
SolveOutcome solve_exact(const PlacementMilp& milp, double time_limit_s);
SolveOutcome solve_placement(const PlacementProblem& problem, int fleet_size, const SolveOptions& options);

/// Greedy construction followed by single-user reassignment; no optimality claim.
/// With `preferred` set, a cover that opens those candidates first is tried before a fresh one.
std::optional<PlacementSolution> greedy_placement(const PlacementProblem& problem, int fleet_size,
                                                  const std::vector<int>& preferred = {});

/// Provable lower bound on the fleet size: channel count, backhaul volume and
/// a set of users no single candidate can serve together.
int fleet_lower_bound(const PlacementProblem& problem);

/// Lowest feasible altitude at candidate i for a set of served users, if any.
std::optional<double> lowest_altitude(const PlacementProblem& problem, int candidate, const std::vector<int>& users);

/// Re-check every constraint family from raw data. Returns the violations found (empty when valid).
std::vector<std::string> validate_solution(const PlacementProblem& problem, int fleet_size,
                                           const PlacementSolution& solution);

struct FleetSizeResult {
    int fleet_size = 0;
    PlacementSolution solution;
    SolveStatus status = SolveStatus::optimal;  // status of the solve at fleet_size
    int probes = 0;
};

class NoFeasibleFleet : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Smallest P whose placement is feasible, by bisection over [lower bound, |candidates|].
/// Throws NoFeasibleFleet when even P = |candidates| is infeasible.
FleetSizeResult min_fbs_count(const Snapshot& snapshot, const CandidateSet& candidates, const Environment& env,
                              const FleetParams& fleet, const SolveOptions& options = {});
FleetSizeResult min_fbs_count(const PlacementProblem& problem, const SolveOptions& options = {});

/// Mean path loss at altitude h minus the linearized loss, dB (positive when the model is optimistic).
double linearization_slack_db(const PairTerms& pair, double user_altitude, double h, const Environment& env);

}  // namespace fbs
