#pragma once

#include <optional>
#include <vector>

#include "fbs/lp.hpp"

namespace fbs::bnb {

struct Options {
    double time_limit_s = 60.0;
    double relative_gap = 1e-9;
    long node_limit = 5'000'000;
};

enum class Status {
    optimal,     // incumbent proven optimal
    infeasible,  // proven: no integer-feasible point
    stopped      // a limit was hit; incumbent may or may not exist
};

const char* to_string(Status s);

struct Incumbent {
    std::vector<double> values;
    double objective = 0.0;
};

struct Result {
    Status status = Status::stopped;
    std::optional<Incumbent> incumbent;
    double best_bound = 0.0;
    long nodes = 0;
    long lp_iterations = 0;
};

/// Best-first branch and bound with dual-simplex LP bounds. Branches on the
/// fractional integer column with the highest priority, then the most
/// fractional value, then the lowest index. Among incumbents of equal
/// objective the lexicographically smallest integer vector is kept.
Result solve(const lp::Model& model, const Options& options, std::optional<Incumbent> start = std::nullopt);

}  // namespace fbs::bnb
