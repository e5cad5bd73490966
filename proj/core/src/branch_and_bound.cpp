#include "fbs/branch_and_bound.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace fbs::bnb {

namespace {

constexpr double kIntegrality = 1e-6;

struct BoundChange {
    int col;
    double lower;
    double upper;
};

struct Node {
    double bound;
    long id;
    std::vector<BoundChange> changes;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) {
            return a.bound > b.bound;
        }
        return a.id > b.id;
    }
};

bool lexicographically_smaller(const lp::Model& model, const std::vector<double>& a, const std::vector<double>& b) {
    for (int j = 0; j < model.num_columns(); ++j) {
        if (!model.columns()[static_cast<std::size_t>(j)].integer) {
            continue;
        }
        const double va = std::round(a[static_cast<std::size_t>(j)]);
        const double vb = std::round(b[static_cast<std::size_t>(j)]);
        if (va != vb) {
            return va < vb;
        }
    }
    return false;
}

int pick_branch_column(const lp::Model& model, const std::vector<double>& x) {
    int best = -1;
    int best_priority = 0;
    double best_score = 0.0;
    for (int j = 0; j < model.num_columns(); ++j) {
        const auto& col = model.columns()[static_cast<std::size_t>(j)];
        if (!col.integer) {
            continue;
        }
        const double v = x[static_cast<std::size_t>(j)];
        const double frac = std::abs(v - std::round(v));
        if (frac <= kIntegrality) {
            continue;
        }
        if (best < 0 || col.branch_priority > best_priority ||
            (col.branch_priority == best_priority && frac > best_score + 1e-12)) {
            best = j;
            best_priority = col.branch_priority;
            best_score = frac;
        }
    }
    return best;
}

}  // namespace

const char* to_string(Status s) {
    switch (s) {
        case Status::optimal:
            return "optimal";
        case Status::infeasible:
            return "infeasible";
        case Status::stopped:
            return "stopped";
    }
    return "unknown";
}

Result solve(const lp::Model& model, const Options& options, std::optional<Incumbent> start) {
    const auto t0 = lp::Clock::now();
    const auto deadline = t0 + std::chrono::duration_cast<lp::Clock::duration>(
                                   std::chrono::duration<double>(options.time_limit_s));
    Result result;
    result.incumbent = std::move(start);

    auto prunable = [&](double bound) {
        if (!result.incumbent) {
            return false;
        }
        const double inc = result.incumbent->objective;
        return bound >= inc - options.relative_gap * std::max(1.0, std::abs(inc));
    };

    lp::DualSimplex root(model);
    const lp::Status root_status = root.solve(deadline);
    result.lp_iterations += root.iterations();
    if (root_status == lp::Status::infeasible) {
        result.status = Status::infeasible;
        result.incumbent.reset();
        return result;
    }
    if (root_status != lp::Status::optimal) {
        result.status = Status::stopped;
        return result;
    }

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    long next_id = 0;
    open.push(Node{root.objective(), next_id++, {}});
    bool exhausted_cleanly = true;
    double global_bound = root.objective();

    while (!open.empty()) {
        if (lp::Clock::now() > deadline || result.nodes >= options.node_limit) {
            exhausted_cleanly = false;
            global_bound = open.top().bound;
            break;
        }
        Node node = open.top();
        open.pop();
        if (prunable(node.bound)) {
            continue;
        }

        lp::DualSimplex lp = root;
        for (const auto& c : node.changes) {
            lp.set_column_bounds(c.col, c.lower, c.upper);
        }
        bool solved = node.changes.empty();
        // Dive: keep one child on the same simplex object so it warm-starts from the
        // parent basis; the sibling waits in the queue.
        while (true) {
            ++result.nodes;
            const int before = lp.iterations();
            const lp::Status st = solved ? lp::Status::optimal : lp.solve(deadline);
            solved = false;
            result.lp_iterations += lp.iterations() - before;
            if (st == lp::Status::infeasible) {
                break;
            }
            if (st != lp::Status::optimal) {
                exhausted_cleanly = false;
                if (st == lp::Status::time_limit) {
                    global_bound = node.bound;
                    open = {};
                }
                break;
            }
            const double bound = lp.objective();
            if (prunable(bound)) {
                break;
            }
            std::vector<double> x = lp.primal();
            const int branch = pick_branch_column(model, x);
            if (branch < 0) {
                for (int j = 0; j < model.num_columns(); ++j) {
                    if (model.columns()[static_cast<std::size_t>(j)].integer) {
                        x[static_cast<std::size_t>(j)] = std::round(x[static_cast<std::size_t>(j)]);
                    }
                }
                const double obj = model.objective_value(x);
                const double tol = options.relative_gap *
                                   std::max(1.0, std::abs(result.incumbent ? result.incumbent->objective : obj));
                const bool better = !result.incumbent || obj < result.incumbent->objective - tol;
                const bool tie = result.incumbent && !better && std::abs(obj - result.incumbent->objective) <= tol;
                if (better || (tie && lexicographically_smaller(model, x, result.incumbent->values))) {
                    result.incumbent = Incumbent{std::move(x), obj};
                }
                break;
            }
            const double v = x[static_cast<std::size_t>(branch)];
            const double lo = lp.column_lower(branch);
            const double hi = lp.column_upper(branch);
            const BoundChange down{branch, lo, std::floor(v)};
            const BoundChange up{branch, std::ceil(v), hi};
            const bool dive_up = v - std::floor(v) >= 0.5;
            Node sibling{bound, next_id++, node.changes};
            sibling.changes.push_back(dive_up ? down : up);
            open.push(std::move(sibling));
            const BoundChange& next = dive_up ? up : down;
            node.changes.push_back(next);
            node.bound = bound;
            lp.set_column_bounds(next.col, next.lower, next.upper);
            if (lp::Clock::now() > deadline || result.nodes >= options.node_limit) {
                open.push(std::move(node));
                break;
            }
        }
    }

    if (exhausted_cleanly) {
        result.status = result.incumbent ? Status::optimal : Status::infeasible;
        result.best_bound = result.incumbent ? result.incumbent->objective : global_bound;
    } else {
        result.status = Status::stopped;
        result.best_bound = global_bound;
    }
    return result;
}

}  // namespace fbs::bnb
