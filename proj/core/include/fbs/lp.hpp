#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace fbs::lp {

enum class Sense { less_equal, greater_equal, equal };

struct Term {
    int col = 0;
    double coef = 0.0;
};

struct Row {
    std::string name;
    std::vector<Term> terms;
    Sense sense = Sense::less_equal;
    double rhs = 0.0;
};

struct Column {
    std::string name;
    double lower = 0.0;
    double upper = 0.0;
    double cost = 0.0;
    bool integer = false;
    int branch_priority = 0;  // higher branches first
};

/// Minimisation model with finite bounds on every column.
class Model {
public:
    int add_column(Column col);
    int add_row(Row row);

    const std::vector<Column>& columns() const { return columns_; }
    const std::vector<Row>& rows() const { return rows_; }
    std::vector<Column>& columns() { return columns_; }

    int num_columns() const { return static_cast<int>(columns_.size()); }
    int num_rows() const { return static_cast<int>(rows_.size()); }

    double objective_value(const std::vector<double>& x) const;
    /// Largest bound or row violation of x.
    double max_violation(const std::vector<double>& x) const;

    /// CPLEX LP text format.
    void write_lp(std::ostream& out, const std::string& title = "model") const;

private:
    std::vector<Column> columns_;
    std::vector<Row> rows_;
};

enum class Status { optimal, infeasible, iteration_limit, time_limit };

const char* to_string(Status s);

using Clock = std::chrono::steady_clock;

/// Bounded dual simplex over a dense tableau. The object keeps its basis
/// between solves, so tightening column bounds and calling solve() again
/// warm-starts from the previous optimum.
class DualSimplex {
public:
    explicit DualSimplex(const Model& model);

    Status solve(Clock::time_point deadline = Clock::time_point::max());

    void set_column_bounds(int col, double lower, double upper);
    double column_lower(int col) const;
    double column_upper(int col) const;

    /// Objective of the current basic solution in model units.
    double objective() const;
    /// Structural values in model units.
    std::vector<double> primal() const;

    int iterations() const { return iterations_; }

private:
    enum class Position : unsigned char { basic, at_lower, at_upper };

    double& tab(int r, int c) { return tableau_[static_cast<std::size_t>(r) * width_ + c]; }
    double tab(int r, int c) const { return tableau_[static_cast<std::size_t>(r) * width_ + c]; }

    void place_nonbasic(int j);
    void recompute_basic_values();
    void recompute_reduced_costs();
    void pivot(int r, int q);
    bool refactor();

    int rows_ = 0;
    int cols_ = 0;     // structurals
    int width_ = 0;    // structurals + slacks
    std::vector<double> matrix_;   // scaled original [A | I], row-major
    std::vector<double> tableau_;  // B^-1 [A | I]
    std::vector<double> rhs_;      // scaled b
    std::vector<double> cost_;     // scaled c over all variables
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<double> value_;
    std::vector<double> reduced_;
    std::vector<double> col_scale_;
    std::vector<int> basis_;
    std::vector<Position> position_;
    double objective_scale_ = 1.0;
    int iterations_ = 0;
    int pivots_since_refactor_ = 0;
    bool values_dirty_ = false;
};

}  // namespace fbs::lp
