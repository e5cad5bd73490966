#include "fbs/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace fbs::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPrimalTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kRelativePivot = 1e-7;
constexpr double kHarrisTol = 1e-9;
constexpr int kRefactorInterval = 1500;
constexpr int kConfirmRefactor = 300;

double power_of_two_near(double v) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        return 1.0;
    }
    return std::exp2(std::round(std::log2(v)));
}

}  // namespace

const char* to_string(Status s) {
    switch (s) {
        case Status::optimal:
            return "optimal";
        case Status::infeasible:
            return "infeasible";
        case Status::iteration_limit:
            return "iteration_limit";
        case Status::time_limit:
            return "time_limit";
    }
    return "unknown";
}

int Model::add_column(Column col) {
    if (!std::isfinite(col.lower) || !std::isfinite(col.upper) || col.lower > col.upper) {
        throw std::invalid_argument("column '" + col.name + "' needs finite bounds with lower <= upper");
    }
    columns_.push_back(std::move(col));
    return num_columns() - 1;
}

int Model::add_row(Row row) {
    for (const auto& t : row.terms) {
        if (t.col < 0 || t.col >= num_columns()) {
            throw std::out_of_range("row '" + row.name + "' references an unknown column");
        }
    }
    rows_.push_back(std::move(row));
    return num_rows() - 1;
}

double Model::objective_value(const std::vector<double>& x) const {
    double total = 0.0;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        total += columns_[j].cost * x[j];
    }
    return total;
}

double Model::max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        worst = std::max({worst, columns_[j].lower - x[j], x[j] - columns_[j].upper});
    }
    for (const auto& row : rows_) {
        double lhs = 0.0;
        for (const auto& t : row.terms) {
            lhs += t.coef * x[static_cast<std::size_t>(t.col)];
        }
        switch (row.sense) {
            case Sense::less_equal:
                worst = std::max(worst, lhs - row.rhs);
                break;
            case Sense::greater_equal:
                worst = std::max(worst, row.rhs - lhs);
                break;
            case Sense::equal:
                worst = std::max(worst, std::abs(lhs - row.rhs));
                break;
        }
    }
    return worst;
}

void Model::write_lp(std::ostream& out, const std::string& title) const {
    auto write_terms = [&out, this](const std::vector<std::pair<int, double>>& terms) {
        bool first = true;
        int on_line = 0;
        for (const auto& [col, coef] : terms) {
            if (coef == 0.0) {
                continue;
            }
            out << (coef < 0.0 ? " - " : (first ? " " : " + "));
            out << std::abs(coef) << ' ' << columns_[static_cast<std::size_t>(col)].name;
            first = false;
            if (++on_line % 6 == 0) {
                out << "\n   ";
            }
        }
        if (first) {
            out << " 0 " << (columns_.empty() ? std::string("x") : columns_.front().name);
        }
    };
    out.precision(17);
    out << "\\ " << title << "\nMinimize\n obj:";
    std::vector<std::pair<int, double>> obj;
    for (int j = 0; j < num_columns(); ++j) {
        obj.emplace_back(j, columns_[static_cast<std::size_t>(j)].cost);
    }
    write_terms(obj);
    out << "\nSubject To\n";
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const auto& row = rows_[i];
        out << ' ' << (row.name.empty() ? "r" + std::to_string(i) : row.name) << ':';
        std::vector<std::pair<int, double>> terms;
        for (const auto& t : row.terms) {
            terms.emplace_back(t.col, t.coef);
        }
        write_terms(terms);
        out << (row.sense == Sense::less_equal ? " <= " : row.sense == Sense::greater_equal ? " >= " : " = ")
            << row.rhs << '\n';
    }
    out << "Bounds\n";
    for (const auto& c : columns_) {
        out << ' ' << c.lower << " <= " << c.name << " <= " << c.upper << '\n';
    }
    bool any_integer = false;
    for (const auto& c : columns_) {
        if (c.integer) {
            if (!any_integer) {
                out << "General\n";
                any_integer = true;
            }
            out << ' ' << c.name << '\n';
        }
    }
    out << "End\n";
}

DualSimplex::DualSimplex(const Model& model)
    : rows_(model.num_rows()), cols_(model.num_columns()), width_(model.num_rows() + model.num_columns()) {
    const auto m = static_cast<std::size_t>(rows_);
    const auto n = static_cast<std::size_t>(cols_);

    // Geometric-mean equilibration, rounded to powers of two so scaling is exact.
    std::vector<double> row_scale(m, 1.0);
    col_scale_.assign(n, 1.0);
    for (int pass = 0; pass < 6; ++pass) {
        for (std::size_t i = 0; i < m; ++i) {
            double lo = kInf;
            double hi = 0.0;
            for (const auto& t : model.rows()[i].terms) {
                const double v = std::abs(t.coef) * col_scale_[static_cast<std::size_t>(t.col)];
                if (v > 0.0) {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
            row_scale[i] = hi > 0.0 ? power_of_two_near(1.0 / std::sqrt(lo * hi)) : 1.0;
        }
        std::vector<double> lo(n, kInf);
        std::vector<double> hi(n, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            for (const auto& t : model.rows()[i].terms) {
                const auto j = static_cast<std::size_t>(t.col);
                const double v = std::abs(t.coef) * row_scale[i];
                if (v > 0.0) {
                    lo[j] = std::min(lo[j], v);
                    hi[j] = std::max(hi[j], v);
                }
            }
        }
        for (std::size_t j = 0; j < n; ++j) {
            col_scale_[j] = hi[j] > 0.0 ? power_of_two_near(1.0 / std::sqrt(lo[j] * hi[j])) : 1.0;
        }
    }

    matrix_.assign(m * static_cast<std::size_t>(width_), 0.0);
    rhs_.assign(m, 0.0);
    lower_.assign(static_cast<std::size_t>(width_), 0.0);
    upper_.assign(static_cast<std::size_t>(width_), 0.0);
    cost_.assign(static_cast<std::size_t>(width_), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& row = model.rows()[i];
        for (const auto& t : row.terms) {
            const auto j = static_cast<std::size_t>(t.col);
            matrix_[i * width_ + j] += t.coef * row_scale[i] * col_scale_[j];
        }
        matrix_[i * width_ + n + i] = 1.0;
        rhs_[i] = row.rhs * row_scale[i];
        const std::size_t s = n + i;
        switch (row.sense) {
            case Sense::less_equal:
                lower_[s] = 0.0;
                upper_[s] = kInf;
                break;
            case Sense::greater_equal:
                lower_[s] = -kInf;
                upper_[s] = 0.0;
                break;
            case Sense::equal:
                lower_[s] = 0.0;
                upper_[s] = 0.0;
                break;
        }
    }
    double cmax = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const auto& c = model.columns()[j];
        lower_[j] = c.lower / col_scale_[j];
        upper_[j] = c.upper / col_scale_[j];
        cost_[j] = c.cost * col_scale_[j];
        cmax = std::max(cmax, std::abs(cost_[j]));
    }
    objective_scale_ = cmax > 0.0 ? power_of_two_near(cmax) : 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        cost_[j] /= objective_scale_;
    }

    tableau_ = matrix_;
    basis_.resize(m);
    position_.assign(static_cast<std::size_t>(width_), Position::at_lower);
    value_.assign(static_cast<std::size_t>(width_), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        basis_[i] = static_cast<int>(n + i);
        position_[n + i] = Position::basic;
    }
    reduced_ = cost_;
    for (std::size_t j = 0; j < n; ++j) {
        place_nonbasic(static_cast<int>(j));
    }
    recompute_basic_values();
}

void DualSimplex::place_nonbasic(int j) {
    const auto k = static_cast<std::size_t>(j);
    if (lower_[k] == upper_[k]) {
        position_[k] = Position::at_lower;
    } else if (reduced_[k] >= 0.0) {
        position_[k] = std::isfinite(lower_[k]) ? Position::at_lower : Position::at_upper;
    } else {
        position_[k] = std::isfinite(upper_[k]) ? Position::at_upper : Position::at_lower;
    }
    value_[k] = position_[k] == Position::at_lower ? lower_[k] : upper_[k];
}

void DualSimplex::recompute_basic_values() {
    const int n = cols_;
    for (int r = 0; r < rows_; ++r) {
        double v = 0.0;
        for (int i = 0; i < rows_; ++i) {
            v += tab(r, n + i) * rhs_[static_cast<std::size_t>(i)];
        }
        for (int j = 0; j < width_; ++j) {
            if (position_[static_cast<std::size_t>(j)] != Position::basic) {
                const double t = tab(r, j);
                if (t != 0.0) {
                    v -= t * value_[static_cast<std::size_t>(j)];
                }
            }
        }
        value_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] = v;
    }
}

void DualSimplex::recompute_reduced_costs() {
    reduced_ = cost_;
    for (int r = 0; r < rows_; ++r) {
        const double cb = cost_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])];
        if (cb == 0.0) {
            continue;
        }
        for (int j = 0; j < width_; ++j) {
            reduced_[static_cast<std::size_t>(j)] -= cb * tab(r, j);
        }
    }
    for (int r = 0; r < rows_; ++r) {
        reduced_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] = 0.0;
    }
}

void DualSimplex::pivot(int r, int q) {
    double* prow = &tableau_[static_cast<std::size_t>(r) * width_];
    const double inv = 1.0 / prow[q];
    std::vector<int> nz;
    nz.reserve(64);
    for (int j = 0; j < width_; ++j) {
        if (prow[j] != 0.0) {
            prow[j] *= inv;
            nz.push_back(j);
        }
    }
    prow[q] = 1.0;
    for (int i = 0; i < rows_; ++i) {
        if (i == r) {
            continue;
        }
        double* row = &tableau_[static_cast<std::size_t>(i) * width_];
        const double f = row[q];
        if (f == 0.0) {
            continue;
        }
        for (const int j : nz) {
            row[j] -= f * prow[j];
        }
        row[q] = 0.0;
    }
    const double dq = reduced_[static_cast<std::size_t>(q)];
    if (dq != 0.0) {
        for (const int j : nz) {
            reduced_[static_cast<std::size_t>(j)] -= dq * prow[j];
        }
    }
    reduced_[static_cast<std::size_t>(q)] = 0.0;
    ++pivots_since_refactor_;
}

bool DualSimplex::refactor() {
    const int m = rows_;
    if (m == 0) {
        return true;
    }
    // Gauss-Jordan on [B | I] to get B^-1.
    std::vector<double> work(static_cast<std::size_t>(m) * 2 * m, 0.0);
    auto w = [&](int r, int c) -> double& { return work[static_cast<std::size_t>(r) * 2 * m + c]; };
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            w(r, c) = matrix_[static_cast<std::size_t>(r) * width_ + basis_[static_cast<std::size_t>(c)]];
        }
        w(r, m + r) = 1.0;
    }
    for (int c = 0; c < m; ++c) {
        int best = c;
        for (int r = c + 1; r < m; ++r) {
            if (std::abs(w(r, c)) > std::abs(w(best, c))) {
                best = r;
            }
        }
        if (std::abs(w(best, c)) < 1e-13) {
            return false;
        }
        if (best != c) {
            for (int k = 0; k < 2 * m; ++k) {
                std::swap(w(c, k), w(best, k));
            }
        }
        const double inv = 1.0 / w(c, c);
        for (int k = 0; k < 2 * m; ++k) {
            w(c, k) *= inv;
        }
        for (int r = 0; r < m; ++r) {
            if (r == c || w(r, c) == 0.0) {
                continue;
            }
            const double f = w(r, c);
            for (int k = 0; k < 2 * m; ++k) {
                w(r, k) -= f * w(c, k);
            }
        }
    }
    // Row c of B^-1 corresponds to basis position c.
    std::fill(tableau_.begin(), tableau_.end(), 0.0);
    for (int r = 0; r < m; ++r) {
        double* out = &tableau_[static_cast<std::size_t>(r) * width_];
        for (int k = 0; k < m; ++k) {
            const double f = w(r, m + k);
            if (f == 0.0) {
                continue;
            }
            const double* in = &matrix_[static_cast<std::size_t>(k) * width_];
            for (int j = 0; j < width_; ++j) {
                out[j] += f * in[j];
            }
        }
    }
    pivots_since_refactor_ = 0;
    recompute_reduced_costs();
    recompute_basic_values();
    return true;
}

void DualSimplex::set_column_bounds(int col, double lower, double upper) {
    if (col < 0 || col >= cols_ || lower > upper) {
        throw std::invalid_argument("invalid column bound update");
    }
    const auto k = static_cast<std::size_t>(col);
    lower_[k] = lower / col_scale_[k];
    upper_[k] = upper / col_scale_[k];
    if (position_[k] != Position::basic) {
        place_nonbasic(col);
    }
    values_dirty_ = true;
}

double DualSimplex::column_lower(int col) const {
    return lower_[static_cast<std::size_t>(col)] * col_scale_[static_cast<std::size_t>(col)];
}

double DualSimplex::column_upper(int col) const {
    return upper_[static_cast<std::size_t>(col)] * col_scale_[static_cast<std::size_t>(col)];
}

Status DualSimplex::solve(Clock::time_point deadline) {
    const int iteration_cap = 50 * (rows_ + width_) + 1000;
    bool bland = false;
    double best_objective = -kInf;
    int stall = 0;
    int local_iterations = 0;
    if (values_dirty_) {
        recompute_basic_values();
        values_dirty_ = false;
    }

    for (;;) {
        if ((local_iterations & 63) == 0 && Clock::now() > deadline) {
            return Status::time_limit;
        }
        if (local_iterations > iteration_cap) {
            return Status::iteration_limit;
        }
        if (pivots_since_refactor_ > kRefactorInterval) {
            if (!refactor()) {
                return Status::iteration_limit;
            }
        }

        // Leaving row: most infeasible basic variable (Bland: lowest variable index).
        int leave = -1;
        double worst = 0.0;
        bool below = false;
        for (int r = 0; r < rows_; ++r) {
            const auto p = static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)]);
            const double v = value_[p];
            double infeas = 0.0;
            bool is_below = false;
            if (v < lower_[p] - kPrimalTol) {
                infeas = lower_[p] - v;
                is_below = true;
            } else if (v > upper_[p] + kPrimalTol) {
                infeas = v - upper_[p];
            } else {
                continue;
            }
            if (bland) {
                if (leave < 0 || basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)]) {
                    leave = r;
                    below = is_below;
                }
            } else if (infeas > worst) {
                worst = infeas;
                leave = r;
                below = is_below;
            }
        }
        if (leave < 0) {
            // Confirm against freshly evaluated basic values before declaring optimality;
            // the tableau itself is rebuilt only after many pivots.
            if (pivots_since_refactor_ > 0) {
                if (pivots_since_refactor_ > kConfirmRefactor) {
                    if (!refactor()) {
                        return Status::iteration_limit;
                    }
                } else {
                    recompute_basic_values();
                }
                bool clean = true;
                for (int r = 0; r < rows_; ++r) {
                    const auto p = static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)]);
                    if (value_[p] < lower_[p] - kPrimalTol || value_[p] > upper_[p] + kPrimalTol) {
                        clean = false;
                        break;
                    }
                }
                if (!clean) {
                    continue;
                }
            }
            return Status::optimal;
        }

        // Entering column by a two-pass (Harris) dual ratio test with a
        // pivot tolerance relative to the largest eligible entry of the row.
        const double* prow = &tableau_[static_cast<std::size_t>(leave) * width_];
        auto eligible = [&](int j) {
            const auto k = static_cast<std::size_t>(j);
            if (position_[k] == Position::basic || lower_[k] == upper_[k]) {
                return false;
            }
            const double alpha = prow[j];
            const bool at_lower = position_[k] == Position::at_lower;
            return below ? ((at_lower && alpha < 0.0) || (!at_lower && alpha > 0.0))
                         : ((at_lower && alpha > 0.0) || (!at_lower && alpha < 0.0));
        };
        auto slack_of = [&](int j) {
            // Reduced cost distance to dual infeasibility, clamped at zero.
            const auto k = static_cast<std::size_t>(j);
            const double d = reduced_[k];
            return std::max(position_[k] == Position::at_lower ? d : -d, 0.0);
        };
        double row_max = 0.0;
        for (int j = 0; j < width_; ++j) {
            if (std::abs(prow[j]) > kPivotTol && eligible(j)) {
                row_max = std::max(row_max, std::abs(prow[j]));
            }
        }
        const double pivot_floor = std::max(kPivotTol, kRelativePivot * row_max);
        double bound = kInf;
        for (int j = 0; j < width_; ++j) {
            const double a = std::abs(prow[j]);
            if (a >= pivot_floor && eligible(j)) {
                bound = std::min(bound, (slack_of(j) + kHarrisTol) / a);
            }
        }
        int enter = -1;
        double best_alpha = 0.0;
        for (int j = 0; j < width_; ++j) {
            const double a = std::abs(prow[j]);
            if (a < pivot_floor || !eligible(j) || slack_of(j) / a > bound) {
                continue;
            }
            if (enter < 0 || (!bland && a > best_alpha)) {
                enter = j;
                best_alpha = a;
            }
        }
        if (enter < 0) {
            return Status::infeasible;
        }

        const auto p = static_cast<std::size_t>(basis_[static_cast<std::size_t>(leave)]);
        const double target = below ? lower_[p] : upper_[p];
        const double step = (value_[p] - target) / prow[enter];
        for (int r = 0; r < rows_; ++r) {
            const double t = tab(r, enter);
            if (t != 0.0) {
                value_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] -= t * step;
            }
        }
        value_[static_cast<std::size_t>(enter)] += step;
        pivot(leave, enter);
        basis_[static_cast<std::size_t>(leave)] = enter;
        position_[static_cast<std::size_t>(enter)] = Position::basic;
        position_[p] = below ? Position::at_lower : Position::at_upper;
        value_[p] = target;

        ++iterations_;
        ++local_iterations;

        double obj = 0.0;
        for (int j = 0; j < width_; ++j) {
            obj += cost_[static_cast<std::size_t>(j)] * value_[static_cast<std::size_t>(j)];
        }
        if (obj > best_objective + 1e-12 * (1.0 + std::abs(obj))) {
            best_objective = obj;
            stall = 0;
        } else if (++stall > std::max(50, rows_) && !bland) {
            bland = true;
        }
    }
}

double DualSimplex::objective() const {
    double obj = 0.0;
    for (int j = 0; j < cols_; ++j) {
        obj += cost_[static_cast<std::size_t>(j)] * value_[static_cast<std::size_t>(j)];
    }
    return obj * objective_scale_;
}

std::vector<double> DualSimplex::primal() const {
    std::vector<double> x(static_cast<std::size_t>(cols_));
    for (int j = 0; j < cols_; ++j) {
        const auto k = static_cast<std::size_t>(j);
        x[k] = std::clamp(value_[k], lower_[k], upper_[k]) * col_scale_[k];
    }
    return x;
}

}  // namespace fbs::lp
