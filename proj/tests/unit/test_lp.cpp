#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "fbs/branch_and_bound.hpp"
#include "fbs/lp.hpp"
#include "fbs/scenario.hpp"

using namespace fbs;

TEST_CASE("dual simplex on a small LP") {
    lp::Model m;
    m.add_column({"x", 0, 10, -5});
    m.add_column({"y", 0, 10, -4});
    m.add_row({"c1", {{0, 6}, {1, 4}}, lp::Sense::less_equal, 24});
    m.add_row({"c2", {{0, 1}, {1, 2}}, lp::Sense::less_equal, 6});
    lp::DualSimplex s(m);
    REQUIRE(s.solve() == lp::Status::optimal);
    CHECK(s.objective() == doctest::Approx(-21.0));
    CHECK(s.primal()[0] == doctest::Approx(3.0));
    CHECK(s.primal()[1] == doctest::Approx(1.5));
}

TEST_CASE("dual simplex equality and infeasibility") {
    lp::Model e;
    e.add_column({"a", 0, 5, 1});
    e.add_column({"b", 0, 5, 2});
    e.add_row({"eq", {{0, 1}, {1, 1}}, lp::Sense::equal, 7});
    lp::DualSimplex s(e);
    REQUIRE(s.solve() == lp::Status::optimal);
    CHECK(s.objective() == doctest::Approx(9.0));

    e.add_row({"cut", {{0, 1}, {1, 1}}, lp::Sense::greater_equal, 30});
    lp::DualSimplex s2(e);
    CHECK(s2.solve() == lp::Status::infeasible);
}

TEST_CASE("branch and bound on a small integer program") {
    lp::Model m;
    m.add_column({"x", 0, 10, -5, true});
    m.add_column({"y", 0, 10, -4, true});
    m.add_row({"c1", {{0, 6}, {1, 4}}, lp::Sense::less_equal, 24});
    m.add_row({"c2", {{0, 1}, {1, 2}}, lp::Sense::less_equal, 6});
    const auto r = bnb::solve(m, {});
    REQUIRE(r.status == bnb::Status::optimal);
    REQUIRE(r.incumbent);
    CHECK(r.incumbent->objective == doctest::Approx(-20.0));
}

TEST_CASE("branch and bound matches enumeration on random knapsacks") {
    Rng rng(17);
    for (int inst = 0; inst < 40; ++inst) {
        const int n = 3 + static_cast<int>(rng.index(5));
        lp::Model m;
        std::vector<double> value(n), weight(n), weight2(n);
        for (int k = 0; k < n; ++k) {
            value[k] = std::round(rng.uniform(1, 20));
            weight[k] = std::round(rng.uniform(1, 10));
            weight2[k] = std::round(rng.uniform(1, 10));
            m.add_column({"x" + std::to_string(k), 0, 1, -value[k], true});
        }
        const double cap = std::round(rng.uniform(5, 25));
        const double cap2 = std::round(rng.uniform(5, 25));
        lp::Row r1{"w", {}, lp::Sense::less_equal, cap};
        lp::Row r2{"w2", {}, lp::Sense::less_equal, cap2};
        for (int k = 0; k < n; ++k) {
            r1.terms.push_back({k, weight[k]});
            r2.terms.push_back({k, weight2[k]});
        }
        m.add_row(r1);
        m.add_row(r2);
        double best = 0.0;
        for (int mask = 0; mask < (1 << n); ++mask) {
            double v = 0, w = 0, w2 = 0;
            for (int k = 0; k < n; ++k) {
                if (mask & (1 << k)) {
                    v += value[k];
                    w += weight[k];
                    w2 += weight2[k];
                }
            }
            if (w <= cap && w2 <= cap2) {
                best = std::max(best, v);
            }
        }
        const auto res = bnb::solve(m, {});
        REQUIRE(res.status == bnb::Status::optimal);
        CHECK(-res.incumbent->objective == doctest::Approx(best));
        CHECK(m.max_violation(res.incumbent->values) <= 1e-9);
    }
}

TEST_CASE("branch and bound reports infeasibility") {
    lp::Model m;
    m.add_column({"x", 0, 1, 1, true});
    m.add_column({"y", 0, 1, 1, true});
    m.add_row({"odd", {{0, 2}, {1, 2}}, lp::Sense::equal, 3});
    const auto r = bnb::solve(m, {});
    CHECK(r.status == bnb::Status::infeasible);
    CHECK_FALSE(r.incumbent);
}
