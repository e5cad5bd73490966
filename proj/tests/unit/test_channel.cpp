#include <cmath>

#include <stdexcept>

#include "doctest.h"
#include "fbs/channel.hpp"
#include "fbs/scenario.hpp"

using namespace fbs;

TEST_CASE("elevation angle") {
    CHECK(elevation_angle({0, 0, 100}, {0, 0, 0}) == 90.0);
    CHECK(elevation_angle({100, 0, 100}, {0, 0, 0}) == doctest::Approx(45.0).epsilon(1e-14));
    CHECK(elevation_angle({173.205, 0, 100}, {0, 0, 0}) == doctest::Approx(30.00001156757613).epsilon(1e-12));
    CHECK_THROWS_AS(elevation_angle({0, 0, 10}, {0, 0, 10}), std::invalid_argument);
    CHECK_THROWS_AS(elevation_angle({0, 0, 5}, {0, 0, 10}), std::invalid_argument);
}

TEST_CASE("LoS probability values") {
    const Environment env;
    CHECK(los_probability(9.61, env) == doctest::Approx(1.0 / 10.61).epsilon(1e-14));
    CHECK(los_probability(9.61, env) == doctest::Approx(0.09425).epsilon(1e-4));
    CHECK(los_probability(90.0, env) == doctest::Approx(0.9999750745379030).epsilon(1e-13));
    CHECK_THROWS_AS(los_probability(0.0, env), std::invalid_argument);
    CHECK_THROWS_AS(los_probability(90.5, env), std::invalid_argument);
}

TEST_CASE("LoS probability is increasing and complements NLoS") {
    const Environment env;
    double prev = 0.0;
    for (int k = 1; k <= 9000; ++k) {
        const double theta = k * 0.01;
        const double p = los_probability(theta, env);
        CHECK(p > prev);
        CHECK(p + nlos_probability(theta, env) == 1.0);
        prev = p;
    }
}

TEST_CASE("path loss values") {
    const Environment env;
    CHECK(los_path_loss_db(1000.0, env) == doctest::Approx(99.46838313516300).epsilon(1e-13));
    CHECK(nlos_path_loss_db(1000.0, env) == doctest::Approx(118.46838313516300).epsilon(1e-13));
    CHECK(nlos_path_loss_db(1000.0, env) - los_path_loss_db(1000.0, env) == doctest::Approx(19.0));
    CHECK(std::abs(mean_path_loss(1000.0, 90.0, env) - los_path_loss_db(1000.0, env)) < 1e-3);
    CHECK(mean_path_loss(1000.0, 90.0, env) == doctest::Approx(99.46885671894284).epsilon(1e-13));
    CHECK_THROWS_AS(mean_path_loss(0.0, 45.0, env), std::invalid_argument);
}

TEST_CASE("mean path loss monotonicity") {
    const Environment env;
    Rng rng(3);
    for (int k = 0; k < 10000; ++k) {
        const double d = rng.uniform(1.0, 10000.0);
        const double theta = rng.uniform(0.5, 90.0);
        CHECK(mean_path_loss(d * 1.001, theta, env) > mean_path_loss(d, theta, env));
        const double theta2 = std::min(90.0, theta + rng.uniform(0.0, 5.0));
        CHECK(mean_path_loss(d, theta2, env) <= mean_path_loss(d, theta, env));
    }
}

TEST_CASE("taylor gate") {
    const Environment env;
    CHECK(taylor_gate(500.0, 355.0, env) == doctest::Approx(19865.64668008257).epsilon(1e-12));
    const double a_equal = taylor_gate(355.0, 355.0, env);
    CHECK(a_equal == doctest::Approx(db_to_linear(env.pl_max_db) / (2.0 * free_space_coefficient(env) * 355.0)).epsilon(1e-14));
    CHECK(a_equal == doctest::Approx(20040.25935613891).epsilon(1e-12));
    CHECK_THROWS_AS(taylor_gate(500.0, 0.0, env), std::invalid_argument);
    // A stricter budget lowers the gate.
    CHECK(taylor_gate(500.0, 355.0, env, 10.0) < taylor_gate(500.0, 355.0, env));
}

TEST_CASE("environment validation") {
    Environment env;
    CHECK_NOTHROW(env.validate());
    env.a = 0.0;
    CHECK_THROWS_AS(env.validate(), std::invalid_argument);
    env = Environment{};
    env.pl_max_db = -1.0;
    CHECK_THROWS_AS(env.validate(), std::invalid_argument);
}
