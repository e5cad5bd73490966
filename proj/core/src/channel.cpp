#include "fbs/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fbs {

void Environment::validate() const {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::invalid_argument("environment constants a and b must be positive");
    }
    if (!(fc_hz > 0.0) || !(c_mps > 0.0)) {
        throw std::invalid_argument("carrier frequency and light speed must be positive");
    }
    if (!(pl_max_db > 0.0)) {
        throw std::invalid_argument("maximum path loss must be positive");
    }
}

double elevation_angle(const Point3& fbs, const Point3& user) {
    const double rise = fbs.z - user.z;
    if (!(rise > 0.0)) {
        throw std::invalid_argument("elevation angle requires the FBS above the user");
    }
    const double run = horizontal_distance(fbs, user);
    if (run == 0.0) {
        return 90.0;
    }
    return std::atan2(rise, run) * 180.0 / std::numbers::pi;
}

double los_probability(double theta_deg, const Environment& env) {
    if (!(theta_deg > 0.0 && theta_deg <= 90.0)) {
        throw std::invalid_argument("elevation angle must lie in (0, 90] degrees");
    }
    return 1.0 / (1.0 + env.a * std::exp(-env.b * (theta_deg - env.a)));
}

double nlos_probability(double theta_deg, const Environment& env) { return 1.0 - los_probability(theta_deg, env); }

double free_space_loss_db(double d, const Environment& env) {
    if (!(d > 0.0)) {
        throw std::invalid_argument("link distance must be positive");
    }
    return 20.0 * std::log10(4.0 * std::numbers::pi * env.fc_hz * d / env.c_mps);
}

double los_path_loss_db(double d, const Environment& env) { return free_space_loss_db(d, env) + env.delta_los_db; }

double nlos_path_loss_db(double d, const Environment& env) { return free_space_loss_db(d, env) + env.delta_nlos_db; }

double excess_loss_db(double theta_deg, const Environment& env) {
    const double p_los = los_probability(theta_deg, env);
    return p_los * env.delta_los_db + (1.0 - p_los) * env.delta_nlos_db;
}

double mean_path_loss(double d, double theta_deg, const Environment& env) {
    const double p_los = los_probability(theta_deg, env);
    const double p_nlos = 1.0 - p_los;
    return p_los * los_path_loss_db(d, env) + p_nlos * nlos_path_loss_db(d, env);
}

double link_path_loss(const Point3& fbs, const Point3& user, const Environment& env) {
    return mean_path_loss(distance3(fbs, user), elevation_angle(fbs, user), env);
}

double free_space_coefficient(const Environment& env) {
    const double k = 4.0 * std::numbers::pi * env.fc_hz / env.c_mps;
    return k * k;
}

double taylor_gate(double d, double h0, const Environment& env, double extra_loss_db) {
    if (!(h0 > 0.0)) {
        throw std::invalid_argument("Taylor altitude h0 must be positive");
    }
    if (!(d >= 0.0)) {
        throw std::invalid_argument("horizontal distance must be non-negative");
    }
    const double budget = db_to_linear(env.pl_max_db - extra_loss_db);
    const double gain = free_space_coefficient(env);
    // P_LoS + P_NLoS = 1 collapses the probability-weighted sum.
    return (budget - gain * (d * d - h0 * h0)) / (2.0 * gain * h0);
}

}  // namespace fbs
