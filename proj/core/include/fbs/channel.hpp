#pragma once

#include <cmath>

#include "fbs/geometry.hpp"

namespace fbs {

/// Air-to-ground propagation constants. Defaults are an urban setting at 2 GHz.
struct Environment {
    double a = 9.61;              // LoS-probability shape constant
    double b = 0.16;              // LoS-probability slope, 1/deg
    double delta_los_db = 1.0;    // mean excess loss on LoS links
    double delta_nlos_db = 20.0;  // mean excess loss on NLoS links
    double fc_hz = 2e9;
    double c_mps = 2.99792458e8;
    double pl_max_db = 110.0;     // maximum allowed path loss

    /// Throws std::invalid_argument when a constant is out of range.
    void validate() const;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

/// Elevation of the FBS as seen from the user, degrees in (0, 90].
/// Throws std::invalid_argument unless fbs.z > user.z.
double elevation_angle(const Point3& fbs, const Point3& user);

/// P_LoS = 1 / (1 + a exp(-b (theta - a))). theta in degrees, (0, 90].
double los_probability(double theta_deg, const Environment& env);
double nlos_probability(double theta_deg, const Environment& env);

/// 20 log10(4 pi fc d / c), dB.
double free_space_loss_db(double d, const Environment& env);
double los_path_loss_db(double d, const Environment& env);
double nlos_path_loss_db(double d, const Environment& env);

/// Probability-weighted excess loss P_LoS * delta_LoS + P_NLoS * delta_NLoS, dB.
double excess_loss_db(double theta_deg, const Environment& env);

/// Long-term mean path loss P_LoS L_LoS + P_NLoS L_NLoS, dB. Requires d > 0.
double mean_path_loss(double d, double theta_deg, const Environment& env);

/// Mean path loss of the link between two placed endpoints.
double link_path_loss(const Point3& fbs, const Point3& user, const Environment& env);

/// A = (4 pi fc / c)^2, the free-space gain per squared metre.
double free_space_coefficient(const Environment& env);

/// Altitude gate of the first-order path-loss expansion around h0:
///   a = (PL_lin - A (d^2 - h0^2)) / (2 A h0),
/// with PL_lin the linear-domain loss budget 10^((PL_max - extra_loss_db)/10).
/// An FBS at altitude h >= a cannot serve the user. d is the horizontal distance.
/// Throws std::invalid_argument for h0 <= 0 or d < 0.
double taylor_gate(double d, double h0, const Environment& env, double extra_loss_db = 0.0);

}  // namespace fbs
