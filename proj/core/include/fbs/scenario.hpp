#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "fbs/channel.hpp"
#include "fbs/geometry.hpp"

namespace fbs {

/// Seeded generator used everywhere randomness is needed. Sampling is done
/// from raw 64-bit draws so sequences are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n) { return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n)); }
    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// Derive an independent stream seed from a base seed and a tag.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

enum class MobilityClass { stationary, pedestrian, vehicular };

struct User {
    int id = 0;
    Point3 pos;
    double demand_mbps = 0.0;
    MobilityClass mobility = MobilityClass::stationary;
    std::optional<Point3> waypoint;
};

/// Split of the user population by mobility class, in percent.
struct MobilityMix {
    double stationary_pct = 50.0;
    double pedestrian_pct = 30.0;
    double vehicular_pct = 20.0;
    double v_pedestrian = 1.0;   // m/s
    double v_vehicular = 10.0;   // m/s

    void validate() const;
    double speed_of(MobilityClass c) const;
};

/// Mean user speed, (alpha V_alpha + beta V_beta + gamma V_gamma) / 100 with V_alpha = 0.
double mean_speed(const MobilityMix& mix);

/// Time for an average user to leave the minimum coverage radius, r_min / mean_speed.
/// Throws std::domain_error when every user is stationary.
double snapshot_interval(double r_min, const MobilityMix& mix);

struct UserSpawnParams {
    int count = 80;
    MobilityMix mix;
    double rooftop_fraction = 0.2;   // share of users placed above ground
    double max_user_altitude = 150.0;
    double max_demand_mbps = 6.0;
};

/// Binomial point process: `count` users i.i.d. uniform over the region.
/// Throws std::invalid_argument for count <= 0.
std::vector<User> spawn_users(const Region& region, const UserSpawnParams& params, std::uint64_t seed);

/// Advance every mobile user toward its waypoint for dt seconds, drawing a
/// fresh waypoint on arrival. Altitude is kept. Stationary users do not move.
std::vector<User> step_random_waypoint(const std::vector<User>& users, const Region& region,
                                       const MobilityMix& mix, double dt, std::uint64_t seed);

struct ObstacleParams {
    int count = 25;
    double min_height = 30.0;
    double max_height = 150.0;
    double min_side = 20.0;
    double max_side = 80.0;
    double edge_spacing = 10.0;
    double clearance = 20.0;   // minimum gap between footprints and around the base
};

/// Non-overlapping buildings placed uniformly inside the region, away from `keep_clear`.
std::vector<BoxObstacle> generate_obstacles(const Region& region, const ObstacleParams& params,
                                            const Point3& keep_clear, std::uint64_t seed);

/// Flying base station platform limits and radio capacity.
struct FleetParams {
    double h_min = 110.0;
    double h_max = 600.0;
    double elevation_deg = 45.0;      // minimum elevation for coverage
    double backhaul_mbps = 100.0;
    int channels = 40;                // users per FBS
    double speed = 15.0;              // m/s
    double safety_radius = 5.0;
    double taylor_h0 = 0.0;           // 0 selects (h_min + h_max) / 2

    void validate() const;
    double h0() const { return taylor_h0 > 0.0 ? taylor_h0 : 0.5 * (h_min + h_max); }
    /// Coverage radius at the lowest altitude, h_min cot(elevation).
    double r_min() const;
};

/// Immutable world description.
struct Scenario {
    Region region;
    std::vector<BoxObstacle> obstacles;
    Point3 base;
    Environment env;
    FleetParams fleet;
    ObstacleParams obstacle_params;
    UserSpawnParams user_params;
};

}  // namespace fbs
