#include "fbs/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fbs {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    // splitmix64 finalizer over the pair
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void MobilityMix::validate() const {
    if (stationary_pct < 0.0 || pedestrian_pct < 0.0 || vehicular_pct < 0.0) {
        throw std::invalid_argument("mobility percentages must be non-negative");
    }
    if (std::abs(stationary_pct + pedestrian_pct + vehicular_pct - 100.0) > 1e-9) {
        throw std::invalid_argument("mobility percentages must sum to 100");
    }
    if (v_pedestrian < 0.0 || v_vehicular < 0.0) {
        throw std::invalid_argument("user speeds must be non-negative");
    }
}

double MobilityMix::speed_of(MobilityClass c) const {
    switch (c) {
        case MobilityClass::pedestrian:
            return v_pedestrian;
        case MobilityClass::vehicular:
            return v_vehicular;
        case MobilityClass::stationary:
            break;
    }
    return 0.0;
}

double mean_speed(const MobilityMix& mix) {
    constexpr double v_stationary = 0.0;
    return (mix.stationary_pct * v_stationary + mix.pedestrian_pct * mix.v_pedestrian +
            mix.vehicular_pct * mix.v_vehicular) /
           100.0;
}

double snapshot_interval(double r_min, const MobilityMix& mix) {
    const double gamma = mean_speed(mix);
    if (!(gamma > 0.0)) {
        throw std::domain_error("snapshot interval undefined for an all-stationary population; pin dt in the config");
    }
    return r_min / gamma;
}

namespace {

Point3 random_ground_point(const Region& region, Rng& rng) {
    return {rng.uniform(0.0, region.width), rng.uniform(0.0, region.height), 0.0};
}

MobilityClass draw_class(const MobilityMix& mix, Rng& rng) {
    const double u = rng.uniform(0.0, 100.0);
    if (u < mix.stationary_pct) {
        return MobilityClass::stationary;
    }
    if (u < mix.stationary_pct + mix.pedestrian_pct) {
        return MobilityClass::pedestrian;
    }
    return MobilityClass::vehicular;
}

}  // namespace

std::vector<User> spawn_users(const Region& region, const UserSpawnParams& params, std::uint64_t seed) {
    if (params.count <= 0) {
        throw std::invalid_argument("user count must be positive");
    }
    if (!(params.max_demand_mbps > 0.0)) {
        throw std::invalid_argument("maximum demand must be positive");
    }
    params.mix.validate();
    Rng rng(seed);
    std::vector<User> users;
    users.reserve(static_cast<std::size_t>(params.count));
    for (int i = 0; i < params.count; ++i) {
        User u;
        u.id = i;
        u.pos = random_ground_point(region, rng);
        if (rng.uniform01() < params.rooftop_fraction) {
            u.pos.z = rng.uniform(0.0, params.max_user_altitude);
        }
        // (0, D_max]
        u.demand_mbps = params.max_demand_mbps * (1.0 - rng.uniform01());
        u.mobility = draw_class(params.mix, rng);
        if (u.mobility != MobilityClass::stationary) {
            Point3 wp = random_ground_point(region, rng);
            wp.z = u.pos.z;
            u.waypoint = wp;
        }
        users.push_back(u);
    }
    return users;
}

std::vector<User> step_random_waypoint(const std::vector<User>& users, const Region& region,
                                       const MobilityMix& mix, double dt, std::uint64_t seed) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("time step must be positive");
    }
    Rng rng(seed);
    std::vector<User> next = users;
    for (auto& u : next) {
        const double speed = mix.speed_of(u.mobility);
        if (u.mobility == MobilityClass::stationary || speed <= 0.0) {
            continue;
        }
        double budget = speed * dt;
        // A bounded number of legs keeps a pathological tiny region from spinning.
        for (int leg = 0; leg < 64 && budget > 0.0; ++leg) {
            if (!u.waypoint) {
                Point3 wp = random_ground_point(region, rng);
                wp.z = u.pos.z;
                u.waypoint = wp;
            }
            const double remaining = horizontal_distance(u.pos, *u.waypoint);
            if (remaining <= budget) {
                u.pos.x = u.waypoint->x;
                u.pos.y = u.waypoint->y;
                budget -= remaining;
                u.waypoint.reset();
            } else {
                const double s = budget / remaining;
                u.pos.x += s * (u.waypoint->x - u.pos.x);
                u.pos.y += s * (u.waypoint->y - u.pos.y);
                budget = 0.0;
            }
        }
        if (!u.waypoint) {
            Point3 wp = random_ground_point(region, rng);
            wp.z = u.pos.z;
            u.waypoint = wp;
        }
    }
    return next;
}

std::vector<BoxObstacle> generate_obstacles(const Region& region, const ObstacleParams& params,
                                            const Point3& keep_clear, std::uint64_t seed) {
    if (params.count < 0) {
        throw std::invalid_argument("obstacle count must be non-negative");
    }
    if (!(params.min_height > 0.0) || params.max_height < params.min_height) {
        throw std::invalid_argument("obstacle height bounds are inconsistent");
    }
    if (!(params.min_side > 0.0) || params.max_side < params.min_side) {
        throw std::invalid_argument("obstacle side bounds are inconsistent");
    }
    Rng rng(seed);
    std::vector<BoxObstacle> boxes;
    const int max_attempts = 1000 * (params.count + 1);
    for (int attempt = 0; attempt < max_attempts && static_cast<int>(boxes.size()) < params.count; ++attempt) {
        const double sx = rng.uniform(params.min_side, params.max_side);
        const double sy = rng.uniform(params.min_side, params.max_side);
        const double height = rng.uniform(params.min_height, params.max_height);
        if (sx >= region.width || sy >= region.height) {
            continue;
        }
        const double x0 = rng.uniform(0.0, region.width - sx);
        const double y0 = rng.uniform(0.0, region.height - sy);
        BoxObstacle box{{x0, y0, 0.0}, {x0 + sx, y0 + sy, height}, static_cast<int>(boxes.size())};
        if (box.footprint_contains(keep_clear.x, keep_clear.y, params.clearance)) {
            continue;
        }
        bool overlaps = false;
        for (const auto& other : boxes) {
            if (box.min_corner.x < other.max_corner.x + params.clearance &&
                other.min_corner.x < box.max_corner.x + params.clearance &&
                box.min_corner.y < other.max_corner.y + params.clearance &&
                other.min_corner.y < box.max_corner.y + params.clearance) {
                overlaps = true;
                break;
            }
        }
        if (!overlaps) {
            boxes.push_back(box);
        }
    }
    if (static_cast<int>(boxes.size()) < params.count) {
        throw std::runtime_error("could not place the requested number of non-overlapping obstacles");
    }
    return boxes;
}

void FleetParams::validate() const {
    if (!(h_min > 0.0) || !(h_max > h_min)) {
        throw std::invalid_argument("altitude band must satisfy 0 < h_min < h_max");
    }
    if (!(elevation_deg > 0.0 && elevation_deg < 90.0)) {
        throw std::invalid_argument("elevation angle must lie in (0, 90) degrees");
    }
    if (!(backhaul_mbps > 0.0) || channels <= 0) {
        throw std::invalid_argument("backhaul and channel count must be positive");
    }
    if (!(speed > 0.0) || safety_radius < 0.0) {
        throw std::invalid_argument("FBS speed must be positive and safety radius non-negative");
    }
    if (taylor_h0 < 0.0) {
        throw std::invalid_argument("Taylor altitude must be positive (or 0 for the band midpoint)");
    }
}

double FleetParams::r_min() const { return h_min / std::tan(elevation_deg * std::numbers::pi / 180.0); }

}  // namespace fbs
