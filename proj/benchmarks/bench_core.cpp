#include <benchmark/benchmark.h>

#include "fbs/channel.hpp"
#include "fbs/placement.hpp"
#include "fbs/routing.hpp"
#include "fbs/scenario.hpp"
#include "fbs/trajectory.hpp"

namespace {

void bm_mean_path_loss(benchmark::State& state) {
    const fbs::Environment env;
    double d = 200.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fbs::mean_path_loss(d, 45.0, env));
        d += 1e-3;
    }
}
BENCHMARK(bm_mean_path_loss);

void bm_placement(benchmark::State& state) {
    fbs::Region region{1500.0, 1500.0};
    fbs::UserSpawnParams up;
    up.count = static_cast<int>(state.range(0));
    const auto users = fbs::spawn_users(region, up, 7);
    const auto candidates = fbs::generate_candidates(region, 400.0);
    const auto problem = fbs::make_problem({users}, candidates, fbs::Environment{}, fbs::FleetParams{});
    for (auto _ : state) {
        benchmark::DoNotOptimize(fbs::min_fbs_count(problem, fbs::SolveOptions{}));
    }
}
BENCHMARK(bm_placement)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void bm_all_pairs(benchmark::State& state) {
    fbs::Region region{2000.0, 2000.0};
    fbs::ObstacleParams op;
    op.count = static_cast<int>(state.range(0));
    const fbs::Point3 base{0.0, 0.0, 0.0};
    const auto boxes = fbs::generate_obstacles(region, op, base, 3);
    std::vector<fbs::Point3> origins, targets;
    fbs::Rng rng(11);
    for (int k = 0; k < 8; ++k) {
        origins.push_back({rng.uniform(0, 2000), rng.uniform(0, 2000), 200.0});
        targets.push_back({rng.uniform(0, 2000), rng.uniform(0, 2000), 200.0});
    }
    for (auto _ : state) {
        const auto g = fbs::build_graph(origins, targets, base, boxes, op.edge_spacing);
        benchmark::DoNotOptimize(fbs::all_pairs(g));
    }
}
BENCHMARK(bm_all_pairs)->Arg(5)->Arg(25)->Unit(benchmark::kMillisecond);

void bm_assignment(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    fbs::AssignmentProblem p;
    p.n = n;
    fbs::Rng rng(5);
    for (std::size_t k = 0; k < n * n; ++k) {
        p.cost.push_back(rng.uniform(0.0, 1e5));
        p.feasible.push_back(rng.uniform01() < 0.9 ? 1 : 0);
    }
    for (std::size_t k = 0; k < n; ++k) {
        p.feasible[k * n + k] = 1;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(fbs::solve_assignment(p));
    }
}
BENCHMARK(bm_assignment)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
