#include "fbs/runner.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace fbs {

namespace {

using nlohmann::ordered_json;

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot write " + p.string());
    }
    f.precision(17);
    return f;
}

ordered_json point_json(const Point3& p) { return ordered_json::array({p.x, p.y, p.z}); }

ordered_json episode_json(const EpisodeResult& r, const std::string& label) {
    const auto& tl = r.timeline;
    ordered_json j;
    j["label"] = label;
    j["seed"] = r.seed;
    j["aborted"] = r.aborted;
    j["reason"] = r.reason;
    j["dt"] = tl.dt;
    j["dist_th"] = tl.dist_th;
    j["candidates"] = tl.candidates.size();
    j["obstacles"] = tl.scenario.obstacles.size();
    j["initial_energy_j"] = tl.initial_energy;
    j["final_energy_j"] = tl.final_energy();
    j["ledger_imbalance_j"] = tl.ledger_imbalance();
    j["snapshots"] = ordered_json::array();
    for (const auto& s : tl.snapshots) {
        ordered_json sj;
        sj["index"] = s.index;
        sj["users"] = s.metrics.users;
        sj["required"] = s.metrics.required;
        sj["placement_status"] = to_string(s.placement.status);
        sj["hover_points"] = ordered_json::array();
        for (const auto& p : s.required) {
            sj["hover_points"].push_back(point_json(p));
        }
        sj["serving"] = s.metrics.serving;
        sj["unserved_points"] = s.metrics.unserved_points;
        sj["flight_distance_m"] = s.metrics.flight_distance;
        sj["served_demand_mbps"] = s.metrics.served_demand;
        sj["schedule_overrun"] = s.metrics.schedule_overrun;
        sj["assignment_energy_j"] = s.assignment_energy;
        sj["ledger"] = {{"flight_j", s.ledger.flight}, {"hover_j", s.ledger.hover}, {"recharge_j", s.ledger.recharge}};
        sj["fleet"] = ordered_json::array();
        for (const auto& m : s.fleet_after.members) {
            sj["fleet"].push_back({{"id", m.id},
                                   {"status", to_string(m.status)},
                                   {"energy_j", m.energy},
                                   {"position", point_json(m.position)}});
        }
        j["snapshots"].push_back(sj);
    }
    if (!tl.snapshots.empty()) {
        const auto report = collect_metrics(tl, label);
        for (const auto& [name, v] : report.summary) {
            if (name != "solve_time") {
                j["summary"][name] = {{"mean", v.mean}, {"std", v.std}};
            }
        }
    }
    return j;
}

}  // namespace

EpisodeResult run_seed(const RunConfig& config, std::uint64_t seed) {
    EpisodeResult r;
    r.seed = seed;
    const Scenario sc = make_scenario(config.scenario, seed);
    try {
        r.timeline = run_episode(sc, config.simulation, seed);
    } catch (const EpisodeAborted& e) {
        r.aborted = true;
        r.reason = e.what();
        r.timeline = e.partial();
    }
    return r;
}

void write_episode(const EpisodeResult& result, const std::string& label, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    }
    {
        auto f = open_out(dir / "episode.json");
        f << episode_json(result, label).dump(2) << '\n';
    }
    {
        auto f = open_out(dir / "timeline.csv");
        f << "snapshot,users,required,serving,unserved_points,flight_distance_m,energy_spent_j,served_demand_mbps,"
             "flight_j,hover_j,recharge_j,fleet_energy_j,schedule_overrun\n";
        for (const auto& s : result.timeline.snapshots) {
            const auto& m = s.metrics;
            f << s.index << ',' << m.users << ',' << m.required << ',' << m.serving << ',' << m.unserved_points << ','
              << m.flight_distance << ',' << m.energy_spent << ',' << m.served_demand << ',' << s.ledger.flight << ','
              << s.ledger.hover << ',' << s.ledger.recharge << ',' << s.fleet_after.total_energy() << ','
              << (m.schedule_overrun ? 1 : 0) << '\n';
        }
    }
    {
        auto f = open_out(dir / "timing.csv");
        f << "snapshot,placement_s,routing_s,assignment_s\n";
        for (const auto& s : result.timeline.snapshots) {
            const auto& m = s.metrics;
            f << s.index << ',' << m.placement_seconds << ',' << m.routing_seconds << ',' << m.assignment_seconds
              << '\n';
        }
    }
    for (const auto& s : result.timeline.snapshots) {
        if (s.moves.empty()) {
            continue;
        }
        std::vector<int> ids;
        std::vector<Route> routes;
        for (const auto& mv : s.moves) {
            ids.push_back(mv.fbs);
            routes.push_back(mv.route);
        }
        auto f = open_out(dir / ("waypoints_" + std::to_string(s.index) + ".csv"));
        write_waypoints_csv(f, ids, routes);
    }
}

int run(const RunConfig& config, std::ostream& log, int jobs) {
    config.validate();
    const std::size_t n = config.seeds.size();
    std::vector<EpisodeResult> results(n);
    const std::size_t width = static_cast<std::size_t>(std::max(jobs, 1));
    for (std::size_t start = 0; start < n; start += width) {
        std::vector<std::future<EpisodeResult>> batch;
        for (std::size_t k = start; k < std::min(n, start + width); ++k) {
            batch.push_back(std::async(width > 1 ? std::launch::async : std::launch::deferred, run_seed,
                                       std::cref(config), config.seeds[k]));
        }
        for (std::size_t k = 0; k < batch.size(); ++k) {
            results[start + k] = batch[k].get();
        }
    }

    int status = exit_ok;
    std::vector<MetricsReport> reports;
    const std::string key = config.aggregation_key();
    for (const auto& r : results) {
        write_episode(r, config.label, config.out_dir / ("seed_" + std::to_string(r.seed)));
        if (r.aborted) {
            if (status == exit_ok) {
                log << "episode aborted (seed " << r.seed << "): " << r.reason << '\n';
            }
            status = exit_aborted;
            continue;
        }
        reports.push_back(collect_metrics(r.timeline, config.label, key));
        const auto& rep = reports.back();
        log << "seed " << r.seed << ": mean FBS count " << rep.summary.at("fbs_count").mean << ", "
            << r.timeline.snapshots.size() << " snapshots\n";
    }
    SummaryTable table;
    table.config_key = key;
    if (!reports.empty()) {
        table = aggregate(reports);
    }
    emit_figure_data(table, config.out_dir);
    return status;
}

}  // namespace fbs
