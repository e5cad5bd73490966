#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "fbs/config.hpp"
#include "fbs/runner.hpp"
#include "json.hpp"

using namespace fbs;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"({
  "label": "small",
  "seeds": [1, 2, 3],
  "region": {"width": 800, "height": 800},
  "users": {"count": 20},
  "obstacles": {"count": 3},
  "simulation": {"snapshots": 3, "placement_time_limit_s": 2}
})";

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("fbs_config_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::string error_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
    try {
        parse_config_text(text, overrides);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("empty config gives the defaults") {
    const auto c = parse_config_text("");
    CHECK(c.label == "u80");
    CHECK(c.seeds == std::vector<std::uint64_t>{1});
    CHECK(c.scenario.user_params.count == 80);
    CHECK(c.scenario.fleet.h_min == 110.0);
    CHECK(c.scenario.fleet.h_max == 600.0);
    CHECK(c.scenario.fleet.elevation_deg == 45.0);
    CHECK(c.simulation.snapshots == 20);
    REQUIRE(c.simulation.dt);
    CHECK(*c.simulation.dt == 15.0);
    CHECK(c.simulation.energy.zeta_ah == 15.0);
    CHECK(c.simulation.energy.volt == 11.1);
    CHECK(c.simulation.energy.d_total == 15000.0);
    CHECK(parse_config_text("{}").aggregation_key() == c.aggregation_key());
}

TEST_CASE("schema errors name the offending key") {
    CHECK(error_of(R"({"users": {"mobility": {"velocty": 3}}})").find("velocty") != std::string::npos);
    CHECK(error_of(R"({"seeds": []})").find("seed") != std::string::npos);
    CHECK(error_of(R"({"users": {"count": "many"}})").find("count") != std::string::npos);
    CHECK_FALSE(error_of("{not json").empty());
    CHECK_FALSE(error_of("[1, 2]").empty());
    CHECK_FALSE(error_of(R"({"fleet": {"h_min": 700}})").empty());
    CHECK_FALSE(error_of(R"({"label": "a,b"})").empty());
    CHECK_FALSE(error_of("{}", {"users.count"}).empty());
    CHECK_FALSE(error_of("{}", {"users.nope=3"}).empty());
}

TEST_CASE("overrides and unit conversion") {
    const auto c = parse_config_text(R"({"energy": {"battery_mah": 10000}, "simulation": {"dt": null}})",
                                     {"users.count=200", "label=dense", "seeds=[4,5]", "fleet.speed=20"});
    CHECK(c.scenario.user_params.count == 200);
    CHECK(c.label == "dense");
    CHECK(c.seeds == std::vector<std::uint64_t>{4, 5});
    CHECK(c.scenario.fleet.speed == 20.0);
    CHECK(c.simulation.energy.zeta_ah == 10.0);
    CHECK_FALSE(c.simulation.dt.has_value());

    // Label, seeds, output and user count do not change the aggregation key.
    const auto base = parse_config_text("{}");
    CHECK(parse_config_text("{}", {"users.count=450", "label=x", "seeds=[9]"}).aggregation_key() ==
          base.aggregation_key());
    CHECK(parse_config_text("{}", {"fleet.speed=20"}).aggregation_key() != base.aggregation_key());

    const auto again = parse_config_text(dump_config(c));
    CHECK(dump_config(again) == dump_config(c));
}

TEST_CASE("config files") {
    const auto dir = scratch("files");
    fs::create_directories(dir);
    std::ofstream(dir / "c.json") << kSmall;
    const auto c = parse_config(dir / "c.json");
    CHECK(c.label == "small");
    CHECK(c.source == dir / "c.json");
    CHECK_THROWS_AS(parse_config(dir / "missing.json"), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("runner writes one episode per seed and repeats itself exactly") {
    const auto out1 = scratch("run1");
    const auto out2 = scratch("run2");
    std::ostringstream log;
    auto c = parse_config_text(kSmall, {"output=" + out1.string()});
    CHECK(run(c, log, 2) == exit_ok);
    c.out_dir = out2;
    CHECK(run(c, log, 1) == exit_ok);

    for (std::uint64_t s : c.seeds) {
        const auto sub = "seed_" + std::to_string(s);
        const auto j = nlohmann::json::parse(slurp(out1 / sub / "episode.json"));
        CHECK(j["aborted"] == false);
        CHECK(j["snapshots"].size() == 3);
        CHECK(std::abs(j["ledger_imbalance_j"].get<double>()) < 1e-6);
        for (const char* f : {"episode.json", "timeline.csv"}) {
            CHECK(slurp(out1 / sub / f) == slurp(out2 / sub / f));
        }
        CHECK(fs::exists(out1 / sub / "timing.csv"));
    }
    for (const char* name : kMetricNames) {
        const auto path = std::string(name) + ".csv";
        std::istringstream in(slurp(out1 / path));
        const auto rows = read_figure_csv(in);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].replications == 3);
        CHECK(rows[0].scenario == "small");
        if (std::string(name) != "solve_time") {
            CHECK(slurp(out1 / path) == slurp(out2 / path));
        }
    }
    fs::remove_all(out1);
    fs::remove_all(out2);
}

TEST_CASE("an impossible scenario exits nonzero and flags its outputs") {
    const auto out = scratch("abort");
    std::ostringstream log;
    const auto c = parse_config_text(kSmall, {"fleet.pool_size=1", "users.count=120", "output=" + out.string()});
    CHECK(run(c, log, 1) == exit_aborted);
    CHECK_FALSE(log.str().empty());
    const auto j = nlohmann::json::parse(slurp(out / "seed_1" / "episode.json"));
    CHECK(j["aborted"] == true);
    CHECK_FALSE(j["reason"].get<std::string>().empty());
    CHECK(slurp(out / "fbs_count.csv") == std::string(kFigureHeader) + "\n");
    fs::remove_all(out);
}
