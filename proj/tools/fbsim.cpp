// fbsim: run flying-base-station fleet episodes from a JSON config.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fbs/config.hpp"
#include "fbs/placement.hpp"
#include "fbs/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Flying base station fleet simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::uint64_t> seeds;
    int snapshots = 0;
    std::string out_dir;
    std::vector<std::string> overrides;
    int jobs = 1;

    auto* run = app.add_subcommand("run", "Run one episode per seed and write the figure data");
    run->add_option("config", config_path, "JSON config file (may be empty)")->required();
    run->add_option("--seeds", seeds, "Seeds to run, replacing the config's list");
    run->add_option("--snapshots", snapshots, "Snapshot count, replacing the config's value");
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--override", overrides, "Config override, dotted.key=value (repeatable)");
    run->add_option("--jobs", jobs, "Seeds run concurrently")->check(CLI::PositiveNumber);

    auto* validate = app.add_subcommand("validate", "Parse a config and count candidate points");
    validate->add_option("config", config_path, "JSON config file")->required();
    validate->add_option("--override", overrides, "Config override, dotted.key=value (repeatable)");
    bool print = false;
    validate->add_flag("--print", print, "Print the resolved config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : fbs::exit_config;
    }

    if (!seeds.empty()) {
        std::string list = "[";
        for (std::size_t k = 0; k < seeds.size(); ++k) {
            list += (k ? "," : "") + std::to_string(seeds[k]);
        }
        overrides.push_back("seeds=" + list + "]");
    }
    if (snapshots != 0) {
        overrides.push_back("simulation.snapshots=" + std::to_string(snapshots));
    }
    if (!out_dir.empty()) {
        overrides.push_back("output=\"" + out_dir + "\"");
    }

    fbs::RunConfig config;
    try {
        config = fbs::parse_config(config_path, overrides);
    } catch (const fbs::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return fbs::exit_config;
    }

    if (*validate) {
        const auto candidates = fbs::generate_candidates(config.scenario.region, config.simulation.candidate_spacing);
        std::cout << "config ok: " << config.label << ", " << config.scenario.user_params.count << " users, "
                  << config.seeds.size() << " seeds, " << candidates.size() << " candidate points before "
                  << "footprint exclusion\n";
        if (print) {
            std::cout << fbs::dump_config(config) << '\n';
        }
        return fbs::exit_ok;
    }

    try {
        const int status = fbs::run(config, std::cout, jobs);
        std::cout << "outputs written to " << config.out_dir.string() << '\n';
        return status;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return fbs::exit_aborted;
    }
}
