#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fbs/config.hpp"
#include "fbs/metrics.hpp"
#include "fbs/simulation.hpp"

namespace fbs {

enum ExitCode : int { exit_ok = 0, exit_aborted = 1, exit_config = 2 };

struct EpisodeResult {
    std::uint64_t seed = 0;
    bool aborted = false;
    std::string reason;
    EpisodeTimeline timeline;
};

/// Runs one seed of a config; an abort is caught and its partial timeline kept.
EpisodeResult run_seed(const RunConfig& config, std::uint64_t seed);

/// Writes episode.json, timeline.csv, timing.csv and waypoints_<k>.csv into dir.
void write_episode(const EpisodeResult& result, const std::string& label, const std::filesystem::path& dir);

/// Runs every seed, writes per-seed outputs under out_dir/seed_<s>/ and the
/// aggregate figure data of the completed episodes into out_dir.
/// Returns exit_ok, or exit_aborted after logging the first abort reason.
int run(const RunConfig& config, std::ostream& log, int jobs = 1);

}  // namespace fbs
