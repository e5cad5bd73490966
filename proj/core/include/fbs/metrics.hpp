#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fbs/simulation.hpp"

namespace fbs {

/// Names of the per-snapshot series, also the stems of the figure CSVs.
inline constexpr std::array<const char*, 5> kMetricNames = {
    "fbs_count", "dist_per_user", "energy_per_fbs", "solve_time", "rate_per_fbs"};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
};

/// Mean and population standard deviation. Values are summed in sorted order
/// so the result does not depend on input order. Empty input gives {0, 0}.
MeanStd mean_std(std::vector<double> values);

struct MetricsReport {
    std::string scenario;
    std::string config_key;     // reports may only be aggregated when these agree
    std::uint64_t replication = 0;
    int users = 0;
    std::map<std::string, std::vector<double>> series;  // one value per snapshot
    std::map<std::string, MeanStd> summary;
};

/// Per-snapshot series of one episode:
///   fbs_count       required stations P*
///   dist_per_user   metres flown by the fleet / users
///   energy_per_fbs  flight + hover energy / P*, J
///   solve_time      assignment solve wall time, s (0 at snapshot 0)
///   rate_per_fbs    demand of served users / serving stations, Mbps
/// Summaries of the transition metrics (distance, energy, solve time) skip
/// snapshot 0 when the episode has more than one snapshot.
MetricsReport collect_metrics(const EpisodeTimeline& timeline, const std::string& scenario = "",
                              const std::string& config_key = "");

struct SummaryRow {
    std::string scenario;
    int users = 0;
    int replications = 0;
    std::map<std::string, MeanStd> metrics;
};

struct SummaryTable {
    std::string config_key;
    std::vector<SummaryRow> rows;  // sorted by (users, scenario)
};

/// Cross-replication mean and population std of each report's per-episode mean,
/// one row per scenario label. Throws std::invalid_argument for an empty list,
/// mixed config keys, or reports of one scenario with different user counts.
SummaryTable aggregate(const std::vector<MetricsReport>& reports);

struct FigureRow {
    std::string scenario;
    int users = 0;
    int replications = 0;
    double mean = 0.0;
    double std = 0.0;
};

inline constexpr const char* kFigureHeader = "scenario,users,replications,mean,std_population";

/// Writes <metric>.csv for every metric plus summary.json into out_dir.
/// Throws std::runtime_error naming the path on I/O failure.
void emit_figure_data(const SummaryTable& summary, const std::filesystem::path& out_dir);

void write_figure_csv(std::ostream& out, const SummaryTable& summary, const std::string& metric);
std::vector<FigureRow> read_figure_csv(std::istream& in);

}  // namespace fbs
