#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbs/scenario.hpp"
#include "fbs/simulation.hpp"

namespace fbs {

/// Schema or validation failure in a run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::filesystem::path source;   // empty when parsed from text
    std::string label;              // scenario label in the aggregate tables
    Scenario scenario;              // obstacles are drawn per seed
    SimulationConfig simulation;
    std::vector<std::uint64_t> seeds{1};
    std::filesystem::path out_dir{"fbsim_out"};

    /// Canonical text of every setting that must agree for reports to be aggregated
    /// (everything except label, user count, seeds and output directory).
    std::string aggregation_key() const;
    void validate() const;
};

/// Parses a JSON config. Empty text gives the defaults. Overrides are
/// "dotted.key=value" strings applied before validation; the value is read as
/// JSON when it parses, otherwise as a string. Unknown keys are errors.
RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides = {});

/// Reads and parses a file. Throws ConfigError when it is missing or invalid.
RunConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// The config as JSON, in the same schema parse_config reads.
std::string dump_config(const RunConfig& config);

}  // namespace fbs
