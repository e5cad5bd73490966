#include "fbs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fbs {

namespace {

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

bool transition_metric(const std::string& name) {
    return name == "dist_per_user" || name == "energy_per_fbs" || name == "solve_time";
}

}  // namespace

MeanStd mean_std(std::vector<double> values) {
    MeanStd out;
    if (values.empty()) {
        return out;
    }
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    out.mean = sum / n;
    double sq = 0.0;
    for (double v : values) {
        sq += (v - out.mean) * (v - out.mean);
    }
    out.std = std::sqrt(sq / n);
    return out;
}

MetricsReport collect_metrics(const EpisodeTimeline& timeline, const std::string& scenario,
                              const std::string& config_key) {
    MetricsReport r;
    r.scenario = scenario;
    r.config_key = config_key;
    r.replication = timeline.seed;
    r.users = timeline.snapshots.empty() ? 0 : timeline.snapshots.front().metrics.users;
    for (const char* name : kMetricNames) {
        r.series[name];
    }
    for (const auto& s : timeline.snapshots) {
        const auto& m = s.metrics;
        const double p = static_cast<double>(std::max(m.required, 1));
        r.series["fbs_count"].push_back(m.required);
        r.series["dist_per_user"].push_back(m.users > 0 ? m.flight_distance / m.users : 0.0);
        r.series["energy_per_fbs"].push_back(m.energy_spent / p);
        r.series["solve_time"].push_back(m.assignment_seconds);
        r.series["rate_per_fbs"].push_back(m.serving > 0 ? m.served_demand / m.serving : 0.0);
    }
    for (const auto& [name, values] : r.series) {
        if (transition_metric(name) && values.size() > 1) {
            r.summary[name] = mean_std(std::vector<double>(values.begin() + 1, values.end()));
        } else {
            r.summary[name] = mean_std(values);
        }
    }
    return r;
}

SummaryTable aggregate(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) {
        throw std::invalid_argument("aggregate needs at least one report");
    }
    SummaryTable table;
    table.config_key = reports.front().config_key;
    std::map<std::string, std::vector<const MetricsReport*>> by_scenario;
    for (const auto& r : reports) {
        if (r.config_key != table.config_key) {
            throw std::invalid_argument("cannot aggregate reports with different configs ('" + table.config_key +
                                        "' vs '" + r.config_key + "')");
        }
        by_scenario[r.scenario].push_back(&r);
    }
    for (const auto& [label, group] : by_scenario) {
        SummaryRow row;
        row.scenario = label;
        row.users = group.front()->users;
        row.replications = static_cast<int>(group.size());
        for (const auto* r : group) {
            if (r->users != row.users) {
                throw std::invalid_argument("scenario '" + label + "' mixes user counts");
            }
        }
        for (const char* name : kMetricNames) {
            std::vector<double> means;
            for (const auto* r : group) {
                const auto it = r->summary.find(name);
                if (it == r->summary.end()) {
                    throw std::invalid_argument(std::string("report is missing metric ") + name);
                }
                means.push_back(it->second.mean);
            }
            row.metrics[name] = mean_std(means);
        }
        table.rows.push_back(std::move(row));
    }
    std::sort(table.rows.begin(), table.rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
        return a.users != b.users ? a.users < b.users : a.scenario < b.scenario;
    });
    return table;
}

void write_figure_csv(std::ostream& out, const SummaryTable& summary, const std::string& metric) {
    out << kFigureHeader << '\n';
    for (const auto& row : summary.rows) {
        if (row.scenario.find_first_of(",\n\"") != std::string::npos) {
            throw std::invalid_argument("scenario label '" + row.scenario + "' cannot be written to CSV");
        }
        const auto it = row.metrics.find(metric);
        const MeanStd v = it == row.metrics.end() ? MeanStd{} : it->second;
        out << row.scenario << ',' << row.users << ',' << row.replications << ',' << format_double(v.mean) << ','
            << format_double(v.std) << '\n';
    }
}

std::vector<FigureRow> read_figure_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kFigureHeader) {
        throw std::invalid_argument("figure CSV must start with the header '" + std::string(kFigureHeader) + "'");
    }
    std::vector<FigureRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != 5) {
            throw std::invalid_argument("figure CSV line " + std::to_string(line_no) + " has " +
                                        std::to_string(cells.size()) + " fields, expected 5");
        }
        FigureRow r;
        r.scenario = cells[0];
        r.users = std::stoi(cells[1]);
        r.replications = std::stoi(cells[2]);
        r.mean = std::stod(cells[3]);
        r.std = std::stod(cells[4]);
        rows.push_back(r);
    }
    return rows;
}

void emit_figure_data(const SummaryTable& summary, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
    }
    auto open = [](const std::filesystem::path& p) {
        std::ofstream f(p, std::ios::binary);
        if (!f) {
            throw std::runtime_error("cannot write " + p.string());
        }
        return f;
    };
    for (const char* name : kMetricNames) {
        const auto path = out_dir / (std::string(name) + ".csv");
        auto f = open(path);
        write_figure_csv(f, summary, name);
        if (!f.flush()) {
            throw std::runtime_error("write failed for " + path.string());
        }
    }
    nlohmann::ordered_json j;
    j["config_key"] = summary.config_key;
    j["std_convention"] = "population";
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : summary.rows) {
        nlohmann::ordered_json r;
        r["scenario"] = row.scenario;
        r["users"] = row.users;
        r["replications"] = row.replications;
        for (const auto& [name, v] : row.metrics) {
            r["metrics"][name] = {{"mean", v.mean}, {"std", v.std}};
        }
        j["rows"].push_back(r);
    }
    const auto path = out_dir / "summary.json";
    auto f = open(path);
    f << j.dump(2) << '\n';
    if (!f.flush()) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

}  // namespace fbs
