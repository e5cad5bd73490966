#include "fbs/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fbs {

namespace {

using nlohmann::json;

// Reads the fields of one JSON object and remembers which keys were used.
class Section {
public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) {
            throw ConfigError(where() + " must be an object");
        }
    }

    template <typename T>
    void read(const char* key, T& target) {
        used_.insert(key);
        const auto it = node_.find(key);
        if (it == node_.end() || it->is_null()) {
            return;
        }
        try {
            target = it->template get<T>();
        } catch (const json::exception&) {
            throw ConfigError("field '" + name(key) + "' has the wrong type (got " + it->type_name() + ")");
        }
    }

    template <typename T>
    void read_optional(const char* key, std::optional<T>& target) {
        used_.insert(key);
        const auto it = node_.find(key);
        if (it == node_.end() || it->is_null()) {
            return;
        }
        T value{};
        read(key, value);
        target = value;
    }

    Section child(const char* key) {
        used_.insert(key);
        const auto it = node_.find(key);
        static const json empty = json::object();
        return Section(it == node_.end() || it->is_null() ? empty : *it, name(key));
    }

    void finish() const {
        for (const auto& item : node_.items()) {
            if (!used_.count(item.key())) {
                throw ConfigError("unknown key '" + name(item.key()) + "'");
            }
        }
    }

private:
    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    std::string where() const { return path_.empty() ? "config root" : "'" + path_ + "'"; }

    const json& node_;
    std::string path_;
    std::set<std::string> used_;
};

void apply_override(json& root, const std::string& item) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + item + "' must look like key=value");
    }
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) {
        value = text;
    }
    json* node = &root;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) {
        if (part.empty()) {
            throw ConfigError("override key '" + key + "' has an empty component");
        }
        parts.push_back(part);
    }
    for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
        if (!node->is_object()) {
            throw ConfigError("override key '" + key + "' does not name an object path");
        }
        node = &(*node)[parts[k]];
        if (node->is_null()) {
            *node = json::object();
        }
    }
    if (!node->is_object()) {
        throw ConfigError("override key '" + key + "' does not name an object path");
    }
    (*node)[parts.back()] = value;
}

json to_json(const RunConfig& c, bool for_key) {
    const auto& sc = c.scenario;
    const auto& sim = c.simulation;
    const auto& up = sc.user_params;
    const auto& op = sc.obstacle_params;
    const auto& f = sc.fleet;
    const auto& e = sim.energy;
    json j;
    if (!for_key) {
        j["label"] = c.label;
        j["seeds"] = c.seeds;
        j["output"] = c.out_dir.string();
    }
    j["region"] = {{"width", sc.region.width}, {"height", sc.region.height}};
    j["base"] = {{"x", sc.base.x}, {"y", sc.base.y}, {"z", sc.base.z}};
    j["users"] = {{"rooftop_fraction", up.rooftop_fraction},
                  {"max_altitude", up.max_user_altitude},
                  {"max_demand_mbps", up.max_demand_mbps},
                  {"mobility",
                   {{"stationary_pct", up.mix.stationary_pct},
                    {"pedestrian_pct", up.mix.pedestrian_pct},
                    {"vehicular_pct", up.mix.vehicular_pct},
                    {"v_pedestrian", up.mix.v_pedestrian},
                    {"v_vehicular", up.mix.v_vehicular}}}};
    if (!for_key) {
        j["users"]["count"] = up.count;
    }
    j["obstacles"] = {{"count", op.count},           {"min_height", op.min_height}, {"max_height", op.max_height},
                      {"min_side", op.min_side},     {"max_side", op.max_side},     {"edge_spacing", op.edge_spacing},
                      {"clearance", op.clearance}};
    j["channel"] = {{"a", sc.env.a},
                    {"b", sc.env.b},
                    {"delta_los_db", sc.env.delta_los_db},
                    {"delta_nlos_db", sc.env.delta_nlos_db},
                    {"fc_hz", sc.env.fc_hz},
                    {"c_mps", sc.env.c_mps},
                    {"pl_max_db", sc.env.pl_max_db}};
    j["fleet"] = {{"h_min", f.h_min},
                  {"h_max", f.h_max},
                  {"elevation_deg", f.elevation_deg},
                  {"backhaul_mbps", f.backhaul_mbps},
                  {"channels", f.channels},
                  {"speed", f.speed},
                  {"safety_radius", f.safety_radius},
                  {"taylor_h0", f.taylor_h0},
                  {"pool_size", sim.pool_size ? json(*sim.pool_size) : json(nullptr)}};
    j["energy"] = {{"battery_mah", e.zeta_ah * 1000.0},
                   {"volt", e.volt},
                   {"flight_range_m", e.d_total},
                   {"mass_kg", e.mass},
                   {"g", e.g},
                   {"e_hover_j", e.e_hover},
                   {"recharge_rate_w", sim.recharge_rate ? json(*sim.recharge_rate) : json(nullptr)}};
    j["simulation"] = {{"snapshots", sim.snapshots},
                       {"dt", sim.dt ? json(*sim.dt) : json(nullptr)},
                       {"r_min", sim.r_min ? json(*sim.r_min) : json(nullptr)},
                       {"candidate_spacing", sim.candidate_spacing},
                       {"candidate_margin", sim.candidate_margin},
                       {"placement_time_limit_s", sim.placement.time_limit_s},
                       {"dense_budget", sim.placement.dense_budget}};
    return j;
}

RunConfig from_json(const json& root) {
    RunConfig c;
    c.simulation.dt = 15.0;
    Section top(root, "");
    top.read("label", c.label);
    top.read("seeds", c.seeds);
    std::string out = c.out_dir.string();
    top.read("output", out);
    c.out_dir = out;

    auto& sc = c.scenario;
    {
        auto s = top.child("region");
        s.read("width", sc.region.width);
        s.read("height", sc.region.height);
        s.finish();
    }
    {
        auto s = top.child("base");
        s.read("x", sc.base.x);
        s.read("y", sc.base.y);
        s.read("z", sc.base.z);
        s.finish();
    }
    {
        auto& up = sc.user_params;
        auto s = top.child("users");
        s.read("count", up.count);
        s.read("rooftop_fraction", up.rooftop_fraction);
        s.read("max_altitude", up.max_user_altitude);
        s.read("max_demand_mbps", up.max_demand_mbps);
        auto m = s.child("mobility");
        m.read("stationary_pct", up.mix.stationary_pct);
        m.read("pedestrian_pct", up.mix.pedestrian_pct);
        m.read("vehicular_pct", up.mix.vehicular_pct);
        m.read("v_pedestrian", up.mix.v_pedestrian);
        m.read("v_vehicular", up.mix.v_vehicular);
        m.finish();
        s.finish();
    }
    {
        auto& op = sc.obstacle_params;
        auto s = top.child("obstacles");
        s.read("count", op.count);
        s.read("min_height", op.min_height);
        s.read("max_height", op.max_height);
        s.read("min_side", op.min_side);
        s.read("max_side", op.max_side);
        s.read("edge_spacing", op.edge_spacing);
        s.read("clearance", op.clearance);
        s.finish();
    }
    {
        auto s = top.child("channel");
        s.read("a", sc.env.a);
        s.read("b", sc.env.b);
        s.read("delta_los_db", sc.env.delta_los_db);
        s.read("delta_nlos_db", sc.env.delta_nlos_db);
        s.read("fc_hz", sc.env.fc_hz);
        s.read("c_mps", sc.env.c_mps);
        s.read("pl_max_db", sc.env.pl_max_db);
        s.finish();
    }
    auto& sim = c.simulation;
    {
        auto& f = sc.fleet;
        auto s = top.child("fleet");
        s.read("h_min", f.h_min);
        s.read("h_max", f.h_max);
        s.read("elevation_deg", f.elevation_deg);
        s.read("backhaul_mbps", f.backhaul_mbps);
        s.read("channels", f.channels);
        s.read("speed", f.speed);
        s.read("safety_radius", f.safety_radius);
        s.read("taylor_h0", f.taylor_h0);
        s.read_optional("pool_size", sim.pool_size);
        s.finish();
    }
    {
        auto& e = sim.energy;
        auto s = top.child("energy");
        double mah = e.zeta_ah * 1000.0;
        s.read("battery_mah", mah);
        e.zeta_ah = mah / 1000.0;
        s.read("volt", e.volt);
        s.read("flight_range_m", e.d_total);
        s.read("mass_kg", e.mass);
        s.read("g", e.g);
        s.read("e_hover_j", e.e_hover);
        s.read_optional("recharge_rate_w", sim.recharge_rate);
        s.finish();
    }
    {
        auto s = top.child("simulation");
        s.read("snapshots", sim.snapshots);
        // An explicit null lets dt fall back to r_min / mean user speed.
        const auto& node = root.contains("simulation") ? root.at("simulation") : json::object();
        if (node.is_object() && node.contains("dt") && node.at("dt").is_null()) {
            sim.dt.reset();
        }
        s.read_optional("dt", sim.dt);
        s.read_optional("r_min", sim.r_min);
        s.read("candidate_spacing", sim.candidate_spacing);
        s.read("candidate_margin", sim.candidate_margin);
        s.read("placement_time_limit_s", sim.placement.time_limit_s);
        s.read("dense_budget", sim.placement.dense_budget);
        s.finish();
    }
    top.finish();
    if (c.label.empty()) {
        c.label = "u" + std::to_string(sc.user_params.count);
    }
    return c;
}

}  // namespace

std::string RunConfig::aggregation_key() const { return to_json(*this, true).dump(); }

void RunConfig::validate() const {
    if (seeds.empty()) {
        throw ConfigError("seed list must not be empty");
    }
    if (simulation.snapshots < 1) {
        throw ConfigError("simulation.snapshots must be at least 1");
    }
    if (label.find_first_of(",\n\"") != std::string::npos) {
        throw ConfigError("label must not contain commas, quotes or newlines");
    }
    if (!(scenario.region.width > 0.0) || !(scenario.region.height > 0.0)) {
        throw ConfigError("region width and height must be positive");
    }
    if (!scenario.region.contains(scenario.base.x, scenario.base.y) || scenario.base.z < 0.0) {
        throw ConfigError("base must lie inside the region at or above ground");
    }
    try {
        scenario.env.validate();
        scenario.fleet.validate();
        scenario.user_params.mix.validate();
        if (scenario.user_params.count <= 0) {
            throw std::invalid_argument("users.count must be positive");
        }
        const auto& op = scenario.obstacle_params;
        if (op.count < 0 || !(op.min_height > 0.0) || op.max_height < op.min_height || !(op.min_side > 0.0) ||
            op.max_side < op.min_side || !(op.edge_spacing > 0.0) || op.clearance < 0.0) {
            throw std::invalid_argument("obstacle parameters are out of range");
        }
        simulation.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    } catch (const std::domain_error& e) {
        throw ConfigError(e.what());
    }
}

RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides) {
    json root = json::object();
    if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
        try {
            root = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("malformed config: ") + e.what());
        }
    }
    if (!root.is_object()) {
        throw ConfigError("config root must be an object");
    }
    for (const auto& o : overrides) {
        apply_override(root, o);
    }
    RunConfig c = from_json(root);
    c.validate();
    return c;
}

RunConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        RunConfig c = parse_config_text(buf.str(), overrides);
        c.source = path;
        return c;
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string dump_config(const RunConfig& config) { return to_json(config, false).dump(2); }

}  // namespace fbs
