// Copyright 2026 The critsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "critsense/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "critsense/errors.hpp"
#include "critsense/fisher.hpp"
#include "critsense/free_fermion.hpp"
#include "critsense/global_metric.hpp"
#include "critsense/parallel.hpp"
#include "critsense/probe_optimizer.hpp"
#include "critsense/types.hpp"

namespace critsense::cli {

namespace {

using json = nlohmann::ordered_json;

std::string fmt12(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.12g", value);
    return buffer;
}

std::string fmt17(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(value))
            throw std::invalid_argument("trailing characters");
        return value;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + text + "' as number");
    }
}

int parse_int(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const int value = std::stoi(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing characters");
        return value;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + text + "' as integer");
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

std::string RunConfig::get_string(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) throw ConfigError("missing required config key '" + key + "'");
    return it->second;
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key) const {
    return parse_double(key, get_string(key));
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    const auto it = values.find(key);
    return it == values.end() ? fallback : parse_double(key, it->second);
}

int RunConfig::get_int(const std::string& key) const { return parse_int(key, get_string(key)); }

int RunConfig::get_int(const std::string& key, int fallback) const {
    const auto it = values.find(key);
    return it == values.end() ? fallback : parse_int(key, it->second);
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    const std::string v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as boolean");
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(get_string(key))) out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

std::vector<int> RunConfig::get_int_list(const std::string& key) const {
    std::vector<int> out;
    for (const auto& item : split_list(get_string(key))) out.push_back(parse_int(key, item));
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> out;
    std::stringstream stream(text);
    std::string line;
    int line_number = 0;
    while (std::getline(stream, line)) {
        ++line_number;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_number) +
                              ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(line_number) +
                              ": empty key or value");
        out[key] = value;
    }
    return out;
}

namespace {

const std::set<std::string> kCommands{"sweep-g1d", "scaling", "optimize-2d", "efficiency",
                                      "qfi-point"};

const std::set<std::string> kCommonKeys{"out", "format", "threads"};

std::set<std::string> allowed_keys(const std::string& command) {
    std::set<std::string> keys = kCommonKeys;
    auto add = [&keys](std::initializer_list<const char*> names) {
        for (const char* name : names) keys.insert(name);
    };
    if (command == "sweep-g1d") {
        add({"L", "engine", "h_x", "h_z_center", "h_z_width", "B_x", "B_z_list", "B_z_min",
             "B_z_max", "B_z_step", "nodes", "qfi_delta", "fd_step", "deriv", "mock_qfi"});
    } else if (command == "scaling") {
        add({"L_list", "engine", "h_x", "h_z_center", "h_z_width", "B_x", "B_z_min", "B_z_max",
             "B_z_step", "nodes", "qfi_delta", "fd_step", "deriv", "mock_qfi", "polish"});
    } else if (command == "optimize-2d") {
        add({"L", "engine", "h_x_center", "h_x_width", "h_z_center", "h_z_width", "B_x_min",
             "B_x_max", "B_x_step", "B_z_min", "B_z_max", "B_z_step", "nodes_per_axis", "fd_step",
             "deriv", "qfi_delta", "mock_qfi_x", "mock_qfi_z", "polish"});
    } else if (command == "efficiency") {
        add({"L", "B_x", "B_z", "h_x_center", "h_x_width", "h_z_center", "h_z_width", "grid_n",
             "fd_step"});
    } else if (command == "qfi-point") {
        add({"L", "engine", "B_x", "B_z", "h_x", "h_z", "h_z_list", "h_z_min", "h_z_max",
             "h_z_step", "qfi_delta", "fd_step", "deriv", "mock_qfi"});
    }
    return keys;
}

}  // namespace

RunConfig make_run_config(const std::string& command, const std::string& config_text,
                          const std::map<std::string, std::string>& overrides) {
    if (kCommands.count(command) == 0) throw ConfigError("unknown command '" + command + "'");
    RunConfig config;
    config.command = command;
    config.values = parse_key_values(config_text);
    for (const auto& [key, value] : overrides) config.values[key] = value;

    const auto allowed = allowed_keys(command);
    for (const auto& [key, value] : config.values)
        if (allowed.count(key) == 0)
            throw ConfigError("config key '" + key + "' is not recognized by command '" +
                              command + "'");
    return config;
}

namespace {

// ---------------------------------------------------------------------------
// Shared command plumbing.

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::string to_csv() const {
        std::string out;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c > 0) out += ',';
            out += columns[c];
        }
        out += '\n';
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c > 0) out += ',';
                out += fmt12(row[c]);
            }
            out += '\n';
        }
        return out;
    }

    json to_json() const {
        json data;
        data["columns"] = columns;
        json rows_json = json::array();
        for (const auto& row : rows) rows_json.push_back(row);
        data["rows"] = std::move(rows_json);
        return data;
    }
};

// Records defaults as they are consumed so the echo reproduces the run.
class ConfigReader {
  public:
    explicit ConfigReader(const RunConfig& config) : config_(config) {
        for (const auto& [key, value] : config.values) echo_[key] = value;
    }

    double number(const std::string& key) {
        const double v = config_.get_double(key);
        return v;
    }
    double number(const std::string& key, double fallback) {
        const double v = config_.get_double(key, fallback);
        if (!config_.has(key)) echo_[key] = fmt17(v);
        return v;
    }
    int integer(const std::string& key) { return config_.get_int(key); }
    int integer(const std::string& key, int fallback) {
        const int v = config_.get_int(key, fallback);
        if (!config_.has(key)) echo_[key] = std::to_string(v);
        return v;
    }
    std::string text(const std::string& key, const std::string& fallback) {
        const std::string v = config_.get_string(key, fallback);
        if (!config_.has(key)) echo_[key] = v;
        return v;
    }
    bool flag(const std::string& key, bool fallback) {
        const bool v = config_.get_bool(key, fallback);
        if (!config_.has(key)) echo_[key] = v ? "true" : "false";
        return v;
    }
    const RunConfig& raw() const { return config_; }
    const std::map<std::string, std::string>& echo() const { return echo_; }

  private:
    const RunConfig& config_;
    std::map<std::string, std::string> echo_;
};

global_metric::Engine parse_engine(const std::string& name) {
    if (name == "free_fermion") return global_metric::Engine::free_fermion;
    if (name == "ed") return global_metric::Engine::ed;
    if (name == "mock") return global_metric::Engine::mock;
    throw ConfigError("engine must be one of free_fermion|ed|mock, got '" + name + "'");
}

fisher::DerivativeMethod parse_deriv(const std::string& name) {
    if (name == "auto") return fisher::DerivativeMethod::automatic;
    if (name == "pt") return fisher::DerivativeMethod::perturbation;
    if (name == "fd") return fisher::DerivativeMethod::finite_difference;
    throw ConfigError("deriv must be one of auto|pt|fd, got '" + name + "'");
}

global_metric::EngineOptions engine_options_from(ConfigReader& reader, int threads) {
    global_metric::EngineOptions options;
    options.qfi_delta = reader.number("qfi_delta", 1e-4);
    options.fd_step = reader.number("fd_step", 1e-4);
    options.derivative = parse_deriv(reader.text("deriv", "fd"));
    options.threads = threads;
    return options;
}

std::vector<double> sweep_values(ConfigReader& reader, const std::string& prefix) {
    const auto& config = reader.raw();
    if (config.has(prefix + "_list")) return config.get_double_list(prefix + "_list");
    if (config.has(prefix)) return {config.get_double(prefix)};
    const double lo = reader.number(prefix + "_min");
    const double hi = reader.number(prefix + "_max");
    const double step = reader.number(prefix + "_step");
    if (!(step > 0.0) || hi < lo)
        throw ConfigError(prefix + ": need min <= max and step > 0");
    std::vector<double> out;
    const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(lo + i * step);
    return out;
}

// ---------------------------------------------------------------------------
// Commands.

struct CommandOutput {
    CsvTable table;
    json outputs;
    json diagnostics;
    std::map<std::string, double> scalars;
};

CommandOutput cmd_sweep_g1d(ConfigReader& reader, int threads) {
    ProbeConfig probe;
    probe.length = reader.integer("L");
    probe.control_x = reader.number("B_x", 0.0);

    global_metric::SensingRegion region;
    region.dim = 1;
    region.center_x = reader.number("h_x", 0.0);
    region.center_z = reader.number("h_z_center", 0.0);
    region.width_z = reader.number("h_z_width", 0.0);

    const auto engine = parse_engine(reader.text("engine", "free_fermion"));
    auto options = engine_options_from(reader, threads);
    options.mock_qfi_z = reader.number("mock_qfi", 1.0);
    options.anchor_cache = std::make_shared<global_metric::AnchorCache>();
    const int nodes = reader.integer("nodes", 16);
    const std::vector<double> bz_values = sweep_values(reader, "B_z");

    CommandOutput out;
    out.table.columns = {"B_z", "g"};
    int min_nodes = 0;
    int max_nodes = 0;
    double best_g = std::numeric_limits<double>::infinity();
    double best_bz = bz_values.front();
    for (double bz : bz_values) {
        probe.control_z = bz;
        const auto result = global_metric::g_single(probe, region, engine, nodes, options);
        out.table.rows.push_back({bz, result.value});
        min_nodes = min_nodes == 0 ? result.nodes_used : std::min(min_nodes, result.nodes_used);
        max_nodes = std::max(max_nodes, result.nodes_used);
        if (result.value < best_g) {
            best_g = result.value;
            best_bz = bz;
        }
    }
    out.outputs["g_min"] = best_g;
    out.outputs["B_z_at_min"] = best_bz;
    out.diagnostics["nodes_used_min"] = min_nodes;
    out.diagnostics["nodes_used_max"] = max_nodes;
    out.scalars["g_min"] = best_g;
    out.scalars["B_z_at_min"] = best_bz;
    return out;
}

CommandOutput cmd_scaling(ConfigReader& reader, int threads) {
    const std::vector<int> lengths = reader.raw().get_int_list("L_list");

    global_metric::SensingRegion region;
    region.dim = 1;
    region.center_x = reader.number("h_x", 0.0);
    region.center_z = reader.number("h_z_center", 0.0);
    region.width_z = reader.number("h_z_width", 0.0);

    const auto engine = parse_engine(reader.text("engine", "free_fermion"));
    auto options = engine_options_from(reader, threads);
    options.mock_qfi_z = reader.number("mock_qfi", 1.0);
    const int nodes = reader.integer("nodes", 16);

    probe_optimizer::SearchSpec search;
    search.bz.min = reader.number("B_z_min", -3.0);
    search.bz.max = reader.number("B_z_max", 3.0);
    search.bz.step = reader.number("B_z_step", 0.02);
    search.polish = reader.flag("polish", true);

    CommandOutput out;
    out.table.columns = {"L", "g_star"};
    std::vector<std::pair<double, double>> points;
    json per_length = json::array();
    for (int length : lengths) {
        ProbeConfig probe;
        probe.length = length;
        probe.control_x = reader.number("B_x", 0.0);
        const auto result =
            probe_optimizer::minimize_g(probe, region, search, engine, nodes, options);
        out.table.rows.push_back({static_cast<double>(length), result.g_star});
        points.emplace_back(static_cast<double>(length), result.g_star);
        json entry;
        entry["L"] = length;
        entry["B_z_star"] = result.bz_star;
        entry["g_star"] = result.g_star;
        entry["boundary_warning"] = result.boundary_warning;
        per_length.push_back(std::move(entry));
    }

    const auto fit = probe_optimizer::fit_scaling(points);
    out.outputs["fit_amplitude"] = fit.amplitude;
    out.outputs["fit_exponent"] = fit.exponent;
    out.outputs["fit_offset"] = fit.offset;
    out.outputs["fit_residual_norm"] = fit.residual_norm;
    out.outputs["fit_ill_determined"] = fit.ill_determined;
    out.diagnostics["per_length"] = std::move(per_length);
    out.scalars["fit_exponent"] = fit.exponent;
    out.scalars["fit_amplitude"] = fit.amplitude;
    out.scalars["fit_offset"] = fit.offset;
    return out;
}

CommandOutput cmd_optimize2d(ConfigReader& reader, int threads) {
    ProbeConfig probe;
    probe.length = reader.integer("L");

    global_metric::SensingRegion region;
    region.dim = 2;
    region.center_x = reader.number("h_x_center", 0.0);
    region.width_x = reader.number("h_x_width", 0.0);
    region.center_z = reader.number("h_z_center", 0.0);
    region.width_z = reader.number("h_z_width", 0.0);

    const auto engine = parse_engine(reader.text("engine", "ed"));
    auto options = engine_options_from(reader, threads);
    options.mock_qfi_x = reader.number("mock_qfi_x", 1.0);
    options.mock_qfi_z = reader.number("mock_qfi_z", 1.0);
    const int nodes = reader.integer("nodes_per_axis", 16);

    probe_optimizer::SearchSpec search;
    search.bx = probe_optimizer::SearchBracket{};
    search.bx->min = reader.number("B_x_min", 0.0);
    search.bx->max = reader.number("B_x_max", 3.0);
    search.bx->step = reader.number("B_x_step", 0.05);
    search.bz.min = reader.number("B_z_min", -2.0);
    search.bz.max = reader.number("B_z_max", 2.0);
    search.bz.step = reader.number("B_z_step", 0.05);
    search.polish = reader.flag("polish", true);

    const auto result = probe_optimizer::minimize_g(probe, region, search, engine, nodes, options);

    CommandOutput out;
    out.table.columns = {"B_x", "B_z", "g"};
    for (const auto& entry : result.trace) {
        if (!entry.grid_phase) continue;
        out.table.rows.push_back(
            {entry.bx, entry.bz, entry.ok ? entry.g : std::numeric_limits<double>::quiet_NaN()});
    }
    out.outputs["B_x_star"] = result.bx_star;
    out.outputs["B_z_star"] = result.bz_star;
    out.outputs["g_star"] = result.g_star;
    out.outputs["boundary_warning"] = result.boundary_warning;
    out.diagnostics["failed_evaluations"] = result.failed_evaluations;
    out.diagnostics["total_evaluations"] = static_cast<int>(result.trace.size());
    out.scalars["B_x_star"] = result.bx_star;
    out.scalars["B_z_star"] = result.bz_star;
    out.scalars["g_star"] = result.g_star;
    return out;
}

CommandOutput cmd_efficiency(ConfigReader& reader, int threads) {
    ProbeConfig probe;
    probe.length = reader.integer("L");
    probe.control_x = reader.number("B_x");
    probe.control_z = reader.number("B_z");

    global_metric::SensingRegion region;
    region.dim = 2;
    region.center_x = reader.number("h_x_center", 0.0);
    region.width_x = reader.number("h_x_width", 0.0);
    region.center_z = reader.number("h_z_center", 0.0);
    region.width_z = reader.number("h_z_width", 0.0);

    probe_optimizer::EfficiencyOptions options;
    options.grid_n = reader.integer("grid_n", 11);
    options.fd_step = reader.number("fd_step", 1e-4);
    options.threads = threads;

    const auto map = probe_optimizer::efficiency_map(probe, region, options);

    CommandOutput out;
    out.table.columns = {"h_x", "h_z", "ratio_qfi_cfi", "ratio_b0_bstar"};
    json flagged = json::array();
    for (const auto& node : map.nodes) {
        if (node.ok) {
            out.table.rows.push_back({node.hx, node.hz, node.ratio_qfi_cfi, node.ratio_b0_bstar});
        } else {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            out.table.rows.push_back({node.hx, node.hz, nan, nan});
            json coords;
            coords["h_x"] = node.hx;
            coords["h_z"] = node.hz;
            flagged.push_back(std::move(coords));
        }
    }
    out.outputs["min_ratio_qfi_cfi"] = map.min_ratio;
    out.outputs["max_ratio_qfi_cfi"] = map.max_ratio;
    out.outputs["flagged_nodes"] = map.flagged;
    out.diagnostics["flagged"] = std::move(flagged);
    out.scalars["min_ratio_qfi_cfi"] = map.min_ratio;
    out.scalars["max_ratio_qfi_cfi"] = map.max_ratio;
    return out;
}

CommandOutput cmd_qfi_point(ConfigReader& reader, int threads) {
    ProbeConfig probe;
    probe.length = reader.integer("L");
    probe.control_x = reader.number("B_x", 0.0);
    probe.control_z = reader.number("B_z", 0.0);
    const double hx = reader.number("h_x", 0.0);

    const std::string engine_name = reader.text("engine", "free_fermion");
    const bool want_ff = engine_name == "free_fermion" || engine_name == "both";
    const bool want_ed = engine_name == "ed" || engine_name == "both";
    const bool want_mock = engine_name == "mock";
    if (!want_ff && !want_ed && !want_mock)
        throw ConfigError("qfi-point: engine must be free_fermion|ed|both|mock");

    const double qfi_delta = reader.number("qfi_delta", 1e-4);
    const double fd_step = reader.number("fd_step", 1e-4);
    const auto deriv = parse_deriv(reader.text("deriv", "auto"));
    const double mock_qfi = reader.number("mock_qfi", 1.0);
    const std::vector<double> hz_values = sweep_values(reader, "h_z");

    CommandOutput out;
    out.table.columns = {"h_z", "F_Q"};
    if (engine_name == "both") out.table.columns.push_back("F_Q_ed");

    int step_warnings = 0;
    double peak_qfi = -std::numeric_limits<double>::infinity();
    double peak_hz = hz_values.front();
    for (double hz : hz_values) {
        std::vector<double> row{hz};
        double primary = 0.0;
        if (want_ff) {
            const auto result = free_fermion::qfi_transverse(probe.control_z + hz, probe.coupling,
                                                             probe.length, qfi_delta);
            if (result.step_warning) ++step_warnings;
            primary = result.qfi_refined;
            row.push_back(primary);
        } else if (want_mock) {
            primary = mock_qfi;
            row.push_back(primary);
        }
        if (want_ed) {
            fisher::QfiOptions qfi_options;
            qfi_options.derivative = deriv;
            qfi_options.fd_step = fd_step;
            qfi_options.solver.threads = threads;
            const auto matrix =
                fisher::qfi_matrix(probe, FieldPoint{hx, hz}, {Axis::z}, qfi_options);
            const double ed_value = matrix.entries(0, 0);
            row.push_back(ed_value);
            if (!want_ff) primary = ed_value;
        }
        if (primary > peak_qfi) {
            peak_qfi = primary;
            peak_hz = hz;
        }
        out.table.rows.push_back(std::move(row));
    }
    out.outputs["peak_F_Q"] = peak_qfi;
    out.outputs["h_z_at_peak"] = peak_hz;
    out.diagnostics["step_warnings"] = step_warnings;
    out.scalars["peak_F_Q"] = peak_qfi;
    out.scalars["h_z_at_peak"] = peak_hz;
    return out;
}

}  // namespace

ResultRecord run_command(const RunConfig& config) {
    ConfigReader reader(config);
    const int threads = reader.integer("threads", hardware_threads());
    reader.text("format", "csv");

    const auto start = std::chrono::steady_clock::now();
    CommandOutput output;
    if (config.command == "sweep-g1d") {
        output = cmd_sweep_g1d(reader, threads);
    } else if (config.command == "scaling") {
        output = cmd_scaling(reader, threads);
    } else if (config.command == "optimize-2d") {
        output = cmd_optimize2d(reader, threads);
    } else if (config.command == "efficiency") {
        output = cmd_efficiency(reader, threads);
    } else if (config.command == "qfi-point") {
        output = cmd_qfi_point(reader, threads);
    } else {
        throw ConfigError("unknown command '" + config.command + "'");
    }
    const auto stop = std::chrono::steady_clock::now();
    const double seconds = std::chrono::duration<double>(stop - start).count();

    ResultRecord record;
    record.command = config.command;
    record.config_echo = reader.echo();
    record.csv = output.table.to_csv();
    record.scalars = std::move(output.scalars);

    json j;
    j["command"] = config.command;
    j["config"] = record.config_echo;
    j["outputs"] = std::move(output.outputs);
    j["diagnostics"] = std::move(output.diagnostics);
    j["data"] = output.table.to_json();
    j["version"] = kVersion;
    j["timing_seconds"] = seconds;
    record.record = j.dump(2) + "\n";
    return record;
}

namespace {

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp + "' for writing");
        out << content;
        if (!out) throw Error("failed while writing '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error("failed to move '" + tmp + "' into place");
}

}  // namespace

int run_main(int argc, const char* const* argv) {
    std::string command;
    std::string config_path;
    std::map<std::string, std::string> overrides;
    bool want_help = argc <= 1;

    std::vector<std::string> args(argv + 1, argv + argc);
    std::size_t index = 0;
    if (!args.empty() && args[0] != "--help" && args[0] != "-h") {
        command = args[0];
        index = 1;
    }
    for (; index < args.size(); ++index) {
        const std::string& arg = args[index];
        auto take_value = [&](const char* name) -> std::string {
            if (index + 1 >= args.size())
                throw ConfigError(std::string(name) + " expects a value");
            return args[++index];
        };
        if (arg == "--help" || arg == "-h") {
            want_help = true;
        } else if (arg == "--config") {
            config_path = take_value("--config");
        } else if (arg == "--out") {
            overrides["out"] = take_value("--out");
        } else if (arg == "--format") {
            overrides["format"] = take_value("--format");
        } else if (arg == "--threads") {
            overrides["threads"] = take_value("--threads");
        } else {
            std::cerr << "error: unknown argument '" << arg << "'\n";
            return kExitConfigError;
        }
    }

    if (want_help) {
        std::cout
            << "usage: critsense <command> --config <path> [--out <path>] "
               "[--format csv|json] [--threads N]\n"
               "\n"
               "commands:\n"
               "  sweep-g1d    g(B_z) curve over a control-field sweep\n"
               "  scaling      g(B_z*) versus chain length plus the aL^-b+c fit\n"
               "  optimize-2d  (B_x, B_z) grid scan and optimum for two-parameter sensing\n"
               "  efficiency   magnetization-measurement efficiency maps\n"
               "  qfi-point    QFI diagnostics along an h_z sweep\n"
               "\n"
               "The config file holds 'key = value' lines; all energies are in units\n"
               "of J. CLI flags override the matching config keys.\n";
        return kExitOk;
    }

    try {
        if (command.empty()) throw ConfigError("missing command");
        if (config_path.empty()) throw ConfigError("missing --config <path>");
        std::ifstream file(config_path);
        if (!file) throw ConfigError("cannot read config file '" + config_path + "'");
        std::stringstream buffer;
        buffer << file.rdbuf();

        const RunConfig config = make_run_config(command, buffer.str(), overrides);
        const ResultRecord record = run_command(config);

        const std::string format = config.get_string("format", "csv");
        if (format != "csv" && format != "json")
            throw ConfigError("format must be csv or json, got '" + format + "'");
        const std::string out_path = config.get_string("out", "");

        if (format == "json") {
            if (out_path.empty()) {
                std::cout << record.record;
            } else {
                write_file_atomic(out_path, record.record);
            }
        } else {
            if (out_path.empty()) {
                std::cout << record.csv;
            } else {
                write_file_atomic(out_path, record.csv);
                write_file_atomic(out_path + ".record.json", record.record);
            }
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const Error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumericalError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumericalError;
    }
}

}  // namespace critsense::cli
