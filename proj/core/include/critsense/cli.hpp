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

#ifndef CRITSENSE_CLI_HPP_
#define CRITSENSE_CLI_HPP_

#include <map>
#include <string>
#include <vector>

namespace critsense::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalError = 3;

/// A validated run: command name plus a flat key/value map (config file
/// lines `key = value`, later overridden by CLI flags). All energies are in
/// units of J; J is fixed to 1.
struct RunConfig {
    std::string command;
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }

    /// Typed accessors; throw ConfigError on parse failure or missing key.
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<int> get_int_list(const std::string& key) const;
};

/// Parses `key = value` lines ('#' starts a comment). Unknown keys are
/// rejected later, command by command.
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Assembles and validates a RunConfig from config-file text plus override
/// pairs (CLI flags win).
RunConfig make_run_config(const std::string& command, const std::string& config_text,
                          const std::map<std::string, std::string>& overrides);

/// Everything a run produced. `csv` is the primary data table; `record` is
/// the JSON summary (inputs echoed, outputs, diagnostics, version, timing).
struct ResultRecord {
    std::string command;
    std::map<std::string, std::string> config_echo;
    std::string csv;
    std::string record;
    /// Convenience scalar outputs (also present in the record).
    std::map<std::string, double> scalars;
};

/// Runs one command in-process. Throws ConfigError / numerical errors.
ResultRecord run_command(const RunConfig& config);

/// Full command-line entry point (parses argv, runs, writes outputs).
int run_main(int argc, const char* const* argv);

}  // namespace critsense::cli

#endif  // CRITSENSE_CLI_HPP_
