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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "critsense/cli.hpp"
#include "critsense/errors.hpp"

namespace cli = critsense::cli;
using json = nlohmann::ordered_json;

namespace {

int count_lines(const std::string& text) {
    int lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    return lines;
}

std::string strip_timing(const std::string& record) {
    json j = json::parse(record);
    j.erase("timing_seconds");
    return j.dump(2);
}

// Runs the installed binary; available when ctest exports CRITSENSE_BIN.
int run_binary(const std::string& args, std::string* out_path = nullptr) {
    const char* binary = std::getenv("CRITSENSE_BIN");
    REQUIRE(binary != nullptr);
    const std::string command = std::string(binary) + " " + args + " 2>/dev/null >/dev/null";
    const int status = std::system(command.c_str());
    (void)out_path;
    return WEXITSTATUS(status);
}

std::string write_temp_config(const std::string& name, const std::string& text) {
    const std::string path = "/tmp/critsense_test_" + name + ".cfg";
    std::ofstream out(path, std::ios::trunc);
    out << text;
    return path;
}

}  // namespace

TEST_CASE("config parser") {
    const auto kv = cli::parse_key_values("a = 1\n# comment\n b =  two words \n\nc=3 # tail\n");
    CHECK(kv.at("a") == "1");
    CHECK(kv.at("b") == "two words");
    CHECK(kv.at("c") == "3");
    CHECK_THROWS_AS(cli::parse_key_values("oops\n"), critsense::ConfigError);
    CHECK_THROWS_AS(cli::parse_key_values("= 3\n"), critsense::ConfigError);
}

TEST_CASE("make_run_config rejects unknown commands and keys") {
    CHECK_THROWS_AS(cli::make_run_config("fly", "", {}), critsense::ConfigError);
    CHECK_THROWS_AS(cli::make_run_config("sweep-g1d", "no_such_key = 1\n", {}),
                    critsense::ConfigError);
    const auto config = cli::make_run_config("sweep-g1d", "L = 8\nnodes = 4\n",
                                             {{"threads", "2"}});
    CHECK(config.get_int("L") == 8);
    CHECK(config.get_int("threads") == 2);
}

TEST_CASE("typed accessors") {
    const auto config = cli::make_run_config(
        "sweep-g1d", "L = 8\nB_z_list = 0.1, 0.2, 0.3\nmock_qfi = 2.5\n", {});
    CHECK(config.get_double("mock_qfi") == 2.5);
    CHECK(config.get_double_list("B_z_list").size() == 3);
    CHECK(config.get_int("L", 99) == 8);
    CHECK(config.get_int("missing", 99) == 99);
    CHECK_THROWS_AS(config.get_double("L_nope"), critsense::ConfigError);
    CHECK_THROWS_AS((void)cli::make_run_config("sweep-g1d", "L = eight\n", {})
                        .get_int("L"),
                    critsense::ConfigError);
}

TEST_CASE("sweep-g1d smoke test with the mock engine") {
    const auto config = cli::make_run_config("sweep-g1d",
                                             "L = 8\n"
                                             "engine = mock\n"
                                             "mock_qfi = 4.0\n"
                                             "h_z_width = 0.2\n"
                                             "B_z_list = 0.1, 0.5, 0.9\n"
                                             "nodes = 4\n"
                                             "threads = 1\n",
                                             {});
    const auto record = cli::run_command(config);
    CHECK(count_lines(record.csv) == 4);  // header + 3 rows
    CHECK(record.csv.substr(0, 6) == "B_z,g\n");
    CHECK(record.scalars.at("g_min") == doctest::Approx(0.25));

    const json j = json::parse(record.record);
    CHECK(j.at("command") == "sweep-g1d");
    CHECK(j.at("version") == cli::kVersion);
    CHECK(j.at("data").at("rows").size() == 3);
}

TEST_CASE("qfi-point echoes the mock value and sweeps h_z") {
    const auto config = cli::make_run_config("qfi-point",
                                             "L = 8\n"
                                             "engine = mock\n"
                                             "mock_qfi = 7.5\n"
                                             "h_z = 0.4\n"
                                             "threads = 1\n",
                                             {});
    const auto record = cli::run_command(config);
    CHECK(record.scalars.at("peak_F_Q") == doctest::Approx(7.5));
    CHECK(record.csv == "h_z,F_Q\n0.4,7.5\n");
}

TEST_CASE("qfi-point compares engines at L = 10") {
    const auto config = cli::make_run_config("qfi-point",
                                             "L = 10\n"
                                             "engine = both\n"
                                             "h_z_list = 0.5, 1.0, 1.5\n"
                                             "threads = 1\n",
                                             {});
    const auto record = cli::run_command(config);
    std::stringstream stream(record.csv);
    std::string header;
    std::getline(stream, header);
    CHECK(header == "h_z,F_Q,F_Q_ed");
    std::string line;
    while (std::getline(stream, line)) {
        double hz = 0.0;
        double ff = 0.0;
        double ed = 0.0;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &hz, &ff, &ed) == 3);
        CHECK(std::abs(ff - ed) <= 1e-3 * std::max(ff, ed));
    }
}

TEST_CASE("determinism: identical configs give identical payloads") {
    const auto config = cli::make_run_config("sweep-g1d",
                                             "L = 64\n"
                                             "engine = free_fermion\n"
                                             "h_z_center = 0.1\n"
                                             "h_z_width = 0.05\n"
                                             "B_z_min = 0.5\n"
                                             "B_z_max = 1.1\n"
                                             "B_z_step = 0.1\n"
                                             "nodes = 8\n"
                                             "threads = 1\n",
                                             {});
    const auto first = cli::run_command(config);
    const auto second = cli::run_command(config);
    CHECK(first.csv == second.csv);
    CHECK(strip_timing(first.record) == strip_timing(second.record));

    // Thread fan-out must not change the numbers either.
    auto threaded_config = config;
    threaded_config.values["threads"] = "4";
    const auto threaded = cli::run_command(threaded_config);
    CHECK(threaded.csv == first.csv);
}

TEST_CASE("config echo round-trips to an equivalent run") {
    const auto config = cli::make_run_config("qfi-point",
                                             "L = 12\n"
                                             "engine = free_fermion\n"
                                             "h_z_min = 0.8\n"
                                             "h_z_max = 1.2\n"
                                             "h_z_step = 0.1\n"
                                             "threads = 1\n",
                                             {});
    const auto record = cli::run_command(config);

    std::string reconstructed;
    for (const auto& [key, value] : record.config_echo)
        reconstructed += key + " = " + value + "\n";
    const auto config2 = cli::make_run_config("qfi-point", reconstructed, {});
    const auto record2 = cli::run_command(config2);
    CHECK(record2.csv == record.csv);
    CHECK(strip_timing(record2.record) == strip_timing(record.record));
}

TEST_CASE("binary exit codes and file outputs") {
    const std::string good = write_temp_config("good",
                                               "L = 8\n"
                                               "engine = mock\n"
                                               "h_z_width = 0.1\n"
                                               "B_z_list = 0.0, 0.5\n"
                                               "nodes = 2\n"
                                               "threads = 1\n");
    const std::string out = "/tmp/critsense_test_out.csv";
    std::remove(out.c_str());
    std::remove((out + ".record.json").c_str());
    CHECK(run_binary("sweep-g1d --config " + good + " --out " + out) == 0);

    std::ifstream csv(out);
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "B_z,g");
    std::ifstream record(out + ".record.json");
    CHECK(record.good());

    // Unknown key -> config error.
    const std::string bad = write_temp_config("bad", "L = 8\nwhatever = 1\n");
    CHECK(run_binary("sweep-g1d --config " + bad) == cli::kExitConfigError);

    // Missing config file.
    CHECK(run_binary("sweep-g1d --config /tmp/does_not_exist.cfg") == cli::kExitConfigError);

    // Numerical failure: diverging mock integrand.
    const std::string divergent = write_temp_config("divergent",
                                                    "L = 8\n"
                                                    "engine = mock\n"
                                                    "mock_qfi = 0.0\n"
                                                    "h_z_width = 0.1\n"
                                                    "B_z_list = 0.0\n"
                                                    "nodes = 2\n"
                                                    "threads = 1\n");
    CHECK(run_binary("sweep-g1d --config " + divergent) == cli::kExitNumericalError);

    // Unknown command.
    CHECK(run_binary("warp --config " + good) == cli::kExitConfigError);

    // Help works without a config.
    CHECK(run_binary("--help") == 0);
}
