// Copyright 2026 The weakmeter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Exit codes: 0 success, 2 config error,
// 3 degenerate postselection, 4 consistency-check failure.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "weakmeter/weakmeter.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitGeneric = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitConsistency = 4;

int run_scan_command(const std::string &config_path, const std::string &out_dir) {
    const weakmeter::ScenarioConfig cfg = weakmeter::load_scenario(config_path);
    const weakmeter::ScanResult result = weakmeter::run_scan(cfg);
    weakmeter::write_scan_outputs(cfg, result, out_dir);
    std::cout << "wrote " << out_dir << "/scan.csv and " << out_dir << "/report.json ("
              << result.rows.size() << " rows)\n";
    return kExitOk;
}

int run_decompose_command(const std::string &config_path, bool as_json) {
    const weakmeter::ScenarioConfig cfg = weakmeter::load_scenario(config_path);
    const weakmeter::DecompositionComparison cmp = weakmeter::compare_decompositions(cfg);
    if (as_json) {
        std::cout << weakmeter::decomposition_json(cmp).dump(2) << "\n";
    } else {
        std::cout << weakmeter::decomposition_table(cmp);
    }
    return cmp.consistent ? kExitOk : kExitConsistency;
}

int run_validate_command(const std::string &config_path) {
    const weakmeter::ScenarioConfig cfg = weakmeter::load_scenario(config_path);
    std::cout << weakmeter::validate_report_json(cfg).dump(2) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"weak measurement interaction simulator and verifier"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool as_json = false;

    CLI::App *scan = app.add_subcommand("scan", "evaluate an s-grid scan, write CSV + JSON report");
    scan->add_option("config", config_path, "scenario config file")->required();
    scan->add_option("--out-dir", out_dir, "output directory")->required();

    CLI::App *decompose =
        app.add_subcommand("decompose", "compare the conditional growth decomposition, the "
                                        "weak-variance reading and the FD oracle");
    decompose->add_option("config", config_path, "scenario config file")->required();
    decompose->add_flag("--json", as_json, "emit JSON instead of the text table");

    CLI::App *validate =
        app.add_subcommand("validate", "report meter symmetry and unbiasedness checks as JSON");
    validate->add_option("config", config_path, "scenario config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (scan->parsed()) {
            return run_scan_command(config_path, out_dir);
        }
        if (decompose->parsed()) {
            return run_decompose_command(config_path, as_json);
        }
        return run_validate_command(config_path);
    } catch (const weakmeter::ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const weakmeter::DegeneratePostselectionError &e) {
        std::cerr << "degenerate postselection: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const weakmeter::ConsistencyError &e) {
        std::cerr << "consistency check failed: " << e.what() << "\n";
        return kExitConsistency;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitGeneric;
    }
}
