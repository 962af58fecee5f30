// Copyright 2026 The afcmem Authors
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

// afcmem: command-line front end. Exit codes: 0 success, 2 configuration
// error, 3 runtime or estimation error.

#include <CLI11.hpp>
#include <exception>
#include <iostream>

#include "afcmem/cli.hpp"
#include "afcmem/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"AFC spin-wave polarization-qubit memory: prediction, simulation, tomography and bounds"};
    app.require_subcommand(1);

    std::string config_path, mu_list, out_dir = ".";
    std::uint64_t seed = 0;
    std::int64_t trials = 0;
    app.add_option("--config", config_path, "INI configuration file (see show-defaults)");
    auto* seed_opt = app.add_option("--seed", seed, "random seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--mu", mu_list, "comma-separated mean photon numbers");
    auto* trials_opt = app.add_option("--trials", trials, "storage sequences per analyzer setting");

    const char* commands[][2] = {
        {"predict", "closed-form fidelity curve with its mu1 band"},
        {"simulate", "photon-counting histograms and parameter estimates"},
        {"tomography", "state tomography of H, V, D, R and the process matrix"},
        {"bounds", "classical bounds and quantumness verdicts"},
        {"reproduce-paper", "every table and figure of the reference run, plus a tolerance summary"},
        {"show-defaults", "print the default configuration"},
    };
    for (const auto& c : commands) app.add_subcommand(c[0], c[1])->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    const std::string name = app.get_subcommands().front()->get_name();

    try {
        afcmem::CommandContext ctx;
        ctx.config = config_path.empty() ? afcmem::RunConfig::defaults() : afcmem::load_config(config_path);
        if (*seed_opt) ctx.config.seed = seed;
        if (*trials_opt) ctx.config.trials = trials;
        if (!mu_list.empty()) ctx.config.mu = afcmem::parse_double_list(mu_list);
        ctx.out = out_dir;
        ctx.log = &std::cout;
        if (name == "show-defaults") {
            afcmem::cmd_show_defaults(std::cout);
            return 0;
        }
        afcmem::run_command(name, ctx);
    } catch (const afcmem::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
