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

#ifndef AFCMEM_CLI_HPP
#define AFCMEM_CLI_HPP

// Run configuration and the command implementations behind the afcmem tool.
// Every command is a pure function of (RunConfig, seed) and writes CSV files
// into an output directory.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "afcmem/classical_bounds.hpp"
#include "afcmem/montecarlo.hpp"

namespace afcmem {

struct PredictSettings {
    double mu_min = 0.1;
    double mu_max = 10.0;
    int points = 100;
    double mu1 = 0.29;
    double mu1_err = 0.04;
};

struct BoundsSettings {
    double mu_min = 0.5;
    double mu_max = 10.0;
    int points = 20;
    TransmittedSearch search;
    double k = 1.0;
    std::vector<double> measured_mu;
    std::vector<double> measured_f;
    std::vector<double> measured_err;
};

struct TomographySettings {
    double mu = 1.4;
    std::vector<Label> states;
    std::vector<double> eta;
    std::vector<double> p_n;
    int resamples = 200;
};

struct RunConfig {
    std::uint64_t seed = 1;
    /// Empty: each command uses its own grid or point.
    std::vector<double> mu;
    std::int64_t trials = 1000000;
    /// memory, schedule and detection chain; mu, trials and seed are set per command.
    ExperimentConfig experiment;
    PredictSettings predict;
    BoundsSettings bounds;
    TomographySettings tomography;

    static RunConfig defaults();
    /// Canonical INI text of every setting, including defaults.
    std::string to_ini() const;
    std::string hash() const;
    /// Throws ConfigError.
    void validate() const;
};

/// Flat INI with sections; unknown sections or keys are errors. Keys absent
/// from the text keep their defaults. Throws ConfigError.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::filesystem::path& path);

struct CommandContext {
    RunConfig config;
    std::filesystem::path out = ".";
    std::ostream* log = nullptr;
};

void cmd_predict(const CommandContext& ctx);
void cmd_simulate(const CommandContext& ctx);
void cmd_tomography(const CommandContext& ctx);
void cmd_bounds(const CommandContext& ctx);
void cmd_reproduce_paper(const CommandContext& ctx);
void cmd_show_defaults(std::ostream& os);

/// Dispatch by subcommand name. Throws ConfigError for an unknown name.
void run_command(const std::string& name, const CommandContext& ctx);

/// Parses "0.8,1.4" (also space separated). Throws ConfigError.
std::vector<double> parse_double_list(const std::string& text);

}  // namespace afcmem

#endif
