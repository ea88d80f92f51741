// Copyright 2026 The rxopt Authors
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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rxopt/error.hpp"
#include "rxopt/tools/experiment.hpp"

namespace {

constexpr int kExitConfigError = 1;
constexpr int kExitCellFailure = 2;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::int64_t> runs;
  unsigned threads = 1;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Experiment configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Master seed (overrides the config)");
  cmd->add_option("--out", f.out, "CSV output path (overrides the config; '-' for stdout)");
  cmd->add_option("--runs", f.runs, "Number of runs per cell (overrides the config)")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", f.threads, "Worker threads, 0 = all cores; results do not depend on it");
}

int run(rxopt::tools::Mode mode, const Flags& flags) {
  using namespace rxopt::tools;
  ExperimentConfig cfg;
  try {
    cfg = load_config(flags.config);
    if (cfg.mode && *cfg.mode != mode) {
      throw rxopt::Error(rxopt::ErrorKind::ConfigError,
                         "config mode '" + to_string(*cfg.mode) + "' does not match subcommand '" + to_string(mode) + "'");
    }
    cfg.mode = mode;
    if (flags.seed) cfg.seed = flags.seed;
    if (flags.runs) cfg.num_runs = *flags.runs;
    if (!flags.out.empty()) cfg.output_path = flags.out;
    validate_config(cfg);
  } catch (const rxopt::Error& e) {
    std::cerr << "rxopt: " << e.what() << '\n';
    return kExitConfigError;
  }

  std::vector<ResultRow> rows;
  try {
    rows = run_grid(cfg, flags.threads);
    if (cfg.output_path.empty() || cfg.output_path == "-") {
      write_csv(rows, std::cout);
    } else {
      emit_csv(rows, cfg.output_path);
      std::cout << report_summary(rows);
    }
  } catch (const rxopt::Error& e) {
    std::cerr << "rxopt: " << e.what() << '\n';
    return kExitConfigError;
  }

  int status = 0;
  for (const auto& row : rows) {
    if (!row.ok()) {
      std::cerr << "rxopt: cell " << row.signal_kind << ' ' << row.k_or_coeffs << ' ' << row.model << ": "
                << row.status << '\n';
      status = kExitCellFailure;
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimism of regression models: Monte-Carlo estimates, asymptotic formulas and resampling"};
  app.require_subcommand(1);

  Flags flags;
  const std::pair<const char*, rxopt::tools::Mode> commands[] = {
      {"simulate", rxopt::tools::Mode::Simulate},
      {"theory", rxopt::tools::Mode::Theory},
      {"compare", rxopt::tools::Mode::Compare},
      {"realdata", rxopt::tools::Mode::RealData},
  };
  const char* help[] = {
      "Monte-Carlo optimism over the configured grid",
      "Asymptotic optimism for every grid cell",
      "Monte-Carlo and asymptotic optimism side by side",
      "Hold-out or k-fold optimism on a CSV dataset",
  };
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < 4; ++i) {
    subs.push_back(app.add_subcommand(commands[i].first, help[i]));
    add_flags(subs.back(), flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) return run(commands[i].second, flags);
  }
  return kExitConfigError;
}
