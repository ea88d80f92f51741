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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rxopt/estimators.hpp"
#include "rxopt/models.hpp"
#include "rxopt/signals.hpp"

namespace rxopt::tools {

enum class Mode { Simulate, Theory, Compare, RealData };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

/// One grid point of the signal axis. `params` holds k for "fk", the
/// coefficients for "poly", (a, b) for "exp" and beta for "linear".
struct SignalEntry {
  std::string kind;
  std::vector<double> params;
};

/// One grid point of the model axis, before dimension-dependent construction.
struct ModelEntry {
  std::string family;  // ols, ols_intercept, ridge, ridge_intercept, bended, lowrank,
                       // krr_linear, krr_ntk, mlp, ntk_layerwise, mean
  std::optional<double> lambda;
  std::optional<Eigen::Index> rank;
};

struct ExperimentConfig {
  std::optional<Mode> mode;
  std::vector<SignalEntry> signals;
  std::vector<double> sigma2;
  std::vector<ModelEntry> models;
  std::vector<double> design_cov_diag;  // empty: identity
  Eigen::Index n_train = 1000;
  Eigen::Index n_test = 1000;
  Eigen::Index num_runs = kDefaultNumRuns;
  Eigen::Index eval_budget = 200000;
  std::optional<std::uint64_t> seed;
  std::string output_path;
  std::string dataset_path;
  std::string target = "y";
  ResamplingPlan plan = HoldOut{};
  int epochs = 300;
  double learning_rate = 0.01;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double momentum = 0.9;
  std::vector<Eigen::Index> widths{50, 50};
  Eigen::Index ntk_width = 50;
};

/// Line grammar: `key = value`; `#` starts a comment; blank lines are
/// ignored. Scalar keys accept comma-separated lists and repeated keys
/// append. Vector-valued keys (coeffs, exp, beta, widths, design_cov_diag)
/// take whitespace-separated numbers, one vector per line.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
/// Checks grid non-emptiness, seed presence and mode-specific fields.
void validate_config(const ExperimentConfig& config);

struct ResultRow {
  std::string mode;
  std::string signal_kind;
  std::string k_or_coeffs;
  std::optional<double> sigma2;
  std::string model;
  std::optional<double> lambda;
  Eigen::Index n_train = 0;
  std::optional<Eigen::Index> num_runs;
  std::optional<double> err_train_mean;
  std::optional<double> err_test_mean;
  std::optional<double> opt_raw;
  std::optional<double> opt_scaled;
  std::optional<double> stderr_;        // same units as opt_scaled when present, raw otherwise
  std::optional<double> theory_value;   // scaled units when sigma2 > 0, raw otherwise
  std::optional<double> theory_stderr;
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::optional<double> opt_per_n;  // realdata: opt_raw / n_train

  bool ok() const { return status == "ok"; }
};

/// Standardizes every feature column to zero mean and unit population
/// variance; constant columns become zero.
Dataset load_dataset_csv(const std::string& path, const std::string& target_column);

SignalSpec make_signal(const SignalEntry& entry, double noise_var);
DesignSpec make_design(const ExperimentConfig& config, Eigen::Index dimension);
/// `kernel_seed` draws the frozen NTK parameters for krr_ntk.
ModelSpec make_model(const ModelEntry& entry, const ExperimentConfig& config, Eigen::Index dimension,
                     std::uint64_t kernel_seed);
std::string model_label(const ModelEntry& entry);

/// Seed of one grid cell, derived from its coordinates only.
std::uint64_t cell_seed(std::uint64_t master_seed, const std::string& cell_key);

/// Runs every cell of the grid in a fixed order. Failures are recorded in
/// the row status and never abort other cells.
std::vector<ResultRow> run_grid(const ExperimentConfig& config, unsigned threads = 1);

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out);
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> read_csv(std::istream& in);

std::string report_summary(const std::vector<ResultRow>& rows);

}  // namespace rxopt::tools
