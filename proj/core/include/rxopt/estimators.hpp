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

#include <optional>
#include <variant>
#include <vector>

#include "rxopt/models.hpp"
#include "rxopt/signals.hpp"

namespace rxopt {

struct OptimismEstimate {
  double err_train_mean = 0.0;
  double err_test_mean = 0.0;
  double opt_raw = 0.0;  // err_test_mean - err_train_mean
  std::optional<double> opt_scaled;
  double stderr_opt = 0.0;
  Eigen::Index n_train = 0;
  Eigen::Index n_test = 0;
  Eigen::Index num_runs = 0;
};

inline constexpr Eigen::Index kDefaultNumRuns = 10000;

struct HoldOut {
  double test_fraction = 0.2;
  Eigen::Index num_runs = kDefaultNumRuns;
  bool bootstrap = true;  // resample the held-out rows with replacement
};

struct KFold {
  Eigen::Index k = 2;
  Eigen::Index num_runs = kDefaultNumRuns;
};

using ResamplingPlan = std::variant<HoldOut, KFold>;

double mse(const FittedModel& model, const Dataset& data);

double scale_optimism(double opt_raw, Eigen::Index n_train, double noise_var);

/// Each run r draws from derive_stream(master_seed, r): training rows, test
/// rows, then model initialization. `threads` does not affect the result.
OptimismEstimate mc_optimism(const SignalSpec& signal, const DesignSpec& design, const ModelSpec& model,
                             Eigen::Index n_train, Eigen::Index n_test, Eigen::Index num_runs,
                             std::uint64_t master_seed, unsigned threads = 1);

struct HoldoutIndices {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;  // bootstrap draw when enabled
};

/// Fisher-Yates permutation of [0, n) driven by rng.
std::vector<Eigen::Index> random_permutation(Eigen::Index n, SeedStream& rng);
Eigen::Index holdout_test_size(Eigen::Index n, double test_fraction);
/// Test rows are the first holdout_test_size entries of a random permutation.
HoldoutIndices holdout_indices(Eigen::Index n, const HoldOut& plan, SeedStream& rng);
/// Random permutation cut into k contiguous folds whose sizes differ by at most one.
std::vector<std::vector<Eigen::Index>> kfold_partition(Eigen::Index n, Eigen::Index k, SeedStream& rng);

/// Scaled optimism is reported only when data.noise_var is set and positive.
OptimismEstimate holdout_optimism(const Dataset& data, const ModelSpec& model, const HoldOut& plan,
                                  std::uint64_t master_seed, unsigned threads = 1);
/// Fold 0 is the test set; each remaining fold trains one model in turn.
/// Fold results are averaged with equal weights within a run.
OptimismEstimate kfold_optimism(const Dataset& data, const ModelSpec& model, const KFold& plan,
                                std::uint64_t master_seed, unsigned threads = 1);
OptimismEstimate resample_optimism(const Dataset& data, const ModelSpec& model, const ResamplingPlan& plan,
                                   std::uint64_t master_seed, unsigned threads = 1);

}  // namespace rxopt
