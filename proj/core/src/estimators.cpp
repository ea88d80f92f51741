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

#include "rxopt/estimators.hpp"

#include <cmath>
#include <span>

#include "rxopt/error.hpp"
#include "rxopt/numcore/parallel.hpp"
#include "rxopt/numcore/reduce.hpp"

namespace rxopt {
namespace {

struct RunErrors {
  std::vector<double> train;
  std::vector<double> test;

  explicit RunErrors(Eigen::Index runs)
      : train(static_cast<std::size_t>(runs)), test(static_cast<std::size_t>(runs)) {}
};

OptimismEstimate aggregate(const RunErrors& e, Eigen::Index n_train, Eigen::Index n_test,
                           std::optional<double> noise_var) {
  std::vector<double> diff(e.train.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = e.test[i] - e.train[i];
  OptimismEstimate out;
  out.err_train_mean = mean_stderr(e.train).mean;
  out.err_test_mean = mean_stderr(e.test).mean;
  out.opt_raw = out.err_test_mean - out.err_train_mean;
  out.stderr_opt = mean_stderr(diff).stderr_;
  out.n_train = n_train;
  out.n_test = n_test;
  out.num_runs = static_cast<Eigen::Index>(e.train.size());
  if (noise_var && *noise_var > 0.0) out.opt_scaled = scale_optimism(out.opt_raw, n_train, *noise_var);
  return out;
}

void require_runs(Eigen::Index runs, Eigen::Index minimum) {
  if (runs < minimum) {
    fail(ErrorKind::InvalidArgument, "num_runs must be at least " + std::to_string(minimum));
  }
}

}  // namespace

double mse(const FittedModel& model, const Dataset& data) {
  data.validate();
  return (predict(model, data.x) - data.y).squaredNorm() / static_cast<double>(data.size());
}

double scale_optimism(double opt_raw, Eigen::Index n_train, double noise_var) {
  if (!(noise_var > 0.0)) fail(ErrorKind::ZeroNoiseVariance, "noise variance must be positive");
  return opt_raw * static_cast<double>(n_train) / (2.0 * noise_var);
}

OptimismEstimate mc_optimism(const SignalSpec& signal, const DesignSpec& design, const ModelSpec& model,
                             Eigen::Index n_train, Eigen::Index n_test, Eigen::Index num_runs,
                             std::uint64_t master_seed, unsigned threads) {
  require_runs(num_runs, 2);
  if (n_train < 1 || n_test < 1) fail(ErrorKind::EmptyDataset, "train and test sizes must be positive");
  validate_model_spec(model);
  RunErrors errors(num_runs);
  parallel_for(static_cast<std::size_t>(num_runs), threads, [&](std::size_t r) {
    SeedStream rng = derive_stream(master_seed, r);
    const Dataset train = sample_dataset(signal, design, n_train, rng);
    const Dataset test = sample_dataset(signal, design, n_test, rng);
    const FittedModel fitted = fit(model, train, rng);
    errors.train[r] = mse(fitted, train);
    errors.test[r] = mse(fitted, test);
  });
  return aggregate(errors, n_train, n_test, signal.noise_var());
}

std::vector<Eigen::Index> random_permutation(Eigen::Index n, SeedStream& rng) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

Eigen::Index holdout_test_size(Eigen::Index n, double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    fail(ErrorKind::InvalidArgument, "test fraction must lie in (0, 1)");
  }
  const auto n_test = static_cast<Eigen::Index>(std::llround(test_fraction * static_cast<double>(n)));
  if (n_test < 1) fail(ErrorKind::TestPartitionEmpty, "held-out partition would be empty");
  if (n_test >= n) fail(ErrorKind::InvalidArgument, "training partition would be empty");
  return n_test;
}

HoldoutIndices holdout_indices(Eigen::Index n, const HoldOut& plan, SeedStream& rng) {
  const Eigen::Index n_test = holdout_test_size(n, plan.test_fraction);
  const std::vector<Eigen::Index> perm = random_permutation(n, rng);
  HoldoutIndices out;
  out.test.assign(perm.begin(), perm.begin() + n_test);
  out.train.assign(perm.begin() + n_test, perm.end());
  if (plan.bootstrap) {
    std::vector<Eigen::Index> draw(out.test.size());
    for (auto& idx : draw) idx = out.test[rng.below(out.test.size())];
    out.test = std::move(draw);
  }
  return out;
}

std::vector<std::vector<Eigen::Index>> kfold_partition(Eigen::Index n, Eigen::Index k, SeedStream& rng) {
  if (k < 2) fail(ErrorKind::InvalidArgument, "k-fold needs k >= 2");
  if (k > n) fail(ErrorKind::FoldTooSmall, "k exceeds the number of rows");
  const std::vector<Eigen::Index> perm = random_permutation(n, rng);
  std::vector<std::vector<Eigen::Index>> folds(static_cast<std::size_t>(k));
  auto it = perm.begin();
  for (Eigen::Index f = 0; f < k; ++f) {
    const Eigen::Index size = n / k + (f < n % k ? 1 : 0);
    folds[static_cast<std::size_t>(f)].assign(it, it + size);
    it += size;
  }
  return folds;
}

OptimismEstimate holdout_optimism(const Dataset& data, const ModelSpec& model, const HoldOut& plan,
                                  std::uint64_t master_seed, unsigned threads) {
  data.validate();
  validate_model_spec(model);
  require_runs(plan.num_runs, 1);
  const Eigen::Index n_test = holdout_test_size(data.size(), plan.test_fraction);
  const Eigen::Index n_train = data.size() - n_test;
  RunErrors errors(plan.num_runs);
  parallel_for(static_cast<std::size_t>(plan.num_runs), threads, [&](std::size_t r) {
    SeedStream rng = derive_stream(master_seed, r);
    const HoldoutIndices idx = holdout_indices(data.size(), plan, rng);
    const Dataset train = data.subset(idx.train);
    const FittedModel fitted = fit(model, train, rng);
    errors.train[r] = mse(fitted, train);
    errors.test[r] = mse(fitted, data.subset(idx.test));
  });
  return aggregate(errors, n_train, n_test, data.noise_var);
}

OptimismEstimate kfold_optimism(const Dataset& data, const ModelSpec& model, const KFold& plan,
                                std::uint64_t master_seed, unsigned threads) {
  data.validate();
  validate_model_spec(model);
  require_runs(plan.num_runs, 1);
  const Eigen::Index n = data.size();
  if (plan.k < 2) fail(ErrorKind::InvalidArgument, "k-fold needs k >= 2");
  if (plan.k > n || n / plan.k < min_training_rows(model, data.dimension())) {
    fail(ErrorKind::FoldTooSmall, "smallest fold has " + std::to_string(n / std::max<Eigen::Index>(plan.k, 1)) +
                                      " rows; the model needs " +
                                      std::to_string(min_training_rows(model, data.dimension())));
  }
  RunErrors errors(plan.num_runs);
  parallel_for(static_cast<std::size_t>(plan.num_runs), threads, [&](std::size_t r) {
    SeedStream rng = derive_stream(master_seed, r);
    const auto folds = kfold_partition(n, plan.k, rng);
    const Dataset test = data.subset(folds[0]);
    std::vector<double> train_err;
    std::vector<double> test_err;
    for (std::size_t f = 1; f < folds.size(); ++f) {
      const Dataset train = data.subset(folds[f]);
      const FittedModel fitted = fit(model, train, rng);
      train_err.push_back(mse(fitted, train));
      test_err.push_back(mse(fitted, test));
    }
    errors.train[r] = mean_stderr(train_err).mean;
    errors.test[r] = mean_stderr(test_err).mean;
  });
  return aggregate(errors, n / plan.k, n / plan.k + (n % plan.k ? 1 : 0), data.noise_var);
}

OptimismEstimate resample_optimism(const Dataset& data, const ModelSpec& model, const ResamplingPlan& plan,
                                   std::uint64_t master_seed, unsigned threads) {
  if (const auto* h = std::get_if<HoldOut>(&plan)) return holdout_optimism(data, model, *h, master_seed, threads);
  return kfold_optimism(data, model, std::get<KFold>(plan), master_seed, threads);
}

}  // namespace rxopt
