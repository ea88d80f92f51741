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

#include <gtest/gtest.h>

#include <cmath>

#include "rxopt/error.hpp"
#include "rxopt/signals.hpp"

namespace rxopt {
namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

TEST(EvalSignal, PiecewiseBranches) {
  EXPECT_EQ(eval_signal(SignalSpec::piecewise_k(0.0, 0.0), scalar(1.0)), 1.0);
  EXPECT_EQ(eval_signal(SignalSpec::piecewise_k(1.0, 0.0), scalar(2.0)), -2.0);
  for (double x : {-3.0, -0.1, 0.0, 0.7, 5.0}) {
    EXPECT_EQ(eval_signal(SignalSpec::piecewise_k(0.5, 0.0), scalar(x)), 0.0);
  }
  EXPECT_DOUBLE_EQ(eval_signal(SignalSpec::piecewise_k(0.25, 0.0), scalar(2.0)), 1.0);
  EXPECT_EQ(eval_signal(SignalSpec::piecewise_k(0.25, 0.0), scalar(-2.0)), 0.0);
}

TEST(EvalSignal, PiecewiseIsContinuousAndVanishesAtZero) {
  for (int i = 0; i <= 10; ++i) {
    const SignalSpec s = SignalSpec::piecewise_k(i / 10.0, 0.0);
    EXPECT_EQ(eval_signal(s, scalar(0.0)), 0.0);
    const double left = eval_signal(s, scalar(-1e-9));
    const double right = eval_signal(s, scalar(1e-9));
    EXPECT_LT(std::abs(left), 1e-8);
    EXPECT_LT(std::abs(right), 1e-8);
  }
}

TEST(EvalSignal, OtherVariants) {
  EXPECT_DOUBLE_EQ(eval_signal(SignalSpec::polynomial({1, 2, 3}, 0.0), scalar(2.0)), 17.0);
  EXPECT_DOUBLE_EQ(eval_signal(SignalSpec::exp_bump(1.0, 1.0, 0.0), scalar(1.0)), 1.0);
  EXPECT_DOUBLE_EQ(eval_signal(SignalSpec::exp_bump(2.0, 0.0, 0.0), scalar(1.0)), std::exp(-2.0));
  Vector beta(3);
  beta << 1, -1, 2;
  Vector x(3);
  x << 3, 4, 5;
  EXPECT_DOUBLE_EQ(eval_signal(SignalSpec::linear_map(beta, 0.0), x), 9.0);
}

TEST(EvalSignal, DimensionMismatch) {
  try {
    eval_signal(SignalSpec::piecewise_k(0.0, 0.0), Vector::Zero(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(SignalSpec, InvariantsAreEnforced) {
  EXPECT_THROW(SignalSpec::piecewise_k(1.5, 0.1), Error);
  EXPECT_THROW(SignalSpec::piecewise_k(0.5, -0.1), Error);
  EXPECT_THROW(SignalSpec::polynomial({}, 0.1), Error);
  EXPECT_THROW(SignalSpec::exp_bump(-1.0, 0.0, 0.1), Error);
  EXPECT_THROW(DesignSpec::gaussian(Matrix::Zero(2, 2)), Error);
  Matrix asym(2, 2);
  asym << 1, 0.5, 0, 1;
  EXPECT_THROW(DesignSpec::gaussian(asym), Error);
}

TEST(SignalSpec, LinearityClassification) {
  EXPECT_FALSE(SignalSpec::piecewise_k(0.2, 0).is_linear());
  EXPECT_TRUE(SignalSpec::piecewise_k(0.5, 0).is_linear());
  EXPECT_TRUE(SignalSpec::polynomial({0, 5}, 0).is_linear());
  EXPECT_FALSE(SignalSpec::polynomial({1, 5}, 0).is_linear());
  EXPECT_EQ(SignalSpec::exp_bump(1, 0, 0).kind(), "exp");
}

TEST(SampleDataset, NoiselessLinearMapIsExact) {
  Vector beta(3);
  beta << 1.0, -2.0, 0.5;
  SeedStream rng(1, 0);
  const Dataset d = sample_dataset(SignalSpec::linear_map(beta, 0.0), DesignSpec::standard(3), 50, rng);
  EXPECT_EQ(d.size(), 50);
  EXPECT_LE((d.y - d.x * beta).cwiseAbs().maxCoeff(), 1e-15);
  ASSERT_TRUE(d.noise_var.has_value());
  EXPECT_EQ(*d.noise_var, 0.0);
}

TEST(SampleDataset, StandardNormalDesignMoments) {
  SeedStream rng(2, 0);
  const Eigen::Index n = 100000;
  const Dataset d = sample_dataset(SignalSpec::piecewise_k(0.5, 1.0), DesignSpec::standard(1), n, rng);
  const double mean = d.x.col(0).mean();
  const double var = (d.x.col(0).array() - mean).square().sum() / static_cast<double>(n - 1);
  EXPECT_LE(std::abs(mean), 4.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(var, 1.0, 0.05);
  // Pure noise response: unit variance as well.
  EXPECT_NEAR(d.y.squaredNorm() / static_cast<double>(n), 1.0, 0.05);
}

TEST(SampleDataset, CorrelatedDesignCovariance) {
  Matrix cov(2, 2);
  cov << 4.0, 1.0, 1.0, 1.0;
  SeedStream rng(3, 0);
  const Eigen::Index n = 100000;
  Vector beta = Vector::Ones(2);
  const Dataset d = sample_dataset(SignalSpec::linear_map(beta, 0.0), DesignSpec::gaussian(cov), n, rng);
  const Matrix emp = d.x.transpose() * d.x / static_cast<double>(n);
  EXPECT_NEAR(emp(0, 0), 4.0, 0.1);
  EXPECT_NEAR(emp(0, 1), 1.0, 0.05);
  EXPECT_NEAR(emp(1, 1), 1.0, 0.03);
}

TEST(SampleDataset, SameStreamSameData) {
  SeedStream a(9, 4);
  SeedStream b(9, 4);
  const SignalSpec s = SignalSpec::exp_bump(1.0, 0.5, 0.2);
  const Dataset da = sample_dataset(s, DesignSpec::standard(1), 64, a);
  const Dataset db = sample_dataset(s, DesignSpec::standard(1), 64, b);
  EXPECT_EQ(da.x, db.x);
  EXPECT_EQ(da.y, db.y);
}

TEST(SampleDataset, RejectsEmptyAndMismatchedRequests) {
  SeedStream rng(1, 0);
  EXPECT_THROW(sample_dataset(SignalSpec::piecewise_k(0, 0), DesignSpec::standard(1), 0, rng), Error);
  EXPECT_THROW(sample_dataset(SignalSpec::piecewise_k(0, 0), DesignSpec::standard(2), 5, rng), Error);
}

TEST(Moments1d, IdentityAndCubic) {
  const Moments1d lin = moments_1d(SignalSpec::polynomial({0, 1}, 0));
  EXPECT_NEAR(lin.m1, 1.0, 1e-12);
  EXPECT_NEAR(lin.m2, 3.0, 1e-12);
  EXPECT_NEAR(lin.m3, 3.0, 1e-12);
  const Moments1d cube = moments_1d(SignalSpec::polynomial({0, 0, 0, 1}, 0));
  EXPECT_NEAR(cube.m1, 3.0, 1e-12);
  EXPECT_NEAR(cube.m2, 105.0, 1e-10);
  EXPECT_NEAR(cube.m3, 15.0, 1e-12);
}

TEST(Moments1d, PiecewiseClosedForm) {
  for (double k : {0.0, 0.1, 0.25, 0.4}) {
    const Moments1d m = moments_1d(SignalSpec::piecewise_k(k, 0));
    const double c = 1.0 - 2.0 * k;
    EXPECT_NEAR(m.m1, c / 2.0, 1e-12) << k;
    EXPECT_NEAR(m.m2, 1.5 * c * c, 1e-12) << k;
    EXPECT_NEAR(m.m3, 1.5 * c, 1e-12) << k;
  }
}

TEST(Moments1d, AgreesWithBruteForceMonteCarlo) {
  const std::vector<SignalSpec> signals{SignalSpec::piecewise_k(0.1, 0), SignalSpec::piecewise_k(0.8, 0),
                                        SignalSpec::polynomial({1, -1, 0.5}, 0),
                                        SignalSpec::exp_bump(1.0, 0.5, 0), SignalSpec::exp_bump(0.2, -1.0, 0)};
  SeedStream rng(77, 0);
  const int n = 1000000;
  for (const auto& s : signals) {
    const Moments1d q = moments_1d(s);
    double sum[3] = {0, 0, 0};
    double sq[3] = {0, 0, 0};
    for (int i = 0; i < n; ++i) {
      const double z = rng.normal();
      const double mu = eval_signal(s, scalar(z));
      const double v[3] = {z * mu, z * z * mu * mu, z * z * z * mu};
      for (int j = 0; j < 3; ++j) {
        sum[j] += v[j];
        sq[j] += v[j] * v[j];
      }
    }
    const double want[3] = {q.m1, q.m2, q.m3};
    for (int j = 0; j < 3; ++j) {
      const double mean = sum[j] / n;
      const double se = std::sqrt((sq[j] / n - mean * mean) / n);
      EXPECT_LE(std::abs(mean - want[j]), 4.0 * se + 1e-12) << s.kind() << " moment " << j + 1;
    }
  }
}

TEST(Moments1d, RejectsMultivariateSignals) {
  EXPECT_THROW(moments_1d(SignalSpec::linear_map(Vector::Ones(2), 0)), Error);
}

TEST(Design, InterceptFeatures) {
  const DesignSpec d = DesignSpec::standard(2, true);
  EXPECT_EQ(d.feature_dimension(), 3);
  const Matrix m = d.feature_second_moment();
  EXPECT_EQ(m, Matrix::Identity(3, 3));
  Matrix x(2, 2);
  x << 1, 2, 3, 4;
  const Matrix f = design_features(d, x);
  EXPECT_EQ(f.cols(), 3);
  EXPECT_EQ(f(1, 2), 1.0);
  EXPECT_EQ(design_features(d.with_intercept(false), x), x);
}

TEST(DatasetTest, SubsetAndValidation) {
  Dataset d;
  d.x = Matrix::Zero(3, 1);
  d.x << 1, 2, 3;
  d.y = Vector::Zero(3);
  d.y << 10, 20, 30;
  const Dataset s = d.subset({2, 0, 2});
  EXPECT_EQ(s.y, (Vector(3) << 30, 10, 30).finished());
  Dataset bad = d;
  bad.y = Vector::Zero(2);
  EXPECT_THROW(bad.validate(), Error);
  EXPECT_THROW(Dataset{}.validate(), Error);
}

}  // namespace
}  // namespace rxopt
