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
#include <string>
#include <variant>
#include <vector>

#include "rxopt/numcore/linalg.hpp"
#include "rxopt/numcore/quadrature.hpp"
#include "rxopt/numcore/random.hpp"

namespace rxopt {

/// f_k(x) = ((0.5 - k) / 0.5) max(0, x) for k < 0.5, ((k - 0.5) / 0.5) (-x) otherwise.
struct PiecewiseK {
  double k = 0.0;
};

/// sum_i coeffs[i] x^i
struct Polynomial {
  std::vector<double> coeffs;
};

/// exp(-a (x - b)^2)
struct ExpBump {
  double a = 0.0;
  double b = 0.0;
};

/// x^T beta on d-dimensional inputs.
struct LinearMap {
  Vector beta;
};

/// Ground-truth mean function plus additive Gaussian noise variance.
class SignalSpec {
 public:
  using Variant = std::variant<PiecewiseK, Polynomial, ExpBump, LinearMap>;

  static SignalSpec piecewise_k(double k, double noise_var);
  static SignalSpec polynomial(std::vector<double> coeffs, double noise_var);
  static SignalSpec exp_bump(double a, double b, double noise_var);
  static SignalSpec linear_map(Vector beta, double noise_var);

  const Variant& variant() const noexcept { return variant_; }
  double noise_var() const noexcept { return noise_var_; }
  SignalSpec with_noise_var(double noise_var) const;

  /// Input dimension the signal is defined on.
  Eigen::Index input_dimension() const;
  bool is_linear() const;
  /// Short tag: "fk", "poly", "exp" or "linear".
  std::string kind() const;

 private:
  SignalSpec(Variant v, double noise_var);

  Variant variant_;
  double noise_var_;
};

/// Inputs are drawn i.i.d. from N(0, covariance). With `intercept` set, the
/// feature vector seen by theory evaluators gets a trailing constant 1, which
/// contributes a degenerate unit block to the second-moment matrix.
class DesignSpec {
 public:
  static DesignSpec standard(Eigen::Index dimension, bool intercept = false);
  static DesignSpec gaussian(Matrix covariance, bool intercept = false);

  Eigen::Index dimension() const noexcept { return covariance_.rows(); }
  const Matrix& covariance() const noexcept { return covariance_; }
  const Matrix& covariance_factor() const noexcept { return factor_; }
  bool intercept() const noexcept { return intercept_; }
  DesignSpec with_intercept(bool intercept) const;

  Eigen::Index feature_dimension() const noexcept { return dimension() + (intercept_ ? 1 : 0); }
  /// Second-moment matrix E[f f^T] of the feature vector f.
  Matrix feature_second_moment() const;

 private:
  DesignSpec(Matrix covariance, bool intercept);

  Matrix covariance_;
  Matrix factor_;  // lower Cholesky factor of covariance_
  bool intercept_;
};

struct Dataset {
  Matrix x;  // n x d raw inputs
  Vector y;
  std::optional<double> noise_var;

  Eigen::Index size() const noexcept { return x.rows(); }
  Eigen::Index dimension() const noexcept { return x.cols(); }
  /// Validates n >= 1 and matching row counts.
  void validate() const;
  Dataset subset(const std::vector<Eigen::Index>& rows) const;
};

/// Appends a constant 1 column.
Matrix augment_intercept(const Matrix& x);
/// Applies the design's feature convention to raw inputs.
Matrix design_features(const DesignSpec& design, const Matrix& x);

double eval_signal(const SignalSpec& spec, const Vector& x);
/// mu evaluated on every row of x.
Vector eval_signal_rows(const SignalSpec& spec, const Matrix& x);

/// Rows i.i.d. from the design law, y_i = mu(x_i) + eps_i. For each row the
/// stream supplies d input normals followed by one noise normal.
Dataset sample_dataset(const SignalSpec& spec, const DesignSpec& design, Eigen::Index n,
                       SeedStream& rng);

struct Moments1d {
  double m1;  // E[Z mu(Z)]
  double m2;  // E[Z^2 mu(Z)^2]
  double m3;  // E[Z^3 mu(Z)]
};

Moments1d moments_1d(const SignalSpec& spec, unsigned order = kDefaultQuadratureOrder);

}  // namespace rxopt
