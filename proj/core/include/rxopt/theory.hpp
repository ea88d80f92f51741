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

#include <functional>
#include <optional>
#include <vector>

#include "rxopt/numcore/linalg.hpp"
#include "rxopt/numcore/random.hpp"
#include "rxopt/signals.hpp"

namespace rxopt {

enum class EvalMethod { Quadrature, InnerMc };

/// Quadrature for one-dimensional signals, inner Monte-Carlo otherwise.
EvalMethod preferred_method(const SignalSpec& signal);

/// Weighted evaluation points (x*, y*, mu(x*)) approximating the joint law of a
/// test point. Shared across evaluators so that algebraic identities between
/// them hold to rounding.
struct EvalSample {
  Matrix x;  // raw inputs, one row per point
  Vector y;
  Vector mu;
  Vector weights;  // sum to one
  EvalMethod method = EvalMethod::InnerMc;

  Eigen::Index size() const noexcept { return x.rows(); }
};

/// `size` i.i.d. draws; weights 1 / size.
EvalSample monte_carlo_sample(const SignalSpec& signal, const DesignSpec& design, Eigen::Index size,
                              SeedStream& rng);
/// Tensor Gauss-Hermite rule over (x, eps); one-dimensional signals only.
EvalSample quadrature_sample(const SignalSpec& signal, const DesignSpec& design,
                             unsigned x_order = kDefaultQuadratureOrder, unsigned noise_order = 3);
EvalSample eval_sample(const SignalSpec& signal, const DesignSpec& design, EvalMethod method,
                       Eigen::Index budget, SeedStream& rng);

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;  // zero for quadrature samples
};

/// Weighted mean of per-point values with its sampling standard error.
Estimate sample_mean(const EvalSample& sample, const Vector& values);

struct PopulationMoments {
  SignalSpec signal;
  DesignSpec design;
  Matrix sigma;  // E[f f^T] over design features f
  Vector eta;    // E[f y]
  EvalMethod method = EvalMethod::Quadrature;
  double eval_error = 0.0;

  Eigen::Index dimension() const noexcept { return sigma.rows(); }
  double noise_var() const noexcept { return signal.noise_var(); }
};

/// Sigma is exact from the design; eta is closed form for linear maps,
/// quadrature for one-dimensional signals, or an inner-MC average over
/// `budget` draws (eval_error = 4 standard errors).
PopulationMoments population_moments(const SignalSpec& signal, const DesignSpec& design,
                                     EvalMethod method, Eigen::Index budget, SeedStream& rng);

struct TheoryValue {
  double raw_optimism = 0.0;
  std::optional<double> scaled_optimism;  // absent when the noise variance is zero
  Eigen::Index n = 0;
  double eval_stderr = 0.0;
  EvalMethod method = EvalMethod::Quadrature;
};

TheoryValue make_theory_value(const Estimate& raw, Eigen::Index n, double noise_var, EvalMethod method);

TheoryValue thm1_optimism(const PopulationMoments& pm, Eigen::Index n, const EvalSample& sample);
TheoryValue thm1_optimism(const PopulationMoments& pm, Eigen::Index n, Eigen::Index budget, SeedStream& rng);

/// E[(mu - f^T Sigma^{-1} eta)^2 f^T Sigma^{-1} f].
Estimate cor2_signal_part(const PopulationMoments& pm, const EvalSample& sample);
Estimate cor2_signal_part(const PopulationMoments& pm, Eigen::Index budget, SeedStream& rng);

double cor4_scaled_1d(double m1, double m2, double m3, double noise_var);
double cor5_quadratic_form(const std::vector<double>& coeffs, double noise_var);
double poly_closed_form(double a0, double a1, double a2, double a3, double noise_var);
double fk_closed_form(double k, double noise_var);
/// Moments by quadrature, then cor4_scaled_1d.
double exp_signal_scaled(double a, double b, double noise_var);

struct ExpAlternativeForm {
  double m1;
  double m2;
  double m3;
  double scaled;
};
/// Alternative closed-form moment expressions for the exponential bump,
/// kept for side-by-side reporting with exp_signal_scaled and never relied on.
ExpAlternativeForm exp_signal_alternative(double a, double b, double noise_var);

/// Upper bound using B = Sigma_k^+ + s_{k+1}^{-1} I. The inflation term is
/// dropped when k equals the dimension or s_{k+1} <= s_1 * 1e-10.
TheoryValue thm2_lowrank_bound(const PopulationMoments& pm, Eigen::Index k, Eigen::Index n,
                               const EvalSample& sample);
TheoryValue thm2_lowrank_bound(const PopulationMoments& pm, Eigen::Index k, Eigen::Index n,
                               Eigen::Index budget, SeedStream& rng);

/// (2/n) E[g^T Sigma_lambda^{-1} g] with g = f y - (f f^T + lambda I) Sigma_lambda^{-1} eta.
TheoryValue thm3_ridge_optimism(const PopulationMoments& pm, double lambda, Eigen::Index n,
                                const EvalSample& sample);
TheoryValue thm3_ridge_optimism(const PopulationMoments& pm, double lambda, Eigen::Index n,
                                Eigen::Index budget, SeedStream& rng);

/// Maps raw inputs (rows) to feature rows.
using FeatureMap = std::function<Matrix(const Matrix&)>;

struct FeatureMoments {
  Matrix sigma;
  Vector eta;
  double eval_error = 0.0;
};

/// Weighted second moments of (features, y).
FeatureMoments feature_moments(const Matrix& features, const Vector& y, const Vector& weights);

/// Kernel form on explicit feature rows evaluated at the sample points.
TheoryValue thm4_kernel_optimism(const FeatureMoments& moments, const Matrix& features,
                                 const EvalSample& sample, double lambda, Eigen::Index n,
                                 double noise_var);
/// Estimates feature moments from `budget` inner-MC draws and evaluates on a
/// second, independent sample of the same size.
TheoryValue thm4_kernel_optimism(const FeatureMap& phi, const SignalSpec& signal, const DesignSpec& design,
                                 double lambda, Eigen::Index n, Eigen::Index budget, SeedStream& rng);

struct Prop1Parts {
  double signal_part = 0.0;
  double noise_part = 0.0;
  double total = 0.0;
  double signal_stderr = 0.0;
  double noise_stderr = 0.0;
  double total_stderr = 0.0;
};

/// Conditional optimism given the training inputs x (raw; design features are
/// applied). Test points are drawn from the design.
Prop1Parts prop1_decomposition(const Matrix& x, const SignalSpec& signal, double noise_var,
                               const DesignSpec& design, Eigen::Index budget, SeedStream& rng);
/// Same decomposition with test points enumerated uniformly over the rows of x.
Prop1Parts prop1_decomposition_rows(const Matrix& x, const SignalSpec& signal, double noise_var,
                                    const DesignSpec& design);

}  // namespace rxopt
