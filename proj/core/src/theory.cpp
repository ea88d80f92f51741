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

#include "rxopt/theory.hpp"

#include <cmath>
#include <span>

#include "rxopt/error.hpp"
#include "rxopt/numcore/quadrature.hpp"
#include "rxopt/numcore/reduce.hpp"

namespace rxopt {
namespace {

constexpr double kQuadratureEvalError = 1e-10;
// Error estimate: difference against a higher-order rule.
constexpr unsigned kCheckQuadratureOrder = 60;
constexpr Eigen::Index kMinInnerBudget = 1000;

void require_noise(double noise_var) {
  if (!(noise_var > 0.0)) fail(ErrorKind::ZeroNoiseVariance, "noise variance must be positive");
}

void require_n(Eigen::Index n) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "sample size n must be at least 1");
}

// A^{-1} B for symmetric positive semidefinite A; pseudo-inverse when singular.
Matrix psd_solve(const Matrix& a, const Matrix& b) {
  try {
    return solve_spd(a, b);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
  }
  return pseudo_inverse(a) * b;
}

Vector psd_solve(const Matrix& a, const Vector& b) { return psd_solve(a, Matrix(b)).col(0); }

void check_sample(const PopulationMoments& pm, const EvalSample& sample) {
  if (sample.size() < 1) fail(ErrorKind::EmptyDataset, "evaluation sample is empty");
  if (sample.x.cols() != pm.design.dimension()) {
    fail(ErrorKind::DimensionMismatch, "evaluation sample and design dimensions differ");
  }
}

Estimate scale(Estimate e, double factor) { return {e.value * factor, e.stderr_ * std::abs(factor)}; }

// Row-wise quadratic forms f_i^T A^{-1} f_i.
Vector quad_forms(const Matrix& a, const Matrix& f) {
  const Matrix z = psd_solve(a, Matrix(f.transpose()));
  return (f.transpose().cwiseProduct(z)).colwise().sum().transpose();
}

// Per-point g^T A^{-1} g with A = sigma + lambda I and
// g = f y - (f f^T + lambda I) A^{-1} eta.
Vector kernel_form_values(const Matrix& f, const Vector& y, const Matrix& sigma, const Vector& eta,
                          double lambda) {
  if (f.cols() != sigma.rows() || eta.size() != sigma.rows() || f.rows() != y.size()) {
    fail(ErrorKind::DimensionMismatch, "feature and moment dimensions differ");
  }
  Matrix a = sigma;
  a.diagonal().array() += lambda;
  const Vector c = psd_solve(a, eta);
  const Vector r = y - f * c;
  Matrix g = f.array().colwise() * r.array();
  g.rowwise() -= lambda * c.transpose();
  return quad_forms(a, g);
}

Estimate mean_of(const Vector& values, const Vector& weights, bool exact) {
  Estimate e;
  e.value = pairwise_dot(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())),
                         std::span<const double>(weights.data(), static_cast<std::size_t>(weights.size())));
  if (!exact) {
    e.stderr_ = mean_stderr(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())))
                    .stderr_;
  }
  return e;
}

}  // namespace

EvalMethod preferred_method(const SignalSpec& signal) {
  return signal.input_dimension() == 1 ? EvalMethod::Quadrature : EvalMethod::InnerMc;
}

EvalSample monte_carlo_sample(const SignalSpec& signal, const DesignSpec& design, Eigen::Index size,
                              SeedStream& rng) {
  Dataset d = sample_dataset(signal, design, size, rng);
  EvalSample s;
  s.mu = eval_signal_rows(signal, d.x);
  s.x = std::move(d.x);
  s.y = std::move(d.y);
  s.weights = Vector::Constant(size, 1.0 / static_cast<double>(size));
  s.method = EvalMethod::InnerMc;
  return s;
}

EvalSample quadrature_sample(const SignalSpec& signal, const DesignSpec& design, unsigned x_order,
                             unsigned noise_order) {
  if (signal.input_dimension() != 1 || design.dimension() != 1) {
    fail(ErrorKind::UnsupportedCombination, "quadrature evaluation needs a one-dimensional signal");
  }
  const QuadratureRule rx = gauss_hermite(x_order);
  const QuadratureRule re = gauss_hermite(signal.noise_var() > 0.0 ? noise_order : 1);
  const double sx = std::sqrt(design.covariance()(0, 0));
  const double se = std::sqrt(signal.noise_var());
  const auto total = static_cast<Eigen::Index>(rx.order) * static_cast<Eigen::Index>(re.order);
  EvalSample s;
  s.x.resize(total, 1);
  s.y.resize(total);
  s.mu.resize(total);
  s.weights.resize(total);
  s.method = EvalMethod::Quadrature;
  Eigen::Index pos = 0;
  Vector point(1);
  for (unsigned i = 0; i < rx.order; ++i) {
    point(0) = sx * rx.nodes[i];
    const double mu = eval_signal(signal, point);
    for (unsigned j = 0; j < re.order; ++j) {
      s.x(pos, 0) = point(0);
      s.mu(pos) = mu;
      s.y(pos) = mu + se * re.nodes[j];
      s.weights(pos) = rx.weights[i] * re.weights[j];
      ++pos;
    }
  }
  return s;
}

EvalSample eval_sample(const SignalSpec& signal, const DesignSpec& design, EvalMethod method,
                       Eigen::Index budget, SeedStream& rng) {
  if (method == EvalMethod::Quadrature) return quadrature_sample(signal, design);
  if (budget < kMinInnerBudget) {
    fail(ErrorKind::InvalidArgument, "inner Monte-Carlo budget must be at least 1000");
  }
  return monte_carlo_sample(signal, design, budget, rng);
}

Estimate sample_mean(const EvalSample& sample, const Vector& values) {
  if (values.size() != sample.size()) fail(ErrorKind::DimensionMismatch, "values and sample differ");
  return mean_of(values, sample.weights, sample.method == EvalMethod::Quadrature);
}

PopulationMoments population_moments(const SignalSpec& signal, const DesignSpec& design,
                                     EvalMethod method, Eigen::Index budget, SeedStream& rng) {
  if (signal.input_dimension() != design.dimension()) {
    fail(ErrorKind::DimensionMismatch, "signal and design dimensions differ");
  }
  const Eigen::Index d = design.dimension();
  PopulationMoments pm{signal, design, design.feature_second_moment(),
                       Vector::Zero(design.feature_dimension()), method, 0.0};

  if (const auto* lin = std::get_if<LinearMap>(&signal.variant())) {
    pm.eta.head(d) = design.covariance() * lin->beta;
    pm.eval_error = method == EvalMethod::Quadrature ? kQuadratureEvalError : 0.0;
    return pm;
  }
  if (method == EvalMethod::Quadrature) {
    if (d != 1) fail(ErrorKind::UnsupportedCombination, "quadrature needs a one-dimensional signal");
    const double sx = std::sqrt(design.covariance()(0, 0));
    Vector point(1);
    const auto mu = [&](double z) {
      point(0) = sx * z;
      return eval_signal(signal, point);
    };
    const auto first = [&](double z) { return sx * z * mu(z); };
    pm.eta(0) = gh_expect(first);
    double gap = std::abs(pm.eta(0) - gh_expect(first, kCheckQuadratureOrder));
    if (design.intercept()) {
      pm.eta(1) = gh_expect(mu);
      gap = std::max(gap, std::abs(pm.eta(1) - gh_expect(mu, kCheckQuadratureOrder)));
    }
    pm.eval_error = std::max(kQuadratureEvalError, gap);
    return pm;
  }

  const EvalSample s = eval_sample(signal, design, method, budget, rng);
  const Matrix f = design_features(design, s.x);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < f.cols(); ++j) {
    const Estimate e = sample_mean(s, f.col(j).cwiseProduct(s.y));
    pm.eta(j) = e.value;
    worst = std::max(worst, e.stderr_);
  }
  pm.eval_error = 4.0 * worst;
  return pm;
}

TheoryValue make_theory_value(const Estimate& raw, Eigen::Index n, double noise_var, EvalMethod method) {
  TheoryValue v;
  v.raw_optimism = raw.value;
  v.n = n;
  v.eval_stderr = raw.stderr_;
  v.method = method;
  if (noise_var > 0.0) v.scaled_optimism = static_cast<double>(n) * raw.value / (2.0 * noise_var);
  return v;
}

TheoryValue thm1_optimism(const PopulationMoments& pm, Eigen::Index n, const EvalSample& sample) {
  require_n(n);
  check_sample(pm, sample);
  const Matrix f = design_features(pm.design, sample.x);
  const Vector c = psd_solve(pm.sigma, pm.eta);
  const Vector r = sample.y - f * c;
  const Vector values = r.cwiseAbs2().cwiseProduct(quad_forms(pm.sigma, f));
  return make_theory_value(scale(sample_mean(sample, values), 2.0 / static_cast<double>(n)), n,
                           pm.noise_var(), sample.method);
}

TheoryValue thm1_optimism(const PopulationMoments& pm, Eigen::Index n, Eigen::Index budget, SeedStream& rng) {
  return thm1_optimism(pm, n, eval_sample(pm.signal, pm.design, pm.method, budget, rng));
}

Estimate cor2_signal_part(const PopulationMoments& pm, const EvalSample& sample) {
  check_sample(pm, sample);
  const Matrix f = design_features(pm.design, sample.x);
  const Vector c = psd_solve(pm.sigma, pm.eta);
  const Vector r = sample.mu - f * c;
  return sample_mean(sample, r.cwiseAbs2().cwiseProduct(quad_forms(pm.sigma, f)));
}

Estimate cor2_signal_part(const PopulationMoments& pm, Eigen::Index budget, SeedStream& rng) {
  return cor2_signal_part(pm, eval_sample(pm.signal, pm.design, pm.method, budget, rng));
}

double cor4_scaled_1d(double m1, double m2, double m3, double noise_var) {
  require_noise(noise_var);
  return (3.0 * m1 * m1 + m2 - 2.0 * m3 * m1) / noise_var + 1.0;
}

double cor5_quadratic_form(const std::vector<double>& coeffs, double noise_var) {
  require_noise(noise_var);
  const auto moment = [](std::size_t p) {
    if (p % 2 == 1) return 0.0;
    double m = 1.0;
    for (std::size_t q = p; q > 1; q -= 2) m *= static_cast<double>(q - 1);
    return m;
  };
  double f = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (i == 1) continue;
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
      if (j == 1) continue;
      const double term = (-2.0 - 4.0 * static_cast<double>(i)) * moment(i + 1) * moment(j + 1) +
                          2.0 * moment(i + j + 2);
      f += term * coeffs[i] * coeffs[j];
    }
  }
  return f / (2.0 * noise_var) + 1.0;
}

double poly_closed_form(double a0, double /*a1*/, double a2, double a3, double noise_var) {
  require_noise(noise_var);
  return (2.0 * a0 * a0 + 30.0 * a2 * a2 + 84.0 * a3 * a3 + 12.0 * a0 * a2) / (2.0 * noise_var) + 1.0;
}

double fk_closed_form(double k, double noise_var) {
  require_noise(noise_var);
  if (!(k >= 0.0 && k <= 1.0)) fail(ErrorKind::InvalidArgument, "k must lie in [0, 1]");
  if (k >= 0.5) return 1.0;
  const double c = 1.0 - 2.0 * k;
  return 1.5 * c * c / (2.0 * noise_var) + 1.0;
}

double exp_signal_scaled(double a, double b, double noise_var) {
  require_noise(noise_var);
  const Moments1d m = moments_1d(SignalSpec::exp_bump(a, b, noise_var));
  return cor4_scaled_1d(m.m1, m.m2, m.m3, noise_var);
}

ExpAlternativeForm exp_signal_alternative(double a, double b, double noise_var) {
  require_noise(noise_var);
  const double r2 = std::sqrt(2.0);
  const double b2 = b * b;
  ExpAlternativeForm out;
  out.m1 = a * b * std::exp(-a * b2 / (a + 1.0)) / (r2 * std::pow(1.0 + a, 1.5));
  out.m2 = (1.0 + 2.0 * a + 8.0 * a * a * b2) * std::exp(-2.0 * a * b2 / (2.0 * a + 1.0)) /
           (2.0 * r2 * std::pow(1.0 + 2.0 * a, 2.5));
  out.m3 = a * b * (3.0 + 3.0 * a + 2.0 * a * a * b2) * std::exp(-a * b2 / (a + 1.0)) /
           (2.0 * r2 * std::pow(1.0 + a, 3.5));
  const double t1 = 3.0 * a * a * b2 / std::pow(1.0 + a, 3.0) * std::exp(-2.0 * a * b2 / (1.0 + a));
  const double t2 = (1.0 + 2.0 * a * a + 8.0 * a * a * b2) / (r2 * std::pow(1.0 + 2.0 * a, 2.5)) *
                    std::exp(-2.0 * a * b2 / (1.0 + 2.0 * a));
  const double t3 = a * a * b2 * (2.0 + a * (3.0 + 2.0 * a * b2)) / std::pow(1.0 + a, 5.0) *
                    std::exp(-2.0 * a * b2 / (1.0 + a));
  out.scaled = (t1 + t2 + t3) / (2.0 * noise_var) + 1.0;
  return out;
}

TheoryValue thm2_lowrank_bound(const PopulationMoments& pm, Eigen::Index k, Eigen::Index n,
                               const EvalSample& sample) {
  require_n(n);
  check_sample(pm, sample);
  const Eigen::Index p = pm.dimension();
  if (k < 1 || k > p) {
    fail(ErrorKind::RankExceedsDimension,
         "rank " + std::to_string(k) + " outside [1, " + std::to_string(p) + "]");
  }
  const SvdResult s = svd(pm.sigma);
  const double cutoff = s.singular_values(0) * kPseudoInverseCutoff;
  Matrix b = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double si = s.singular_values(i);
    if (si <= cutoff) continue;
    const Vector v = s.vt.row(i).transpose();
    b += v * v.transpose() / si;
  }
  if (k < p && s.singular_values(k) > cutoff) b.diagonal().array() += 1.0 / s.singular_values(k);

  const Matrix f = design_features(pm.design, sample.x);
  const Vector r = sample.y - f * (b * pm.eta);
  const Vector q = (f * b).cwiseProduct(f).rowwise().sum();
  const Vector values = r.cwiseAbs2().cwiseProduct(q);
  return make_theory_value(scale(sample_mean(sample, values), 2.0 / static_cast<double>(n)), n,
                           pm.noise_var(), sample.method);
}

TheoryValue thm2_lowrank_bound(const PopulationMoments& pm, Eigen::Index k, Eigen::Index n,
                               Eigen::Index budget, SeedStream& rng) {
  return thm2_lowrank_bound(pm, k, n, eval_sample(pm.signal, pm.design, pm.method, budget, rng));
}

TheoryValue thm3_ridge_optimism(const PopulationMoments& pm, double lambda, Eigen::Index n,
                                const EvalSample& sample) {
  check_sample(pm, sample);
  return thm4_kernel_optimism(FeatureMoments{pm.sigma, pm.eta, pm.eval_error},
                              design_features(pm.design, sample.x), sample, lambda, n, pm.noise_var());
}

TheoryValue thm3_ridge_optimism(const PopulationMoments& pm, double lambda, Eigen::Index n,
                                Eigen::Index budget, SeedStream& rng) {
  return thm3_ridge_optimism(pm, lambda, n, eval_sample(pm.signal, pm.design, pm.method, budget, rng));
}

FeatureMoments feature_moments(const Matrix& features, const Vector& y, const Vector& weights) {
  if (features.rows() != y.size() || y.size() != weights.size() || y.size() == 0) {
    fail(ErrorKind::DimensionMismatch, "feature moment inputs differ in length");
  }
  FeatureMoments m;
  m.sigma = features.transpose() * weights.asDiagonal() * features;
  m.sigma = 0.5 * (m.sigma + m.sigma.transpose());
  m.eta = features.transpose() * weights.cwiseProduct(y);
  return m;
}

TheoryValue thm4_kernel_optimism(const FeatureMoments& moments, const Matrix& features,
                                 const EvalSample& sample, double lambda, Eigen::Index n,
                                 double noise_var) {
  require_n(n);
  if (!(lambda >= 0.0)) fail(ErrorKind::InvalidArgument, "lambda must be non-negative");
  if (features.rows() != sample.size()) {
    fail(ErrorKind::DimensionMismatch, "feature rows and sample size differ");
  }
  const Vector values = kernel_form_values(features, sample.y, moments.sigma, moments.eta, lambda);
  return make_theory_value(scale(sample_mean(sample, values), 2.0 / static_cast<double>(n)), n, noise_var,
                           sample.method);
}

TheoryValue thm4_kernel_optimism(const FeatureMap& phi, const SignalSpec& signal, const DesignSpec& design,
                                 double lambda, Eigen::Index n, Eigen::Index budget, SeedStream& rng) {
  if (budget < kMinInnerBudget) {
    fail(ErrorKind::InvalidArgument, "inner Monte-Carlo budget must be at least 1000");
  }
  const Eigen::Index q = phi(Matrix::Zero(1, design.dimension())).cols();
  if (q * q > budget) {
    fail(ErrorKind::FeatureDimensionOverflow, "feature dimension " + std::to_string(q) +
                                                  " squared exceeds budget " + std::to_string(budget));
  }
  const EvalSample fit_sample = monte_carlo_sample(signal, design, budget, rng);
  const Matrix fit_features = phi(fit_sample.x);
  FeatureMoments moments = feature_moments(fit_features, fit_sample.y, fit_sample.weights);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < q; ++j) {
    worst = std::max(worst, sample_mean(fit_sample, fit_features.col(j).cwiseProduct(fit_sample.y)).stderr_);
  }
  moments.eval_error = 4.0 * worst;
  const EvalSample eval = monte_carlo_sample(signal, design, budget, rng);
  return thm4_kernel_optimism(moments, phi(eval.x), eval, lambda, n, signal.noise_var());
}

namespace {

struct Prop1Setup {
  Matrix g;        // F^T F
  Vector beta_mu;  // (F^T F)^{-1} F^T mu(X)
  double in_sample = 0.0;
  double tr_h = 0.0;
  double tr_hh = 0.0;
  double n = 0.0;
};

Prop1Setup prop1_setup(const Matrix& f, const Vector& mu) {
  Prop1Setup s;
  s.n = static_cast<double>(f.rows());
  s.g = f.transpose() * f;
  Matrix g_inv_ft;
  try {
    g_inv_ft = solve_spd(s.g, Matrix(f.transpose()));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
    fail(ErrorKind::RankDeficientDesign, "training design does not have full column rank");
  }
  s.beta_mu = g_inv_ft * mu;
  s.in_sample = (mu - f * s.beta_mu).squaredNorm() / s.n;
  const Matrix h = f * g_inv_ft;
  s.tr_h = h.trace();
  s.tr_hh = h.squaredNorm();
  return s;
}

Prop1Parts prop1_from_points(const Prop1Setup& s, const Matrix& f_star, const Vector& mu_star,
                             const Vector& weights, bool exact, double noise_var) {
  const Vector sig = (mu_star - f_star * s.beta_mu).cwiseAbs2();
  const Vector q = quad_forms(s.g, f_star);
  const Estimate es = mean_of(sig, weights, exact);
  const Estimate eq = mean_of(q, weights, exact);
  const Estimate et = mean_of(sig + noise_var * q, weights, exact);
  const double noise_offset = noise_var * (-s.tr_hh / s.n + 2.0 * s.tr_h / s.n);
  Prop1Parts out;
  out.signal_part = es.value - s.in_sample;
  out.noise_part = noise_var * eq.value + noise_offset;
  out.total = et.value - s.in_sample + noise_offset;
  out.signal_stderr = es.stderr_;
  out.noise_stderr = noise_var * eq.stderr_;
  out.total_stderr = et.stderr_;
  return out;
}

}  // namespace

Prop1Parts prop1_decomposition(const Matrix& x, const SignalSpec& signal, double noise_var,
                               const DesignSpec& design, Eigen::Index budget, SeedStream& rng) {
  if (!(noise_var >= 0.0)) fail(ErrorKind::InvalidArgument, "noise variance must be non-negative");
  const Prop1Setup s = prop1_setup(design_features(design, x), eval_signal_rows(signal, x));
  const EvalSample pts = eval_sample(signal.with_noise_var(0.0), design, EvalMethod::InnerMc, budget, rng);
  return prop1_from_points(s, design_features(design, pts.x), pts.mu, pts.weights, false, noise_var);
}

Prop1Parts prop1_decomposition_rows(const Matrix& x, const SignalSpec& signal, double noise_var,
                                    const DesignSpec& design) {
  if (!(noise_var >= 0.0)) fail(ErrorKind::InvalidArgument, "noise variance must be non-negative");
  const Matrix f = design_features(design, x);
  const Vector mu = eval_signal_rows(signal, x);
  const Prop1Setup s = prop1_setup(f, mu);
  const Vector weights = Vector::Constant(x.rows(), 1.0 / static_cast<double>(x.rows()));
  return prop1_from_points(s, f, mu, weights, true, noise_var);
}

}  // namespace rxopt
