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

#include "rxopt/signals.hpp"

#include <cmath>

#include "rxopt/error.hpp"

namespace rxopt {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_noise(double noise_var) {
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) {
    fail(ErrorKind::InvalidArgument, "noise variance must be finite and non-negative");
  }
}

double eval_scalar(const SignalSpec::Variant& v, double x) {
  return std::visit(
      Overloaded{
          [x](const PiecewiseK& s) {
            if (s.k < 0.5) return (0.5 - s.k) / 0.5 * std::max(0.0, x);
            return (s.k - 0.5) / 0.5 * (-x);
          },
          [x](const Polynomial& s) {
            double acc = 0.0;
            for (auto it = s.coeffs.rbegin(); it != s.coeffs.rend(); ++it) acc = acc * x + *it;
            return acc;
          },
          [x](const ExpBump& s) { return std::exp(-s.a * (x - s.b) * (x - s.b)); },
          [x](const LinearMap& s) { return s.beta(0) * x; },
      },
      v);
}

}  // namespace

SignalSpec::SignalSpec(Variant v, double noise_var) : variant_(std::move(v)), noise_var_(noise_var) {
  check_noise(noise_var);
}

SignalSpec SignalSpec::piecewise_k(double k, double noise_var) {
  if (!(k >= 0.0 && k <= 1.0)) fail(ErrorKind::InvalidArgument, "k must lie in [0, 1]");
  return SignalSpec(PiecewiseK{k}, noise_var);
}

SignalSpec SignalSpec::polynomial(std::vector<double> coeffs, double noise_var) {
  if (coeffs.empty()) fail(ErrorKind::InvalidArgument, "polynomial needs at least one coefficient");
  return SignalSpec(Polynomial{std::move(coeffs)}, noise_var);
}

SignalSpec SignalSpec::exp_bump(double a, double b, double noise_var) {
  if (!(a >= 0.0)) fail(ErrorKind::InvalidArgument, "exponential bump needs a >= 0");
  return SignalSpec(ExpBump{a, b}, noise_var);
}

SignalSpec SignalSpec::linear_map(Vector beta, double noise_var) {
  if (beta.size() == 0) fail(ErrorKind::InvalidArgument, "linear map needs a non-empty beta");
  return SignalSpec(LinearMap{std::move(beta)}, noise_var);
}

SignalSpec SignalSpec::with_noise_var(double noise_var) const { return SignalSpec(variant_, noise_var); }

Eigen::Index SignalSpec::input_dimension() const {
  if (const auto* lin = std::get_if<LinearMap>(&variant_)) return lin->beta.size();
  return 1;
}

bool SignalSpec::is_linear() const {
  return std::visit(Overloaded{
                        [](const PiecewiseK& s) { return s.k >= 0.5; },
                        [](const Polynomial& s) {
                          for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
                            if (i != 1 && s.coeffs[i] != 0.0) return false;
                          }
                          return true;
                        },
                        [](const ExpBump&) { return false; },
                        [](const LinearMap&) { return true; },
                    },
                    variant_);
}

std::string SignalSpec::kind() const {
  return std::visit(Overloaded{
                        [](const PiecewiseK&) { return std::string("fk"); },
                        [](const Polynomial&) { return std::string("poly"); },
                        [](const ExpBump&) { return std::string("exp"); },
                        [](const LinearMap&) { return std::string("linear"); },
                    },
                    variant_);
}

DesignSpec::DesignSpec(Matrix covariance, bool intercept)
    : covariance_(std::move(covariance)), intercept_(intercept) {
  if (covariance_.rows() < 1 || covariance_.rows() != covariance_.cols()) {
    fail(ErrorKind::InvalidArgument, "design covariance must be square with d >= 1");
  }
  if (!is_symmetric(covariance_)) fail(ErrorKind::InvalidArgument, "design covariance must be symmetric");
  Eigen::LLT<Matrix> llt(covariance_);
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::NotPositiveDefinite, "design covariance must be positive definite");
  }
  factor_ = llt.matrixL();
}

DesignSpec DesignSpec::standard(Eigen::Index dimension, bool intercept) {
  return DesignSpec(Matrix::Identity(dimension, dimension), intercept);
}

DesignSpec DesignSpec::gaussian(Matrix covariance, bool intercept) {
  return DesignSpec(std::move(covariance), intercept);
}

DesignSpec DesignSpec::with_intercept(bool intercept) const { return DesignSpec(covariance_, intercept); }

Matrix DesignSpec::feature_second_moment() const {
  const Eigen::Index p = feature_dimension();
  Matrix m = Matrix::Zero(p, p);
  m.topLeftCorner(dimension(), dimension()) = covariance_;
  if (intercept_) m(p - 1, p - 1) = 1.0;
  return m;
}

void Dataset::validate() const {
  if (x.rows() < 1) fail(ErrorKind::EmptyDataset, "dataset has no rows");
  if (x.rows() != y.size()) {
    fail(ErrorKind::DimensionMismatch, "design rows and response length differ");
  }
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.x.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
    out.y(static_cast<Eigen::Index>(i)) = y(rows[i]);
  }
  out.noise_var = noise_var;
  return out;
}

Matrix augment_intercept(const Matrix& x) {
  Matrix out(x.rows(), x.cols() + 1);
  out.leftCols(x.cols()) = x;
  out.col(x.cols()).setOnes();
  return out;
}

Matrix design_features(const DesignSpec& design, const Matrix& x) {
  return design.intercept() ? augment_intercept(x) : x;
}

double eval_signal(const SignalSpec& spec, const Vector& x) {
  if (x.size() != spec.input_dimension()) {
    fail(ErrorKind::DimensionMismatch, "signal expects dimension " +
                                           std::to_string(spec.input_dimension()) + ", got " +
                                           std::to_string(x.size()));
  }
  if (const auto* lin = std::get_if<LinearMap>(&spec.variant())) return x.dot(lin->beta);
  return eval_scalar(spec.variant(), x(0));
}

Vector eval_signal_rows(const SignalSpec& spec, const Matrix& x) {
  if (x.cols() != spec.input_dimension()) {
    fail(ErrorKind::DimensionMismatch, "signal expects dimension " +
                                           std::to_string(spec.input_dimension()) + ", got " +
                                           std::to_string(x.cols()));
  }
  if (const auto* lin = std::get_if<LinearMap>(&spec.variant())) return x * lin->beta;
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = eval_scalar(spec.variant(), x(i, 0));
  return out;
}

Dataset sample_dataset(const SignalSpec& spec, const DesignSpec& design, Eigen::Index n,
                       SeedStream& rng) {
  if (n < 1) fail(ErrorKind::EmptyDataset, "sample_dataset needs n >= 1");
  const Eigen::Index d = design.dimension();
  if (spec.input_dimension() != d) {
    fail(ErrorKind::DimensionMismatch, "signal and design dimensions differ");
  }
  const double noise_sd = std::sqrt(spec.noise_var());
  const Matrix& factor = design.covariance_factor();
  const bool identity = design.covariance().isIdentity(0.0);

  Dataset out;
  out.x.resize(n, d);
  out.y.resize(n);
  Vector z(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.normal();
    if (identity) {
      out.x.row(i) = z.transpose();
    } else {
      out.x.row(i) = (factor * z).transpose();
    }
    out.y(i) = noise_sd * rng.normal();
  }
  out.y += eval_signal_rows(spec, out.x);
  out.noise_var = spec.noise_var();
  return out;
}

Moments1d moments_1d(const SignalSpec& spec, unsigned order) {
  if (spec.input_dimension() != 1) {
    fail(ErrorKind::UnsupportedCombination, "moments_1d needs a one-dimensional signal");
  }
  const auto mu = [&](double z) { return eval_scalar(spec.variant(), z); };
  return {
      gh_expect([&](double z) { return z * mu(z); }, order),
      gh_expect([&](double z) { return z * z * mu(z) * mu(z); }, order),
      gh_expect([&](double z) { return z * z * z * mu(z); }, order),
  };
}

}  // namespace rxopt
