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

#include "rxopt/models.hpp"

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

void require_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    fail(ErrorKind::InvalidArgument, "lambda must be finite and non-negative");
  }
}

struct LinearSolve {
  Vector coef;
  bool rank_deficient = false;
};

// Minimizes ||y - F b||^2 + penalty ||b||^2.
LinearSolve least_squares(const Matrix& f, const Vector& y, double penalty) {
  Matrix gram = f.transpose() * f;
  gram.diagonal().array() += penalty;
  const Vector rhs = f.transpose() * y;
  try {
    return {solve_spd(gram, rhs), false};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
  }
  if (penalty == 0.0) return {pseudo_inverse(f) * y, true};
  return {pseudo_inverse(gram) * rhs, true};
}

FittedModel make_linear(ModelSpec spec, const Dataset& data, LinearFeatures features, LinearSolve solve) {
  FittedModel model;
  model.spec = std::move(spec);
  model.input_dim = data.dimension();
  model.payload = LinearFit{features, std::move(solve.coef)};
  model.rank_deficient = solve.rank_deficient;
  return model;
}

}  // namespace

void validate_model_spec(const ModelSpec& spec) {
  std::visit(Overloaded{
                 [](const Ols&) {},
                 [](const Ridge& m) { require_lambda(m.lambda); },
                 [](const Bended&) {},
                 [](const LowRank& m) {
                   if (m.rank < 1) fail(ErrorKind::InvalidArgument, "rank must be at least 1");
                 },
                 [](const Krr& m) { require_lambda(m.lambda); },
                 [](const Mlp& m) {
                   for (auto w : m.widths) {
                     if (w < 1) fail(ErrorKind::InvalidArgument, "hidden widths must be at least 1");
                   }
                   if (m.epochs < 1) fail(ErrorKind::InvalidArgument, "epochs must be at least 1");
                 },
                 [](const NtkLayerwise& m) {
                   require_lambda(m.lambda);
                   if (m.width < 1) fail(ErrorKind::InvalidArgument, "width must be at least 1");
                   if (m.epochs < 1) fail(ErrorKind::InvalidArgument, "epochs must be at least 1");
                 },
                 [](const ConstantMean&) {},
             },
             spec);
}

bool is_iterative(const ModelSpec& spec) {
  return std::holds_alternative<Mlp>(spec) || std::holds_alternative<NtkLayerwise>(spec);
}

Eigen::Index min_training_rows(const ModelSpec& spec, Eigen::Index d) {
  return std::visit(Overloaded{
                        [d](const Ols& m) { return d + (m.intercept ? 1 : 0); },
                        [d](const Ridge& m) { return d + (m.intercept ? 1 : 0); },
                        [](const Bended&) { return Eigen::Index{2}; },
                        [d](const LowRank&) { return d; },
                        [](const auto&) { return Eigen::Index{1}; },
                    },
                    spec);
}

Matrix linear_features(LinearFeatures kind, const Matrix& x) {
  switch (kind) {
    case LinearFeatures::Raw:
      return x;
    case LinearFeatures::WithIntercept:
      return augment_intercept(x);
    case LinearFeatures::Bended: {
      Matrix f(x.rows(), 2);
      f.col(0).setOnes();
      f.col(1) = x.col(0).cwiseMax(0.0);
      return f;
    }
    case LinearFeatures::Constant:
      return Matrix::Ones(x.rows(), 1);
  }
  return x;
}

FittedModel fit_ols(const Dataset& data, bool intercept) {
  data.validate();
  const auto kind = intercept ? LinearFeatures::WithIntercept : LinearFeatures::Raw;
  return make_linear(Ols{intercept}, data, kind,
                     least_squares(linear_features(kind, data.x), data.y, 0.0));
}

FittedModel fit_ridge(const Dataset& data, double lambda, bool intercept) {
  require_lambda(lambda);
  data.validate();
  const auto kind = intercept ? LinearFeatures::WithIntercept : LinearFeatures::Raw;
  const double penalty = static_cast<double>(data.size()) * lambda;
  return make_linear(Ridge{lambda, intercept}, data, kind,
                     least_squares(linear_features(kind, data.x), data.y, penalty));
}

FittedModel fit_bended(const Dataset& data) {
  data.validate();
  if (data.dimension() != 1) fail(ErrorKind::DimensionMismatch, "bended model needs 1-D inputs");
  if ((data.x.col(0).array() <= 0.0).all()) {
    Vector coef(2);
    coef << data.y.mean(), 0.0;
    auto model = make_linear(Bended{}, data, LinearFeatures::Bended, {coef, false});
    model.degenerate = true;
    return model;
  }
  return make_linear(Bended{}, data, LinearFeatures::Bended,
                     least_squares(linear_features(LinearFeatures::Bended, data.x), data.y, 0.0));
}

FittedModel fit_low_rank(const Dataset& data, Eigen::Index k) {
  data.validate();
  if (k < 1 || k > data.dimension()) {
    fail(ErrorKind::RankExceedsDimension, "rank " + std::to_string(k) + " outside [1, " +
                                              std::to_string(data.dimension()) + "]");
  }
  const double n = static_cast<double>(data.size());
  const Matrix sigma = data.x.transpose() * data.x / n;
  const Vector eta = data.x.transpose() * data.y / n;
  const SvdResult s = svd(sigma);
  const double cutoff = s.singular_values(0) * kPseudoInverseCutoff;
  Vector coef = Vector::Zero(data.dimension());
  bool deficient = false;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double si = s.singular_values(i);
    if (si <= cutoff) {
      deficient = true;
      continue;
    }
    const Vector v = s.vt.row(i).transpose();
    coef += v * (v.dot(eta) / si);
  }
  return make_linear(LowRank{k}, data, LinearFeatures::Raw, {coef, deficient});
}

FittedModel fit_constant_mean(const Dataset& data) {
  data.validate();
  Vector coef(1);
  coef << data.y.mean();
  return make_linear(ConstantMean{}, data, LinearFeatures::Constant, {coef, false});
}

FittedModel fit_krr(const Dataset& data, const KernelSpec& kernel, double lambda) {
  require_lambda(lambda);
  data.validate();
  const Matrix gram = kernel_matrix(kernel, data.x, data.x);
  const auto n = data.size();
  const double scale = gram.trace() / static_cast<double>(n);

  Vector alpha;
  double jitter = 0.0;
  bool solved = false;
  for (;;) {
    Matrix a = gram;
    a.diagonal().array() += lambda + jitter;
    try {
      alpha = solve_spd(a, data.y);
      solved = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
    }
    if (solved) break;
    jitter = jitter == 0.0 ? 1e-12 * scale : jitter * 10.0;
    if (!(jitter <= 1e-6 * scale * (1.0 + 1e-9))) {
      fail(ErrorKind::SingularGram, "Gram matrix is not positive definite after jitter");
    }
  }
  if (lambda == 0.0 && jitter > 0.0) {
    const double residual = (gram * alpha - data.y).norm();
    if (residual > 1e-6 * data.y.norm()) {
      fail(ErrorKind::SingularGram, "Gram matrix is rank deficient and cannot interpolate");
    }
  }

  FittedModel model;
  model.spec = Krr{kernel, lambda};
  model.input_dim = data.dimension();
  model.payload = KrrFit{kernel, data.x, std::move(alpha), jitter};
  return model;
}

FittedModel fit(const ModelSpec& spec, const Dataset& data, SeedStream& rng) {
  validate_model_spec(spec);
  return std::visit(Overloaded{
                        [&](const Ols& m) { return fit_ols(data, m.intercept); },
                        [&](const Ridge& m) { return fit_ridge(data, m.lambda, m.intercept); },
                        [&](const Bended&) { return fit_bended(data); },
                        [&](const LowRank& m) { return fit_low_rank(data, m.rank); },
                        [&](const Krr& m) { return fit_krr(data, m.kernel, m.lambda); },
                        [&](const Mlp& m) { return fit_mlp(data, m, rng); },
                        [&](const NtkLayerwise& m) { return fit_ntk_layerwise(data, m, rng); },
                        [&](const ConstantMean&) { return fit_constant_mean(data); },
                    },
                    spec);
}

Vector predict(const FittedModel& model, const Matrix& x) {
  if (x.cols() != model.input_dim) {
    fail(ErrorKind::DimensionMismatch, "model was fitted on dimension " +
                                           std::to_string(model.input_dim) + ", got " +
                                           std::to_string(x.cols()));
  }
  return std::visit(Overloaded{
                        [&](const LinearFit& p) -> Vector { return linear_features(p.features, x) * p.coef; },
                        [&](const KrrFit& p) -> Vector { return kernel_matrix(p.kernel, x, p.train_x) * p.alpha; },
                        [&](const MlpFit& p) -> Vector { return mlp_forward(p.params, x); },
                        [&](const NtkFit& p) -> Vector { return ntk_layerwise_forward(p.w, p.a, x); },
                    },
                    model.payload);
}

}  // namespace rxopt
