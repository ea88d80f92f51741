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

#include <cmath>

#include "rxopt/error.hpp"
#include "rxopt/models.hpp"

namespace rxopt {
namespace {

void check_ntk_input(const NtkKernel& kernel, Eigen::Index cols) {
  if (cols != kernel.w.rows()) {
    fail(ErrorKind::DimensionMismatch, "NTK kernel expects dimension " +
                                           std::to_string(kernel.w.rows()) + ", got " +
                                           std::to_string(cols));
  }
}

Matrix active(const Matrix& x, const Matrix& w) { return ((x * w).array() > 0.0).cast<double>().matrix(); }

Vector flatten_layerwise(const Matrix& w, const Vector& a) {
  Vector flat(w.size() + a.size());
  Eigen::Index pos = 0;
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) flat(pos++) = w(r, c);
  }
  flat.tail(a.size()) = a;
  return flat;
}

void unflatten_layerwise(const Vector& flat, Matrix& w, Vector& a) {
  Eigen::Index pos = 0;
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat(pos++);
  }
  a = flat.tail(a.size());
}

}  // namespace

NtkKernel random_ntk_kernel(Eigen::Index d, Eigen::Index m, SeedStream& rng) {
  if (d < 1 || m < 1) fail(ErrorKind::InvalidArgument, "NTK kernel needs d >= 1 and m >= 1");
  NtkKernel k{Matrix(d, m), Vector(m)};
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) k.w(r, c) = rng.normal();
  }
  for (Eigen::Index j = 0; j < m; ++j) k.a(j) = rng.normal();
  return k;
}

double ntk_kernel_eval(const NtkKernel& kernel, const Vector& x, const Vector& x2) {
  check_ntk_input(kernel, x.size());
  check_ntk_input(kernel, x2.size());
  const Vector p1 = kernel.w.transpose() * x;
  const Vector p2 = kernel.w.transpose() * x2;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < kernel.a.size(); ++j) {
    if (p1(j) > 0.0 && p2(j) > 0.0) acc += kernel.a(j) * kernel.a(j);
  }
  return acc / static_cast<double>(kernel.a.size()) * x.dot(x2);
}

Matrix kernel_matrix(const KernelSpec& kernel, const Matrix& x1, const Matrix& x2) {
  if (x1.cols() != x2.cols()) fail(ErrorKind::DimensionMismatch, "kernel inputs differ in dimension");
  if (std::holds_alternative<LinearKernel>(kernel)) return x1 * x2.transpose();
  const auto& ntk = std::get<NtkKernel>(kernel);
  check_ntk_input(ntk, x1.cols());
  const Matrix a1 = active(x1, ntk.w);
  const Matrix a2 = active(x2, ntk.w);
  const double m = static_cast<double>(ntk.a.size());
  const Matrix gate = a1 * ntk.a.cwiseAbs2().asDiagonal() * a2.transpose() / m;
  return gate.cwiseProduct(x1 * x2.transpose());
}

Matrix ntk_features(const NtkKernel& kernel, const Matrix& x) {
  check_ntk_input(kernel, x.cols());
  const Eigen::Index m = kernel.a.size();
  const Eigen::Index d = x.cols();
  const Matrix gates = active(x, kernel.w);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  Matrix phi(x.rows(), m * d);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Vector coef = gates.col(j) * (scale * kernel.a(j));
    phi.middleCols(j * d, d) = coef.asDiagonal() * x;
  }
  return phi;
}

Vector ntk_layerwise_forward(const Matrix& w, const Vector& a, const Matrix& x) {
  if (x.cols() != w.rows()) fail(ErrorKind::DimensionMismatch, "layerwise input dimension mismatch");
  return (x * w).cwiseMax(0.0) * a;
}

double ntk_layerwise_loss(const Matrix& w, const Vector& a, const Matrix& x, const Vector& y,
                          double lambda) {
  const Matrix z1 = (x * w).cwiseMax(0.0);
  return (z1 * a - y).squaredNorm() / static_cast<double>(y.size()) + lambda * z1.squaredNorm();
}

Vector ntk_layerwise_gradient(const Matrix& w, const Vector& a, const Matrix& x, const Vector& y,
                              double lambda) {
  const Matrix pre = x * w;
  const Matrix z1 = pre.cwiseMax(0.0);
  const Vector r = 2.0 * (z1 * a - y) / static_cast<double>(y.size());
  const Vector ga = z1.transpose() * r;
  Matrix gz = r * a.transpose() + 2.0 * lambda * z1;
  gz.array() *= (pre.array() > 0.0).cast<double>();
  const Matrix gw = x.transpose() * gz;
  return flatten_layerwise(gw, ga);
}

FittedModel fit_ntk_layerwise(const Dataset& data, const NtkLayerwise& spec, SeedStream& rng) {
  data.validate();
  validate_model_spec(spec);
  NtkKernel init = random_ntk_kernel(data.dimension(), spec.width, rng);
  Matrix w = std::move(init.w);
  Vector a = std::move(init.a);
  Optimizer opt(spec.optimizer, w.size() + a.size());
  FittedModel model;
  model.loss_trace.reserve(static_cast<std::size_t>(spec.epochs));
  Vector flat = flatten_layerwise(w, a);
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    const double loss = ntk_layerwise_loss(w, a, data.x, data.y, spec.lambda);
    if (!std::isfinite(loss)) {
      fail(ErrorKind::DivergedLoss, "training loss is not finite at epoch " + std::to_string(epoch));
    }
    model.loss_trace.push_back(loss);
    opt.step(flat, ntk_layerwise_gradient(w, a, data.x, data.y, spec.lambda));
    unflatten_layerwise(flat, w, a);
  }
  if (!std::isfinite(ntk_layerwise_loss(w, a, data.x, data.y, spec.lambda))) {
    fail(ErrorKind::DivergedLoss, "training loss is not finite after the final update");
  }
  model.spec = spec;
  model.input_dim = data.dimension();
  model.payload = NtkFit{std::move(w), std::move(a)};
  return model;
}

}  // namespace rxopt
