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

struct LossGrad {
  double loss;
  Vector grad;
};

LossGrad mlp_loss_grad(const MlpParams& params, const Matrix& x, const Vector& y) {
  const std::size_t layers = params.weights.size();
  std::vector<Matrix> pre(layers);
  std::vector<Matrix> act(layers + 1);
  act[0] = x;
  for (std::size_t l = 0; l < layers; ++l) {
    pre[l] = act[l] * params.weights[l].transpose();
    pre[l].rowwise() += params.biases[l].transpose();
    act[l + 1] = (l + 1 < layers) ? Matrix(pre[l].cwiseMax(0.0)) : pre[l];
  }
  const Vector resid = act[layers].col(0) - y;
  const double n = static_cast<double>(y.size());
  const double loss = resid.squaredNorm() / n;

  std::vector<Matrix> gw(layers);
  std::vector<Vector> gb(layers);
  Matrix g = 2.0 * resid / n;
  for (std::size_t l = layers; l-- > 0;) {
    gw[l] = g.transpose() * act[l];
    gb[l] = g.colwise().sum().transpose();
    if (l > 0) {
      g = (g * params.weights[l]).cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  MlpParams grads{std::move(gw), std::move(gb)};
  return {loss, grads.flatten()};
}

}  // namespace

Optimizer::Optimizer(OptimizerSpec spec, Eigen::Index size)
    : spec_(spec), m_(Vector::Zero(size)), v_(Vector::Zero(size)) {
  if (!(spec.learning_rate >= 0.0)) fail(ErrorKind::InvalidArgument, "learning rate must be non-negative");
}

void Optimizer::step(Vector& params, const Vector& grad) {
  ++t_;
  if (spec_.kind == OptimizerKind::Sgd) {
    if (t_ == 1) {
      m_ = grad;
    } else {
      m_ = spec_.momentum * m_ + grad;
    }
    params -= spec_.learning_rate * m_;
    return;
  }
  m_ = spec_.beta1 * m_ + (1.0 - spec_.beta1) * grad;
  v_ = spec_.beta2 * v_ + (1.0 - spec_.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(spec_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(spec_.beta2, static_cast<double>(t_));
  const double step = spec_.learning_rate / c1;
  params.array() -= step * m_.array() / ((v_.array() / c2).sqrt() + spec_.epsilon);
}

Eigen::Index MlpParams::size() const {
  Eigen::Index total = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) total += weights[l].size() + biases[l].size();
  return total;
}

Vector MlpParams::flatten() const {
  Vector flat(size());
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const Matrix& w = weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat(pos++) = w(r, c);
    }
    flat.segment(pos, biases[l].size()) = biases[l];
    pos += biases[l].size();
  }
  return flat;
}

void MlpParams::assign(const Vector& flat) {
  if (flat.size() != size()) fail(ErrorKind::DimensionMismatch, "flat parameter size mismatch");
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Matrix& w = weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat(pos++);
    }
    biases[l] = flat.segment(pos, biases[l].size());
    pos += biases[l].size();
  }
}

MlpParams mlp_init(Eigen::Index input_dim, const std::vector<Eigen::Index>& widths, SeedStream& rng) {
  std::vector<Eigen::Index> sizes{input_dim};
  sizes.insert(sizes.end(), widths.begin(), widths.end());
  sizes.push_back(1);
  MlpParams p;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const Eigen::Index in = sizes[l];
    const Eigen::Index out = sizes[l + 1];
    const double sd = std::sqrt(2.0 / static_cast<double>(in));
    Matrix w(out, in);
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) w(r, c) = sd * rng.normal();
    }
    p.weights.push_back(std::move(w));
    p.biases.push_back(Vector::Zero(out));
  }
  return p;
}

Vector mlp_forward(const MlpParams& params, const Matrix& x) {
  Matrix h = x;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    Matrix z = h * params.weights[l].transpose();
    z.rowwise() += params.biases[l].transpose();
    h = (l + 1 < params.weights.size()) ? Matrix(z.cwiseMax(0.0)) : z;
  }
  return h.col(0);
}

double mlp_loss(const MlpParams& params, const Matrix& x, const Vector& y) {
  return (mlp_forward(params, x) - y).squaredNorm() / static_cast<double>(y.size());
}

Vector mlp_gradient(const MlpParams& params, const Matrix& x, const Vector& y) {
  return mlp_loss_grad(params, x, y).grad;
}

FittedModel fit_mlp(const Dataset& data, const Mlp& spec, SeedStream& rng) {
  data.validate();
  validate_model_spec(spec);
  MlpParams params = mlp_init(data.dimension(), spec.widths, rng);
  Optimizer opt(spec.optimizer, params.size());
  FittedModel model;
  model.loss_trace.reserve(static_cast<std::size_t>(spec.epochs));
  Vector flat = params.flatten();
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    auto [loss, grad] = mlp_loss_grad(params, data.x, data.y);
    if (!std::isfinite(loss)) {
      fail(ErrorKind::DivergedLoss, "training loss is not finite at epoch " + std::to_string(epoch));
    }
    model.loss_trace.push_back(loss);
    opt.step(flat, grad);
    params.assign(flat);
  }
  if (!std::isfinite(mlp_loss(params, data.x, data.y))) {
    fail(ErrorKind::DivergedLoss, "training loss is not finite after the final update");
  }
  model.spec = spec;
  model.input_dim = data.dimension();
  model.payload = MlpFit{std::move(params)};
  return model;
}

}  // namespace rxopt
