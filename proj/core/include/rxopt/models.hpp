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

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "rxopt/numcore/linalg.hpp"
#include "rxopt/numcore/random.hpp"
#include "rxopt/signals.hpp"

namespace rxopt {

// ---- kernels ---------------------------------------------------------------

struct LinearKernel {};

/// Tangent kernel of g(x) = m^{-1/2} sum_j a_j relu(w_j^T x) with respect to W,
/// frozen at (w, a). `w` is d x m.
struct NtkKernel {
  Matrix w;
  Vector a;
};

using KernelSpec = std::variant<LinearKernel, NtkKernel>;

/// Draws W (d x m) and a (m) i.i.d. N(0, 1), W in row-major order first.
NtkKernel random_ntk_kernel(Eigen::Index d, Eigen::Index m, SeedStream& rng);

double ntk_kernel_eval(const NtkKernel& kernel, const Vector& x, const Vector& x2);
/// K(x1_i, x2_j) for every pair of rows.
Matrix kernel_matrix(const KernelSpec& kernel, const Matrix& x1, const Matrix& x2);
/// Explicit feature map phi with phi(x)^T phi(x') = Theta(x, x'); n x (m d),
/// block j holds m^{-1/2} a_j 1[w_j^T x > 0] x.
Matrix ntk_features(const NtkKernel& kernel, const Matrix& x);

// ---- optimizers ------------------------------------------------------------

enum class OptimizerKind { Adam, Sgd };

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 0.01;
  double momentum = 0.9;  // Sgd only
  double beta1 = 0.9;     // Adam only
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Stateful first-order optimizer over a flat parameter vector, following the
/// update rules of torch.optim.Adam and torch.optim.SGD (dampening 0).
class Optimizer {
 public:
  Optimizer(OptimizerSpec spec, Eigen::Index size);
  void step(Vector& params, const Vector& grad);

 private:
  OptimizerSpec spec_;
  Vector m_;
  Vector v_;
  std::int64_t t_ = 0;
};

// ---- model specifications --------------------------------------------------

struct Ols {
  bool intercept = false;
};
/// Penalty n * lambda on every coefficient, the intercept included.
struct Ridge {
  double lambda = 0.0;
  bool intercept = false;
};
/// alpha + beta * max(x, 0) on one-dimensional inputs.
struct Bended {};
struct LowRank {
  Eigen::Index rank = 1;
};
struct Krr {
  KernelSpec kernel;
  double lambda = 0.0;
};
struct Mlp {
  std::vector<Eigen::Index> widths{50, 50};
  int epochs = 300;
  OptimizerSpec optimizer;
};
struct NtkLayerwise {
  Eigen::Index width = 50;
  double lambda = 0.0;
  int epochs = 300;
  OptimizerSpec optimizer;
};
/// Predicts the training mean everywhere.
struct ConstantMean {};

using ModelSpec = std::variant<Ols, Ridge, Bended, LowRank, Krr, Mlp, NtkLayerwise, ConstantMean>;

/// Throws InvalidArgument when a field violates its range.
void validate_model_spec(const ModelSpec& spec);
bool is_iterative(const ModelSpec& spec);
/// Smallest training set the model accepts on d-dimensional inputs.
Eigen::Index min_training_rows(const ModelSpec& spec, Eigen::Index d);

// ---- fitted models ---------------------------------------------------------

enum class LinearFeatures { Raw, WithIntercept, Bended, Constant };

Matrix linear_features(LinearFeatures kind, const Matrix& x);

struct LinearFit {
  LinearFeatures features = LinearFeatures::Raw;
  Vector coef;
};

struct KrrFit {
  KernelSpec kernel;
  Matrix train_x;
  Vector alpha;
  double jitter = 0.0;
};

struct MlpParams {
  std::vector<Matrix> weights;  // layer l maps width[l] -> width[l+1]; shape out x in
  std::vector<Vector> biases;

  Eigen::Index size() const;
  Vector flatten() const;
  void assign(const Vector& flat);
};

struct MlpFit {
  MlpParams params;
};

struct NtkFit {
  Matrix w;  // d x m
  Vector a;
};

struct FittedModel {
  ModelSpec spec;
  Eigen::Index input_dim = 0;
  std::variant<LinearFit, KrrFit, MlpFit, NtkFit> payload;
  std::vector<double> loss_trace;  // one entry per epoch, iterative models only
  bool rank_deficient = false;     // pseudo-inverse fallback was used
  bool degenerate = false;         // bended fit had no positive inputs
};

FittedModel fit_ols(const Dataset& data, bool intercept = false);
FittedModel fit_ridge(const Dataset& data, double lambda, bool intercept = false);
FittedModel fit_bended(const Dataset& data);
FittedModel fit_low_rank(const Dataset& data, Eigen::Index k);
FittedModel fit_krr(const Dataset& data, const KernelSpec& kernel, double lambda);
FittedModel fit_constant_mean(const Dataset& data);
FittedModel fit_mlp(const Dataset& data, const Mlp& spec, SeedStream& rng);
FittedModel fit_ntk_layerwise(const Dataset& data, const NtkLayerwise& spec, SeedStream& rng);

/// Dispatches on the variant; `rng` initializes iterative models only.
FittedModel fit(const ModelSpec& spec, const Dataset& data, SeedStream& rng);

Vector predict(const FittedModel& model, const Matrix& x);

// ---- network internals (exposed for gradient checks) -----------------------

/// He initialization N(0, 2 / fan_in), zero biases; weights drawn layer by
/// layer in row-major order.
MlpParams mlp_init(Eigen::Index input_dim, const std::vector<Eigen::Index>& widths, SeedStream& rng);
Vector mlp_forward(const MlpParams& params, const Matrix& x);
double mlp_loss(const MlpParams& params, const Matrix& x, const Vector& y);
/// Gradient of mlp_loss in the flat layout of MlpParams::flatten.
Vector mlp_gradient(const MlpParams& params, const Matrix& x, const Vector& y);

Vector ntk_layerwise_forward(const Matrix& w, const Vector& a, const Matrix& x);
/// MSE + lambda * ||relu(X W)||_F^2.
double ntk_layerwise_loss(const Matrix& w, const Vector& a, const Matrix& x, const Vector& y,
                          double lambda);
/// Gradient in the layout [vec_rowmajor(W), a].
Vector ntk_layerwise_gradient(const Matrix& w, const Vector& a, const Matrix& x, const Vector& y,
                              double lambda);

}  // namespace rxopt
