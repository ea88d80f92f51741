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

#include "rxopt/numcore/quadrature.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Dense>

namespace rxopt {
namespace {

struct Orthonormal {
  double value;     // p_n(x)
  double previous;  // p_{n-1}(x)
};

// p_k = He_k / sqrt(k!), p_{k+1} = (x p_k - sqrt(k) p_{k-1}) / sqrt(k+1).
Orthonormal orthonormal_hermite(unsigned n, double x) {
  double prev = 0.0;
  double cur = 1.0;
  for (unsigned k = 0; k < n; ++k) {
    const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) /
                        std::sqrt(static_cast<double>(k + 1));
    prev = cur;
    cur = next;
  }
  return {cur, prev};
}

}  // namespace

QuadratureRule gauss_hermite(unsigned order) {
  if (order == 0) fail(ErrorKind::InvalidArgument, "quadrature order must be at least 1");
  const auto n = static_cast<Eigen::Index>(order);
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) {
    jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(static_cast<double>(i));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi, Eigen::EigenvaluesOnly);
  std::vector<double> nodes(eig.eigenvalues().data(), eig.eigenvalues().data() + n);
  std::sort(nodes.begin(), nodes.end());

  const double root_n = std::sqrt(static_cast<double>(order));
  for (double& x : nodes) {
    for (int iter = 0; iter < 8; ++iter) {
      const Orthonormal p = orthonormal_hermite(order, x);
      const double derivative = root_n * p.previous;
      if (derivative == 0.0) break;
      const double step = p.value / derivative;
      x -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
  }

  // Enforce exact symmetry; odd orders carry a node at zero.
  for (unsigned i = 0; i < order / 2; ++i) {
    const double half = 0.5 * (nodes[order - 1 - i] - nodes[i]);
    nodes[i] = -half;
    nodes[order - 1 - i] = half;
  }
  if (order % 2 == 1) nodes[order / 2] = 0.0;

  std::vector<double> weights(order);
  for (unsigned i = 0; i < order; ++i) {
    const double p = orthonormal_hermite(order - 1, nodes[i]).value;
    weights[i] = 1.0 / (static_cast<double>(order) * p * p);
  }
  for (unsigned i = 0; i < order / 2; ++i) {
    const double avg = 0.5 * (weights[i] + weights[order - 1 - i]);
    weights[i] = weights[order - 1 - i] = avg;
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;

  return {order, std::move(nodes), std::move(weights)};
}

}  // namespace rxopt
