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

#include <cmath>
#include <string>
#include <vector>

#include "rxopt/error.hpp"

namespace rxopt {

/// Exact through degree 79.
inline constexpr unsigned kDefaultQuadratureOrder = 40;

/// Gauss-Hermite rule normalized to the standard normal measure.
struct QuadratureRule {
  unsigned order = 0;
  std::vector<double> nodes;    // ascending, symmetric about zero
  std::vector<double> weights;  // positive, summing to one
};

/// Nodes are the roots of the probabilists' Hermite polynomial He_order,
/// seeded by Golub-Welsch and polished with Newton steps; weights come from
/// the orthonormal three-term recurrence so that tail weights keep full
/// relative accuracy.
QuadratureRule gauss_hermite(unsigned order);

/// E[f(Z)] for Z ~ N(0, 1) by Gauss-Hermite quadrature.
template <class F>
double gh_expect(F&& f, unsigned order = kDefaultQuadratureOrder) {
  const QuadratureRule rule = gauss_hermite(order);
  double sum = 0.0;
  for (unsigned i = 0; i < rule.order; ++i) {
    const double value = f(rule.nodes[i]);
    if (!std::isfinite(value)) {
      fail(ErrorKind::NonFiniteIntegrand,
           "integrand is not finite at node " + std::to_string(rule.nodes[i]));
    }
    sum += rule.weights[i] * value;
  }
  return sum;
}

}  // namespace rxopt
