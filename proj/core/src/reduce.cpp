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

#include "rxopt/numcore/reduce.hpp"

#include <cmath>
#include <vector>

#include "rxopt/error.hpp"

namespace rxopt {
namespace {

constexpr std::size_t kLeafSize = 16;

template <class Term>
double tree_sum(std::size_t begin, std::size_t end, const Term& term) {
  if (end - begin <= kLeafSize) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += term(i);
    return s;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  return tree_sum(begin, mid, term) + tree_sum(mid, end, term);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return tree_sum(0, values.size(), [&](std::size_t i) { return values[i]; });
}

double pairwise_dot(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) {
    fail(ErrorKind::DimensionMismatch, "pairwise_dot: length mismatch");
  }
  if (values.empty()) return 0.0;
  return tree_sum(0, values.size(), [&](std::size_t i) { return values[i] * weights[i]; });
}

MeanStderr mean_stderr(std::span<const double> values) {
  MeanStderr out;
  out.count = values.size();
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = pairwise_sum(values) / n;
  if (values.size() < 2) return out;
  const double mean = out.mean;
  const double ss =
      tree_sum(0, values.size(), [&](std::size_t i) { return (values[i] - mean) * (values[i] - mean); });
  out.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return out;
}

}  // namespace rxopt
