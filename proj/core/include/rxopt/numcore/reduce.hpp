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

#include <cstddef>
#include <span>

namespace rxopt {

/// Pairwise (tree) summation; result depends only on the order of the input.
double pairwise_sum(std::span<const double> values);

/// Pairwise sum of values[i] * weights[i].
double pairwise_dot(std::span<const double> values, std::span<const double> weights);

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample stdev / sqrt(count); zero when count < 2
  std::size_t count = 0;
};

MeanStderr mean_stderr(std::span<const double> values);

}  // namespace rxopt
