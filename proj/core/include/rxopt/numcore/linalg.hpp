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

#include <Eigen/Dense>

namespace rxopt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative pivot threshold below which solve_spd reports NotPositiveDefinite.
inline constexpr double kSpdPivotTolerance = 1e-12;
/// Singular values below s1 * kPseudoInverseCutoff are treated as zero.
inline constexpr double kPseudoInverseCutoff = 1e-10;

/// Solves A x = b for symmetric positive-definite A by Cholesky.
///
/// Throws NotPositiveDefinite when any pivot falls to or below
/// rel_tol * max(diag(A)); callers fall back to pseudo_inverse on that signal.
Vector solve_spd(const Matrix& a, const Vector& b, double rel_tol = kSpdPivotTolerance);
Matrix solve_spd(const Matrix& a, const Matrix& b, double rel_tol = kSpdPivotTolerance);

struct SvdResult {
  Matrix u;
  Vector singular_values;  // descending, non-negative
  Matrix vt;
};

SvdResult svd(const Matrix& a);

Matrix pseudo_inverse(const Matrix& a, double rel_cutoff = kPseudoInverseCutoff);

/// Best rank-k approximation in spectral and Frobenius norm.
Matrix low_rank_approximation(const Matrix& a, Eigen::Index k);

double spectral_norm(const Matrix& a);

bool is_symmetric(const Matrix& a, double rel_tol = 1e-10);

/// Symmetric square root of a symmetric positive semidefinite matrix.
Matrix psd_sqrt(const Matrix& a);

}  // namespace rxopt
