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

#include "rxopt/numcore/linalg.hpp"

#include <algorithm>
#include <string>

#include "rxopt/error.hpp"

namespace rxopt {
namespace {

Eigen::LLT<Matrix> checked_cholesky(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    fail(ErrorKind::DimensionMismatch, "solve_spd needs a non-empty square matrix");
  }
  if (!a.allFinite()) fail(ErrorKind::InvalidArgument, "solve_spd: non-finite matrix entry");
  if (!is_symmetric(a)) fail(ErrorKind::InvalidArgument, "solve_spd: matrix is not symmetric");
  Eigen::LLT<Matrix> llt(a);
  const double max_diag = a.diagonal().maxCoeff();
  if (llt.info() != Eigen::Success || !(max_diag > 0.0)) {
    fail(ErrorKind::NotPositiveDefinite, "Cholesky factorization broke down");
  }
  const Matrix& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double pivot = l(i, i) * l(i, i);
    if (!(pivot > rel_tol * max_diag)) {
      fail(ErrorKind::NotPositiveDefinite,
           "pivot " + std::to_string(i) + " is " + std::to_string(pivot) +
               " relative to max diagonal " + std::to_string(max_diag));
    }
  }
  return llt;
}

}  // namespace

Vector solve_spd(const Matrix& a, const Vector& b, double rel_tol) {
  if (b.size() != a.rows()) fail(ErrorKind::DimensionMismatch, "solve_spd: rhs length mismatch");
  return checked_cholesky(a, rel_tol).solve(b);
}

Matrix solve_spd(const Matrix& a, const Matrix& b, double rel_tol) {
  if (b.rows() != a.rows()) fail(ErrorKind::DimensionMismatch, "solve_spd: rhs rows mismatch");
  return checked_cholesky(a, rel_tol).solve(b);
}

SvdResult svd(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {solver.matrixU(), solver.singularValues(), solver.matrixV().transpose()};
}

Matrix pseudo_inverse(const Matrix& a, double rel_cutoff) {
  const SvdResult d = svd(a);
  const double s1 = d.singular_values.size() > 0 ? d.singular_values(0) : 0.0;
  Vector inv = Vector::Zero(d.singular_values.size());
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    if (d.singular_values(i) > s1 * rel_cutoff) inv(i) = 1.0 / d.singular_values(i);
  }
  return d.vt.transpose() * inv.asDiagonal() * d.u.transpose();
}

Matrix low_rank_approximation(const Matrix& a, Eigen::Index k) {
  const SvdResult d = svd(a);
  const Eigen::Index keep = std::min<Eigen::Index>(k, d.singular_values.size());
  return d.u.leftCols(keep) * d.singular_values.head(keep).asDiagonal() * d.vt.topRows(keep);
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return svd(a).singular_values(0);
}

bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.cwiseAbs().maxCoeff();
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * std::max(scale, 1e-300);
}

Matrix psd_sqrt(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  const Vector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace rxopt
