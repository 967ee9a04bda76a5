#pragma once

#include <vector>

#include "seaqt/types.hpp"

namespace seaqt {

/// Real scalar product on operator space: (F|G) = Re Tr(F^dag G).
/// Treats the complex matrices as a real vector space; it is symmetric,
/// bilinear over the reals and positive definite.
double real_inner(const Matrix& f, const Matrix& g);

double op_norm(const Matrix& f);  // sqrt((F|F))

/// Gram matrix of pairwise real_inner values.
RealMatrix gram_matrix(const std::vector<Matrix>& ops);

/// Determinant of the Gram matrix; >= 0, and > 0 iff the set is linearly
/// independent over the reals.
double gram_det(const std::vector<Matrix>& ops);

/// Result of the rank-revealing modified Gram-Schmidt pass.
///
/// basis[k] is orthonormal under real_inner. retained[k] is the index of the
/// input vector that produced basis[k]; inputs whose residual after
/// projection falls below the drop threshold are skipped. coeffs(k, i) gives
/// the expansion of basis[k] over the *retained* inputs, so
///   basis[k] = sum_i coeffs(k, i) * input[retained[i]],
/// which lets callers rebuild combinations of the original operators without
/// inverting anything.
struct OrthonormalBasis {
  std::vector<Matrix> basis;
  std::vector<int> retained;
  RealMatrix coeffs;

  int size() const { return static_cast<int>(basis.size()); }
};

/// Modified Gram-Schmidt under real_inner with a deterministic sign fix:
/// the first entry of each kept vector whose magnitude is significant has
/// positive real part (or positive imaginary part when the real part
/// vanishes).
OrthonormalBasis orthonormalize(const std::vector<Matrix>& ops, double drop_tol);

/// Component of T orthogonal to span(basis); the basis is orthonormalized
/// internally. Idempotent, and (result | b) = 0 for every b in the span.
Matrix project_orthogonal(const Matrix& t, const std::vector<Matrix>& basis,
                          double drop_tol = 1e-10);

/// Component of T inside an already orthonormal set.
Matrix project_onto(const Matrix& t, const std::vector<Matrix>& orthonormal);

}  // namespace seaqt
