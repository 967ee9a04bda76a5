#include "seaqt/operators.hpp"

#include <cmath>

namespace seaqt {

namespace {

void check_same_dim(const Matrix& f, const Matrix& g) {
  if (f.rows() != g.rows() || f.cols() != g.cols())
    throw std::invalid_argument("operator dimension mismatch");
}

// Deterministic sign convention: flip so that the first significantly
// nonzero entry (row-major) has positive real part, falling back to the
// imaginary part when the real part is negligible.
void fix_sign(Matrix& m) {
  const double cut = 1e-12;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const Complex v = m(r, c);
      if (std::abs(v.real()) > cut) {
        if (v.real() < 0) m = -m;
        return;
      }
      if (std::abs(v.imag()) > cut) {
        if (v.imag() < 0) m = -m;
        return;
      }
    }
  }
}

}  // namespace

double real_inner(const Matrix& f, const Matrix& g) {
  check_same_dim(f, g);
  // Re Tr(F^dag G) = sum_ij Re(conj(F_ij) G_ij)
  return f.conjugate().cwiseProduct(g).sum().real();
}

double op_norm(const Matrix& f) { return std::sqrt(real_inner(f, f)); }

RealMatrix gram_matrix(const std::vector<Matrix>& ops) {
  const int n = static_cast<int>(ops.size());
  RealMatrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) g(i, j) = g(j, i) = real_inner(ops[i], ops[j]);
  return g;
}

double gram_det(const std::vector<Matrix>& ops) {
  if (ops.empty()) throw std::invalid_argument("gram_det: empty operator list");
  return gram_matrix(ops).determinant();
}

OrthonormalBasis orthonormalize(const std::vector<Matrix>& ops, double drop_tol) {
  OrthonormalBasis out;
  const int n = static_cast<int>(ops.size());
  std::vector<RealVector> coeff_full;  // per kept vector, over all inputs
  for (int i = 0; i < n; ++i) {
    Matrix w = ops[i];
    RealVector c = RealVector::Zero(n);
    c(i) = 1.0;
    // two MGS sweeps keep orthogonality near machine precision
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (int k = 0; k < out.size(); ++k) {
        const double p = real_inner(out.basis[k], w);
        w -= p * out.basis[k];
        c -= p * coeff_full[k];
      }
    }
    const double nrm = op_norm(w);
    if (nrm <= drop_tol) continue;
    w /= nrm;
    c /= nrm;
    const Matrix before = w;
    fix_sign(w);
    if ((w - before).cwiseAbs().maxCoeff() > 0) c = -c;
    out.basis.push_back(std::move(w));
    out.retained.push_back(i);
    coeff_full.push_back(std::move(c));
  }
  // Dropped inputs are linear combinations of the retained ones, so the kept
  // coefficient columns describe the basis completely.
  out.coeffs.resize(out.size(), out.size());
  for (int k = 0; k < out.size(); ++k)
    for (int j = 0; j < out.size(); ++j) out.coeffs(k, j) = coeff_full[k](out.retained[j]);
  return out;
}

Matrix project_orthogonal(const Matrix& t, const std::vector<Matrix>& basis,
                          double drop_tol) {
  const OrthonormalBasis ob = orthonormalize(basis, drop_tol);
  Matrix r = t;
  for (int sweep = 0; sweep < 2; ++sweep)
    for (const Matrix& u : ob.basis) r -= real_inner(u, r) * u;
  return r;
}

Matrix project_onto(const Matrix& t, const std::vector<Matrix>& orthonormal) {
  Matrix r = Matrix::Zero(t.rows(), t.cols());
  for (const Matrix& u : orthonormal) r += real_inner(u, t) * u;
  return r;
}

}  // namespace seaqt
