#include "seaqt/spectral.hpp"

#include <cmath>

namespace seaqt {

SpectralState SpectralState::decompose(const Matrix& rho, const UnitSystem& units,
                                       const Tolerances& tol) {
  units.validate();
  tol.validate();
  if (rho.rows() != rho.cols() || rho.rows() == 0)
    throw std::invalid_argument("spectral_decompose: operator must be square");
  if (rho.rows() > kMaxDenseDim)
    throw std::invalid_argument("spectral_decompose: dimension " + std::to_string(rho.rows()) +
                                " exceeds the dense bound of " + std::to_string(kMaxDenseDim));
  if (!is_hermitian(rho, 1e-10))
    throw std::invalid_argument("spectral_decompose: state operator is not Hermitian");
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > 1e-10)
    throw std::invalid_argument("spectral_decompose: Tr(rho) = " + std::to_string(tr) +
                                " deviates from 1");

  const int n = static_cast<int>(rho.rows());
  const double cut = tol.rank_cut(n);

  Eigen::SelfAdjointEigenSolver<Matrix> es((rho + rho.adjoint()) / 2.0);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spectral_decompose: eigensolver failed");

  SpectralState st;
  st.rho_ = rho;
  st.rank_epsilon_ = cut;
  st.k_B_ = units.k_B;

  // descending order
  st.eigenvalues_ = es.eigenvalues().reverse();
  st.eigenvectors_ = es.eigenvectors().rowwise().reverse();

  RealVector w = st.eigenvalues_;
  for (int i = 0; i < n; ++i) {
    if (w(i) < -cut)
      throw std::invalid_argument("spectral_decompose: eigenvalue " + std::to_string(w(i)) +
                                  " below -rank_epsilon");
    if (std::abs(w(i)) < cut) w(i) = 0.0;
  }
  st.eigenvalues_ = w;

  RealVector sqw(n), proj(n), logw(n);
  int rank = 0;
  double entropy = 0.0;
  for (int i = 0; i < n; ++i) {
    if (w(i) > 0.0) {
      ++rank;
      sqw(i) = std::sqrt(w(i));
      proj(i) = 1.0;
      logw(i) = std::log(w(i));
      entropy -= w(i) * logw(i);
    } else {
      sqw(i) = proj(i) = logw(i) = 0.0;
    }
  }
  st.rank_ = rank;
  st.entropy_ = units.k_B * entropy;

  const Matrix& v = st.eigenvectors_;
  st.sqrt_rho_ = v * sqw.asDiagonal() * v.adjoint();
  st.range_projector_ = v * proj.asDiagonal() * v.adjoint();
  st.log_on_range_ = v * logw.asDiagonal() * v.adjoint();
  st.entropy_op_ = -units.k_B * st.log_on_range_;
  return st;
}

double SpectralState::mean(const Matrix& f) const {
  if (f.rows() != rho_.rows() || f.cols() != rho_.cols())
    throw std::invalid_argument("mean_value: dimension mismatch");
  return (rho_ * f).trace().real();
}

double SpectralState::covariance(const Matrix& f, const Matrix& g) const {
  const Matrix df = f - mean(f) * identity(dim());
  const Matrix dg = g - mean(g) * identity(dim());
  return 0.5 * (rho_ * (df * dg + dg * df)).trace().real();
}

double mean_value(const SpectralState& state, const Matrix& f) { return state.mean(f); }

double covariance(const SpectralState& state, const Matrix& f, const Matrix& g) {
  return state.covariance(f, g);
}

}  // namespace seaqt
