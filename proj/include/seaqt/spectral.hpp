#pragma once

#include "seaqt/operators.hpp"
#include "seaqt/types.hpp"

namespace seaqt {

/// A density operator together with the spectral objects the dynamics needs:
/// eigenvalues (descending, thresholded), the square-root operator, the
/// range projector B, the range-restricted logarithm B ln(rho) B and the
/// entropy operator S = -k_B B ln(rho).
///
/// Immutable after construction; safe to share across threads.
class SpectralState {
 public:
  SpectralState() = default;  // empty; only decompose() yields a usable state

  static SpectralState decompose(const Matrix& rho, const UnitSystem& units = {},
                                 const Tolerances& tol = {});

  const Matrix& rho() const { return rho_; }
  const RealVector& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }
  const Matrix& sqrt_rho() const { return sqrt_rho_; }
  const Matrix& range_projector() const { return range_projector_; }
  const Matrix& log_on_range() const { return log_on_range_; }
  const Matrix& entropy_op() const { return entropy_op_; }

  int dim() const { return static_cast<int>(rho_.rows()); }
  int rank() const { return rank_; }
  bool full_rank() const { return rank_ == dim(); }
  double rank_epsilon() const { return rank_epsilon_; }
  double k_B() const { return k_B_; }

  /// -k_B Tr(rho ln rho), evaluated on the range.
  double entropy() const { return entropy_; }

  /// Tr(rho F) for Hermitian F.
  double mean(const Matrix& f) const;

  /// Symmetrized covariance (1/2) Tr(rho {dF, dG}) with dF = F - <F> I.
  double covariance(const Matrix& f, const Matrix& g) const;

 private:


  Matrix rho_, eigenvectors_, sqrt_rho_, range_projector_, log_on_range_, entropy_op_;
  RealVector eigenvalues_;
  int rank_ = 0;
  double rank_epsilon_ = 0.0;
  double k_B_ = 1.0;
  double entropy_ = 0.0;
};

double mean_value(const SpectralState& state, const Matrix& f);
double covariance(const SpectralState& state, const Matrix& f, const Matrix& g);

}  // namespace seaqt
