#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "seaqt/spectral.hpp"

namespace seaqt {

/// The generators of the motion {I, H, G_i}: identity and Hamiltonian are
/// implicit, the extras G_i are Hermitian operators commuting with H whose
/// mean values the dissipative term conserves.
struct GeneratorSet {
  Matrix hamiltonian;
  std::vector<Matrix> extras;
  double commutation_tolerance = 1e-8;

  static GeneratorSet make(Matrix hamiltonian, std::vector<Matrix> extras = {},
                           double commutation_tolerance = 1e-8);

  int dim() const { return static_cast<int>(hamiltonian.rows()); }

  /// {I, H, G_0, G_1, ...} in constraint order.
  std::vector<Matrix> motion_generators() const;
};

/// Relaxation-time closure. MaxEPR pins tau at the lower bound imposed by
/// the time-energy uncertainty relation, which maximizes the entropy
/// production rate; it falls back to a constant when the energy variance
/// degenerates (and when D = 0, where tau is irrelevant).
struct TauPolicy {
  enum class Kind { Constant, MaxEPR, Custom };
  Kind kind = Kind::Constant;
  double value = 1.0;             // Constant
  double fallback = 1.0;          // MaxEPR fallback
  double variance_epsilon = 1e-12;
  std::string custom_tag;
  std::function<double(const SpectralState&)> custom;

  static TauPolicy constant(double v);
  static TauPolicy max_epr(double fallback = 1.0, double variance_epsilon = 1e-12);
  static TauPolicy custom_fn(std::string tag, std::function<double(const SpectralState&)> fn);
};

/// The dissipative direction D: the component of sqrt(rho) ln(rho)
/// orthogonal to the constraint manifold spanned by {sqrt(rho) R_i}.
struct DissipativeDirection {
  Matrix D;
  double norm_sq = 0.0;                 // (D|D)
  std::vector<Matrix> manifold_basis;   // orthonormal {sqrt(rho) A_k}
  std::vector<double> multipliers;      // (sqrt(rho) ln rho | sqrt(rho) A_k)
  std::vector<int> retained;            // indices into {I, H, G_i} kept by rank-revealing
  RealMatrix basis_coeffs;              // A_k = sum_j coeffs(k,j) R_retained[j]
};

/// -(i/hbar) [H, rho]; Hermitian and traceless.
Matrix hamiltonian_term(const SpectralState& state, const GeneratorSet& gen,
                        const UnitSystem& units = {});

/// E_H = (i/hbar) sqrt(rho) dH; satisfies rho_dot_H = sqrt(rho) E_H + E_H^dag sqrt(rho).
Matrix hamiltonian_gradient(const SpectralState& state, const GeneratorSet& gen,
                            const UnitSystem& units = {});

/// Shortest characteristic time of the Hamiltonian term:
/// hbar / (2 sqrt(Cov(H,H))); infinity on H-eigenstates.
double tau_H(const SpectralState& state, const GeneratorSet& gen,
             const UnitSystem& units = {});

DissipativeDirection dissipative_direction(const SpectralState& state,
                                           const GeneratorSet& gen,
                                           const Tolerances& tol = {});

/// Evaluate the relaxation-time closure for the current state/direction.
double tau_value(const TauPolicy& policy, const SpectralState& state,
                 const GeneratorSet& gen, const DissipativeDirection& dir,
                 const UnitSystem& units = {}, const Tolerances& tol = {});

/// -(1/(2 tau)) [sqrt(rho) D + D^dag sqrt(rho)]
Matrix dissipative_term(const SpectralState& state, const DissipativeDirection& dir,
                        double tau);

/// Full right-hand side: -(i/hbar)[H, rho] + dissipative term.
Matrix rhs(const SpectralState& state, const GeneratorSet& gen, const TauPolicy& policy,
           const UnitSystem& units = {}, const Tolerances& tol = {});

/// k_B (D|D) / tau, the entropy production rate.
double entropy_rate(const SpectralState& state, const GeneratorSet& gen,
                    const TauPolicy& policy, const UnitSystem& units = {},
                    const Tolerances& tol = {});

/// Shortest characteristic time of the dissipative term, tau / sqrt((D|D)).
/// Infinite (flagged via the return) when D = 0.
double tau_D(const SpectralState& state, const DissipativeDirection& dir, double tau);

/// Lower bound on tau from the time-energy uncertainty relation:
/// (hbar/2) sqrt((D|D) / Cov(H,H)).
double tau_lower_bound(const SpectralState& state, const GeneratorSet& gen,
                       const DissipativeDirection& dir, const UnitSystem& units = {});

enum class TimeMode { Hamiltonian, Dissipative };

/// Characteristic time of change of the mean of F under the chosen part of
/// the dynamics: sqrt(Cov(F,F)) / |df/dt|. Infinity when the rate vanishes.
double characteristic_time(const SpectralState& state, const GeneratorSet& gen,
                           const TauPolicy& policy, const Matrix& f, TimeMode mode,
                           const UnitSystem& units = {}, const Tolerances& tol = {});

/// Residual of the Lagrange stationarity condition for the constrained
/// entropy-rate maximization, with multipliers fitted by least squares.
/// Vanishes (to roundoff) for the projection-built E_D.
double variational_residual(const SpectralState& state, const GeneratorSet& gen,
                            const DissipativeDirection& dir, const TauPolicy& policy,
                            const UnitSystem& units = {});

struct NondissipativeReport {
  bool nondissipative = false;
  enum class Kind { Equilibrium, LimitCycle, Dissipative } kind = Kind::Dissipative;
  double d_norm_sq = 0.0;
  double range_commutator_norm = 0.0;  // ||[B, H]||
};

NondissipativeReport nondissipative_test(const SpectralState& state, const GeneratorSet& gen,
                                         const Tolerances& tol = {});

/// exp(-beta H + sum_i nu_i G_i) / Tr(...), the globally stable equilibrium
/// family.
SpectralState gibbs_state(const GeneratorSet& gen, double beta, const std::vector<double>& nus,
                          const UnitSystem& units = {}, const Tolerances& tol = {});

/// Solve for (beta, nu_i) so the Gibbs state matches the given means of H
/// and the extras. Monotone bisection for the energy-only case, damped
/// Newton (Jacobian = covariance matrix) otherwise.
struct GibbsMatch {
  SpectralState state;
  double beta = 0.0;
  std::vector<double> nus;
};
GibbsMatch match_gibbs(const GeneratorSet& gen, double target_energy,
                       const std::vector<double>& target_extras = {},
                       const UnitSystem& units = {}, const Tolerances& tol = {});

/// Equation of motion rewritten over an orthogonal extension of the
/// constraint manifold: rho_dot = -(i/hbar)[H, rho] + (1/(2 tau)) sum f_j {X_j, rho}.
/// Requires a full-rank state. Returns the rhs, the extension coefficients
/// and the entropy rate (k_B/tau) sum f_j^2.
struct SpecialFormResult {
  Matrix rhs;
  std::vector<double> coefficients;  // f_j, j > manifold
  double entropy_rate = 0.0;
};
SpecialFormResult special_form_rhs(const SpectralState& state, const GeneratorSet& gen,
                                   const TauPolicy& policy, const UnitSystem& units = {},
                                   const Tolerances& tol = {});

/// Extended dissipative direction with imposed mean-value rates for the
/// non-identity generators (H first, then the extras). The resulting
/// dissipator drives Tr(rho R_j) at exactly the requested rates while the
/// added terms stay orthogonal to the entropy gradient.
Matrix driven_direction(const SpectralState& state, const GeneratorSet& gen,
                        const std::vector<double>& imposed_rates, const TauPolicy& policy,
                        const UnitSystem& units = {}, const Tolerances& tol = {});

constexpr double kInfiniteTime = std::numeric_limits<double>::infinity();

}  // namespace seaqt
