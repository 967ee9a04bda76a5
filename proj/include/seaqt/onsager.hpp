#pragma once

#include "seaqt/composite.hpp"
#include "seaqt/single_system.hpp"

namespace seaqt {

/// Hermitian observables X_j which together with the identity span (at
/// least) the Hermitian operators on the range of the state.
struct ObservableBasis {
  std::vector<Matrix> ops;
  enum class Tag { Generic, OrthogonalExtension } tag = Tag::Generic;

  /// Generalized Gell-Mann basis (traceless Hermitian, d^2 - 1 elements).
  static ObservableBasis gell_mann(int dim);

  /// Basis aligned with the state: the first members reproduce the
  /// constraint manifold (beyond identity), the rest extend it so that
  /// {sqrt(rho) X_j} is orthonormal. Requires a full-rank state.
  static ObservableBasis orthogonal_extension(const SpectralState& state,
                                              const GeneratorSet& gen,
                                              const Tolerances& tol = {});
};

/// Exponential-family coordinates of the state: B ln rho = -f0 B - sum_j f_j B X_j B.
struct AffinityVector {
  double f0 = 0.0;
  RealVector f;
  double residual = 0.0;              // reconstruction residual norm
  std::vector<int> unidentifiable;    // basis indices killed by the range projection
};

AffinityVector affinities_from_state(const SpectralState& state, const ObservableBasis& basis,
                                     const UnitSystem& units = {});

/// Generalized dissipative conductivities
/// L_ij = (1/tau) ([sqrt(rho) X_i]_perp | [sqrt(rho) X_j]_perp),
/// symmetric and positive semidefinite by construction.
struct ConductivityMatrix {
  RealMatrix L;
  std::vector<RealMatrix> per_subsystem;  // composite case: L = sum_J L^J
};

ConductivityMatrix conductivity_matrix(const SpectralState& state, const GeneratorSet& gen,
                                       const ObservableBasis& basis, const TauPolicy& policy,
                                       const UnitSystem& units = {}, const Tolerances& tol = {});

/// Dissipative rates D x_i / Dt = Tr(dissipator X_i); zero on manifold members.
std::vector<double> dissipative_rates(const SpectralState& state, const GeneratorSet& gen,
                                      const ObservableBasis& basis, const TauPolicy& policy,
                                      const UnitSystem& units = {}, const Tolerances& tol = {});

/// Entropy production as the affinity quadratic form k_B f^T L f, with the
/// optional inverse form in the rates when the active block is invertible.
struct EntropyRateQuadratic {
  double quadratic = 0.0;        // k_B f^T L f
  bool inverse_form_valid = false;
  double inverse_form = 0.0;     // k_B rate^T L^+ rate over the active block
};

EntropyRateQuadratic entropy_rate_quadratic(const SpectralState& state, const GeneratorSet& gen,
                                            const ObservableBasis& basis, const TauPolicy& policy,
                                            const UnitSystem& units = {},
                                            const Tolerances& tol = {});

/// Per-subsystem conductivities from the perceived observables; the sum
/// reproduces the composite rate/affinity relation.
ConductivityMatrix composite_conductivities(const SpectralState& state,
                                            const CompositionStructure& comp,
                                            const CompositeGenerators& gens,
                                            const ObservableBasis& basis,
                                            const std::vector<TauPolicy>& policies,
                                            const UnitSystem& units = {},
                                            const Tolerances& tol = {});

}  // namespace seaqt
