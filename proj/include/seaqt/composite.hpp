#pragma once

#include <string>
#include <vector>

#include "seaqt/single_system.hpp"

namespace seaqt {

/// Tensor-product layout of the Hilbert space: one factor per indivisible
/// constituent subsystem.
struct CompositionStructure {
  std::vector<int> dims;
  std::vector<std::string> labels;

  static CompositionStructure make(std::vector<int> dims, std::vector<std::string> labels = {});

  int subsystem_count() const { return static_cast<int>(dims.size()); }
  int total_dim() const;
  int bar_dim(int j) const { return total_dim() / dims[j]; }
};

Matrix kronecker(const Matrix& a, const Matrix& b);

/// Partial trace keeping the listed factors (in their original order).
Matrix partial_trace(const Matrix& rho, const CompositionStructure& comp,
                     const std::vector<int>& keep);

/// Operator acting as op_j on factor J and as identity elsewhere.
Matrix embed_local(const CompositionStructure& comp, int j, const Matrix& op_j);

/// Full-space operator with block_j on factor J and bar_op on the complement
/// (bar_op indexed over the remaining factors in their original order).
Matrix compose_with_complement(const CompositionStructure& comp, int j, const Matrix& block_j,
                               const Matrix& bar_op);

/// Reorder the tensor factors of a full-space operator: perm[k] names the
/// original factor that moves to slot k. Returns the permuted operator; the
/// new composition is {dims[perm[0]], dims[perm[1]], ...}.
Matrix permute_subsystems(const Matrix& op, const CompositionStructure& comp,
                          const std::vector<int>& perm);

/// Generators of the motion for a composite system: per-factor Hamiltonians,
/// a full-space interaction and full-space extra generators.
struct CompositeGenerators {
  std::vector<Matrix> local_hamiltonians;
  Matrix interaction;          // on the full space; may be empty for V = 0
  std::vector<Matrix> global_extras;
  double commutation_tolerance = 1e-8;

  static CompositeGenerators make(const CompositionStructure& comp,
                                  std::vector<Matrix> local_hamiltonians,
                                  Matrix interaction = Matrix(),
                                  std::vector<Matrix> global_extras = {},
                                  double commutation_tolerance = 1e-8);

  Matrix assembled_hamiltonian(const CompositionStructure& comp) const;
  GeneratorSet as_single(const CompositionStructure& comp) const;

  /// Builds sum_J N_J (x) I for per-factor operators, the separated form a
  /// particle-number observable takes.
  static Matrix separated_extra(const CompositionStructure& comp,
                                const std::vector<Matrix>& locals);
};

/// (F)^J = Tr_Jbar[(I_J (x) rho_Jbar) F]: how subsystem J perceives the
/// full-space observable F through the current state of the others.
Matrix perception_operator(const SpectralState& state, const CompositionStructure& comp, int j,
                           const Matrix& f);

/// Everything subsystem J needs for its local steepest-ascent step.
struct LocalFrame {
  int index = 0;
  SpectralState rho_j;
  Matrix rho_jbar;
  Matrix perceived_hamiltonian;
  Matrix perceived_entropy;           // (S)^J with S = -k_B B ln rho
  std::vector<Matrix> perceived_extras;
  DissipativeDirection direction;     // on factor J, under the factor inner product
};

LocalFrame local_frame(const SpectralState& state, const CompositionStructure& comp,
                       const CompositeGenerators& gens, int j, const UnitSystem& units = {},
                       const Tolerances& tol = {});

DissipativeDirection local_dissipative_direction(const SpectralState& state,
                                                 const CompositionStructure& comp,
                                                 const CompositeGenerators& gens, int j,
                                                 const Tolerances& tol = {});

/// Perceived-H covariance for subsystem J (global mean subtraction).
double perceived_energy_covariance(const SpectralState& state, const CompositionStructure& comp,
                                   const CompositeGenerators& gens, int j);

double tau_J_value(const TauPolicy& policy, const SpectralState& state,
                   const CompositionStructure& comp, const CompositeGenerators& gens, int j,
                   const DissipativeDirection& dir_j, const UnitSystem& units = {},
                   const Tolerances& tol = {});

/// The composite dissipator: -sum_J (1/(2 tau_J)) [sqrt(rho_J) D_J + h.c.] (x) rho_Jbar.
Matrix composite_dissipator(const SpectralState& state, const CompositionStructure& comp,
                            const CompositeGenerators& gens,
                            const std::vector<TauPolicy>& policies, const UnitSystem& units = {},
                            const Tolerances& tol = {});

Matrix composite_rhs(const SpectralState& state, const CompositionStructure& comp,
                     const CompositeGenerators& gens, const std::vector<TauPolicy>& policies,
                     const UnitSystem& units = {}, const Tolerances& tol = {});

double composite_entropy_rate(const SpectralState& state, const CompositionStructure& comp,
                              const CompositeGenerators& gens,
                              const std::vector<TauPolicy>& policies,
                              const UnitSystem& units = {}, const Tolerances& tol = {});

/// Residual of the per-subsystem Lagrange stationarity condition for the
/// constrained maximization of the perceived entropy rate; vanishes for the
/// projection-built local direction.
double local_variational_residual(const SpectralState& state, const CompositionStructure& comp,
                                  const CompositeGenerators& gens, int j,
                                  const TauPolicy& policy, const UnitSystem& units = {},
                                  const Tolerances& tol = {});

/// Alternative composite construction that weights the perceptions with
/// sqrt(rho) instead of rho. It conserves the global invariants but leaks
/// energy between correlated noninteracting subsystems; kept as a negative
/// control for the conformance suite.
Matrix flawed_variant_dissipator(const SpectralState& state, const CompositionStructure& comp,
                                 const CompositeGenerators& gens,
                                 const std::vector<TauPolicy>& policies,
                                 const UnitSystem& units = {}, const Tolerances& tol = {});

Matrix flawed_variant_rhs(const SpectralState& state, const CompositionStructure& comp,
                          const CompositeGenerators& gens,
                          const std::vector<TauPolicy>& policies, const UnitSystem& units = {},
                          const Tolerances& tol = {});

/// Bipartition of the factor list into two disjoint groups.
struct Bipartition {
  std::vector<int> part_a;
  std::vector<int> part_b;

  static Bipartition split_after(const CompositionStructure& comp, int first_b_factor);
};

/// Mutual-information-like correlation between the two parts:
/// Tr(rho ln rho) - Tr(rho_A ln rho_A) - Tr(rho_B ln rho_B) >= 0,
/// zero exactly on product states.
double correlation_functional(const SpectralState& state, const CompositionStructure& comp,
                              const Bipartition& split, const Tolerances& tol = {});

/// Split of d(sigma_AB)/dt into the unitary and dissipative contributions,
/// with the convention d(sigma)/dt = hamiltonian_part - dissipative_part, so
/// a nonnegative dissipative_part means the dissipator destroys correlation.
/// Uses the analytic chain rule on full-rank states and central finite
/// differences (with a Richardson consistency check) otherwise.
struct CorrelationRates {
  double hamiltonian_part = 0.0;
  double dissipative_part = 0.0;
};
CorrelationRates correlation_rate_split(const SpectralState& state,
                                        const CompositionStructure& comp,
                                        const CompositeGenerators& gens,
                                        const std::vector<TauPolicy>& policies,
                                        const Bipartition& split, const UnitSystem& units = {},
                                        const Tolerances& tol = {});

enum class DynamicsVariant { Sea, Flawed, Unitary };

/// Numerical audit of the separability conditions on a sample of states.
struct SeparabilityReport {
  double factorization_residual = 0.0;   // product-state dissipator vs D_A (x) rho_B + rho_A (x) D_B
  double locality_deviation = 0.0;       // Tr_B(dissipator) drift across random H_B replacements
  double energy_rate_a = 0.0;            // max |Tr[(H_A (x) I) dissipator]| over samples
  double energy_rate_b = 0.0;
  double min_subsystem_entropy_rate = 0.0;  // min over product samples of either side
  double tau_separability_deviation = 0.0;  // max |tau_J(composite) - tau_J(local part)|
  bool pass_factorization = false;
  bool pass_locality = false;
  bool pass_energy = false;
  bool pass_entropy = false;
  bool pass_tau = false;
};

SeparabilityReport separability_report(const CompositionStructure& comp,
                                       const CompositeGenerators& gens, const Bipartition& split,
                                       const std::vector<Matrix>& sample_states,
                                       const Tolerances& tol = {}, const UnitSystem& units = {},
                                       DynamicsVariant variant = DynamicsVariant::Sea,
                                       unsigned hb_seed = 20240901);

}  // namespace seaqt
