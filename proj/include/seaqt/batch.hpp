#pragma once

#include <cstdint>
#include <vector>

#include "seaqt/sampling.hpp"
#include "seaqt/threading.hpp"

namespace seaqt {

/// Per-sample margins of the structural identities, evaluated on a randomly
/// drawn state and generator set. One batch item is completely independent
/// of the others (its RNG is seeded from the batch seed and the item index),
/// so the serial and OpenMP paths produce bit-identical results.
struct SampleMargins {
  int dim = 0;
  double trace_rate = 0.0;        // |Tr(rhs)|
  double energy_rate = 0.0;       // |Tr(rhs H)|
  double extra_rate = 0.0;        // max_i |Tr(rhs G_i)|
  double entropy_rate = 0.0;      // k_B (D|D)/tau
  double entropy_rate_mismatch = 0.0;   // vs -k_B Tr(rhs B ln rho)
  double entropy_rate_trace_form = 0.0; // -k_B Tr(rhs B ln rho)
  double variational_residual = 0.0;
  double steepest_ascent_slack = 0.0;   // best competitor rate minus E_D rate
  double uncertainty_violation = 0.0;   // tau_D^2 Cov(H,H) - hbar^2/4 under MaxEPR
  double bound_violation = 0.0;         // sdot vs the uncertainty upper bound
};

struct SampleSpec {
  std::uint64_t seed = 1;
  int count = 200;
  int min_dim = 2;
  int max_dim = 8;
  int max_extras = 2;
  int rank_deficient_every = 5;  // every k-th sample drops rank by one
  int ascent_directions = 200;   // competitors per sample for the ascent check
};

/// Evaluate the margins over `spec.count` random samples. `exec` selects the
/// serial reference loop or the OpenMP-parallel one; outputs are identical.
std::vector<SampleMargins> sample_margins(const SampleSpec& spec, Exec exec,
                                          const UnitSystem& units = {},
                                          const Tolerances& tol = {});

/// Draw the random single-system fixture used for batch item `index`.
struct SampleSystem {
  Matrix rho;
  GeneratorSet gen;
};
SampleSystem sample_system(const SampleSpec& spec, std::uint64_t index);

/// Worst-case margins across a batch.
struct MarginSummary {
  double max_trace_rate = 0.0;
  double max_energy_rate = 0.0;
  double max_extra_rate = 0.0;
  double min_entropy_rate_trace_form = 0.0;
  double max_entropy_rate_mismatch = 0.0;
  double max_variational_residual = 0.0;
  double max_steepest_ascent_slack = 0.0;
  double max_uncertainty_violation = 0.0;
  double max_bound_violation = 0.0;
};
MarginSummary summarize(const std::vector<SampleMargins>& margins);

}  // namespace seaqt
