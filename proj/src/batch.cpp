#include "seaqt/batch.hpp"

#include <atomic>
#include <cmath>

#include "seaqt/single_system.hpp"

namespace seaqt {

namespace {
int g_threads = 0;
}

void set_thread_count(int n) {
  g_threads = n;
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#endif
}

int thread_count() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

SampleSystem sample_system(const SampleSpec& spec, std::uint64_t index) {
  Rng rng(Rng::substream(spec.seed, index));
  const int span = spec.max_dim - spec.min_dim + 1;
  const int dim = spec.min_dim + static_cast<int>(rng.next_u64() % static_cast<unsigned>(span));
  const int extras = static_cast<int>(rng.next_u64() % static_cast<unsigned>(spec.max_extras + 1));
  int rank = dim;
  if (spec.rank_deficient_every > 0 && index % spec.rank_deficient_every == 0 && dim > 2)
    rank = dim - 1;
  SampleSystem s{random_density(rng, dim, rank), random_generators(rng, dim, extras)};
  return s;
}

namespace {

SampleMargins eval_sample(const SampleSpec& spec, std::uint64_t index, const UnitSystem& units,
                          const Tolerances& tol) {
  const SampleSystem sys = sample_system(spec, index);
  SampleMargins m;
  m.dim = static_cast<int>(sys.rho.rows());

  const SpectralState st = SpectralState::decompose(sys.rho, units, tol);
  const DissipativeDirection dir = dissipative_direction(st, sys.gen, tol);
  const TauPolicy policy = TauPolicy::max_epr(1.0);
  const double tau = tau_value(policy, st, sys.gen, dir, units, tol);
  const Matrix r = rhs(st, sys.gen, policy, units, tol);

  m.trace_rate = std::abs(r.trace().real());
  m.energy_rate = std::abs((r * sys.gen.hamiltonian).trace().real());
  for (const Matrix& g : sys.gen.extras)
    m.extra_rate = std::max(m.extra_rate, std::abs((r * g).trace().real()));

  m.entropy_rate = units.k_B * dir.norm_sq / tau;
  m.entropy_rate_trace_form = -units.k_B * (r * st.log_on_range()).trace().real();
  const bool dissipator_active =
      !(dir.norm_sq == 0.0 ||
        (policy.kind == TauPolicy::Kind::MaxEPR && dir.norm_sq < tol.equilibrium_epsilon));
  if (dissipator_active)
    m.entropy_rate_mismatch = std::abs(m.entropy_rate - m.entropy_rate_trace_form);

  m.variational_residual = variational_residual(st, sys.gen, dir, policy, units);

  // steepest-ascent optimality: no admissible direction of the same norm
  // produces a larger entropy rate than E_D
  if (dir.norm_sq > 1e-14) {
    Rng zrng(Rng::substream(spec.seed ^ 0xA5A5A5A5ull, index));
    const Matrix e_d = (-0.5 / tau) * dir.D;
    const double e_norm = op_norm(e_d);
    const double rate_ed = -2.0 * units.k_B * real_inner(e_d, st.sqrt_rho() * st.log_on_range());
    double best = -1e300;
    const int n = st.dim();
    for (int k = 0; k < spec.ascent_directions; ++k) {
      Matrix z(n, n);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) z(a, b) = Complex(zrng.gauss(), zrng.gauss());
      for (int sweep = 0; sweep < 2; ++sweep)
        for (const Matrix& u : dir.manifold_basis) z -= real_inner(u, z) * u;
      const double zn = op_norm(z);
      if (zn < 1e-12) continue;
      z *= e_norm / zn;
      best = std::max(best, -2.0 * units.k_B * real_inner(z, st.sqrt_rho() * st.log_on_range()));
    }
    m.steepest_ascent_slack = best - rate_ed;

    // MaxEPR closure identities
    const double cov_hh = st.covariance(sys.gen.hamiltonian, sys.gen.hamiltonian);
    if (cov_hh > policy.variance_epsilon) {
      const double td = tau_D(st, dir, tau);
      m.uncertainty_violation = std::abs(td * td * cov_hh - 0.25 * units.hbar * units.hbar);
      const double bound =
          (2.0 / units.hbar) * units.k_B * std::sqrt(cov_hh * dir.norm_sq);
      m.bound_violation = std::abs(m.entropy_rate - bound);
    }
  }
  return m;
}

}  // namespace

std::vector<SampleMargins> sample_margins(const SampleSpec& spec, Exec exec,
                                          const UnitSystem& units, const Tolerances& tol) {
  std::vector<SampleMargins> out(spec.count);
  for_each_index(spec.count, exec,
                 [&](std::int64_t i) { out[i] = eval_sample(spec, i, units, tol); });
  return out;
}

MarginSummary summarize(const std::vector<SampleMargins>& margins) {
  MarginSummary s;
  for (const SampleMargins& m : margins) {
    s.max_trace_rate = std::max(s.max_trace_rate, m.trace_rate);
    s.max_energy_rate = std::max(s.max_energy_rate, m.energy_rate);
    s.max_extra_rate = std::max(s.max_extra_rate, m.extra_rate);
    s.min_entropy_rate_trace_form =
        std::min(s.min_entropy_rate_trace_form, m.entropy_rate_trace_form);
    s.max_entropy_rate_mismatch = std::max(s.max_entropy_rate_mismatch, m.entropy_rate_mismatch);
    s.max_variational_residual = std::max(s.max_variational_residual, m.variational_residual);
    s.max_steepest_ascent_slack = std::max(s.max_steepest_ascent_slack, m.steepest_ascent_slack);
    s.max_uncertainty_violation = std::max(s.max_uncertainty_violation, m.uncertainty_violation);
    s.max_bound_violation = std::max(s.max_bound_violation, m.bound_violation);
  }
  return s;
}

}  // namespace seaqt
