#include <cmath>

#include "seaqt/composite.hpp"
#include "seaqt/sampling.hpp"

namespace seaqt {

namespace {

struct PartView {
  CompositionStructure comp;
  CompositeGenerators gens;
  std::vector<int> factors;  // original factor ids
};

// Split op = x_A (x) I + I (x) x_B across a bipartition, distributing the
// trace evenly; returns the parts and the residual of the reconstruction.
struct OpSplit {
  Matrix part_a, part_b;
  double residual = 0.0;
};

OpSplit split_operator(const Matrix& op, const CompositionStructure& comp,
                       const Bipartition& split) {
  const Matrix tr_b = partial_trace(op, comp, split.part_a);
  const Matrix tr_a = partial_trace(op, comp, split.part_b);
  double da = 1.0, db = 1.0;
  for (int f : split.part_a) da *= comp.dims[f];
  for (int f : split.part_b) db *= comp.dims[f];
  const double t = op.trace().real();
  OpSplit out;
  out.part_a = tr_b / db - (t / (2.0 * da * db)) * Matrix::Identity((long)da, (long)da);
  out.part_b = tr_a / da - (t / (2.0 * da * db)) * Matrix::Identity((long)db, (long)db);
  const Matrix rebuilt = kronecker(out.part_a, Matrix::Identity((long)db, (long)db)) +
                         kronecker(Matrix::Identity((long)da, (long)da), out.part_b);
  out.residual = operator_norm_max(op - rebuilt);
  return out;
}

void require_contiguous(const Bipartition& split, const CompositionStructure& comp) {
  for (std::size_t i = 0; i < split.part_a.size(); ++i)
    if (split.part_a[i] != static_cast<int>(i))
      throw ConfigError("separability_report: bipartition must be a contiguous split "
                        "(permute the subsystems first)");
  for (std::size_t i = 0; i < split.part_b.size(); ++i)
    if (split.part_b[i] != static_cast<int>(split.part_a.size() + i))
      throw ConfigError("separability_report: bipartition must be a contiguous split "
                        "(permute the subsystems first)");
  if (split.part_a.size() + split.part_b.size() != comp.dims.size())
    throw ConfigError("separability_report: bipartition does not cover the composition");
}

PartView restrict_to(const CompositionStructure& comp, const CompositeGenerators& gens,
                     const Bipartition& split, const std::vector<int>& part,
                     const Matrix& v_part, const std::vector<Matrix>& extras_part) {
  PartView view;
  std::vector<int> dims;
  std::vector<Matrix> locals;
  for (int f : part) {
    dims.push_back(comp.dims[f]);
    locals.push_back(gens.local_hamiltonians[f]);
  }
  view.comp = CompositionStructure::make(dims);
  view.gens = CompositeGenerators::make(view.comp, locals, v_part, extras_part,
                                        gens.commutation_tolerance);
  view.factors = part;
  return view;
}

Matrix dissipator_of(DynamicsVariant variant, const SpectralState& st,
                     const CompositionStructure& comp, const CompositeGenerators& gens,
                     const std::vector<TauPolicy>& pol, const UnitSystem& units,
                     const Tolerances& tol) {
  switch (variant) {
    case DynamicsVariant::Sea:
      return composite_dissipator(st, comp, gens, pol, units, tol);
    case DynamicsVariant::Flawed:
      return flawed_variant_dissipator(st, comp, gens, pol, units, tol);
    case DynamicsVariant::Unitary:
      return Matrix::Zero(comp.total_dim(), comp.total_dim());
  }
  throw std::logic_error("unreachable dynamics variant");
}

}  // namespace

SeparabilityReport separability_report(const CompositionStructure& comp,
                                       const CompositeGenerators& gens, const Bipartition& split,
                                       const std::vector<Matrix>& sample_states,
                                       const Tolerances& tol, const UnitSystem& units,
                                       DynamicsVariant variant, unsigned hb_seed) {
  require_contiguous(split, comp);
  const int n = comp.total_dim();
  long da = 1, db = 1;
  for (int f : split.part_a) da *= comp.dims[f];
  for (int f : split.part_b) db *= comp.dims[f];

  // noninteracting partition needed for the locality/energy conditions
  Matrix v_a, v_b;
  if (gens.interaction.size() != 0) {
    const OpSplit vs = split_operator(gens.interaction, comp, split);
    if (vs.residual > 1e-10)
      throw ConfigError("separability_report: interaction couples the two parts");
    v_a = vs.part_a;
    v_b = vs.part_b;
  }
  std::vector<Matrix> extras_a, extras_b;
  for (const Matrix& g : gens.global_extras) {
    const OpSplit gs = split_operator(g, comp, split);
    if (gs.residual > 1e-10)
      throw ConfigError("separability_report: extra generator couples the two parts");
    extras_a.push_back(gs.part_a);
    extras_b.push_back(gs.part_b);
  }

  const PartView part_a = restrict_to(comp, gens, split, split.part_a, v_a, extras_a);
  const PartView part_b = restrict_to(comp, gens, split, split.part_b, v_b, extras_b);
  const Matrix h_a_full = kronecker(part_a.gens.assembled_hamiltonian(part_a.comp),
                                    Matrix::Identity(db, db));
  const Matrix h_b_full = kronecker(Matrix::Identity(da, da),
                                    part_b.gens.assembled_hamiltonian(part_b.comp));

  const std::vector<TauPolicy> pol(comp.subsystem_count(), TauPolicy::constant(1.0));
  const std::vector<TauPolicy> pol_a(part_a.comp.subsystem_count(), TauPolicy::constant(1.0));
  const std::vector<TauPolicy> pol_b(part_b.comp.subsystem_count(), TauPolicy::constant(1.0));

  SeparabilityReport rep;
  double min_entropy_rate = 0.0;
  Rng hb_rng(hb_seed);

  for (const Matrix& rho_raw : sample_states) {
    const SpectralState st = SpectralState::decompose(rho_raw, units, tol);
    const Matrix rho_a = partial_trace(st.rho(), comp, split.part_a);
    const Matrix rho_b = partial_trace(st.rho(), comp, split.part_b);
    const Matrix product = kronecker(rho_a, rho_b);
    const SpectralState st_prod =
        SpectralState::decompose((product + product.adjoint()) / 2.0, units, tol);
    const SpectralState sa =
        SpectralState::decompose((rho_a + rho_a.adjoint()) / 2.0, units, tol);
    const SpectralState sb =
        SpectralState::decompose((rho_b + rho_b.adjoint()) / 2.0, units, tol);

    // (a) product states: dissipator factorizes into the two local dynamics
    {
      const Matrix dis = dissipator_of(variant, st_prod, comp, gens, pol, units, tol);
      const Matrix dis_a =
          dissipator_of(variant, sa, part_a.comp, part_a.gens, pol_a, units, tol);
      const Matrix dis_b =
          dissipator_of(variant, sb, part_b.comp, part_b.gens, pol_b, units, tol);
      const Matrix expected = kronecker(dis_a, sb.rho()) + kronecker(sa.rho(), dis_b);
      rep.factorization_residual =
          std::max(rep.factorization_residual, operator_norm_max(dis - expected));

      // separate entropy nondecrease on the product state
      const double rate_a = -(partial_trace(dis, comp, split.part_a) * sa.log_on_range())
                                 .trace()
                                 .real() * units.k_B;
      const double rate_b = -(partial_trace(dis, comp, split.part_b) * sb.log_on_range())
                                 .trace()
                                 .real() * units.k_B;
      min_entropy_rate = std::min({min_entropy_rate, rate_a, rate_b});
    }

    // (b) correlated states: local energies conserved, reduced dissipative
    // dynamics blind to the other part's Hamiltonian
    const Matrix dis = dissipator_of(variant, st, comp, gens, pol, units, tol);
    rep.energy_rate_a = std::max(rep.energy_rate_a, std::abs((dis * h_a_full).trace().real()));
    rep.energy_rate_b = std::max(rep.energy_rate_b, std::abs((dis * h_b_full).trace().real()));

    const Matrix red_a_ref = partial_trace(dis, comp, split.part_a);
    for (int rep_i = 0; rep_i < 3; ++rep_i) {
      CompositeGenerators replaced = gens;
      for (int f : split.part_b)
        replaced.local_hamiltonians[f] = random_hermitian(hb_rng, comp.dims[f]);
      const Matrix dis2 = dissipator_of(variant, st, comp, replaced, pol, units, tol);
      rep.locality_deviation =
          std::max(rep.locality_deviation,
                   operator_norm_max(partial_trace(dis2, comp, split.part_a) - red_a_ref));
    }

    // tau separability: the per-subsystem times of a product state notice
    // only their own part, under both closures
    for (std::size_t k = 0; k < part_a.factors.size(); ++k) {
      const int f = part_a.factors[k];
      for (const TauPolicy& p : {TauPolicy::constant(0.7), TauPolicy::max_epr(1.0)}) {
        const DissipativeDirection d_full =
            local_dissipative_direction(st_prod, comp, gens, f, tol);
        const DissipativeDirection d_part =
            local_dissipative_direction(sa, part_a.comp, part_a.gens, static_cast<int>(k), tol);
        if (d_full.norm_sq <= tol.equilibrium_epsilon) continue;
        const double t_full = tau_J_value(p, st_prod, comp, gens, f, d_full, units, tol);
        const double t_part = tau_J_value(p, sa, part_a.comp, part_a.gens, static_cast<int>(k),
                                          d_part, units, tol);
        rep.tau_separability_deviation =
            std::max(rep.tau_separability_deviation, std::abs(t_full - t_part));
      }
    }
  }

  rep.min_subsystem_entropy_rate = min_entropy_rate;
  rep.pass_factorization = rep.factorization_residual < 1e-9;
  rep.pass_locality = rep.locality_deviation < 1e-9;
  rep.pass_energy = rep.energy_rate_a < 1e-9 && rep.energy_rate_b < 1e-9;
  rep.pass_entropy = rep.min_subsystem_entropy_rate > -1e-10;
  rep.pass_tau = rep.tau_separability_deviation < 1e-9;
  (void)n;
  return rep;
}

}  // namespace seaqt
