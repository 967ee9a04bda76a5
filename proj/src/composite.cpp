#include "seaqt/composite.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace seaqt {

namespace {

// Row-major factor strides: stride[j] = prod_{m > j} dims[m].
std::vector<long> factor_strides(const std::vector<int>& dims) {
  std::vector<long> s(dims.size(), 1);
  for (int j = static_cast<int>(dims.size()) - 2; j >= 0; --j)
    s[j] = s[j + 1] * dims[j + 1];
  return s;
}

// Flat offsets of a sub-multi-index over the listed factors.
std::vector<long> sub_offsets(const std::vector<int>& dims, const std::vector<long>& strides,
                              const std::vector<int>& factors) {
  long count = 1;
  for (int f : factors) count *= dims[f];
  std::vector<long> off(count, 0);
  for (long flat = 0; flat < count; ++flat) {
    long rest = flat, o = 0;
    for (int k = static_cast<int>(factors.size()) - 1; k >= 0; --k) {
      const int f = factors[k];
      o += (rest % dims[f]) * strides[f];
      rest /= dims[f];
    }
    off[flat] = o;
  }
  return off;
}

std::vector<int> complement_of(const CompositionStructure& comp, int j) {
  std::vector<int> bar;
  for (int f = 0; f < comp.subsystem_count(); ++f)
    if (f != j) bar.push_back(f);
  return bar;
}

}  // namespace

CompositionStructure CompositionStructure::make(std::vector<int> dims,
                                                std::vector<std::string> labels) {
  if (dims.empty()) throw std::invalid_argument("CompositionStructure: at least one subsystem");
  for (int d : dims)
    if (d < 1) throw std::invalid_argument("CompositionStructure: dimensions must be positive");
  if (labels.empty()) {
    labels.reserve(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i) labels.push_back("S" + std::to_string(i));
  }
  if (labels.size() != dims.size())
    throw std::invalid_argument("CompositionStructure: one label per subsystem");
  CompositionStructure c;
  c.dims = std::move(dims);
  c.labels = std::move(labels);
  if (c.total_dim() > kMaxDenseDim)
    throw std::invalid_argument("CompositionStructure: total dimension exceeds the dense bound");
  return c;
}

int CompositionStructure::total_dim() const {
  return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix partial_trace(const Matrix& rho, const CompositionStructure& comp,
                     const std::vector<int>& keep) {
  const int m = comp.subsystem_count();
  if (rho.rows() != comp.total_dim() || rho.cols() != comp.total_dim())
    throw std::invalid_argument("partial_trace: operator does not match the composition");
  std::vector<bool> kept(m, false);
  for (int f : keep) {
    if (f < 0 || f >= m || kept[f])
      throw std::invalid_argument("partial_trace: bad keep index set");
    kept[f] = true;
  }
  std::vector<int> traced;
  for (int f = 0; f < m; ++f)
    if (!kept[f]) traced.push_back(f);

  const auto strides = factor_strides(comp.dims);
  const auto k_off = sub_offsets(comp.dims, strides, keep);
  const auto t_off = sub_offsets(comp.dims, strides, traced);

  const long dk = static_cast<long>(k_off.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (long a = 0; a < dk; ++a)
    for (long b = 0; b < dk; ++b) {
      Complex sum = 0.0;
      for (long t : t_off) sum += rho(k_off[a] + t, k_off[b] + t);
      out(a, b) = sum;
    }
  return out;
}

Matrix compose_with_complement(const CompositionStructure& comp, int j, const Matrix& block_j,
                               const Matrix& bar_op) {
  const auto strides = factor_strides(comp.dims);
  const auto bar = complement_of(comp, j);
  const auto b_off = sub_offsets(comp.dims, strides, bar);
  const int dj = comp.dims[j];
  const long stride_j = strides[j];
  const int n = comp.total_dim();
  if (block_j.rows() != dj || static_cast<long>(b_off.size()) != bar_op.rows())
    throw std::invalid_argument("compose_with_complement: dimension mismatch");
  Matrix out = Matrix::Zero(n, n);
  for (int a = 0; a < dj; ++a)
    for (int b = 0; b < dj; ++b) {
      const Complex blk = block_j(a, b);
      if (blk == Complex(0.0)) continue;
      for (long u = 0; u < static_cast<long>(b_off.size()); ++u)
        for (long v = 0; v < static_cast<long>(b_off.size()); ++v)
          out(a * stride_j + b_off[u], b * stride_j + b_off[v]) = blk * bar_op(u, v);
    }
  return out;
}

Matrix embed_local(const CompositionStructure& comp, int j, const Matrix& op_j) {
  const int bar_dim = comp.bar_dim(j);
  return compose_with_complement(comp, j, op_j, Matrix::Identity(bar_dim, bar_dim));
}

Matrix permute_subsystems(const Matrix& op, const CompositionStructure& comp,
                          const std::vector<int>& perm) {
  const int m = comp.subsystem_count();
  if (static_cast<int>(perm.size()) != m)
    throw std::invalid_argument("permute_subsystems: permutation size mismatch");
  std::vector<int> new_dims(m);
  for (int k = 0; k < m; ++k) new_dims[k] = comp.dims[perm[k]];
  const auto old_strides = factor_strides(comp.dims);
  const auto new_strides = factor_strides(new_dims);
  const int n = comp.total_dim();
  // map old flat index -> new flat index
  std::vector<long> map(n, 0);
  for (long idx = 0; idx < n; ++idx) {
    long rest = idx;
    std::vector<int> fi(m);
    for (int f = 0; f < m; ++f) {
      fi[f] = static_cast<int>(rest / old_strides[f]);
      rest %= old_strides[f];
    }
    long out = 0;
    for (int k = 0; k < m; ++k) out += static_cast<long>(fi[perm[k]]) * new_strides[k];
    map[idx] = out;
  }
  Matrix out(n, n);
  for (long r = 0; r < n; ++r)
    for (long c = 0; c < n; ++c) out(map[r], map[c]) = op(r, c);
  return out;
}

CompositeGenerators CompositeGenerators::make(const CompositionStructure& comp,
                                              std::vector<Matrix> local_hamiltonians,
                                              Matrix interaction,
                                              std::vector<Matrix> global_extras,
                                              double commutation_tolerance) {
  if (static_cast<int>(local_hamiltonians.size()) != comp.subsystem_count())
    throw std::invalid_argument("CompositeGenerators: one local Hamiltonian per subsystem");
  for (int j = 0; j < comp.subsystem_count(); ++j) {
    const Matrix& h = local_hamiltonians[j];
    if (h.rows() != comp.dims[j] || h.cols() != comp.dims[j])
      throw std::invalid_argument("CompositeGenerators: local Hamiltonian dimension mismatch");
    if (!is_hermitian(h))
      throw std::invalid_argument("CompositeGenerators: local Hamiltonian must be Hermitian");
  }
  const int n = comp.total_dim();
  if (interaction.size() != 0) {
    if (interaction.rows() != n || interaction.cols() != n)
      throw std::invalid_argument("CompositeGenerators: interaction dimension mismatch");
    if (!is_hermitian(interaction))
      throw std::invalid_argument("CompositeGenerators: interaction must be Hermitian");
  }
  CompositeGenerators g;
  g.local_hamiltonians = std::move(local_hamiltonians);
  g.interaction = std::move(interaction);
  g.global_extras = std::move(global_extras);
  g.commutation_tolerance = commutation_tolerance;
  const Matrix h = g.assembled_hamiltonian(comp);
  for (std::size_t i = 0; i < g.global_extras.size(); ++i) {
    const Matrix& x = g.global_extras[i];
    if (x.rows() != n || x.cols() != n || !is_hermitian(x))
      throw std::invalid_argument("CompositeGenerators: extra generator invalid");
    if (operator_norm_max(commutator(x, h)) > commutation_tolerance)
      throw std::invalid_argument("CompositeGenerators: extra generator " + std::to_string(i) +
                                  " does not commute with H");
  }
  return g;
}

Matrix CompositeGenerators::assembled_hamiltonian(const CompositionStructure& comp) const {
  const int n = comp.total_dim();
  Matrix h = Matrix::Zero(n, n);
  for (int j = 0; j < comp.subsystem_count(); ++j) h += embed_local(comp, j, local_hamiltonians[j]);
  if (interaction.size() != 0) h += interaction;
  return h;
}

GeneratorSet CompositeGenerators::as_single(const CompositionStructure& comp) const {
  return GeneratorSet::make(assembled_hamiltonian(comp), global_extras, commutation_tolerance);
}

Matrix CompositeGenerators::separated_extra(const CompositionStructure& comp,
                                            const std::vector<Matrix>& locals) {
  if (static_cast<int>(locals.size()) != comp.subsystem_count())
    throw std::invalid_argument("separated_extra: one local operator per subsystem");
  const int n = comp.total_dim();
  Matrix out = Matrix::Zero(n, n);
  for (int j = 0; j < comp.subsystem_count(); ++j) out += embed_local(comp, j, locals[j]);
  return out;
}

Matrix perception_operator(const SpectralState& state, const CompositionStructure& comp, int j,
                           const Matrix& f) {
  const int m = comp.subsystem_count();
  if (j < 0 || j >= m) throw std::invalid_argument("perception_operator: bad subsystem index");
  if (f.rows() != comp.total_dim())
    throw std::invalid_argument("perception_operator: operator on the full space required");
  const auto bar = complement_of(comp, j);
  const Matrix rho_bar = partial_trace(state.rho(), comp, bar);
  const auto strides = factor_strides(comp.dims);
  const auto b_off = sub_offsets(comp.dims, strides, bar);
  const long stride_j = strides[j];
  const int dj = comp.dims[j];
  const long db = static_cast<long>(b_off.size());

  // (F)^J(a,b) = sum_{u,v} rho_bar(u,v) F[(a,v),(b,u)]
  Matrix out = Matrix::Zero(dj, dj);
  for (int a = 0; a < dj; ++a)
    for (int b = 0; b < dj; ++b) {
      Complex sum = 0.0;
      for (long u = 0; u < db; ++u)
        for (long v = 0; v < db; ++v)
          sum += rho_bar(u, v) * f(a * stride_j + b_off[v], b * stride_j + b_off[u]);
      out(a, b) = sum;
    }
  return out;
}

LocalFrame local_frame(const SpectralState& state, const CompositionStructure& comp,
                       const CompositeGenerators& gens, int j, const UnitSystem& units,
                       const Tolerances& tol) {
  LocalFrame frame;
  frame.index = j;
  const auto bar = complement_of(comp, j);
  frame.rho_jbar = partial_trace(state.rho(), comp, bar);
  const Matrix rho_j = partial_trace(state.rho(), comp, {j});
  frame.rho_j = SpectralState::decompose((rho_j + rho_j.adjoint()) / 2.0, units, tol);

  const Matrix h = gens.assembled_hamiltonian(comp);
  frame.perceived_hamiltonian = perception_operator(state, comp, j, h);
  frame.perceived_entropy =
      perception_operator(state, comp, j, state.entropy_op());
  for (const Matrix& g : gens.global_extras)
    frame.perceived_extras.push_back(perception_operator(state, comp, j, g));

  const Matrix& sq = frame.rho_j.sqrt_rho();
  std::vector<Matrix> raw;
  raw.push_back(sq);  // sqrt(rho_J) I_J
  raw.push_back(sq * frame.perceived_hamiltonian);
  for (const Matrix& g : frame.perceived_extras) raw.push_back(sq * g);
  OrthonormalBasis ob = orthonormalize(raw, tol.manifold_epsilon);

  // perceived range-restricted log of the overall state
  const Matrix perceived_log = perception_operator(state, comp, j, state.log_on_range());
  const Matrix slog = sq * perceived_log;
  Matrix d = slog;
  DissipativeDirection dir;
  dir.multipliers.resize(ob.size());
  for (int sweep = 0; sweep < 2; ++sweep)
    for (int k = 0; k < ob.size(); ++k) {
      const double p = real_inner(ob.basis[k], d);
      if (sweep == 0) dir.multipliers[k] = real_inner(ob.basis[k], slog);
      d -= p * ob.basis[k];
    }
  dir.D = std::move(d);
  dir.norm_sq = real_inner(dir.D, dir.D);
  dir.manifold_basis = std::move(ob.basis);
  dir.retained = std::move(ob.retained);
  dir.basis_coeffs = std::move(ob.coeffs);
  frame.direction = std::move(dir);
  return frame;
}

DissipativeDirection local_dissipative_direction(const SpectralState& state,
                                                 const CompositionStructure& comp,
                                                 const CompositeGenerators& gens, int j,
                                                 const Tolerances& tol) {
  return local_frame(state, comp, gens, j, UnitSystem{}, tol).direction;
}

double perceived_energy_covariance(const SpectralState& state, const CompositionStructure& comp,
                                   const CompositeGenerators& gens, int j) {
  const Matrix h = gens.assembled_hamiltonian(comp);
  const Matrix ph = perception_operator(state, comp, j, h);
  const double e = state.mean(h);
  const Matrix dh = ph - e * Matrix::Identity(comp.dims[j], comp.dims[j]);
  const Matrix rho_j = partial_trace(state.rho(), comp, {j});
  return (rho_j * dh * dh).trace().real();
}

double tau_J_value(const TauPolicy& policy, const SpectralState& state,
                   const CompositionStructure& comp, const CompositeGenerators& gens, int j,
                   const DissipativeDirection& dir_j, const UnitSystem& units,
                   const Tolerances& tol) {
  switch (policy.kind) {
    case TauPolicy::Kind::Constant:
      return policy.value;
    case TauPolicy::Kind::MaxEPR: {
      const double var = perceived_energy_covariance(state, comp, gens, j);
      if (var < policy.variance_epsilon || dir_j.norm_sq < tol.equilibrium_epsilon)
        return policy.fallback;
      return 0.5 * units.hbar * std::sqrt(dir_j.norm_sq / var);
    }
    case TauPolicy::Kind::Custom: {
      const double v = policy.custom(state);
      if (!(v > 0)) throw InvariantError("custom tau functional returned a nonpositive value");
      return v;
    }
  }
  throw std::logic_error("unreachable tau policy kind");
}

namespace {

std::vector<TauPolicy> checked_policies(const CompositionStructure& comp,
                                        const std::vector<TauPolicy>& policies) {
  if (policies.size() == 1 && comp.subsystem_count() > 1)
    return std::vector<TauPolicy>(comp.subsystem_count(), policies.front());
  if (static_cast<int>(policies.size()) != comp.subsystem_count())
    throw std::invalid_argument("one tau policy per subsystem required");
  return policies;
}

}  // namespace

Matrix composite_dissipator(const SpectralState& state, const CompositionStructure& comp,
                            const CompositeGenerators& gens,
                            const std::vector<TauPolicy>& policies, const UnitSystem& units,
                            const Tolerances& tol) {
  const auto pol = checked_policies(comp, policies);
  const int n = comp.total_dim();
  Matrix out = Matrix::Zero(n, n);
  for (int j = 0; j < comp.subsystem_count(); ++j) {
    LocalFrame frame = local_frame(state, comp, gens, j, units, tol);
    const DissipativeDirection& dir = frame.direction;
    if (dir.norm_sq == 0.0) continue;
    if (pol[j].kind == TauPolicy::Kind::MaxEPR && dir.norm_sq < tol.equilibrium_epsilon)
      continue;
    const double tau = tau_J_value(pol[j], state, comp, gens, j, dir, units, tol);
    const Matrix& sq = frame.rho_j.sqrt_rho();
    const Matrix block = (-0.5 / tau) * (sq * dir.D + dir.D.adjoint() * sq);
    out += compose_with_complement(comp, j, block, frame.rho_jbar);
  }
  return out;
}

Matrix composite_rhs(const SpectralState& state, const CompositionStructure& comp,
                     const CompositeGenerators& gens, const std::vector<TauPolicy>& policies,
                     const UnitSystem& units, const Tolerances& tol) {
  const Matrix h = gens.assembled_hamiltonian(comp);
  const Complex mi_over_hbar(0.0, -1.0 / units.hbar);
  return mi_over_hbar * commutator(h, state.rho()) +
         composite_dissipator(state, comp, gens, policies, units, tol);
}

double composite_entropy_rate(const SpectralState& state, const CompositionStructure& comp,
                              const CompositeGenerators& gens,
                              const std::vector<TauPolicy>& policies, const UnitSystem& units,
                              const Tolerances& tol) {
  const auto pol = checked_policies(comp, policies);
  double rate = 0.0;
  for (int j = 0; j < comp.subsystem_count(); ++j) {
    const DissipativeDirection dir = local_dissipative_direction(state, comp, gens, j, tol);
    if (dir.norm_sq <= 0.0) continue;
    if (pol[j].kind == TauPolicy::Kind::MaxEPR && dir.norm_sq < tol.equilibrium_epsilon)
      continue;
    rate += units.k_B * dir.norm_sq / tau_J_value(pol[j], state, comp, gens, j, dir, units, tol);
  }
  return rate;
}

double local_variational_residual(const SpectralState& state, const CompositionStructure& comp,
                                  const CompositeGenerators& gens, int j,
                                  const TauPolicy& policy, const UnitSystem& units,
                                  const Tolerances& tol) {
  const LocalFrame frame = local_frame(state, comp, gens, j, units, tol);
  const Matrix& sq = frame.rho_j.sqrt_rho();
  // partial gradient of the perceived entropy: 2 sqrt(rho_J) (S)^J
  const Matrix grad = 2.0 * (sq * frame.perceived_entropy);

  std::vector<Matrix> basis;
  basis.push_back(2.0 * sq);
  basis.push_back(2.0 * (sq * frame.perceived_hamiltonian));
  for (const Matrix& g : frame.perceived_extras) basis.push_back(2.0 * (sq * g));
  if (frame.direction.norm_sq > 0.0) {
    const double tau = tau_J_value(policy, state, comp, gens, j, frame.direction, units, tol);
    basis.push_back((-0.5 / tau) * frame.direction.D);
  }
  const int m = static_cast<int>(basis.size());
  RealMatrix g(m, m);
  RealVector b(m);
  for (int r = 0; r < m; ++r) {
    b(r) = real_inner(basis[r], grad);
    for (int c = r; c < m; ++c) g(r, c) = g(c, r) = real_inner(basis[r], basis[c]);
  }
  const RealVector lam = g.completeOrthogonalDecomposition().solve(b);
  Matrix res = grad;
  for (int r = 0; r < m; ++r) res -= lam(r) * basis[r];
  return op_norm(res);
}

namespace {

// Tr_Jbar[(I_J (x) sqrt(rho_Jbar)) sqrt(rho) F]: the sqrt-weighted perception
// of the flawed construction.
Matrix sqrt_perception(const SpectralState& state, const CompositionStructure& comp, int j,
                       const Matrix& sqrt_rho_bar, const Matrix& f) {
  const auto bar = complement_of(comp, j);
  const auto strides = factor_strides(comp.dims);
  const auto b_off = sub_offsets(comp.dims, strides, bar);
  const long stride_j = strides[j];
  const int dj = comp.dims[j];
  const long db = static_cast<long>(b_off.size());
  const Matrix sf = state.sqrt_rho() * f;
  Matrix out = Matrix::Zero(dj, dj);
  for (int a = 0; a < dj; ++a)
    for (int b = 0; b < dj; ++b) {
      Complex sum = 0.0;
      for (long u = 0; u < db; ++u)
        for (long v = 0; v < db; ++v)
          sum += sqrt_rho_bar(u, v) * sf(a * stride_j + b_off[v], b * stride_j + b_off[u]);
      out(a, b) = sum;
    }
  return out;
}

}  // namespace

Matrix flawed_variant_dissipator(const SpectralState& state, const CompositionStructure& comp,
                                 const CompositeGenerators& gens,
                                 const std::vector<TauPolicy>& policies, const UnitSystem& units,
                                 const Tolerances& tol) {
  const auto pol = checked_policies(comp, policies);
  const int n = comp.total_dim();
  const Matrix h = gens.assembled_hamiltonian(comp);
  Matrix e_d = Matrix::Zero(n, n);
  for (int j = 0; j < comp.subsystem_count(); ++j) {
    const auto bar = complement_of(comp, j);
    const Matrix rho_bar = partial_trace(state.rho(), comp, bar);
    const Matrix sqrt_bar =
        SpectralState::decompose((rho_bar + rho_bar.adjoint()) / 2.0, units, tol).sqrt_rho();

    std::vector<Matrix> manifold;
    manifold.push_back(sqrt_perception(state, comp, j, sqrt_bar, identity(n)));
    manifold.push_back(sqrt_perception(state, comp, j, sqrt_bar, h));
    for (const Matrix& g : gens.global_extras)
      manifold.push_back(sqrt_perception(state, comp, j, sqrt_bar, g));
    const Matrix slog = sqrt_perception(state, comp, j, sqrt_bar, state.log_on_range());
    const Matrix d_j = project_orthogonal(slog, manifold, tol.manifold_epsilon);
    const double norm_sq = real_inner(d_j, d_j);
    if (norm_sq == 0.0) continue;

    // The closure reuses the same tau policies; MaxEPR rates the local
    // direction against the perceived energy variance as in the main form.
    double tau = 0.0;
    if (pol[j].kind == TauPolicy::Kind::MaxEPR) {
      const double var = perceived_energy_covariance(state, comp, gens, j);
      tau = (var < pol[j].variance_epsilon) ? pol[j].fallback
                                            : 0.5 * units.hbar * std::sqrt(norm_sq / var);
    } else if (pol[j].kind == TauPolicy::Kind::Constant) {
      tau = pol[j].value;
    } else {
      tau = pol[j].custom(state);
    }
    e_d += compose_with_complement(comp, j, (-0.5 / tau) * d_j, sqrt_bar);
  }
  const Matrix& sq = state.sqrt_rho();
  return sq * e_d + e_d.adjoint() * sq;
}

Matrix flawed_variant_rhs(const SpectralState& state, const CompositionStructure& comp,
                          const CompositeGenerators& gens,
                          const std::vector<TauPolicy>& policies, const UnitSystem& units,
                          const Tolerances& tol) {
  const Matrix h = gens.assembled_hamiltonian(comp);
  const Complex mi_over_hbar(0.0, -1.0 / units.hbar);
  return mi_over_hbar * commutator(h, state.rho()) +
         flawed_variant_dissipator(state, comp, gens, policies, units, tol);
}

Bipartition Bipartition::split_after(const CompositionStructure& comp, int first_b_factor) {
  if (first_b_factor <= 0 || first_b_factor >= comp.subsystem_count())
    throw std::invalid_argument("Bipartition: split index out of range");
  Bipartition p;
  for (int f = 0; f < comp.subsystem_count(); ++f)
    (f < first_b_factor ? p.part_a : p.part_b).push_back(f);
  return p;
}

double correlation_functional(const SpectralState& state, const CompositionStructure& comp,
                              const Bipartition& split, const Tolerances& tol) {
  const Matrix rho_a = partial_trace(state.rho(), comp, split.part_a);
  const Matrix rho_b = partial_trace(state.rho(), comp, split.part_b);
  const UnitSystem natural{1.0, 1.0};
  const double s_ab = SpectralState::decompose(state.rho(), natural, tol).entropy();
  const double s_a =
      SpectralState::decompose((rho_a + rho_a.adjoint()) / 2.0, natural, tol).entropy();
  const double s_b =
      SpectralState::decompose((rho_b + rho_b.adjoint()) / 2.0, natural, tol).entropy();
  return s_a + s_b - s_ab;
}

namespace {

double sigma_of(const Matrix& rho, const CompositionStructure& comp, const Bipartition& split,
                const Tolerances& tol) {
  // entropy evaluated with clipped spectra so finite differences can step
  // slightly outside the state set
  auto ent = [&](const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0);
    double s = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      const double w = es.eigenvalues()(i);
      if (w > tol.rank_cut(static_cast<int>(m.rows()))) s -= w * std::log(w);
    }
    return s;
  };
  const Matrix rho_a = partial_trace(rho, comp, split.part_a);
  const Matrix rho_b = partial_trace(rho, comp, split.part_b);
  return ent(rho_a) + ent(rho_b) - ent(rho);
}

double directional_sigma_rate(const SpectralState& state, const CompositionStructure& comp,
                              const Bipartition& split, const Matrix& v, const Tolerances& tol) {
  const Matrix rho_a = partial_trace(state.rho(), comp, split.part_a);
  const Matrix rho_b = partial_trace(state.rho(), comp, split.part_b);
  const UnitSystem natural{1.0, 1.0};
  const auto sa = SpectralState::decompose((rho_a + rho_a.adjoint()) / 2.0, natural, tol);
  const auto sb = SpectralState::decompose((rho_b + rho_b.adjoint()) / 2.0, natural, tol);
  const bool analytic = state.full_rank() && sa.full_rank() && sb.full_rank();
  if (analytic) {
    // d/dt Tr(rho ln rho) = Tr(rho_dot ln rho) for traceless rho_dot
    const double g = (v * state.log_on_range()).trace().real();
    const double ga = (partial_trace(v, comp, split.part_a) * sa.log_on_range()).trace().real();
    const double gb = (partial_trace(v, comp, split.part_b) * sb.log_on_range()).trace().real();
    return g - ga - gb;
  }
  const double h = 1e-6;
  auto fd = [&](double step) {
    return (sigma_of(state.rho() + step * v, comp, split, tol) -
            sigma_of(state.rho() - step * v, comp, split, tol)) /
           (2.0 * step);
  };
  const double d1 = fd(h);
  const double d2 = fd(h / 2.0);
  // one Richardson refinement; d1 vs d2 doubles as a consistency check
  return (4.0 * d2 - d1) / 3.0;
}

}  // namespace

CorrelationRates correlation_rate_split(const SpectralState& state,
                                        const CompositionStructure& comp,
                                        const CompositeGenerators& gens,
                                        const std::vector<TauPolicy>& policies,
                                        const Bipartition& split, const UnitSystem& units,
                                        const Tolerances& tol) {
  const Matrix h = gens.assembled_hamiltonian(comp);
  const Complex mi_over_hbar(0.0, -1.0 / units.hbar);
  const Matrix v_h = mi_over_hbar * commutator(h, state.rho());
  const Matrix v_d = composite_dissipator(state, comp, gens, policies, units, tol);
  CorrelationRates out;
  // rates of sigma_AB = Tr(rho ln rho) - Tr(rho_A ln rho_A) - Tr(rho_B ln rho_B)
  out.hamiltonian_part = directional_sigma_rate(state, comp, split, v_h, tol);
  out.dissipative_part = -directional_sigma_rate(state, comp, split, v_d, tol);
  return out;
}

}  // namespace seaqt
