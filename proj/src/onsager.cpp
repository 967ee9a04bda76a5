#include "seaqt/onsager.hpp"

#include <cmath>

namespace seaqt {

ObservableBasis ObservableBasis::gell_mann(int dim) {
  ObservableBasis b;
  for (int j = 0; j < dim; ++j)
    for (int k = j + 1; k < dim; ++k) {
      Matrix re = Matrix::Zero(dim, dim);
      re(j, k) = re(k, j) = 1.0;
      b.ops.push_back(re);
      Matrix im = Matrix::Zero(dim, dim);
      im(j, k) = Complex(0, -1);
      im(k, j) = Complex(0, 1);
      b.ops.push_back(im);
    }
  for (int l = 1; l < dim; ++l) {
    Matrix d = Matrix::Zero(dim, dim);
    const double norm = std::sqrt(2.0 / (l * (l + 1.0)));
    for (int j = 0; j < l; ++j) d(j, j) = norm;
    d(l, l) = -l * norm;
    b.ops.push_back(d);
  }
  return b;
}

ObservableBasis ObservableBasis::orthogonal_extension(const SpectralState& state,
                                                      const GeneratorSet& gen,
                                                      const Tolerances& tol) {
  if (!state.full_rank())
    throw InvariantError("orthogonal_extension: requires a full-rank state");
  const int n = state.dim();
  const Matrix& sq = state.sqrt_rho();

  std::vector<Matrix> herm = gen.motion_generators();
  const ObservableBasis gm = gell_mann(n);
  herm.insert(herm.end(), gm.ops.begin(), gm.ops.end());

  std::vector<Matrix> weighted;
  for (const Matrix& x : herm) weighted.push_back(sq * x);
  const OrthonormalBasis ob = orthonormalize(weighted, tol.manifold_epsilon);

  ObservableBasis out;
  out.tag = Tag::OrthogonalExtension;
  // Skip the leading normalized identity direction (A_1 = I); the X_j list
  // excludes the identity by convention.
  for (int k = 1; k < ob.size(); ++k) {
    Matrix x = Matrix::Zero(n, n);
    for (int j = 0; j < ob.size(); ++j)
      if (ob.coeffs(k, j) != 0.0) x += ob.coeffs(k, j) * herm[ob.retained[j]];
    out.ops.push_back((x + x.adjoint()) / 2.0);
  }
  return out;
}

AffinityVector affinities_from_state(const SpectralState& state, const ObservableBasis& basis,
                                     const UnitSystem& units) {
  (void)units;
  const int n = state.dim();
  const Matrix& b_proj = state.range_projector();
  const Matrix target = -state.log_on_range();  // f0 B + sum f_j B X_j B

  std::vector<Matrix> design;
  design.push_back(b_proj);
  std::vector<int> unident;
  for (std::size_t j = 0; j < basis.ops.size(); ++j) {
    Matrix bxb = b_proj * basis.ops[j] * b_proj;
    if (op_norm(bxb) < 1e-13) unident.push_back(static_cast<int>(j));
    design.push_back(std::move(bxb));
  }

  // least squares over the real vectorization
  const int cols = static_cast<int>(design.size());
  RealMatrix a(2 * n * n, cols);
  RealVector y(2 * n * n);
  for (int c = 0; c < cols; ++c)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        a(i * n + j, c) = design[c](i, j).real();
        a(n * n + i * n + j, c) = design[c](i, j).imag();
      }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      y(i * n + j) = target(i, j).real();
      y(n * n + i * n + j) = target(i, j).imag();
    }

  Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(a);
  cod.setThreshold(1e-10);
  const RealVector sol = cod.solve(y);  // min-norm when overcomplete

  AffinityVector out;
  out.f0 = sol(0);
  out.f = sol.tail(cols - 1);
  out.unidentifiable = std::move(unident);
  Matrix rebuilt = -out.f0 * b_proj;
  for (int j = 0; j < cols - 1; ++j) rebuilt -= out.f(j) * design[j + 1];
  out.residual = op_norm(rebuilt - state.log_on_range());
  // a basis that cannot represent B ln rho on the range is a configuration
  // problem, reported with the number of missing directions
  if (out.residual > 1e-9 * std::max(1.0, op_norm(state.log_on_range()))) {
    const int required = state.rank() * state.rank();
    throw InvariantError("affinities_from_state: expansion residual " +
                         std::to_string(out.residual) + "; basis covers " +
                         std::to_string(cod.rank()) + " of " + std::to_string(required) +
                         " range-subalgebra directions");
  }
  return out;
}

namespace {

std::vector<Matrix> manifold_raw(const SpectralState& state, const GeneratorSet& gen) {
  std::vector<Matrix> raw;
  for (const Matrix& r : gen.motion_generators()) raw.push_back(state.sqrt_rho() * r);
  return raw;
}

}  // namespace

ConductivityMatrix conductivity_matrix(const SpectralState& state, const GeneratorSet& gen,
                                       const ObservableBasis& basis, const TauPolicy& policy,
                                       const UnitSystem& units, const Tolerances& tol) {
  const DissipativeDirection dir = dissipative_direction(state, gen, tol);
  const double tau = tau_value(policy, state, gen, dir, units, tol);
  const OrthonormalBasis ob = orthonormalize(manifold_raw(state, gen), tol.manifold_epsilon);

  const int m = static_cast<int>(basis.ops.size());
  std::vector<Matrix> perp(m);
  for (int i = 0; i < m; ++i) {
    Matrix w = state.sqrt_rho() * basis.ops[i];
    for (int sweep = 0; sweep < 2; ++sweep)
      for (const Matrix& u : ob.basis) w -= real_inner(u, w) * u;
    perp[i] = std::move(w);
  }
  ConductivityMatrix out;
  out.L.resize(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) out.L(i, j) = out.L(j, i) = real_inner(perp[i], perp[j]) / tau;
  return out;
}

std::vector<double> dissipative_rates(const SpectralState& state, const GeneratorSet& gen,
                                      const ObservableBasis& basis, const TauPolicy& policy,
                                      const UnitSystem& units, const Tolerances& tol) {
  const DissipativeDirection dir = dissipative_direction(state, gen, tol);
  const double tau = tau_value(policy, state, gen, dir, units, tol);
  const Matrix dis = dissipative_term(state, dir, tau);
  std::vector<double> rates;
  rates.reserve(basis.ops.size());
  for (const Matrix& x : basis.ops) rates.push_back((dis * x).trace().real());
  return rates;
}

EntropyRateQuadratic entropy_rate_quadratic(const SpectralState& state, const GeneratorSet& gen,
                                            const ObservableBasis& basis, const TauPolicy& policy,
                                            const UnitSystem& units, const Tolerances& tol) {
  const AffinityVector aff = affinities_from_state(state, basis, units);
  const ConductivityMatrix cm = conductivity_matrix(state, gen, basis, policy, units, tol);
  EntropyRateQuadratic out;
  out.quadratic = units.k_B * aff.f.dot(cm.L * aff.f);

  // inverse form on the active block: indices whose projected direction and
  // affinity both survive
  const std::vector<double> rates = dissipative_rates(state, gen, basis, policy, units, tol);
  std::vector<int> active;
  for (int i = 0; i < cm.L.rows(); ++i)
    if (cm.L(i, i) > 1e-12) active.push_back(i);
  if (!active.empty()) {
    RealMatrix lb(active.size(), active.size());
    RealVector rb(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) {
      rb(i) = rates[active[i]];
      for (std::size_t j = 0; j < active.size(); ++j) lb(i, j) = cm.L(active[i], active[j]);
    }
    Eigen::LDLT<RealMatrix> ldlt(lb);
    if (ldlt.info() == Eigen::Success) {
      const RealVector x = ldlt.solve(rb);
      const double rel = (lb * x - rb).norm() / (rb.norm() + 1e-300);
      if (rel < 1e-8) {
        out.inverse_form_valid = true;
        out.inverse_form = units.k_B * rb.dot(x);
      }
    }
  }
  return out;
}

ConductivityMatrix composite_conductivities(const SpectralState& state,
                                            const CompositionStructure& comp,
                                            const CompositeGenerators& gens,
                                            const ObservableBasis& basis,
                                            const std::vector<TauPolicy>& policies,
                                            const UnitSystem& units, const Tolerances& tol) {
  const int m = static_cast<int>(basis.ops.size());
  ConductivityMatrix out;
  out.L = RealMatrix::Zero(m, m);
  std::vector<TauPolicy> pol = policies;
  if (pol.size() == 1 && comp.subsystem_count() > 1)
    pol.assign(comp.subsystem_count(), policies.front());

  for (int j = 0; j < comp.subsystem_count(); ++j) {
    const LocalFrame frame = local_frame(state, comp, gens, j, units, tol);
    const double tau = tau_J_value(pol[j], state, comp, gens, j, frame.direction, units, tol);
    const Matrix& sq = frame.rho_j.sqrt_rho();
    std::vector<Matrix> perp(m);
    for (int i = 0; i < m; ++i) {
      Matrix w = sq * perception_operator(state, comp, j, basis.ops[i]);
      for (int sweep = 0; sweep < 2; ++sweep)
        for (const Matrix& u : frame.direction.manifold_basis) w -= real_inner(u, w) * u;
      perp[i] = std::move(w);
    }
    RealMatrix lj(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = a; b < m; ++b) lj(a, b) = lj(b, a) = real_inner(perp[a], perp[b]) / tau;
    out.per_subsystem.push_back(lj);
    out.L += lj;
  }
  return out;
}

}  // namespace seaqt
