#include "seaqt/single_system.hpp"

#include <cmath>

namespace seaqt {

GeneratorSet GeneratorSet::make(Matrix hamiltonian, std::vector<Matrix> extras,
                                double commutation_tolerance) {
  if (hamiltonian.rows() != hamiltonian.cols())
    throw std::invalid_argument("GeneratorSet: Hamiltonian must be square");
  if (!is_hermitian(hamiltonian))
    throw std::invalid_argument("GeneratorSet: Hamiltonian must be Hermitian");
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const Matrix& g = extras[i];
    if (g.rows() != hamiltonian.rows() || g.cols() != hamiltonian.cols())
      throw std::invalid_argument("GeneratorSet: extra generator dimension mismatch");
    if (!is_hermitian(g))
      throw std::invalid_argument("GeneratorSet: extra generator must be Hermitian");
    const double comm = operator_norm_max(commutator(g, hamiltonian));
    if (comm > commutation_tolerance)
      throw std::invalid_argument("GeneratorSet: generator " + std::to_string(i) +
                                  " does not commute with H (||[G,H]|| = " +
                                  std::to_string(comm) + ")");
  }
  GeneratorSet gen;
  gen.hamiltonian = std::move(hamiltonian);
  gen.extras = std::move(extras);
  gen.commutation_tolerance = commutation_tolerance;
  return gen;
}

std::vector<Matrix> GeneratorSet::motion_generators() const {
  std::vector<Matrix> out;
  out.reserve(extras.size() + 2);
  out.push_back(identity(dim()));
  out.push_back(hamiltonian);
  for (const Matrix& g : extras) out.push_back(g);
  return out;
}

TauPolicy TauPolicy::constant(double v) {
  if (!(v > 0)) throw ConfigError("TauPolicy: constant tau must be positive");
  TauPolicy p;
  p.kind = Kind::Constant;
  p.value = v;
  return p;
}

TauPolicy TauPolicy::max_epr(double fallback, double variance_epsilon) {
  if (!(fallback > 0) || !(variance_epsilon > 0))
    throw ConfigError("TauPolicy: MaxEPR fallback and variance_epsilon must be positive");
  TauPolicy p;
  p.kind = Kind::MaxEPR;
  p.fallback = fallback;
  p.variance_epsilon = variance_epsilon;
  return p;
}

TauPolicy TauPolicy::custom_fn(std::string tag,
                               std::function<double(const SpectralState&)> fn) {
  TauPolicy p;
  p.kind = Kind::Custom;
  p.custom_tag = std::move(tag);
  p.custom = std::move(fn);
  return p;
}

Matrix hamiltonian_term(const SpectralState& state, const GeneratorSet& gen,
                        const UnitSystem& units) {
  const Complex mi_over_hbar(0.0, -1.0 / units.hbar);
  return mi_over_hbar * commutator(gen.hamiltonian, state.rho());
}

Matrix hamiltonian_gradient(const SpectralState& state, const GeneratorSet& gen,
                            const UnitSystem& units) {
  const Matrix dH =
      gen.hamiltonian - state.mean(gen.hamiltonian) * identity(state.dim());
  return Complex(0.0, 1.0 / units.hbar) * (state.sqrt_rho() * dH);
}

double tau_H(const SpectralState& state, const GeneratorSet& gen, const UnitSystem& units) {
  const double var = state.covariance(gen.hamiltonian, gen.hamiltonian);
  if (var <= 0.0) return kInfiniteTime;
  return units.hbar / (2.0 * std::sqrt(var));
}

DissipativeDirection dissipative_direction(const SpectralState& state,
                                           const GeneratorSet& gen, const Tolerances& tol) {
  DissipativeDirection dir;
  const Matrix& sq = state.sqrt_rho();
  std::vector<Matrix> raw;
  for (const Matrix& r : gen.motion_generators()) raw.push_back(sq * r);
  OrthonormalBasis ob = orthonormalize(raw, tol.manifold_epsilon);

  const Matrix slog = sq * state.log_on_range();
  Matrix d = slog;
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
  return dir;
}

double tau_value(const TauPolicy& policy, const SpectralState& state, const GeneratorSet& gen,
                 const DissipativeDirection& dir, const UnitSystem& units,
                 const Tolerances& tol) {
  switch (policy.kind) {
    case TauPolicy::Kind::Constant:
      return policy.value;
    case TauPolicy::Kind::MaxEPR: {
      const double var = state.covariance(gen.hamiltonian, gen.hamiltonian);
      if (var < policy.variance_epsilon) return policy.fallback;
      // at (D|D) below the equilibrium threshold the dissipator is off and
      // tau is irrelevant; report the fallback instead of a vanishing bound
      if (dir.norm_sq < tol.equilibrium_epsilon) return policy.fallback;
      return 0.5 * units.hbar * std::sqrt(dir.norm_sq / var);
    }
    case TauPolicy::Kind::Custom: {
      const double v = policy.custom(state);
      if (!(v > 0)) throw InvariantError("custom tau functional returned a nonpositive value");
      return v;
    }
  }
  throw std::logic_error("unreachable tau policy kind");
}

Matrix dissipative_term(const SpectralState& state, const DissipativeDirection& dir,
                        double tau) {
  const Matrix& sq = state.sqrt_rho();
  return (-0.5 / tau) * (sq * dir.D + dir.D.adjoint() * sq);
}

Matrix rhs(const SpectralState& state, const GeneratorSet& gen, const TauPolicy& policy,
           const UnitSystem& units, const Tolerances& tol) {
  const DissipativeDirection dir = dissipative_direction(state, gen, tol);
  Matrix out = hamiltonian_term(state, gen, units);
  if (dir.norm_sq == 0.0) return out;
  // Under MaxEPR tau -> 0 as D -> 0 while the step direction D/||D|| turns
  // into noise; below the equilibrium threshold the state counts as
  // equilibrated and the dissipator is switched off.
  if (policy.kind == TauPolicy::Kind::MaxEPR && dir.norm_sq < tol.equilibrium_epsilon)
    return out;
  const double tau = tau_value(policy, state, gen, dir, units, tol);
  out += dissipative_term(state, dir, tau);
  return out;
}

double entropy_rate(const SpectralState& state, const GeneratorSet& gen,
                    const TauPolicy& policy, const UnitSystem& units, const Tolerances& tol) {
  const DissipativeDirection dir = dissipative_direction(state, gen, tol);
  if (dir.norm_sq <= 0.0) return 0.0;
  const double tau = tau_value(policy, state, gen, dir, units, tol);
  return units.k_B * dir.norm_sq / tau;
}

double tau_D(const SpectralState& state, const DissipativeDirection& dir, double tau) {
  (void)state;
  if (dir.norm_sq <= 0.0) return kInfiniteTime;
  return tau / std::sqrt(dir.norm_sq);
}

double tau_lower_bound(const SpectralState& state, const GeneratorSet& gen,
                       const DissipativeDirection& dir, const UnitSystem& units) {
  const double var = state.covariance(gen.hamiltonian, gen.hamiltonian);
  if (var <= 0.0) return kInfiniteTime;
  return 0.5 * units.hbar * std::sqrt(dir.norm_sq / var);
}

double characteristic_time(const SpectralState& state, const GeneratorSet& gen,
                           const TauPolicy& policy, const Matrix& f, TimeMode mode,
                           const UnitSystem& units, const Tolerances& tol) {
  const double var = state.covariance(f, f);
  if (var <= 0.0) return kInfiniteTime;
  const Matrix df = f - state.mean(f) * identity(state.dim());
  const Matrix weighted = state.sqrt_rho() * df;
  double rate = 0.0;
  if (mode == TimeMode::Hamiltonian) {
    rate = 2.0 * real_inner(weighted, hamiltonian_gradient(state, gen, units));
  } else {
    const DissipativeDirection dir = dissipative_direction(state, gen, tol);
    const double tau = tau_value(policy, state, gen, dir, units, tol);
    const Matrix e_d = (-0.5 / tau) * dir.D;
    rate = 2.0 * real_inner(weighted, e_d);
  }
  if (rate == 0.0) return kInfiniteTime;
  return std::sqrt(var) / std::abs(rate);
}

double variational_residual(const SpectralState& state, const GeneratorSet& gen,
                            const DissipativeDirection& dir, const TauPolicy& policy,
                            const UnitSystem& units) {
  const Matrix& sq = state.sqrt_rho();
  // entropy gradient with respect to sqrt(rho)
  const Matrix grad_s = -2.0 * units.k_B * (sq + sq * state.log_on_range());

  std::vector<Matrix> basis;
  for (const Matrix& r : gen.motion_generators()) basis.push_back(2.0 * (sq * r));
  const double tau = tau_value(policy, state, gen, dir, units);
  if (dir.norm_sq > 0.0) basis.push_back((-0.5 / tau) * dir.D);

  // least-squares multiplier fit under real_inner
  const int m = static_cast<int>(basis.size());
  RealMatrix g(m, m);
  RealVector b(m);
  for (int i = 0; i < m; ++i) {
    b(i) = real_inner(basis[i], grad_s);
    for (int j = i; j < m; ++j) g(i, j) = g(j, i) = real_inner(basis[i], basis[j]);
  }
  const RealVector lam = g.completeOrthogonalDecomposition().solve(b);
  Matrix res = grad_s;
  for (int i = 0; i < m; ++i) res -= lam(i) * basis[i];
  return op_norm(res);
}

NondissipativeReport nondissipative_test(const SpectralState& state, const GeneratorSet& gen,
                                         const Tolerances& tol) {
  NondissipativeReport rep;
  const DissipativeDirection dir = dissipative_direction(state, gen, tol);
  rep.d_norm_sq = dir.norm_sq;
  rep.range_commutator_norm =
      operator_norm_max(commutator(state.range_projector(), gen.hamiltonian));
  rep.nondissipative = dir.norm_sq < tol.equilibrium_epsilon;
  if (!rep.nondissipative)
    rep.kind = NondissipativeReport::Kind::Dissipative;
  else if (rep.range_commutator_norm < tol.drift_epsilon)
    rep.kind = NondissipativeReport::Kind::Equilibrium;
  else
    rep.kind = NondissipativeReport::Kind::LimitCycle;
  return rep;
}

SpectralState gibbs_state(const GeneratorSet& gen, double beta, const std::vector<double>& nus,
                          const UnitSystem& units, const Tolerances& tol) {
  if (!std::isfinite(beta))
    throw std::invalid_argument("gibbs_state: beta must be finite");
  if (nus.size() != gen.extras.size())
    throw std::invalid_argument("gibbs_state: one nu per extra generator required");
  Matrix c = -beta * gen.hamiltonian;
  for (std::size_t i = 0; i < nus.size(); ++i) {
    if (!std::isfinite(nus[i])) throw std::invalid_argument("gibbs_state: nu must be finite");
    c += nus[i] * gen.extras[i];
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(c);
  // shift by the max eigenvalue so the exponentials cannot overflow
  const RealVector ev = es.eigenvalues();
  const double shift = ev.maxCoeff();
  RealVector w = (ev.array() - shift).exp();
  const double z = w.sum();
  if (!(z > 0.0) || !std::isfinite(z))
    throw InvariantError("gibbs_state: partition function degenerate for beta = " +
                         std::to_string(beta));
  w /= z;
  const Matrix rho = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
  return SpectralState::decompose((rho + rho.adjoint()) / 2.0, units, tol);
}

GibbsMatch match_gibbs(const GeneratorSet& gen, double target_energy,
                       const std::vector<double>& target_extras, const UnitSystem& units,
                       const Tolerances& tol) {
  const int k = static_cast<int>(gen.extras.size());
  if (static_cast<int>(target_extras.size()) != k)
    throw std::invalid_argument("match_gibbs: one target mean per extra generator required");

  if (k == 0) {
    // Tr(rho_beta H) is strictly decreasing in beta; bracket then bisect.
    Eigen::SelfAdjointEigenSolver<Matrix> es(gen.hamiltonian);
    const double emin = es.eigenvalues().minCoeff();
    const double emax = es.eigenvalues().maxCoeff();
    if (!(target_energy > emin) || !(target_energy < emax)) {
      if (std::abs(emax - emin) < 1e-14 && std::abs(target_energy - emin) < 1e-9) {
        GibbsMatch m{gibbs_state(gen, 0.0, {}, units, tol), 0.0, {}};
        return m;
      }
      throw InvariantError("match_gibbs: target energy outside the open spectral range");
    }
    auto e_of = [&](double beta) {
      return gibbs_state(gen, beta, {}, units, tol).mean(gen.hamiltonian);
    };
    double lo = -1.0, hi = 1.0;
    while (e_of(lo) < target_energy) lo *= 2.0;
    while (e_of(hi) > target_energy) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (e_of(mid) > target_energy)
        lo = mid;
      else
        hi = mid;
      if (hi - lo < 1e-14 * (1.0 + std::abs(hi))) break;
    }
    const double beta = 0.5 * (lo + hi);
    return GibbsMatch{gibbs_state(gen, beta, {}, units, tol), beta, {}};
  }

  // Damped Newton on lambda = (beta, nu): residual = means(lambda) - targets,
  // Jacobian entries are -Cov(R_i, R_j) (log-partition convexity).
  RealVector lambda = RealVector::Zero(k + 1);
  RealVector target(k + 1);
  target(0) = target_energy;
  for (int i = 0; i < k; ++i) target(i + 1) = target_extras[i];

  auto state_of = [&](const RealVector& l) {
    std::vector<double> nus(l.data() + 1, l.data() + 1 + k);
    return gibbs_state(gen, l(0), nus, units, tol);
  };
  auto residual_of = [&](const SpectralState& st) {
    RealVector r(k + 1);
    r(0) = st.mean(gen.hamiltonian) - target(0);
    for (int i = 0; i < k; ++i) r(i + 1) = st.mean(gen.extras[i]) - target(i + 1);
    return r;
  };

  SpectralState st = state_of(lambda);
  RealVector res = residual_of(st);
  std::vector<Matrix> rs;
  rs.push_back(gen.hamiltonian);
  for (const Matrix& g : gen.extras) rs.push_back(g);
  for (int it = 0; it < 200 && res.cwiseAbs().maxCoeff() > 1e-13; ++it) {
    // d<R_i>/d beta = -Cov(R_i, H); d<R_i>/d nu_j = +Cov(R_i, G_j).
    // (Quasi-Newton: the symmetrized covariance stands in for the Kubo-Mori
    // one, exact whenever the generators commute with each other.)
    RealMatrix full(k + 1, k + 1);
    for (int i = 0; i <= k; ++i) {
      full(i, 0) = -st.covariance(rs[i], rs[0]);
      for (int j = 1; j <= k; ++j) full(i, j) = st.covariance(rs[i], rs[j]);
    }
    RealVector step = full.completeOrthogonalDecomposition().solve(-res);
    double damp = 1.0;
    for (; damp > 1e-6; damp *= 0.5) {
      RealVector cand = lambda + damp * step;
      SpectralState st2 = state_of(cand);
      RealVector res2 = residual_of(st2);
      if (res2.norm() < res.norm()) {
        lambda = cand;
        st = std::move(st2);
        res = std::move(res2);
        break;
      }
    }
    if (damp <= 1e-6)
      throw InvariantError("match_gibbs: Newton iteration stalled");
  }
  if (res.cwiseAbs().maxCoeff() > 1e-10)
    throw InvariantError("match_gibbs: failed to match target means");
  std::vector<double> nus(lambda.data() + 1, lambda.data() + 1 + k);
  return GibbsMatch{std::move(st), lambda(0), std::move(nus)};
}

SpecialFormResult special_form_rhs(const SpectralState& state, const GeneratorSet& gen,
                                   const TauPolicy& policy, const UnitSystem& units,
                                   const Tolerances& tol) {
  if (!state.full_rank())
    throw InvariantError("special_form_rhs: requires a full-rank state");
  const int n = state.dim();
  const Matrix& sq = state.sqrt_rho();

  // orthogonal extension of the weighted manifold over a Hermitian basis
  std::vector<Matrix> herm;  // candidate Hermitian operators beyond {I, H, G}
  std::vector<Matrix> raw;   // coefficients tracked over these
  for (const Matrix& r : gen.motion_generators()) herm.push_back(r);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      Matrix e = Matrix::Zero(n, n);
      if (a == b) {
        e(a, a) = 1.0;
        herm.push_back(e);
      } else {
        e(a, b) = e(b, a) = 1.0;
        herm.push_back(e);
        Matrix f = Matrix::Zero(n, n);
        f(a, b) = Complex(0, -1);
        f(b, a) = Complex(0, 1);
        herm.push_back(f);
      }
    }
  for (const Matrix& x : herm) raw.push_back(sq * x);
  OrthonormalBasis ob = orthonormalize(raw, tol.manifold_epsilon);

  // MGS preserves input order, so basis vectors coming from the manifold
  // inputs (listed first) form the leading block.
  int a_count = 0;
  const int n_manifold = static_cast<int>(gen.motion_generators().size());
  for (int idx : ob.retained)
    if (idx < n_manifold) ++a_count;

  const Matrix slog = sq * state.log_on_range();
  const DissipativeDirection dir = dissipative_direction(state, gen, tol);
  const double tau = tau_value(policy, state, gen, dir, units, tol);

  Matrix out = hamiltonian_term(state, gen, units);
  SpecialFormResult result;
  double sum_f_sq = 0.0;
  for (int k = a_count; k < ob.size(); ++k) {
    // X_k rebuilt from the tracked coefficients: sqrt(rho) X_k = basis[k]
    Matrix x = Matrix::Zero(n, n);
    for (int j = 0; j < ob.size(); ++j)
      if (ob.coeffs(k, j) != 0.0) x += ob.coeffs(k, j) * herm[ob.retained[j]];
    const double f_k = -real_inner(slog, ob.basis[k]);
    result.coefficients.push_back(f_k);
    sum_f_sq += f_k * f_k;
    out += (0.5 / tau) * f_k * anticommutator(x, state.rho());
  }
  result.entropy_rate = units.k_B * sum_f_sq / tau;
  result.rhs = std::move(out);
  return result;
}

Matrix driven_direction(const SpectralState& state, const GeneratorSet& gen,
                        const std::vector<double>& imposed_rates, const TauPolicy& policy,
                        const UnitSystem& units, const Tolerances& tol) {
  const std::vector<Matrix> rs = gen.motion_generators();
  if (imposed_rates.size() + 1 != rs.size())
    throw std::invalid_argument(
        "driven_direction: one imposed rate per non-identity generator required");

  const Matrix& sq = state.sqrt_rho();
  const Matrix slog = sq * state.log_on_range();
  std::vector<Matrix> weighted;
  for (const Matrix& r : rs) weighted.push_back(sq * r);

  {
    std::vector<Matrix> full = weighted;
    full.insert(full.begin(), slog);
    if (gram_det(full) <= 0.0)
      throw InvariantError("driven_direction: degenerate Gram determinant");
  }

  const DissipativeDirection base = dissipative_direction(state, gen, tol);
  const double tau = tau_value(policy, state, gen, base, units, tol);

  Matrix d = base.D;
  for (std::size_t j = 0; j < imposed_rates.size(); ++j) {
    if (imposed_rates[j] == 0.0) continue;
    // steepest-r_j-ascent direction holding entropy and the other means fixed
    std::vector<Matrix> others;
    others.push_back(slog);
    for (std::size_t i = 0; i < weighted.size(); ++i)
      if (i != j + 1) others.push_back(weighted[i]);
    const Matrix w = project_orthogonal(weighted[j + 1], others, tol.manifold_epsilon);
    const double wsq = real_inner(w, w);
    if (wsq <= tol.manifold_epsilon)
      throw InvariantError("driven_direction: imposed rate on a degenerate generator");
    d -= (tau * imposed_rates[j] / wsq) * w;
  }
  return d;
}

}  // namespace seaqt
