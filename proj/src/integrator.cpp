#include "seaqt/integrator.hpp"

#include <cmath>
#include <sstream>

namespace seaqt {

SystemModel SystemModel::single(const GeneratorSet& gen, DynamicsVariant variant) {
  SystemModel m;
  m.comp = CompositionStructure::make({gen.dim()});
  m.gens = CompositeGenerators::make(m.comp, {gen.hamiltonian}, Matrix(), gen.extras,
                                     gen.commutation_tolerance);
  m.variant = variant;
  return m;
}

SystemModel SystemModel::composite(CompositionStructure comp, CompositeGenerators gens,
                                   DynamicsVariant variant) {
  SystemModel m;
  m.comp = std::move(comp);
  m.gens = std::move(gens);
  m.variant = variant;
  return m;
}

namespace {

struct RhsEval {
  Matrix rhs;
  double dissipation_norm_sq = 0.0;
  std::vector<double> taus;
  double entropy_production = 0.0;
};

RhsEval eval_dynamics(const SystemModel& model, const std::vector<TauPolicy>& policies,
                      const SpectralState& st, const UnitSystem& units, const Tolerances& tol) {
  RhsEval ev;
  const Matrix h = model.hamiltonian();
  const Complex mi_over_hbar(0.0, -1.0 / units.hbar);
  ev.rhs = mi_over_hbar * commutator(h, st.rho());
  if (model.variant == DynamicsVariant::Unitary) {
    ev.taus.assign(model.comp.subsystem_count(), 0.0);
    return ev;
  }
  if (model.variant == DynamicsVariant::Flawed) {
    ev.rhs += flawed_variant_dissipator(st, model.comp, model.gens, policies, units, tol);
    ev.taus.assign(model.comp.subsystem_count(), 0.0);
    return ev;
  }
  std::vector<TauPolicy> pol = policies;
  if (pol.size() == 1 && model.comp.subsystem_count() > 1)
    pol.assign(model.comp.subsystem_count(), policies.front());
  if (static_cast<int>(pol.size()) != model.comp.subsystem_count())
    throw ConfigError("integrate: one tau policy per subsystem required");

  const int m = model.comp.subsystem_count();
  for (int j = 0; j < m; ++j) {
    LocalFrame frame = local_frame(st, model.comp, model.gens, j, units, tol);
    const DissipativeDirection& dir = frame.direction;
    double tau = 0.0;
    const bool active = dir.norm_sq > 0.0 &&
                        !(pol[j].kind == TauPolicy::Kind::MaxEPR &&
                          dir.norm_sq < tol.equilibrium_epsilon);
    if (active) {
      tau = tau_J_value(pol[j], st, model.comp, model.gens, j, dir, units, tol);
      const Matrix& sq = frame.rho_j.sqrt_rho();
      const Matrix block = (-0.5 / tau) * (sq * dir.D + dir.D.adjoint() * sq);
      ev.rhs += compose_with_complement(model.comp, j, block, frame.rho_jbar);
      ev.entropy_production += units.k_B * dir.norm_sq / tau;
    }
    ev.dissipation_norm_sq += dir.norm_sq;
    ev.taus.push_back(tau);
  }
  return ev;
}

// Runge-Kutta stage points sit O(dt^2) off the state manifold: slightly
// negative or spuriously revived eigenvalues, small trace drift. The exact
// flow preserves rank and nullity, and sqrt(lambda) ln(lambda) is not
// Lipschitz at lambda = 0, so evaluating the field on resurrected kernel
// directions injects O(dt |ln dt|) garbage. Stage states are therefore
// projected back onto the base state's rank manifold before evaluation.
SpectralState lenient_state(const Matrix& rho, int rank, const UnitSystem& units,
                            const Tolerances& tol) {
  Matrix h = (rho + rho.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  RealVector w = es.eigenvalues().cwiseMax(0.0);  // ascending
  const int n = static_cast<int>(w.size());
  for (int i = 0; i < n - rank; ++i) w(i) = 0.0;
  const double tr = w.sum();
  if (!(tr > 0)) throw InvariantError("integrate: stage state collapsed");
  w /= tr;
  h = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
  return SpectralState::decompose((h + h.adjoint()) / 2.0, units, tol);
}

Matrix rhs_only(const SystemModel& model, const std::vector<TauPolicy>& policies,
                const Matrix& rho, int rank, const UnitSystem& units, const Tolerances& tol) {
  return eval_dynamics(model, policies, lenient_state(rho, rank, units, tol), units, tol).rhs;
}

struct ProjectionOutcome {
  Matrix rho;
  double worst_clip = 0.0;   // most negative eigenvalue encountered
  bool clipped = false;
};

ProjectionOutcome apply_projection(const Matrix& rho, IntegratorConfig::Projection policy,
                                   int base_rank, const Tolerances& tol) {
  ProjectionOutcome out;
  Matrix h = (rho + rho.adjoint()) / 2.0;
  if (policy == IntegratorConfig::Projection::None) {
    out.rho = std::move(h);
    return out;
  }
  if (policy == IntegratorConfig::Projection::ClipThenRenormalize) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    RealVector w = es.eigenvalues();  // ascending
    const int n = static_cast<int>(w.size());
    out.worst_clip = w.minCoeff();
    bool any = false;
    for (int i = 0; i < n; ++i)
      if (w(i) < 0.0) {
        w(i) = 0.0;
        any = true;
      }
    // The exact flow preserves rank and nullity; kernel eigenvalues revived
    // by integration noise must go back to zero, because the perceived
    // logarithm diverges on them and would kick the state off the invariant
    // manifold (the boundary instability of the dynamics, not a property of
    // the trajectory being followed).
    for (int i = 0; i < n - base_rank; ++i) {
      if (w(i) > 1e-8)
        throw InvariantError("projection: kernel eigenvalue revived to " +
                             std::to_string(w(i)));
      if (w(i) != 0.0) {
        out.worst_clip = std::min(out.worst_clip, -w(i));
        w(i) = 0.0;
        any = true;
      }
    }
    if (any) {
      h = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
      out.clipped = true;
    }
    (void)tol;
  }
  const double tr = h.trace().real();
  if (!(tr > 0)) throw InvariantError("projection: state trace collapsed to zero");
  out.rho = h / tr;
  return out;
}

TrajectorySample make_sample(double t, const SpectralState& st, const SystemModel& model,
                             const RhsEval& ev, const Tolerances& tol) {
  TrajectorySample s;
  s.t = t;
  s.rho = st.rho();
  s.entropy = st.entropy();
  s.energy = st.mean(model.hamiltonian());
  for (const Matrix& g : model.gens.global_extras) s.extra_means.push_back(st.mean(g));
  s.eigenvalues = st.eigenvalues();
  s.dissipation_norm_sq = ev.dissipation_norm_sq;
  s.taus = ev.taus;
  s.entropy_production = ev.entropy_production;
  if (model.is_composite()) {
    const Bipartition split = Bipartition::split_after(model.comp, 1);
    s.correlation = correlation_functional(st, model.comp, split, tol);
  }
  return s;
}

}  // namespace

Trajectory integrate(const Matrix& rho0, const SystemModel& model,
                     const std::vector<TauPolicy>& policies, const IntegratorConfig& config,
                     const UnitSystem& units, const Tolerances& tol) {
  config.validate();
  units.validate();
  Trajectory traj;
  const Matrix h = model.hamiltonian();

  Matrix rho = (rho0 + rho0.adjoint()) / 2.0;
  SpectralState st = SpectralState::decompose(rho, units, tol);
  RhsEval ev = eval_dynamics(model, policies, st, units, tol);

  const double e0 = st.mean(h);
  std::vector<double> extras0;
  for (const Matrix& g : model.gens.global_extras) extras0.push_back(st.mean(g));
  double prev_entropy = st.entropy();
  const int rank0 = st.rank();
  traj.min_eigenvalue = st.eigenvalues().minCoeff();

  traj.samples.push_back(make_sample(0.0, st, model, ev, tol));

  double t = 0.0;
  double dt = config.dt;
  bool projection_noted = false;
  double next_sample = config.sample_interval > 0 ? config.sample_interval : 0.0;
  auto f = [&](const Matrix& m) { return rhs_only(model, policies, m, st.rank(), units, tol); };

  while (t < config.t_end - 1e-12 && traj.steps < config.max_steps) {
    double step = std::min(dt, config.t_end - t);
    Matrix next;
    if (config.method == IntegratorConfig::Method::RK4) {
      const Matrix k1 = ev.rhs;
      const Matrix k2 = f(rho + (0.5 * step) * k1);
      const Matrix k3 = f(rho + (0.5 * step) * k2);
      const Matrix k4 = f(rho + step * k3);
      next = rho + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } else {
      // Cash-Karp embedded 4(5) pair with step control
      for (;;) {
        const Matrix k1 = ev.rhs;
        const Matrix k2 = f(rho + step * (0.2 * k1));
        const Matrix k3 = f(rho + step * (3.0 / 40 * k1 + 9.0 / 40 * k2));
        const Matrix k4 = f(rho + step * (0.3 * k1 - 0.9 * k2 + 1.2 * k3));
        const Matrix k5 =
            f(rho + step * (-11.0 / 54 * k1 + 2.5 * k2 - 70.0 / 27 * k3 + 35.0 / 27 * k4));
        const Matrix k6 = f(rho + step * (1631.0 / 55296 * k1 + 175.0 / 512 * k2 +
                                          575.0 / 13824 * k3 + 44275.0 / 110592 * k4 +
                                          253.0 / 4096 * k5));
        const Matrix y5 = rho + step * (37.0 / 378 * k1 + 250.0 / 621 * k3 + 125.0 / 594 * k4 +
                                        512.0 / 1771 * k6);
        const Matrix y4 = rho + step * (2825.0 / 27648 * k1 + 18575.0 / 48384 * k3 +
                                        13525.0 / 55296 * k4 + 277.0 / 14336 * k5 + 0.25 * k6);
        const double scale = config.abs_tol + config.rel_tol * rho.cwiseAbs().maxCoeff();
        const double err = (y5 - y4).cwiseAbs().maxCoeff() / scale;
        if (err <= 1.0) {
          next = y5;
          dt = step * std::min(5.0, 0.9 * std::pow(std::max(err, 1e-12), -0.2));
          break;
        }
        step *= std::max(0.1, 0.9 * std::pow(err, -0.25));
        if (step < 1e-12 * (1.0 + std::abs(t)))
          throw InvariantError(
              "integrate: step size underflow at t = " + std::to_string(t) +
              " (stiff dynamics; under MaxEPR this is expected near equilibrium)");
      }
    }

    const ProjectionOutcome proj = apply_projection(next, config.projection, rank0, tol);
    rho = proj.rho;
    t += step;
    ++traj.steps;

    if (proj.worst_clip < -config.max_drift)
      throw InvariantError("integrate: eigenvalue " + std::to_string(proj.worst_clip) +
                           " breaches max_drift at t = " + std::to_string(t));
    if (proj.clipped && !projection_noted) {
      projection_noted = true;
      traj.events.push_back({t, "projection", "spectrum clipped at the " +
                                                  std::to_string(proj.worst_clip) + " scale"});
    }
    if (proj.worst_clip < -1e-9) {
      traj.events.push_back({t, "drift_warning",
                             "projection clipped eigenvalue " + std::to_string(proj.worst_clip)});
    }

    st = SpectralState::decompose(rho, units, tol);
    ev = eval_dynamics(model, policies, st, units, tol);

    traj.min_eigenvalue = std::min(traj.min_eigenvalue, st.eigenvalues().minCoeff());
    traj.max_trace_drift =
        std::max(traj.max_trace_drift, std::abs(rho.trace().real() - 1.0));
    traj.max_energy_drift = std::max(
        traj.max_energy_drift, std::abs(st.mean(h) - e0) / std::max(1.0, std::abs(e0)));
    for (std::size_t i = 0; i < extras0.size(); ++i)
      traj.max_extra_drift = std::max(
          traj.max_extra_drift, std::abs(st.mean(model.gens.global_extras[i]) - extras0[i]));
    const double dip = prev_entropy - st.entropy();
    if (model.variant != DynamicsVariant::Flawed) {
      traj.max_entropy_dip = std::max(traj.max_entropy_dip, dip);
      if (dip > 1e-10)
        throw InvariantError("integrate: entropy decreased by " + std::to_string(dip) +
                             " in one step at t = " + std::to_string(t));
    }
    prev_entropy = st.entropy();

    if (traj.max_energy_drift > config.max_drift || traj.max_trace_drift > config.max_drift)
      throw InvariantError("integrate: invariant drift beyond max_drift at t = " +
                           std::to_string(t));

    const bool due = config.sample_interval <= 0 || t + 1e-12 >= next_sample ||
                     t >= config.t_end - 1e-12;
    if (due) {
      traj.samples.push_back(make_sample(t, st, model, ev, tol));
      if (config.sample_interval > 0)
        while (next_sample <= t + 1e-12) next_sample += config.sample_interval;
    }

    const double comm = operator_norm_max(commutator(h, rho));
    if (ev.dissipation_norm_sq < config.equilibrium_epsilon &&
        comm < config.equilibrium_epsilon) {
      traj.reached_equilibrium = true;
      traj.events.push_back({t, "equilibrium", "(D|D) and ||[H,rho]|| below threshold"});
      if (traj.samples.back().t < t) traj.samples.push_back(make_sample(t, st, model, ev, tol));
      break;
    }
  }
  return traj;
}

Matrix bloch_reference(const Matrix& rho0, const Matrix& rho_e, double tau_e, const Matrix& h,
                       double t, const UnitSystem& units) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Eigen::VectorXcd phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i)
    phases(i) = std::exp(Complex(0.0, -t * es.eigenvalues()(i) / units.hbar));
  const Matrix u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  const double decay = std::exp(-t / tau_e);
  return decay * (u * rho0 * u.adjoint()) + (1.0 - decay) * rho_e;
}

double trace_distance(const Matrix& a, const Matrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((a - b + (a - b).adjoint()) / 2.0);
  return es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const SpectralState& a, const SpectralState& b) {
  return trace_distance(a.rho(), b.rho());
}

AttractorReport attractor_summary(const Trajectory& traj, const SystemModel& model,
                                  const UnitSystem& units, const Tolerances& tol) {
  if (traj.samples.empty()) throw std::invalid_argument("attractor_summary: empty trajectory");
  AttractorReport rep;
  const TrajectorySample& first = traj.samples.front();
  const TrajectorySample& last = traj.samples.back();

  // entropy monotonicity audit over the recorded samples
  rep.max_entropy_dip = 0.0;
  for (std::size_t i = 1; i < traj.samples.size(); ++i)
    rep.max_entropy_dip =
        std::max(rep.max_entropy_dip, traj.samples[i - 1].entropy - traj.samples[i].entropy);
  rep.entropy_monotone = rep.max_entropy_dip <= 1e-10;

  // rank audit: eigenvalues that start at zero must stay small
  const int n = static_cast<int>(first.eigenvalues.size());
  int rank0 = 0;
  for (int i = 0; i < n; ++i)
    if (first.eigenvalues(i) > tol.rank_cut(n)) ++rank0;
  rep.max_revived_eigenvalue = 0.0;
  for (const TrajectorySample& s : traj.samples)
    for (int i = rank0; i < n; ++i)
      rep.max_revived_eigenvalue = std::max(rep.max_revived_eigenvalue, s.eigenvalues(i));
  rep.rank_preserved = rep.max_revived_eigenvalue < 1e-8;

  const GeneratorSet gen = model.as_generator_set();
  const Matrix h = gen.hamiltonian;

  if (rank0 == n) {
    std::vector<double> targets(first.extra_means.begin(), first.extra_means.end());
    GibbsMatch match = match_gibbs(gen, first.energy, targets, units, tol);
    rep.classification = "gibbs";
    rep.beta = match.beta;
    rep.nus = match.nus;
    rep.attractor = match.state.rho();
    rep.terminal_distance = trace_distance(last.rho, rep.attractor);
    return rep;
  }

  // Rank-deficient start: the attractor (when B is H-invariant) is the
  // canonical form restricted to the initial range.
  const SpectralState st0 = SpectralState::decompose(first.rho, units, tol);
  const Matrix b0 = st0.range_projector();
  if (operator_norm_max(commutator(b0, h)) > tol.drift_epsilon) {
    rep.classification = "limit_cycle";
    rep.terminal_distance = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  const Matrix v = st0.eigenvectors().leftCols(rank0);
  std::vector<Matrix> extras_r;
  for (const Matrix& g : gen.extras) extras_r.push_back(v.adjoint() * g * v);
  const GeneratorSet gen_r =
      GeneratorSet::make(v.adjoint() * h * v, extras_r, gen.commutation_tolerance);
  std::vector<double> targets(first.extra_means.begin(), first.extra_means.end());
  GibbsMatch match = match_gibbs(gen_r, first.energy, targets, units, tol);
  rep.classification = "range_restricted_gibbs";
  rep.beta = match.beta;
  rep.nus = match.nus;
  rep.attractor = v * match.state.rho() * v.adjoint();
  rep.terminal_distance = trace_distance(last.rho, rep.attractor);
  return rep;
}

}  // namespace seaqt
