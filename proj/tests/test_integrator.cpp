#include <doctest.h>

#include "oracles.hpp"
#include "seaqt/integrator.hpp"
#include "seaqt/sampling.hpp"

using namespace seaqt;

namespace {
Matrix ladder(int dim) {
  Matrix h = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) h(i, i) = i;
  return h;
}
Matrix qutrit_d() {
  Matrix rho = Matrix::Zero(3, 3);
  rho.diagonal() << 0.5, 0.1, 0.4;
  return rho;
}
SystemModel qutrit_model() { return SystemModel::single(GeneratorSet::make(ladder(3))); }
}  // namespace

TEST_CASE("trace distance") {
  Rng rng(3);
  const Matrix a = random_density(rng, 3);
  CHECK(trace_distance(a, a) == doctest::Approx(0.0));

  Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  CHECK(trace_distance(p0, p1) == doctest::Approx(2.0));

  Matrix d(2, 2);
  d << 0.9, 0, 0, 0.1;
  CHECK(trace_distance(d, 0.5 * identity(2)) == doctest::Approx(0.8));

  // metric axioms on random triples
  const Matrix b = random_density(rng, 3), c = random_density(rng, 3);
  CHECK(trace_distance(a, b) == doctest::Approx(trace_distance(b, a)));
  CHECK(trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-12);
  CHECK(trace_distance(a, b) > 0.0);
}

TEST_CASE("gibbs initial states stay put") {
  const auto model = qutrit_model();
  const auto gibbs = gibbs_state(model.as_generator_set(), 0.7, {});
  IntegratorConfig cfg;
  cfg.t_end = 2.0;
  const auto traj = integrate(gibbs.rho(), model, {TauPolicy::constant(1.0)}, cfg);
  CHECK(traj.reached_equilibrium);
  CHECK(trace_distance(traj.back().rho, gibbs.rho()) < 1e-10);
  CHECK(traj.max_entropy_dip <= 1e-12);
}

TEST_CASE("pure states follow the unitary orbit") {
  Matrix h(3, 3);
  h.setZero();
  h.diagonal() << 0.0, 1.0, 2.3;  // nondegenerate
  const auto model = SystemModel::single(GeneratorSet::make(h));
  Eigen::Vector3cd psi;
  psi << 0.6, Complex(0.0, 0.5), 0.624;
  psi.normalize();
  const Matrix rho0 = psi * psi.adjoint();
  IntegratorConfig cfg;
  cfg.dt = 0.005;
  cfg.t_end = 3.0;
  cfg.sample_interval = 0.25;
  const auto traj = integrate(rho0, model, {TauPolicy::constant(1.0)}, cfg);
  for (const auto& s : traj.samples) {
    CHECK(std::abs((s.rho * s.rho).trace().real() - 1.0) < 1e-9);
    CHECK(std::abs(s.entropy) < 1e-9);
    const Matrix ref = bloch_reference(rho0, Matrix::Zero(3, 3), 1e30, h, s.t);
    CHECK(trace_distance(s.rho, ref) < 1e-9);
  }
  CHECK_FALSE(traj.reached_equilibrium);  // limit cycle, not equilibrium
}

TEST_CASE("qutrit fixture relaxes to the energy-matched gibbs state") {
  const auto model = qutrit_model();
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 30.0;
  cfg.sample_interval = 0.25;
  const auto traj = integrate(qutrit_d(), model, {TauPolicy::constant(1.0)}, cfg);
  const auto rep = attractor_summary(traj, model);
  CHECK(rep.classification == "gibbs");
  CHECK(rep.terminal_distance < 1e-6);
  CHECK(rep.entropy_monotone);
  CHECK(rep.rank_preserved);
  CHECK(rep.beta == doctest::Approx(0.150566112706145).epsilon(1e-9));
  // diagonal dynamics cross-check against the reduced ODE oracle at mid-horizon
  oracle::DiagonalQutrit dq;
  const Eigen::Vector3d want = dq.evolve({0.5, 0.1, 0.4}, 1.0, 5.0, 1e-4);
  IntegratorConfig cfg5 = cfg;
  cfg5.t_end = 5.0;
  const auto tr5 = integrate(qutrit_d(), model, {TauPolicy::constant(1.0)}, cfg5);
  for (int i = 0; i < 3; ++i)
    CHECK(tr5.back().rho(i, i).real() == doctest::Approx(want(i)).epsilon(1e-8));
}

TEST_CASE("RK4 order against the reduced oracle") {
  const auto model = qutrit_model();
  oracle::DiagonalQutrit dq;
  const Eigen::Vector3d ref = dq.evolve({0.5, 0.1, 0.4}, 1.0, 2.0, 1e-5);
  auto error_at = [&](double dt) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 2.0;
    cfg.sample_interval = 2.0;
    const auto traj = integrate(qutrit_d(), model, {TauPolicy::constant(1.0)}, cfg);
    double err = 0.0;
    for (int i = 0; i < 3; ++i)
      err = std::max(err, std::abs(traj.back().rho(i, i).real() - ref(i)));
    return err;
  };
  const double e1 = error_at(0.08), e2 = error_at(0.04), e3 = error_at(0.02);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
  CHECK(e2 / e3 > 12.0);
  CHECK(e2 / e3 < 20.0);
}

TEST_CASE("adaptive RK45 agrees with RK4 and holds the invariants") {
  const auto model = qutrit_model();
  IntegratorConfig cfg;
  cfg.method = IntegratorConfig::Method::RK45;
  cfg.dt = 0.05;
  cfg.t_end = 4.0;
  cfg.sample_interval = 4.0;
  const auto tr45 = integrate(qutrit_d(), model, {TauPolicy::constant(1.0)}, cfg);
  IntegratorConfig cfg4;
  cfg4.dt = 0.002;
  cfg4.t_end = 4.0;
  cfg4.sample_interval = 4.0;
  const auto tr4 = integrate(qutrit_d(), model, {TauPolicy::constant(1.0)}, cfg4);
  CHECK(trace_distance(tr45.back().rho, tr4.back().rho) < 1e-7);
  CHECK(tr45.max_trace_drift < 1e-9);
  CHECK(tr45.max_energy_drift < 1e-8);
  CHECK(tr45.steps < tr4.steps);  // adaptivity pays off
}

TEST_CASE("bloch reference endpoints") {
  const auto gen = GeneratorSet::make(ladder(3));
  const auto gibbs = gibbs_state(gen, 0.3, {});
  Rng rng(7);
  const Matrix rho0 = random_density(rng, 3);
  CHECK(operator_norm_max(bloch_reference(rho0, gibbs.rho(), 1.0, gen.hamiltonian, 0.0) - rho0) <
        1e-14);
  CHECK(operator_norm_max(bloch_reference(rho0, gibbs.rho(), 1.0, gen.hamiltonian, 60.0) -
                          gibbs.rho()) < 1e-14);
}

TEST_CASE("near-equilibrium runs track the relaxation solution at second order") {
  const auto model = qutrit_model();
  const auto gen = model.as_generator_set();
  const auto match = match_gibbs(gen, 0.9);
  // admissible perturbation commuting with H (traceless, energy-neutral);
  // the relaxation form is the [rho, H] = 0 linearization, and coherence
  // perturbations pick up a first-order divided-difference correction
  Matrix delta = Matrix::Zero(3, 3);
  delta.diagonal() << 1.0, -2.0, 1.0;
  delta /= op_norm(delta);

  auto sup_dev = [&](double amp) {
    const Matrix rho0 = match.state.rho() + amp * delta;
    IntegratorConfig cfg;
    cfg.dt = 0.002;
    cfg.t_end = 3.0;
    cfg.sample_interval = 0.1;
    const auto traj = integrate(rho0, model, {TauPolicy::constant(1.0)}, cfg);
    double dev = 0.0;
    for (const auto& s : traj.samples) {
      const Matrix ref = bloch_reference(rho0, match.state.rho(), 1.0, gen.hamiltonian, s.t);
      dev = std::max(dev, operator_norm_max(s.rho - ref));
    }
    return dev;
  };
  const double d1 = sup_dev(0.04), d2 = sup_dev(0.02), d3 = sup_dev(0.01);
  CHECK(d1 / d2 >= 3.5);
  CHECK(d2 / d3 >= 3.5);
}

TEST_CASE("rank-deficient initial states keep their kernel and reach the restricted gibbs") {
  const auto model = qutrit_model();
  Matrix rho0 = Matrix::Zero(3, 3);
  rho0(0, 0) = 0.6;
  rho0(0, 1) = rho0(1, 0) = 0.2;
  rho0(1, 1) = 0.4;
  IntegratorConfig cfg;
  cfg.dt = 0.005;
  cfg.t_end = 30.0;
  cfg.sample_interval = 0.5;
  const auto traj = integrate(rho0, model, {TauPolicy::constant(1.0)}, cfg);
  const auto rep = attractor_summary(traj, model);
  CHECK(rep.classification == "range_restricted_gibbs");
  CHECK(rep.rank_preserved);
  CHECK(rep.max_revived_eigenvalue < 1e-8);
  CHECK(rep.terminal_distance < 1e-6);
  // the B-restricted canonical form matching e = 0.4 on the {0,1} block
  Matrix want = Matrix::Zero(3, 3);
  want.diagonal() << 0.6, 0.4, 0.0;
  CHECK(trace_distance(traj.back().rho, want) < 1e-6);
}

TEST_CASE("limit-cycle initial states are classified, not matched") {
  const auto model = qutrit_model();
  // rank-2 range not H-invariant: superposition projectors
  Eigen::Vector3cd u, v;
  u << 1.0, 1.0, 0.0;
  v << 0.0, 1.0, 1.0;
  u.normalize();
  Matrix rho0 = 0.7 * (u * u.adjoint());
  v = (v - u.dot(v) * u).normalized();
  rho0 += 0.3 * (v * v.adjoint());
  IntegratorConfig cfg;
  cfg.dt = 0.002;
  cfg.t_end = 1.0;
  cfg.sample_interval = 0.1;
  const auto traj = integrate(rho0, model, {TauPolicy::constant(1.0)}, cfg);
  const auto rep = attractor_summary(traj, model);
  CHECK(rep.rank_preserved);
  // entropy still grows within the rotating range
  CHECK(traj.back().entropy >= traj.front().entropy - 1e-12);
}

TEST_CASE("configuration validation") {
  IntegratorConfig cfg;
  cfg.dt = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
