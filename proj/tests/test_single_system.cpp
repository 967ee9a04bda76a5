#include <doctest.h>

#include "oracles.hpp"
#include "seaqt/sampling.hpp"
#include "seaqt/single_system.hpp"

using namespace seaqt;

namespace {

Matrix qubit_a() {
  Matrix rho(2, 2);
  rho << 0.7, 0.2, 0.2, 0.3;
  return rho;
}

Matrix qutrit_d() {
  Matrix rho = Matrix::Zero(3, 3);
  rho.diagonal() << 0.5, 0.1, 0.4;
  return rho;
}

Matrix ladder(int dim) {
  Matrix h = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) h(i, i) = i;
  return h;
}

}  // namespace

TEST_CASE("hamiltonian term and gradient") {
  const GeneratorSet gen = GeneratorSet::make(ladder(2));
  SUBCASE("commuting state gives zero") {
    Matrix rho = Matrix::Zero(2, 2);
    rho.diagonal() << 0.6, 0.4;
    const auto st = SpectralState::decompose(rho);
    CHECK(operator_norm_max(hamiltonian_term(st, gen)) < 1e-14);
  }
  SUBCASE("QUBIT-A commutator entries") {
    const auto st = SpectralState::decompose(qubit_a());
    const Matrix t = hamiltonian_term(st, gen);
    CHECK(std::abs(t(0, 1).real()) < 1e-14);
    CHECK(std::abs(t(0, 1).imag() - 0.2) < 1e-14);
    CHECK(std::abs(t(1, 0).imag() + 0.2) < 1e-14);
    CHECK(std::abs(t.trace().real()) < 1e-14);
    // reduced hbar rescales the term
    const UnitSystem units{2.0, 1.0};
    CHECK(std::abs(hamiltonian_term(st, gen, units)(0, 1).imag() - 0.1) < 1e-14);
  }
  SUBCASE("E_H reproduces the commutator") {
    Rng rng(23);
    for (int dim = 2; dim <= 6; ++dim) {
      const Matrix rho = random_density(rng, dim);
      const GeneratorSet g = random_generators(rng, dim, 1);
      const auto st = SpectralState::decompose(rho);
      const Matrix e_h = hamiltonian_gradient(st, g);
      const Matrix rebuilt = st.sqrt_rho() * e_h + e_h.adjoint() * st.sqrt_rho();
      CHECK(operator_norm_max(rebuilt - hamiltonian_term(st, g)) < 1e-10);
    }
  }
}

TEST_CASE("tau_H") {
  const GeneratorSet gen = GeneratorSet::make(ladder(2));
  Matrix proj = Matrix::Zero(2, 2);
  proj(1, 1) = 1.0;
  CHECK(tau_H(SpectralState::decompose(proj), gen) == kInfiniteTime);

  const auto st = SpectralState::decompose(qubit_a());
  CHECK(tau_H(st, gen) == doctest::Approx(1.0 / (2.0 * std::sqrt(0.21))));
  // strict equality of the time-energy relation
  const double t = tau_H(st, gen);
  CHECK(t * t * st.covariance(gen.hamiltonian, gen.hamiltonian) == doctest::Approx(0.25));

  Matrix sz(2, 2);
  sz << 1, 0, 0, -1;
  CHECK(tau_H(SpectralState::decompose(0.5 * identity(2)), GeneratorSet::make(sz)) ==
        doctest::Approx(0.5));
}

TEST_CASE("dissipative direction") {
  const GeneratorSet gen3 = GeneratorSet::make(ladder(3));
  SUBCASE("gibbs and pure states are nondissipative") {
    const auto gibbs = gibbs_state(gen3, 0.8, {});
    CHECK(dissipative_direction(gibbs, gen3).norm_sq < 1e-20);
    Rng rng(31);
    const auto pure = SpectralState::decompose(random_pure_state(rng, 3));
    CHECK(dissipative_direction(pure, gen3).norm_sq < 1e-20);
  }
  SUBCASE("QUTRIT-D against the least-squares and determinant oracles") {
    const auto st = SpectralState::decompose(qutrit_d());
    const auto dir = dissipative_direction(st, gen3);
    CHECK(dir.norm_sq > 0.1);
    // diagonal direction
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) CHECK(std::abs(dir.D(i, j)) < 1e-14);
    std::vector<Matrix> manifold;
    for (const Matrix& r : gen3.motion_generators()) manifold.push_back(st.sqrt_rho() * r);
    const Matrix want =
        oracle::lsq_project_orthogonal(st.sqrt_rho() * st.log_on_range(), manifold);
    CHECK(operator_norm_max(dir.D - want) < 1e-10);
    const Matrix gram_form = oracle::gram_determinant_direction(st, gen3);
    CHECK(operator_norm_max(dir.D - gram_form) / op_norm(dir.D) < 1e-9);
    // orthogonality to the manifold basis
    for (const Matrix& a : dir.manifold_basis)
      CHECK(std::abs(real_inner(dir.D, a)) < 1e-10);
  }
  SUBCASE("rank-revealing manifold on an H-eigenprojector") {
    Matrix proj = Matrix::Zero(3, 3);
    proj(1, 1) = 1.0;
    const auto st = SpectralState::decompose(proj);
    const auto dir = dissipative_direction(st, gen3);
    // sqrt(rho) H is parallel to sqrt(rho) I here; one manifold member drops
    CHECK(static_cast<int>(dir.manifold_basis.size()) == 1);
    CHECK(dir.norm_sq < 1e-20);
  }
}

TEST_CASE("tau policies") {
  const GeneratorSet gen3 = GeneratorSet::make(ladder(3));
  const auto st = SpectralState::decompose(qutrit_d());
  const auto dir = dissipative_direction(st, gen3);

  CHECK(tau_value(TauPolicy::constant(2.5), st, gen3, dir) == doctest::Approx(2.5));
  CHECK_THROWS_AS(TauPolicy::constant(-1.0), ConfigError);

  const auto gibbs = gibbs_state(gen3, 0.3, {});
  const auto gdir = dissipative_direction(gibbs, gen3);
  CHECK(tau_value(TauPolicy::max_epr(7.0), gibbs, gen3, gdir) == doctest::Approx(7.0));

  const double cov_hh = st.covariance(gen3.hamiltonian, gen3.hamiltonian);
  CHECK(tau_value(TauPolicy::max_epr(1.0), st, gen3, dir) ==
        doctest::Approx(0.5 * std::sqrt(dir.norm_sq / cov_hh)));

  const TauPolicy custom =
      TauPolicy::custom_fn("entropy_scaled", [](const SpectralState& s) { return 1.0 + s.entropy(); });
  CHECK(tau_value(custom, st, gen3, dir) == doctest::Approx(1.0 + st.entropy()));
}

TEST_CASE("rhs and entropy rate") {
  const GeneratorSet gen3 = GeneratorSet::make(ladder(3));
  SUBCASE("gibbs is stationary, pure states evolve unitarily") {
    const auto gibbs = gibbs_state(gen3, 1.1, {});
    CHECK(operator_norm_max(rhs(gibbs, gen3, TauPolicy::constant(1.0))) < 1e-12);
    Rng rng(37);
    const auto pure = SpectralState::decompose(random_pure_state(rng, 3));
    const Matrix r = rhs(pure, gen3, TauPolicy::constant(1.0));
    CHECK(operator_norm_max(r - hamiltonian_term(pure, gen3)) < 1e-12);
  }
  SUBCASE("QUTRIT-D rhs against the diagonal oracle") {
    const auto st = SpectralState::decompose(qutrit_d());
    const Matrix r = rhs(st, gen3, TauPolicy::constant(1.0));
    oracle::DiagonalQutrit dq;
    const Eigen::Vector3d want = dq.rate({0.5, 0.1, 0.4}, 1.0);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(r(i, i).real() - want(i)) < 1e-12);
    CHECK(std::abs(r.trace().real()) < 1e-12);
    CHECK(std::abs((r * gen3.hamiltonian).trace().real()) < 1e-12);

    const double sdot = entropy_rate(st, gen3, TauPolicy::constant(1.0));
    const auto dir = dissipative_direction(st, gen3);
    CHECK(sdot == doctest::Approx(dir.norm_sq));
    CHECK(sdot == doctest::Approx(-(r * st.log_on_range()).trace().real()).epsilon(1e-9));
  }
  SUBCASE("conservation and entropy production over random systems") {
    Rng rng(41);
    for (int rep = 0; rep < 24; ++rep) {
      const int dim = 2 + static_cast<int>(rng.next_u64() % 7);
      const Matrix rho = random_density(rng, dim, rep % 5 == 0 && dim > 2 ? dim - 1 : dim);
      const GeneratorSet gen = random_generators(rng, dim, static_cast<int>(rng.next_u64() % 3));
      const auto st = SpectralState::decompose(rho);
      const Matrix r = rhs(st, gen, TauPolicy::constant(0.7));
      CHECK(operator_norm_max(Matrix(r - r.adjoint())) < 1e-12);
      CHECK(std::abs(r.trace().real()) < 1e-9);
      CHECK(std::abs((r * gen.hamiltonian).trace().real()) < 1e-9);
      for (const Matrix& g : gen.extras) CHECK(std::abs((r * g).trace().real()) < 1e-9);
      const double sdot_trace = -(r * st.log_on_range()).trace().real();
      CHECK(sdot_trace >= -1e-10);
      CHECK(std::abs(sdot_trace - entropy_rate(st, gen, TauPolicy::constant(0.7))) < 1e-9);
    }
  }
  SUBCASE("gram-ratio form of the entropy rate") {
    const auto st = SpectralState::decompose(qutrit_d());
    const auto dir = dissipative_direction(st, gen3);
    const Matrix slog = st.sqrt_rho() * st.log_on_range();
    std::vector<Matrix> rs;
    for (const Matrix& r : gen3.motion_generators()) rs.push_back(st.sqrt_rho() * r);
    std::vector<Matrix> full = rs;
    full.insert(full.begin(), slog);
    const double ratio = gram_det(full) / gram_det(rs);
    CHECK(ratio == doctest::Approx(dir.norm_sq).epsilon(1e-8));
  }
}

TEST_CASE("dissipative characteristic times") {
  const GeneratorSet gen3 = GeneratorSet::make(ladder(3));
  const auto st = SpectralState::decompose(qutrit_d());
  const auto dir = dissipative_direction(st, gen3);

  SUBCASE("MaxEPR closure hits the uncertainty bound exactly") {
    const double tau = tau_value(TauPolicy::max_epr(1.0), st, gen3, dir);
    const double td = tau_D(st, dir, tau);
    CHECK(td * td * st.covariance(gen3.hamiltonian, gen3.hamiltonian) ==
          doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("constant policy") {
    CHECK(tau_D(st, dir, 1.0) == doctest::Approx(1.0 / std::sqrt(dir.norm_sq)));
    // a constant tau below the uncertainty bound is flagged by comparison
    const double bound = tau_lower_bound(st, gen3, dir);
    CHECK(bound > 0.0);
    const double violating = tau_value(TauPolicy::constant(0.5 * bound), st, gen3, dir);
    CHECK(violating < bound);
    const double compliant = tau_value(TauPolicy::max_epr(1.0), st, gen3, dir);
    CHECK(compliant >= bound * (1.0 - 1e-12));
  }
  SUBCASE("characteristic time bounds") {
    const TauPolicy pol = TauPolicy::constant(1.0);
    CHECK(characteristic_time(st, gen3, pol, gen3.hamiltonian, TimeMode::Hamiltonian) ==
          kInfiniteTime);  // df/dt = 0 for F = H
    Rng rng(43);
    const auto qa = SpectralState::decompose(qubit_a());
    const GeneratorSet gen2 = GeneratorSet::make(ladder(2));
    const double t_h = tau_H(qa, gen2);
    const auto dir2 = dissipative_direction(qa, gen2);
    const double tau2 = tau_value(pol, qa, gen2, dir2);
    const double t_d = tau_D(qa, dir2, tau2);
    for (int rep = 0; rep < 12; ++rep) {
      const Matrix f = random_hermitian(rng, 2);
      const double tfh = characteristic_time(qa, gen2, pol, f, TimeMode::Hamiltonian);
      const double tfd = characteristic_time(qa, gen2, pol, f, TimeMode::Dissipative);
      CHECK(tfh >= t_h * (1.0 - 1e-9));
      CHECK(tfd >= t_d * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("variational residual") {
  const GeneratorSet gen3 = GeneratorSet::make(ladder(3));
  SUBCASE("gibbs") {
    const auto gibbs = gibbs_state(gen3, 0.4, {});
    const auto dir = dissipative_direction(gibbs, gen3);
    CHECK(variational_residual(gibbs, gen3, dir, TauPolicy::constant(1.0)) < 1e-8);
  }
  SUBCASE("QUTRIT-D and random states") {
    const auto st = SpectralState::decompose(qutrit_d());
    const auto dir = dissipative_direction(st, gen3);
    CHECK(variational_residual(st, gen3, dir, TauPolicy::constant(1.0)) < 1e-8);

    Rng rng(47);
    for (int dim = 2; dim <= 6; ++dim) {
      const Matrix rho = random_density(rng, dim);
      const GeneratorSet gen = random_generators(rng, dim, 1);
      const auto s = SpectralState::decompose(rho);
      const auto d = dissipative_direction(s, gen);
      CHECK(variational_residual(s, gen, d, TauPolicy::max_epr(1.0)) < 1e-8);
    }
  }
}

TEST_CASE("nondissipative classification") {
  const GeneratorSet gen3 = GeneratorSet::make(ladder(3));
  const auto gibbs = gibbs_state(gen3, 0.9, {});
  auto rep = nondissipative_test(gibbs, gen3);
  CHECK(rep.nondissipative);
  CHECK(rep.kind == NondissipativeReport::Kind::Equilibrium);

  // pure superposition of nondegenerate H levels: constant-entropy limit cycle
  Eigen::Vector3cd psi;
  psi << 1.0, 1.0, 0.0;
  psi.normalize();
  const auto pure = SpectralState::decompose(psi * psi.adjoint());
  rep = nondissipative_test(pure, gen3);
  CHECK(rep.nondissipative);
  CHECK(rep.kind == NondissipativeReport::Kind::LimitCycle);

  rep = nondissipative_test(SpectralState::decompose(qutrit_d()), gen3);
  CHECK_FALSE(rep.nondissipative);
}

TEST_CASE("gibbs states and the energy match") {
  const GeneratorSet gen2 = GeneratorSet::make(ladder(2));
  CHECK(operator_norm_max(gibbs_state(gen2, 0.0, {}).rho() - 0.5 * identity(2)) < 1e-14);

  const auto st = gibbs_state(gen2, std::log(2.0), {});
  CHECK(st.rho()(0, 0).real() == doctest::Approx(2.0 / 3.0));
  CHECK(st.rho()(1, 1).real() == doctest::Approx(1.0 / 3.0));

  const GeneratorSet gen3 = GeneratorSet::make(ladder(3));
  const auto match = match_gibbs(gen3, 0.9);
  CHECK(match.state.mean(gen3.hamiltonian) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(match.beta == doctest::Approx(0.150566112706145).epsilon(1e-10));
  CHECK(dissipative_direction(match.state, gen3).norm_sq < 1e-20);

  // with an extra generator: both means matched
  Rng rng(53);
  const GeneratorSet gen_x = random_generators(rng, 4, 1);
  const auto m2 = match_gibbs(gen_x, 0.2 * gen_x.hamiltonian.trace().real() / 4.0,
                              {0.3 * gen_x.extras[0].trace().real() / 4.0});
  CHECK(m2.state.mean(gen_x.hamiltonian) ==
        doctest::Approx(0.2 * gen_x.hamiltonian.trace().real() / 4.0).epsilon(1e-9));
  CHECK(m2.state.mean(gen_x.extras[0]) ==
        doctest::Approx(0.3 * gen_x.extras[0].trace().real() / 4.0).epsilon(1e-9));

  CHECK_THROWS_AS(gibbs_state(gen2, std::numeric_limits<double>::infinity(), {}),
                  std::invalid_argument);
}

TEST_CASE("special form of the equation of motion") {
  const GeneratorSet gen3 = GeneratorSet::make(ladder(3));
  const TauPolicy pol = TauPolicy::constant(1.0);
  SUBCASE("gibbs keeps only the commutator") {
    const auto gibbs = gibbs_state(gen3, 0.7, {});
    const auto sf = special_form_rhs(gibbs, gen3, pol);
    for (double f : sf.coefficients) CHECK(std::abs(f) < 1e-10);
    CHECK(operator_norm_max(sf.rhs - hamiltonian_term(gibbs, gen3)) < 1e-9);
  }
  SUBCASE("agreement with the projection rhs") {
    const auto st = SpectralState::decompose(qutrit_d());
    const auto sf = special_form_rhs(st, gen3, pol);
    CHECK(operator_norm_max(sf.rhs - rhs(st, gen3, pol)) < 1e-9);
    CHECK(sf.entropy_rate == doctest::Approx(entropy_rate(st, gen3, pol)).epsilon(1e-9));

    Rng rng(59);
    const Matrix rho = random_density(rng, 4);
    const GeneratorSet gen = random_generators(rng, 4, 1);
    const auto s = SpectralState::decompose(rho);
    const auto sf2 = special_form_rhs(s, gen, pol);
    CHECK(operator_norm_max(sf2.rhs - rhs(s, gen, pol)) < 1e-9);
    CHECK(sf2.entropy_rate == doctest::Approx(entropy_rate(s, gen, pol)).epsilon(1e-8));
  }
  SUBCASE("rank-deficient states are rejected") {
    Matrix rho = Matrix::Zero(3, 3);
    rho.diagonal() << 0.6, 0.4, 0.0;
    CHECK_THROWS_AS(special_form_rhs(SpectralState::decompose(rho), gen3, pol), InvariantError);
  }
}

TEST_CASE("driven direction with imposed rates") {
  const GeneratorSet gen3 = GeneratorSet::make(ladder(3));
  const auto st = SpectralState::decompose(qutrit_d());
  const TauPolicy pol = TauPolicy::constant(1.0);
  const auto base = dissipative_direction(st, gen3);

  SUBCASE("zero rates reduce to the plain direction") {
    const Matrix d = driven_direction(st, gen3, {0.0}, pol);
    CHECK(operator_norm_max(d - base.D) < 1e-14);
  }
  SUBCASE("imposed energy rate is delivered") {
    const Matrix d = driven_direction(st, gen3, {0.1}, pol);
    const Matrix dis = dissipative_term(st, DissipativeDirection{d, real_inner(d, d), {}, {}, {}},
                                        1.0);
    CHECK((dis * gen3.hamiltonian).trace().real() == doctest::Approx(0.1).epsilon(1e-8));
    CHECK(std::abs(dis.trace().real()) < 1e-10);
    // the driving addition is orthogonal to the entropy gradient direction
    const Matrix slog = st.sqrt_rho() * st.log_on_range();
    CHECK(std::abs(real_inner(d - base.D, slog)) < 1e-10);
  }
  SUBCASE("one rate zero keeps that mean conserved") {
    Rng rng(61);
    const GeneratorSet gen = random_generators(rng, 4, 1);
    const Matrix rho = random_density(rng, 4);
    const auto s = SpectralState::decompose(rho);
    const Matrix d = driven_direction(s, gen, {0.05, 0.0}, pol);
    const Matrix dis =
        dissipative_term(s, DissipativeDirection{d, real_inner(d, d), {}, {}, {}}, 1.0);
    CHECK((dis * gen.hamiltonian).trace().real() == doctest::Approx(0.05).epsilon(1e-8));
    CHECK(std::abs((dis * gen.extras[0]).trace().real()) < 1e-8);
  }
}
