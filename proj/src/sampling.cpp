#include "seaqt/sampling.hpp"

#include <cmath>

namespace seaqt {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t splitmix_step(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t Rng::next_u64() { return splitmix_step(state_); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::gauss() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  have_spare_ = true;
  spare_ = r * std::sin(kTwoPi * u2);
  return r * std::cos(kTwoPi * u2);
}

std::uint64_t Rng::substream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t x = seed ^ (0xD1B54A32D192ED03ull * (index + 1));
  splitmix_step(x);
  return x;
}

Matrix random_hermitian(Rng& rng, int dim, double scale) {
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(rng.gauss(), rng.gauss());
  Matrix h = 0.5 * scale * (a + a.adjoint());
  return h;
}

Matrix random_density(Rng& rng, int dim, int rank) {
  if (rank <= 0 || rank > dim) rank = dim;
  Matrix a(dim, rank);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < rank; ++j) a(i, j) = Complex(rng.gauss(), rng.gauss());
  Matrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return (rho + rho.adjoint()) / 2.0;
}

Matrix random_pure_state(Rng& rng, int dim) {
  Eigen::VectorXcd psi(dim);
  for (int i = 0; i < dim; ++i) psi(i) = Complex(rng.gauss(), rng.gauss());
  psi /= psi.norm();
  return psi * psi.adjoint();
}

GeneratorSet random_generators(Rng& rng, int dim, int n_extras, double scale) {
  const Matrix h = random_hermitian(rng, dim, scale);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  std::vector<Matrix> extras;
  for (int k = 0; k < n_extras; ++k) {
    RealVector g(dim);
    for (int i = 0; i < dim; ++i) g(i) = rng.gauss();
    // same eigenbasis as H, so [G, H] = 0 to roundoff
    Matrix gm = es.eigenvectors() * g.asDiagonal() * es.eigenvectors().adjoint();
    extras.push_back((gm + gm.adjoint()) / 2.0);
  }
  return GeneratorSet::make(h, std::move(extras));
}

Matrix random_admissible_perturbation(Rng& rng, const GeneratorSet& gen) {
  const int n = gen.dim();
  Matrix v = random_hermitian(rng, n);
  // remove the components along {I, H, G_i} under the trace inner product;
  // Hermitian combinations with real coefficients stay Hermitian
  std::vector<Matrix> basis = gen.motion_generators();
  const OrthonormalBasis ob = orthonormalize(basis, 1e-12);
  for (int sweep = 0; sweep < 2; ++sweep)
    for (const Matrix& u : ob.basis) v -= real_inner(u, v) * u;
  const double nrm = op_norm(v);
  if (nrm > 0) v /= nrm;
  return (v + v.adjoint()) / 2.0;
}

}  // namespace seaqt
