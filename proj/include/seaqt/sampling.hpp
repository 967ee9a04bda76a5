#pragma once

#include <cstdint>

#include "seaqt/single_system.hpp"

namespace seaqt {

/// Deterministic, platform-independent random source (splitmix64 stream,
/// Box-Muller normals). Distribution code is hand-rolled on purpose: the
/// std:: distributions are implementation-defined, and recorded seeds must
/// reproduce bit-identical fixtures everywhere, including across the
/// serial/parallel batch paths.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double gauss();    // standard normal

  /// Decorrelated child seed for item `index` of a batch.
  static std::uint64_t substream(std::uint64_t seed, std::uint64_t index);

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

Matrix random_hermitian(Rng& rng, int dim, double scale = 1.0);

/// Random density operator of the given rank (0 = full rank), built as a
/// normalized Gram matrix of Gaussian vectors.
Matrix random_density(Rng& rng, int dim, int rank = 0);

/// Random rank-one projector.
Matrix random_pure_state(Rng& rng, int dim);

/// Random generator set: Hermitian H plus extras that commute with H
/// (random real functions of H in its eigenbasis).
GeneratorSet random_generators(Rng& rng, int dim, int n_extras, double scale = 1.0);

/// Hermitian perturbation orthogonal (in the trace inner product) to the
/// identity and every generator; admissible as a mean-preserving state
/// displacement.
Matrix random_admissible_perturbation(Rng& rng, const GeneratorSet& gen);

}  // namespace seaqt
