#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace seaqt {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;     // dense operator on the Hilbert space
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Physical constants of the simulation; natural units by default.
struct UnitSystem {
  double hbar = 1.0;
  double k_B = 1.0;

  void validate() const {
    if (!(hbar > 0.0) || !(k_B > 0.0))
      throw std::invalid_argument("UnitSystem: hbar and k_B must be positive");
  }
};

/// Numerical thresholds shared across the kernel.
///
/// rank_epsilon is a per-dimension scale: eigenvalues of a state with
/// |lambda| < rank_epsilon * dim are snapped to zero before building the
/// square root, the range projector and the range-restricted logarithm.
struct Tolerances {
  double rank_epsilon = 1e-12;
  double manifold_epsilon = 1e-10;   // Gram-Schmidt rank-revealing drop
  double equilibrium_epsilon = 1e-10;  // (D|D) below this counts as nondissipative
  double drift_epsilon = 1e-8;       // invariant drift warnings

  double rank_cut(int dim) const { return rank_epsilon * static_cast<double>(dim); }

  void validate() const {
    if (!(rank_epsilon > 0) || !(manifold_epsilon > 0) ||
        !(equilibrium_epsilon > 0) || !(drift_epsilon > 0))
      throw std::invalid_argument("Tolerances: all thresholds must be positive");
  }
};

/// Configuration/input errors (CLI exit code 2), as opposed to runtime
/// invariant breaches (exit code 1).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A runtime violation of a dynamical invariant (positivity, drift, ...).
struct InvariantError : std::runtime_error {
  explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

/// Dense desk-scale storage; dimensions beyond this are rejected up front.
constexpr int kMaxDenseDim = 64;

inline Matrix identity(int dim) { return Matrix::Identity(dim, dim); }

inline bool is_hermitian(const Matrix& a, double tol = 1e-10) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline double operator_norm_max(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

inline Matrix anticommutator(const Matrix& a, const Matrix& b) { return a * b + b * a; }

}  // namespace seaqt
