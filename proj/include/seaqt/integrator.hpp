#pragma once

#include <string>
#include <vector>

#include "seaqt/composite.hpp"

namespace seaqt {

/// Single or composite system plus the choice of dissipator. A single
/// indivisible system is the M = 1 composition, for which the composite
/// dynamics reduces exactly to the single-constituent form.
struct SystemModel {
  CompositionStructure comp;
  CompositeGenerators gens;
  DynamicsVariant variant = DynamicsVariant::Sea;

  static SystemModel single(const GeneratorSet& gen,
                            DynamicsVariant variant = DynamicsVariant::Sea);
  static SystemModel composite(CompositionStructure comp, CompositeGenerators gens,
                               DynamicsVariant variant = DynamicsVariant::Sea);

  bool is_composite() const { return comp.subsystem_count() > 1; }
  int dim() const { return comp.total_dim(); }
  Matrix hamiltonian() const { return gens.assembled_hamiltonian(comp); }
  GeneratorSet as_generator_set() const { return gens.as_single(comp); }
};

struct IntegratorConfig {
  enum class Method { RK4, RK45 };
  enum class Projection { RenormalizeTrace, ClipThenRenormalize, None };

  Method method = Method::RK4;
  double dt = 0.01;         // fixed step (RK4) or initial step (RK45)
  double t_end = 10.0;
  Projection projection = Projection::ClipThenRenormalize;
  double equilibrium_epsilon = 1e-16;  // halt when (D|D) and ||[H,rho]|| drop below
  double max_drift = 1e-8;
  double rel_tol = 1e-8;    // RK45
  double abs_tol = 1e-10;   // RK45
  double sample_interval = 0.0;  // 0 records every accepted step
  long max_steps = 20000000;

  void validate() const {
    if (!(dt > 0) || !(t_end > 0)) throw ConfigError("IntegratorConfig: dt and t_end must be positive");
  }
};

struct TrajectorySample {
  double t = 0.0;
  Matrix rho;
  double entropy = 0.0;
  double energy = 0.0;
  std::vector<double> extra_means;
  RealVector eigenvalues;          // descending
  double dissipation_norm_sq = 0.0;  // (D|D), or the sum over subsystems
  std::vector<double> taus;
  double entropy_production = 0.0;
  double correlation = 0.0;        // sigma_AB across the first factor split; 0 for single
};

struct TrajectoryEvent {
  double t = 0.0;
  std::string kind;     // "equilibrium", "projection", "drift_warning", ...
  std::string detail;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<TrajectoryEvent> events;
  bool reached_equilibrium = false;
  double max_trace_drift = 0.0;
  double max_energy_drift = 0.0;      // relative
  double max_extra_drift = 0.0;       // absolute, over all extras
  double max_entropy_dip = 0.0;       // worst per-step entropy decrease
  double min_eigenvalue = 0.0;
  long steps = 0;

  const TrajectorySample& front() const { return samples.front(); }
  const TrajectorySample& back() const { return samples.back(); }
};

Trajectory integrate(const Matrix& rho0, const SystemModel& model,
                     const std::vector<TauPolicy>& policies, const IntegratorConfig& config,
                     const UnitSystem& units = {}, const Tolerances& tol = {});

/// Near-equilibrium reference solution
/// e^{-t/tau_e} U(t) rho0 U(t)^dag + (1 - e^{-t/tau_e}) rho_e.
Matrix bloch_reference(const Matrix& rho0, const Matrix& rho_e, double tau_e, const Matrix& h,
                       double t, const UnitSystem& units = {});

/// Tr |a - b|.
double trace_distance(const Matrix& a, const Matrix& b);
double trace_distance(const SpectralState& a, const SpectralState& b);

struct AttractorReport {
  std::string classification;  // "gibbs", "range_restricted_gibbs", "limit_cycle"
  double terminal_distance = 0.0;
  double beta = 0.0;
  std::vector<double> nus;
  bool entropy_monotone = false;
  double max_entropy_dip = 0.0;
  bool rank_preserved = false;
  double max_revived_eigenvalue = 0.0;
  Matrix attractor;  // empty when no static attractor applies
};

/// Audit of a finished trajectory against the equilibrium family that
/// matches the conserved means: terminal distance, entropy monotonicity and
/// rank preservation.
AttractorReport attractor_summary(const Trajectory& traj, const SystemModel& model,
                                  const UnitSystem& units = {}, const Tolerances& tol = {});

}  // namespace seaqt
