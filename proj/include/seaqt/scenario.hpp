#pragma once

#include <map>
#include <string>
#include <vector>

#include "seaqt/integrator.hpp"

namespace seaqt {

/// Fully parsed simulation scenario. The on-disk format is a plain
/// key/value text file with nested blocks; matrices are written row-major as
/// real/imaginary pairs so runs are bit-reproducible.
struct ScenarioConfig {
  std::string name;
  std::vector<int> dims;
  std::vector<Matrix> local_hamiltonians;
  Matrix interaction;          // empty = no coupling
  std::vector<Matrix> extras;  // global extra generators
  Matrix initial;
  std::vector<TauPolicy> policies;  // one per subsystem (or a single broadcast entry)
  DynamicsVariant variant = DynamicsVariant::Sea;
  IntegratorConfig run;
  UnitSystem units;
  Tolerances tol;
  std::string out_dir;
  std::string format = "csv";

  // optional sweep block
  std::string sweep_parameter;
  std::vector<double> sweep_values;

  SystemModel model() const;
  CompositionStructure composition() const { return CompositionStructure::make(dims); }
};

ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario_file(const std::string& path);

/// Built-in presets (stored as config text so they round-trip through the
/// parser): qubit-coherence, qutrit-diagonal, gibbs, two-qubit-correlated,
/// appendix-g-demo.
const std::map<std::string, std::string>& scenario_presets();
ScenarioConfig load_preset(const std::string& name);

/// CSV with one row per sample; floats carry 17 significant digits.
/// Columns: t, entropy, energy, extra means, eigenvalues, entropy production
/// rate, taus, trace distance to the attractor (NaN if none), correlation
/// (composite only).
std::string trajectory_csv(const Trajectory& traj, const SystemModel& model,
                           const AttractorReport& attractor);

std::string summary_json(const Trajectory& traj, const SystemModel& model,
                         const AttractorReport& attractor, const ScenarioConfig& config,
                         std::uint64_t seed);

}  // namespace seaqt
