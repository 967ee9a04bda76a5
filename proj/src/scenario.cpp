#include "seaqt/scenario.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace seaqt {

namespace {

// ---- tiny block/key-value parser -------------------------------------

struct Node {
  std::string name;
  std::vector<std::pair<std::string, std::vector<std::string>>> entries;
  std::vector<Node> children;

  const Node* child(const std::string& n) const {
    for (const Node& c : children)
      if (c.name == n) return &c;
    return nullptr;
  }
  std::vector<const Node*> all_children(const std::string& n) const {
    std::vector<const Node*> out;
    for (const Node& c : children)
      if (c.name == n) out.push_back(&c);
    return out;
  }
  const std::vector<std::string>* entry(const std::string& k) const {
    for (const auto& e : entries)
      if (e.first == k) return &e.second;
    return nullptr;
  }
  std::vector<const std::vector<std::string>*> all_entries(const std::string& k) const {
    std::vector<const std::vector<std::string>*> out;
    for (const auto& e : entries)
      if (e.first == k) out.push_back(&e.second);
    return out;
  }
};

// Token stream with explicit end-of-line markers: an entry's value list runs
// to the end of its line (or to a closing brace), so matrices are written on
// a single line.
constexpr const char* kEol = "\n";

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string tok;
    bool any = false;
    while (ls >> tok) {
      std::string cur;
      for (char ch : tok) {
        if (ch == '=' || ch == '{' || ch == '}') {
          if (!cur.empty()) tokens.push_back(cur), cur.clear();
          tokens.push_back(std::string(1, ch));
          any = true;
        } else {
          cur += ch;
        }
      }
      if (!cur.empty()) tokens.push_back(cur), any = true;
    }
    if (any) tokens.push_back(kEol);
  }
  return tokens;
}

Node parse_block(const std::vector<std::string>& toks, std::size_t& i, std::string name) {
  Node node;
  node.name = std::move(name);
  while (i < toks.size()) {
    if (toks[i] == kEol) {
      ++i;
      continue;
    }
    if (toks[i] == "}") {
      ++i;
      return node;
    }
    if (i + 1 < toks.size() && toks[i + 1] == "{") {
      std::string child = toks[i];
      i += 2;
      node.children.push_back(parse_block(toks, i, std::move(child)));
      continue;
    }
    if (i + 1 < toks.size() && toks[i + 1] == "=") {
      std::string key = toks[i];
      i += 2;
      std::vector<std::string> values;
      // stop at end of line, at a closing brace, or just before the next
      // `key =` / `name {` pair (inline blocks carry several entries per line)
      while (i < toks.size() && toks[i] != kEol && toks[i] != "}" &&
             !(i + 1 < toks.size() && (toks[i + 1] == "=" || toks[i + 1] == "{")))
        values.push_back(toks[i++]);
      node.entries.emplace_back(std::move(key), std::move(values));
      continue;
    }
    throw ConfigError("config parse error near '" + toks[i] + "'");
  }
  if (node.name != "<root>")
    throw ConfigError("config parse error: unterminated block '" + node.name + "'");
  return node;
}

double to_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: not a number: '" + s + "'");
  }
}

int to_int(const std::string& s) {
  const double v = to_double(s);
  if (v != std::floor(v)) throw ConfigError("config: not an integer: '" + s + "'");
  return static_cast<int>(v);
}

Matrix parse_matrix(const std::vector<std::string>& toks, int dim, const std::string& what) {
  if (static_cast<int>(toks.size()) != 2 * dim * dim)
    throw ConfigError("config: " + what + " needs " + std::to_string(2 * dim * dim) +
                      " numbers (row-major re/im pairs), got " + std::to_string(toks.size()));
  Matrix m(dim, dim);
  int k = 0;
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      const double re = to_double(toks[k++]);
      const double im = to_double(toks[k++]);
      m(r, c) = Complex(re, im);
    }
  return m;
}

TauPolicy parse_tau(const Node& tau) {
  const auto* kind = tau.entry("policy");
  if (!kind || kind->empty()) throw ConfigError("config: tau block needs 'policy'");
  const std::string k = (*kind)[0];
  if (k == "constant") {
    const auto* v = tau.entry("value");
    return TauPolicy::constant(v && !v->empty() ? to_double((*v)[0]) : 1.0);
  }
  if (k == "max-epr") {
    double fallback = 1.0, var_eps = 1e-12;
    if (const auto* f = tau.entry("fallback"); f && !f->empty()) fallback = to_double((*f)[0]);
    if (const auto* e = tau.entry("variance_epsilon"); e && !e->empty())
      var_eps = to_double((*e)[0]);
    return TauPolicy::max_epr(fallback, var_eps);
  }
  throw ConfigError("config: unknown tau policy '" + k + "' (use constant or max-epr)");
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

SystemModel ScenarioConfig::model() const {
  const CompositionStructure comp = composition();
  const CompositeGenerators gens =
      CompositeGenerators::make(comp, local_hamiltonians, interaction, extras);
  return SystemModel::composite(comp, gens, variant);
}

ScenarioConfig parse_scenario(const std::string& text) {
  const std::vector<std::string> tokens = tokenize(text);
  std::size_t i = 0;
  const Node root = parse_block(tokens, i, "<root>");

  ScenarioConfig cfg;
  const Node* system = root.child("system");
  if (!system) throw ConfigError("config: missing 'system' block");
  const auto* dims = system->entry("dims");
  if (!dims || dims->empty()) throw ConfigError("config: system.dims required");
  for (const std::string& d : *dims) cfg.dims.push_back(to_int(d));
  const int total = CompositionStructure::make(cfg.dims).total_dim();

  const Node* ham = system->child("hamiltonian");
  if (!ham) throw ConfigError("config: system.hamiltonian block required");
  const auto locals = ham->all_entries("local");
  if (static_cast<int>(locals.size()) != static_cast<int>(cfg.dims.size()))
    throw ConfigError("config: one hamiltonian.local per subsystem required");
  for (std::size_t j = 0; j < locals.size(); ++j) {
    Matrix h = parse_matrix(*locals[j], cfg.dims[j], "hamiltonian.local");
    if (!is_hermitian(h))
      throw ConfigError("config: hamiltonian.local " + std::to_string(j) + " is not Hermitian");
    cfg.local_hamiltonians.push_back(std::move(h));
  }
  if (const auto* v = ham->entry("interaction")) {
    cfg.interaction = parse_matrix(*v, total, "hamiltonian.interaction");
    if (!is_hermitian(cfg.interaction))
      throw ConfigError("config: hamiltonian.interaction is not Hermitian");
  }
  for (const auto* e : system->all_entries("extra")) {
    Matrix g = parse_matrix(*e, total, "system.extra");
    if (!is_hermitian(g)) throw ConfigError("config: system.extra is not Hermitian");
    cfg.extras.push_back(std::move(g));
  }

  const Node* initial = root.child("initial");
  if (!initial) throw ConfigError("config: missing 'initial' block");
  if (const auto* m = initial->entry("matrix")) {
    cfg.initial = parse_matrix(*m, total, "initial.matrix");
  } else {
    throw ConfigError("config: initial.matrix required");
  }
  if (!is_hermitian(cfg.initial)) throw ConfigError("config: initial state is not Hermitian");
  if (std::abs(cfg.initial.trace().real() - 1.0) > 1e-8)
    throw ConfigError("config: initial state trace deviates from 1");

  if (const Node* tau = root.child("tau")) {
    cfg.policies.push_back(parse_tau(*tau));
  } else {
    cfg.policies.push_back(TauPolicy::constant(1.0));
  }
  for (const Node* tj : root.all_children("tau_subsystem")) {
    // optional per-subsystem overrides, in order
    cfg.policies.push_back(parse_tau(*tj));
  }
  if (cfg.policies.size() > 1) {
    cfg.policies.erase(cfg.policies.begin());
    if (static_cast<int>(cfg.policies.size()) != static_cast<int>(cfg.dims.size()))
      throw ConfigError("config: one tau_subsystem block per subsystem required");
  }

  if (const Node* run = root.child("run")) {
    if (const auto* m = run->entry("method")) {
      const std::string v = (*m)[0];
      if (v == "rk4")
        cfg.run.method = IntegratorConfig::Method::RK4;
      else if (v == "rk45")
        cfg.run.method = IntegratorConfig::Method::RK45;
      else
        throw ConfigError("config: unknown method '" + v + "'");
    }
    if (const auto* v = run->entry("dt")) cfg.run.dt = to_double((*v)[0]);
    if (const auto* v = run->entry("t_end")) cfg.run.t_end = to_double((*v)[0]);
    if (const auto* v = run->entry("sample_interval")) cfg.run.sample_interval = to_double((*v)[0]);
    if (const auto* v = run->entry("equilibrium_epsilon"))
      cfg.run.equilibrium_epsilon = to_double((*v)[0]);
    if (const auto* v = run->entry("max_drift")) cfg.run.max_drift = to_double((*v)[0]);
    if (const auto* v = run->entry("projection")) {
      const std::string p = (*v)[0];
      if (p == "clip")
        cfg.run.projection = IntegratorConfig::Projection::ClipThenRenormalize;
      else if (p == "renormalize")
        cfg.run.projection = IntegratorConfig::Projection::RenormalizeTrace;
      else if (p == "none")
        cfg.run.projection = IntegratorConfig::Projection::None;
      else
        throw ConfigError("config: unknown projection '" + p + "'");
    }
    if (const auto* v = run->entry("variant")) {
      const std::string s = (*v)[0];
      if (s == "sea")
        cfg.variant = DynamicsVariant::Sea;
      else if (s == "flawed")
        cfg.variant = DynamicsVariant::Flawed;
      else if (s == "unitary")
        cfg.variant = DynamicsVariant::Unitary;
      else
        throw ConfigError("config: unknown variant '" + s + "'");
    }
  }
  if (const Node* u = root.child("units")) {
    if (const auto* v = u->entry("hbar")) cfg.units.hbar = to_double((*v)[0]);
    if (const auto* v = u->entry("k_B")) cfg.units.k_B = to_double((*v)[0]);
    cfg.units.validate();
  }
  if (const Node* o = root.child("output")) {
    if (const auto* v = o->entry("dir")) cfg.out_dir = (*v)[0];
    if (const auto* v = o->entry("format")) {
      cfg.format = (*v)[0];
      if (cfg.format != "csv" && cfg.format != "json")
        throw ConfigError("config: format must be csv or json");
    }
  }
  if (const Node* s = root.child("sweep")) {
    if (const auto* p = s->entry("parameter"); p && !p->empty()) cfg.sweep_parameter = (*p)[0];
    if (const auto* v = s->entry("values"))
      for (const std::string& x : *v) cfg.sweep_values.push_back(to_double(x));
  }

  // Validate that the assembled system is consistent.
  (void)cfg.model();
  (void)SpectralState::decompose((cfg.initial + cfg.initial.adjoint()) / 2.0, cfg.units, cfg.tol);
  return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  ScenarioConfig cfg = parse_scenario(ss.str());
  if (cfg.name.empty()) cfg.name = path;
  return cfg;
}

const std::map<std::string, std::string>& scenario_presets() {
  static const std::map<std::string, std::string> presets = {
      {"qubit-coherence", R"(# single qubit with initial coherence
system {
  dims = 2
  hamiltonian { local = 0 0  0 0  0 0  1 0 }
}
initial { matrix = 0.7 0  0.2 0  0.2 0  0.3 0 }
tau { policy = constant  value = 1 }
run { method = rk4  dt = 0.005  t_end = 10  sample_interval = 0.05 }
)"},
      {"qutrit-diagonal", R"(# diagonal qutrit relaxing to the energy-matched equilibrium
system {
  dims = 3
  hamiltonian { local = 0 0  0 0  0 0   0 0  1 0  0 0   0 0  0 0  2 0 }
}
initial { matrix = 0.5 0  0 0  0 0   0 0  0.1 0  0 0   0 0  0 0  0.4 0 }
tau { policy = constant  value = 1 }
run { method = rk4  dt = 0.005  t_end = 30  sample_interval = 0.1 }
)"},
      {"gibbs", R"(# canonical qubit state: stationary under the full dynamics
system {
  dims = 2
  hamiltonian { local = 0 0  0 0  0 0  1 0 }
}
initial { matrix = 0.66666666666666663 0  0 0  0 0  0.33333333333333331 0 }
tau { policy = constant  value = 1 }
run { method = rk4  dt = 0.01  t_end = 5  sample_interval = 0.1 }
)"},
      {"two-qubit-correlated", R"(# Bell-diagonal two-qubit state, noninteracting local Hamiltonians
system {
  dims = 2 2
  hamiltonian {
    local = 1 0  0 0  0 0  -1 0
    local = 1 0  0 0  0 0  -1 0
  }
}
initial { matrix = 0.4 0  0 0  0 0  0.3 0   0 0  0.1 0  0 0  0 0   0 0  0 0  0.1 0  0 0   0.3 0  0 0  0 0  0.4 0 }
tau { policy = constant  value = 1 }
run { method = rk4  dt = 0.005  t_end = 5  sample_interval = 0.05 }
)"},
      {"appendix-g-demo", R"(# correlated two-qubit state driven by the flawed dissipator variant:
# global invariants stay put, subsystem energies leak
system {
  dims = 2 2
  hamiltonian {
    local = 0 0  0 0  0 0  1 0
    local = 0 0  0 0  0 0  1.5 0
  }
}
initial { matrix = 0.4721542044814524 0  -0.049310078801770282 0.041999999999999996  0.1488223895444499 0  0.11662930391584234 0.010499999999999999  -0.049310078801770282 -0.041999999999999996  0.13964819807937756 0  -0.020847966932832859 -0.010499999999999999  -0.00078102409047851873 0  0.1488223895444499 0  -0.020847966932832859 0.010499999999999999  0.22784579551854761 0  0.049310078801770282 0.028000000000000004  0.11662930391584234 -0.010499999999999999  -0.00078102409047851873 0  0.049310078801770282 -0.028000000000000004  0.16035180192062243 0 }
tau { policy = constant  value = 1 }
run { method = rk4  dt = 0.005  t_end = 2  sample_interval = 0.05  variant = flawed }
)"},
  };
  return presets;
}

ScenarioConfig load_preset(const std::string& name) {
  const auto& presets = scenario_presets();
  const auto it = presets.find(name);
  if (it == presets.end()) {
    std::string known;
    for (const auto& [k, v] : presets) known += (known.empty() ? "" : ", ") + k;
    throw ConfigError("unknown preset '" + name + "' (available: " + known + ")");
  }
  ScenarioConfig cfg = parse_scenario(it->second);
  cfg.name = name;
  return cfg;
}

std::string trajectory_csv(const Trajectory& traj, const SystemModel& model,
                           const AttractorReport& attractor) {
  std::ostringstream os;
  const int n = model.dim();
  os << "t,entropy,energy";
  for (std::size_t i = 0; i < model.gens.global_extras.size(); ++i) os << ",extra_" << i;
  for (int i = 0; i < n; ++i) os << ",eig_" << i;
  os << ",entropy_production_rate";
  for (int j = 0; j < model.comp.subsystem_count(); ++j) os << ",tau_" << j;
  os << ",dist_to_attractor";
  if (model.is_composite()) os << ",correlation";
  os << "\n";
  for (const TrajectorySample& s : traj.samples) {
    os << fmt17(s.t) << ',' << fmt17(s.entropy) << ',' << fmt17(s.energy);
    for (double x : s.extra_means) os << ',' << fmt17(x);
    for (int i = 0; i < n; ++i) os << ',' << fmt17(s.eigenvalues(i));
    os << ',' << fmt17(s.entropy_production);
    for (double x : s.taus) os << ',' << fmt17(x);
    const double dist = attractor.attractor.size() > 0
                            ? trace_distance(s.rho, attractor.attractor)
                            : std::numeric_limits<double>::quiet_NaN();
    os << ',' << fmt17(dist);
    if (model.is_composite()) os << ',' << fmt17(s.correlation);
    os << "\n";
  }
  return os.str();
}

std::string summary_json(const Trajectory& traj, const SystemModel& model,
                         const AttractorReport& attractor, const ScenarioConfig& config,
                         std::uint64_t seed) {
  nlohmann::json j;
  j["scenario"] = config.name.empty() ? "inline" : config.name;
  j["seed"] = seed;
  j["steps"] = traj.steps;
  j["reached_equilibrium"] = traj.reached_equilibrium;
  j["drift"] = {{"trace", traj.max_trace_drift},
                {"energy_relative", traj.max_energy_drift},
                {"extras", traj.max_extra_drift},
                {"entropy_dip", traj.max_entropy_dip},
                {"min_eigenvalue", traj.min_eigenvalue}};
  const TrajectorySample& last = traj.samples.back();
  j["terminal"] = {{"t", last.t},
                   {"entropy", last.entropy},
                   {"energy", last.energy},
                   {"entropy_production_rate", last.entropy_production},
                   {"dissipation_norm_sq", last.dissipation_norm_sq}};
  std::vector<std::vector<std::vector<double>>> rho;
  for (int r = 0; r < last.rho.rows(); ++r) {
    std::vector<std::vector<double>> row;
    for (int c = 0; c < last.rho.cols(); ++c)
      row.push_back({last.rho(r, c).real(), last.rho(r, c).imag()});
    rho.push_back(std::move(row));
  }
  j["terminal"]["rho"] = rho;
  j["attractor"] = {{"classification", attractor.classification},
                    {"terminal_distance", attractor.terminal_distance},
                    {"beta", attractor.beta},
                    {"nus", attractor.nus},
                    {"entropy_monotone", attractor.entropy_monotone},
                    {"max_entropy_dip", attractor.max_entropy_dip},
                    {"rank_preserved", attractor.rank_preserved},
                    {"max_revived_eigenvalue", attractor.max_revived_eigenvalue}};
  nlohmann::json events = nlohmann::json::array();
  for (const TrajectoryEvent& e : traj.events)
    events.push_back({{"t", e.t}, {"kind", e.kind}, {"detail", e.detail}});
  j["events"] = events;
  return j.dump(2);
}

}  // namespace seaqt
