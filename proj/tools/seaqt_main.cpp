#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "seaqt/conformance.hpp"
#include "seaqt/onsager.hpp"
#include "seaqt/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string preset;
  std::string out_dir;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string format;
};

seaqt::ScenarioConfig resolve_scenario(const GlobalArgs& g) {
  if (!g.config_path.empty() && !g.preset.empty())
    throw seaqt::ConfigError("pass either --config or --preset, not both");
  seaqt::ScenarioConfig cfg;
  if (!g.config_path.empty())
    cfg = seaqt::load_scenario_file(g.config_path);
  else if (!g.preset.empty())
    cfg = seaqt::load_preset(g.preset);
  else
    throw seaqt::ConfigError("a --config file or --preset name is required");
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  if (cfg.out_dir.empty()) {
    const char* env = std::getenv("SEAQT_OUT_DIR");
    cfg.out_dir = env && *env ? env : "out";
  }
  if (!g.format.empty()) cfg.format = g.format;
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

json error_json(const std::string& kind, const std::string& what) {
  return json{{"error", kind}, {"detail", what}};
}

seaqt::AttractorReport safe_attractor(const seaqt::Trajectory& traj,
                                      const seaqt::SystemModel& model,
                                      const seaqt::UnitSystem& units,
                                      const seaqt::Tolerances& tol) {
  try {
    return seaqt::attractor_summary(traj, model, units, tol);
  } catch (const std::exception& e) {
    seaqt::AttractorReport rep;
    rep.classification = std::string("unavailable: ") + e.what();
    rep.terminal_distance = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
}

int cmd_run(const GlobalArgs& g) {
  const seaqt::ScenarioConfig cfg = resolve_scenario(g);
  const seaqt::SystemModel model = cfg.model();
  const seaqt::Trajectory traj =
      seaqt::integrate(cfg.initial, model, cfg.policies, cfg.run, cfg.units, cfg.tol);
  const seaqt::AttractorReport attractor = safe_attractor(traj, model, cfg.units, cfg.tol);

  const fs::path dir(cfg.out_dir);
  write_file(dir / "trajectory.csv", seaqt::trajectory_csv(traj, model, attractor));
  write_file(dir / "summary.json", seaqt::summary_json(traj, model, attractor, cfg, g.seed));
  std::cout << "run: " << traj.samples.size() << " samples, " << traj.steps << " steps, t = "
            << traj.samples.back().t << "\n"
            << "  entropy " << traj.samples.front().entropy << " -> "
            << traj.samples.back().entropy << "\n"
            << "  attractor: " << attractor.classification << " (distance "
            << attractor.terminal_distance << ")\n"
            << "  wrote " << (dir / "trajectory.csv").string() << ", "
            << (dir / "summary.json").string() << "\n";
  return 0;
}

int cmd_check(const GlobalArgs& g) {
  const seaqt::ScenarioConfig cfg = resolve_scenario(g);
  const seaqt::SystemModel model = cfg.model();
  seaqt::ConformanceOptions opts;
  opts.seed = g.seed ^ 0x5EAC0DEull;
  opts.exec = seaqt::thread_count() > 1 ? seaqt::Exec::Parallel : seaqt::Exec::Serial;
  const auto results =
      seaqt::run_conformance(model, cfg.policies, cfg.initial, opts, cfg.units, cfg.tol);

  json report = json::array();
  for (const auto& c : results) {
    const char* status = c.status == seaqt::CriterionResult::Status::Pass        ? "PASS"
                         : c.status == seaqt::CriterionResult::Status::Fail      ? "FAIL"
                         : c.status == seaqt::CriterionResult::Status::Probe     ? "PROBE"
                                                                                 : "N/A";
    std::printf("[%5s] criterion %d %-32s margin %.3e%s%s\n", status, c.id, c.name.c_str(),
                c.margin, c.note.empty() ? "" : " -- ", c.note.c_str());
    report.push_back({{"id", c.id},
                      {"name", c.name},
                      {"status", status},
                      {"margin", c.margin},
                      {"threshold", c.threshold},
                      {"note", c.note}});
  }
  const fs::path dir(cfg.out_dir);
  write_file(dir / "conformance.json", report.dump(2));
  std::cout << "wrote " << (dir / "conformance.json").string() << "\n";
  return seaqt::all_passed(results) ? 0 : 1;
}

int cmd_onsager(const GlobalArgs& g, const std::string& basis_kind) {
  const seaqt::ScenarioConfig cfg = resolve_scenario(g);
  const seaqt::SystemModel model = cfg.model();
  const seaqt::SpectralState st =
      seaqt::SpectralState::decompose(cfg.initial, cfg.units, cfg.tol);
  const seaqt::GeneratorSet gen = model.as_generator_set();

  seaqt::ObservableBasis basis;
  if (basis_kind == "gell-mann")
    basis = seaqt::ObservableBasis::gell_mann(model.dim());
  else if (basis_kind == "orthogonal-extension")
    basis = seaqt::ObservableBasis::orthogonal_extension(st, gen, cfg.tol);
  else
    throw seaqt::ConfigError("unknown basis '" + basis_kind + "'");

  const seaqt::AffinityVector aff = seaqt::affinities_from_state(st, basis, cfg.units);
  json j;
  j["basis"] = basis_kind;
  j["affinities"] = {{"f0", aff.f0},
                     {"f", std::vector<double>(aff.f.data(), aff.f.data() + aff.f.size())},
                     {"residual", aff.residual},
                     {"unidentifiable", aff.unidentifiable}};
  const double s_direct = st.entropy();
  double s_affinity = cfg.units.k_B * aff.f0;
  for (int i = 0; i < aff.f.size(); ++i)
    s_affinity += cfg.units.k_B * aff.f(i) * st.mean(basis.ops[i]);
  j["entropy_identity"] = {{"direct", s_direct}, {"from_affinities", s_affinity}};

  auto dump_L = [](const seaqt::RealMatrix& L) {
    std::vector<std::vector<double>> rows;
    for (int r = 0; r < L.rows(); ++r)
      rows.emplace_back(L.row(r).data(), L.row(r).data() + L.cols());
    return rows;
  };

  if (model.is_composite()) {
    const auto cm = seaqt::composite_conductivities(st, model.comp, model.gens, basis,
                                                    cfg.policies, cfg.units, cfg.tol);
    j["L"] = dump_L(cm.L);
    json per = json::array();
    for (const auto& lj : cm.per_subsystem) per.push_back(dump_L(lj));
    j["L_per_subsystem"] = per;
    Eigen::SelfAdjointEigenSolver<seaqt::RealMatrix> es(cm.L);
    j["margins"] = {{"reciprocity", (cm.L - cm.L.transpose()).cwiseAbs().maxCoeff()},
                    {"min_eigenvalue", es.eigenvalues().minCoeff()}};
    const double quad = cfg.units.k_B * aff.f.dot(cm.L * aff.f);
    const double direct = seaqt::composite_entropy_rate(st, model.comp, model.gens,
                                                        cfg.policies, cfg.units, cfg.tol);
    j["entropy_rate"] = {{"quadratic_form", quad}, {"direct", direct}};
  } else {
    const auto cm =
        seaqt::conductivity_matrix(st, gen, basis, cfg.policies.front(), cfg.units, cfg.tol);
    j["L"] = dump_L(cm.L);
    Eigen::SelfAdjointEigenSolver<seaqt::RealMatrix> es(cm.L);
    j["margins"] = {{"reciprocity", (cm.L - cm.L.transpose()).cwiseAbs().maxCoeff()},
                    {"min_eigenvalue", es.eigenvalues().minCoeff()}};
    const auto quad = seaqt::entropy_rate_quadratic(st, gen, basis, cfg.policies.front(),
                                                    cfg.units, cfg.tol);
    const double direct =
        seaqt::entropy_rate(st, gen, cfg.policies.front(), cfg.units, cfg.tol);
    j["entropy_rate"] = {{"quadratic_form", quad.quadratic},
                         {"direct", direct},
                         {"inverse_form_valid", quad.inverse_form_valid},
                         {"inverse_form", quad.inverse_form}};
    const auto rates = seaqt::dissipative_rates(st, gen, basis, cfg.policies.front(), cfg.units,
                                                cfg.tol);
    j["dissipative_rates"] = rates;
  }
  const fs::path dir(cfg.out_dir);
  write_file(dir / "onsager.json", j.dump(2));
  std::cout << "wrote " << (dir / "onsager.json").string() << "\n";
  return 0;
}

int cmd_sweep(const GlobalArgs& g, std::string parameter, std::vector<double> values) {
  seaqt::ScenarioConfig base = resolve_scenario(g);
  if (parameter.empty()) parameter = base.sweep_parameter;
  if (values.empty()) values = base.sweep_values;
  if (parameter.empty() || values.empty())
    throw seaqt::ConfigError("sweep needs a parameter and values (flags or sweep block)");

  auto apply = [&](seaqt::ScenarioConfig cfg, double v) {
    if (parameter == "tau.value") {
      for (auto& p : cfg.policies) p = seaqt::TauPolicy::constant(v);
    } else if (parameter == "tau.fallback") {
      for (auto& p : cfg.policies) p = seaqt::TauPolicy::max_epr(v);
    } else if (parameter == "run.dt") {
      cfg.run.dt = v;
    } else if (parameter == "run.t_end") {
      cfg.run.t_end = v;
    } else if (parameter == "units.hbar") {
      cfg.units.hbar = v;
    } else {
      throw seaqt::ConfigError("sweep: unsupported parameter '" + parameter +
                               "' (tau.value, tau.fallback, run.dt, run.t_end, units.hbar)");
    }
    return cfg;
  };
  (void)apply(base, values.front());  // validate the parameter before fanning out

  const fs::path dir(base.out_dir);
  fs::create_directories(dir);
  std::vector<json> rows(values.size());
  std::vector<std::string> errors(values.size());
  seaqt::for_each_index(
      static_cast<std::int64_t>(values.size()),
      seaqt::thread_count() > 1 ? seaqt::Exec::Parallel : seaqt::Exec::Serial,
      [&](std::int64_t i) {
        try {
          const seaqt::ScenarioConfig cfg = apply(base, values[i]);
          const seaqt::SystemModel model = cfg.model();
          const seaqt::Trajectory traj =
              seaqt::integrate(cfg.initial, model, cfg.policies, cfg.run, cfg.units, cfg.tol);
          const seaqt::AttractorReport att = safe_attractor(traj, model, cfg.units, cfg.tol);
          write_file(dir / ("trajectory_" + std::to_string(i) + ".csv"),
                     seaqt::trajectory_csv(traj, model, att));
          rows[i] = {{"value", values[i]},
                     {"steps", traj.steps},
                     {"terminal_entropy", traj.samples.back().entropy},
                     {"terminal_distance", att.terminal_distance},
                     {"reached_equilibrium", traj.reached_equilibrium}};
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      });
  for (const std::string& e : errors)
    if (!e.empty()) throw std::runtime_error("sweep member failed: " + e);
  json j;
  j["parameter"] = parameter;
  j["runs"] = rows;
  write_file(dir / "sweep_summary.json", j.dump(2));
  std::cout << "sweep: " << values.size() << " runs -> " << (dir / "sweep_summary.json").string()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steepest-entropy-ascent quantum thermodynamics engine"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs g;
  app.add_option("--out", g.out_dir, "output directory (default $SEAQT_OUT_DIR or ./out)");
  app.add_option("--seed", g.seed, "random seed for sampled checks");
  app.add_option("--threads", g.threads, "worker threads for batched work (0 = library default)");
  app.add_option("--format", g.format, "output format: csv or json");

  auto add_source = [&](CLI::App* cmd) {
    cmd->add_option("--config", g.config_path, "scenario config file");
    cmd->add_option("--preset", g.preset, "built-in scenario preset");
  };

  CLI::App* run = app.add_subcommand("run", "integrate a scenario and write trajectory/summary");
  add_source(run);
  CLI::App* check = app.add_subcommand("check", "run the conformance criteria suite");
  add_source(check);
  CLI::App* onsager =
      app.add_subcommand("onsager", "affinities, conductivities and reciprocity report");
  add_source(onsager);
  std::string basis_kind = "gell-mann";
  onsager->add_option("--basis", basis_kind, "gell-mann | orthogonal-extension");
  CLI::App* sweep = app.add_subcommand("sweep", "fan a scenario out over a parameter grid");
  add_source(sweep);
  std::string sweep_param;
  std::vector<double> sweep_values;
  sweep->add_option("--parameter", sweep_param, "parameter to sweep (e.g. tau.value)");
  sweep->add_option("--values", sweep_values, "values to sweep over");
  CLI::App* presets = app.add_subcommand("presets", "preset utilities");
  CLI::App* presets_list = presets->add_subcommand("list", "list built-in presets");
  std::string show_name;
  CLI::App* presets_show = presets->add_subcommand("show", "print a preset config");
  presets_show->add_option("name", show_name, "preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::cout << error_json("config", e.what()).dump() << "\n";
    return 2;
  }

  try {
    seaqt::set_thread_count(g.threads);
    if (run->parsed()) return cmd_run(g);
    if (check->parsed()) return cmd_check(g);
    if (onsager->parsed()) return cmd_onsager(g, basis_kind);
    if (sweep->parsed()) return cmd_sweep(g, sweep_param, sweep_values);
    if (presets->parsed()) {
      if (presets_list->parsed() || !presets_show->parsed()) {
        for (const auto& [name, text] : seaqt::scenario_presets())
          std::cout << name << "\n";
        return 0;
      }
      if (presets_show->parsed()) {
        const auto& all = seaqt::scenario_presets();
        const auto it = all.find(show_name);
        if (it == all.end()) throw seaqt::ConfigError("unknown preset '" + show_name + "'");
        std::cout << it->second;
        return 0;
      }
    }
  } catch (const seaqt::ConfigError& e) {
    std::cout << error_json("config", e.what()).dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cout << error_json("runtime", e.what()).dump() << "\n";
    return 1;
  }
  return 0;
}
