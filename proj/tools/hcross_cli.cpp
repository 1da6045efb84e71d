// hcross_cli: runs one experiment from a JSON configuration.
//
// Exit codes: 0 all checks passed, 1 a check failed or a run errored, 2 bad configuration.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"

#include "hcross/experiments.hpp"

namespace fs = std::filesystem;
using namespace hcross;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool override_contraction = false;
};

ExperimentConfig load(const Options& o, const std::string& kind) {
  std::ifstream is(o.config);
  if (!is) throw ConfigError("cannot open configuration: " + o.config);
  json j;
  try {
    j = json::parse(is, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  if (!j.contains("experiment")) j["experiment"] = kind;
  else if (to_string(experiment_kind_from(j["experiment"].get<std::string>())) != kind)
    throw ConfigError("configuration is for experiment '" + j["experiment"].get<std::string>() + "', not '" + kind + "'");
  if (o.seed) j["seed"] = *o.seed;
  if (!o.out.empty()) j["output"] = o.out;
  return parse_config(j);
}

std::string path_in(const ExperimentConfig& c, const std::string& name) { return (fs::path(c.output) / name).string(); }

int finish(bool pass, const std::string& what) {
  std::cout << what << ": " << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? 0 : 1;
}

int cmd_converge(const Options& o) {
  const ExperimentConfig c = load(o, "converge");
  const ConvergenceResult r = run_converge(c);
  persist(r.to_json(), path_in(c, "converge.json"));
  std::ostringstream csv;
  r.write_csv(csv);
  write_text(path_in(c, "converge.csv"), csv.str());
  std::cout << std::setw(8) << "R" << std::setw(12) << "|cross|" << std::setw(14) << "err_l2" << std::setw(14)
            << "err_x" << std::setw(14) << "bound" << '\n';
  for (const auto& row : r.rows)
    std::cout << std::setw(8) << row.R << std::setw(12) << row.cross_size << std::setw(14) << row.err_l2
              << std::setw(14) << row.err_x << std::setw(14) << row.bound << '\n';
  if (r.exact) std::cout << "slope: exact (errors at rounding level)\n";
  else std::cout << "slope " << r.slope << "  constant " << r.constant << '\n';
  return finish(r.pass, "converge");
}

int cmd_regularity(const Options& o) {
  const ExperimentConfig c = load(o, "regularity");
  const RegularityResult r = run_regularity(c, o.override_contraction);
  persist(r.to_json(), path_in(c, "regularity.json"));
  std::ostringstream csv;
  csv << "t,class,K_norm,L_norm\n";
  csv.precision(17);
  for (std::size_t l = 0; l < r.base.K.size(); ++l)
    for (std::size_t m = 0; m < r.base.times.size(); ++m)
      csv << r.base.times[m] << ',' << l + 1 << ',' << r.base.K[l][m] << ',' << r.base.Lnorm[l][m] << '\n';
  write_text(path_in(c, "regularity.csv"), csv.str());
  if (!r.window.inside) std::cout << "warning: T outside the contraction window (override in effect)\n";
  for (std::size_t l = 0; l < r.base.sup_K_ratio.size(); ++l)
    std::cout << "class " << l + 1 << ": sup ||K u(t)||/||K u0|| = " << r.base.sup_K_ratio[l]
              << ", sup ||L u(t)||/||L u0|| = " << r.base.sup_L_ratio[l] << '\n';
  if (r.half_dt) std::cout << "dt/2 drift " << r.dt_drift << '\n';
  if (r.double_n) std::cout << "2n drift " << r.n_drift << '\n';
  return finish(r.pass, "regularity");
}

int cmd_inequalities(const Options& o) {
  const ExperimentConfig c = load(o, "inequalities");
  const InequalityReport r = run_inequalities(c);
  persist(r.to_json(), path_in(c, "inequalities.json"));
  for (const auto& k : r.checks)
    std::cout << std::left << std::setw(18) << k.name << std::right << std::setw(14) << to_string(k.status)
              << "  measured " << k.measured << "  constant " << k.constant << '\n';
  return finish(r.pass(), "inequalities");
}

int cmd_evolve(const Options& o) {
  const ExperimentConfig c = load(o, "evolve");
  const EvolveExperimentResult r = run_evolve(c);
  persist(r.to_json(), path_in(c, "evolve.json"));
  std::ostringstream csv;
  r.write_csv(csv);
  write_text(path_in(c, "evolve.csv"), csv.str());
  const long step = std::lround(r.final_state.t / c.evolve.dt);
  json meta = checkpoint_meta(c, step);
  meta["initial_norm"] = r.norms.front();
  save_checkpoint(path_in(c, "final.ckpt"), r.final_state, meta);
  std::cout << "t = " << r.final_state.t << "  norm drift " << r.max_norm_drift << "  Pauli " << r.max_pauli << '\n';
  return finish(r.pass, "evolve");
}

int cmd_picard(const Options& o) {
  const ExperimentConfig c = load(o, "picard");
  const PicardExperimentResult r = run_picard(c, o.override_contraction);
  persist(r.to_json(), path_in(c, "picard.json"));
  if (!r.window.inside) std::cout << "warning: T outside the contraction window (override in effect)\n";
  std::cout << "iterations " << r.picard.iterations << "  converged " << r.picard.converged << "  contracting "
            << r.picard.contracting << "  distance to Strang " << r.strang_distance << '\n';
  return finish(r.pass, "picard");
}

int cmd_report(const Options& o) {
  const std::string dir = o.out.empty() ? "out" : o.out;
  if (!fs::is_directory(dir)) throw ConfigError("no such output directory: " + dir);
  json summary = json::array();
  bool all = true;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json" && e.path().filename() != "report.json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const json r = load_result(f.string());
    const bool pass = r.value("pass", false);
    all = all && pass;
    summary.push_back({{"file", f.filename().string()}, {"kind", r.value("kind", "?")}, {"pass", pass}});
    std::cout << std::left << std::setw(24) << f.filename().string() << (pass ? "PASS" : "FAIL") << '\n';
  }
  persist({{"kind", "report"}, {"entries", summary}, {"pass", all}}, (fs::path(dir) / "report.json").string());
  return finish(all, "report");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperbolic-cross projected many-particle Schroedinger experiments"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* s, bool needs_config) {
    auto* cfg = s->add_option("--config", o.config, "JSON configuration file");
    if (needs_config) cfg->required()->check(CLI::ExistingFile);
    s->add_option("--seed", seed, "Override the configuration seed")->each([&](const std::string&) { o.seed = seed; });
    s->add_option("--out", o.out, "Output directory");
    s->add_flag("--override-contraction", o.override_contraction, "Run even if T exceeds the contraction window");
  };
  std::map<std::string, std::function<int(const Options&)>> cmds{
      {"converge", cmd_converge}, {"regularity", cmd_regularity}, {"inequalities", cmd_inequalities},
      {"evolve", cmd_evolve},     {"picard", cmd_picard},         {"report", cmd_report}};
  std::map<std::string, std::string> help{{"converge", "Projected vs unprojected error as a function of R"},
                                          {"regularity", "Spin-class regularity along the flow"},
                                          {"inequalities", "Numerical checks of the functional inequalities"},
                                          {"evolve", "Evolve, trace norm/Pauli/energy, checkpoint"},
                                          {"picard", "Picard iteration against a fine Strang run"},
                                          {"report", "Summarize the result files in --out"}};
  for (const auto& [name, fn] : cmds) add_common(app.add_subcommand(name, help[name]), name != "report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    for (const auto& [name, fn] : cmds)
      if (app.got_subcommand(name)) return fn(o);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
