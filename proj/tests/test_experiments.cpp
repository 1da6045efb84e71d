#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "hcross/experiments.hpp"

using namespace hcross;
namespace fs = std::filesystem;

namespace {

json small_evolve() {
  return json::parse(R"({
    "schema_version": 1, "experiment": "evolve",
    "grid": {"d": 1, "N": 2, "L": "pi", "n": 32},
    "potential": {"epsilon": 0.1, "nuclei": [{"Z": 1.0, "position": [0.0]}]},
    "initial": {"kind": "slater", "orbitals": [[
      {"type": "gaussian", "center": [-0.8], "sigma": 0.4},
      {"type": "gaussian", "center": [0.9], "sigma": 0.4}]]},
    "evolve": {"T": 0.1, "dt": 0.001, "snapshot_stride": 20}})");
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("hcross_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const int rc = std::system((std::string(HCROSS_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void write_json(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(2); }

}  // namespace

TEST(Config, ParsesSampleFiles) {
  for (const char* f : {"converge", "regularity", "evolve", "picard", "inequalities"}) {
    const auto c = load_config(std::string(HCROSS_CONFIGS) + "/" + f + ".json");
    EXPECT_EQ(to_string(c.kind), f);
  }
  const auto c = load_config(std::string(HCROSS_CONFIGS) + "/converge.json");
  EXPECT_EQ(c.cross.R, (std::vector<double>{8, 16, 32}));
  EXPECT_DOUBLE_EQ(c.grid.L, std::numbers::pi);
  EXPECT_EQ(*c.initial.s_decay, 1.1);
}

TEST(Config, Rejections) {
  auto bad = [](auto mutate) {
    json j = small_evolve();
    mutate(j);
    EXPECT_THROW(parse_config(j), ConfigError) << j.dump();
  };
  bad([](json& j) { j["grid"]["n"] = 33; });
  bad([](json& j) { j["experiment"] = "nonsense"; });
  bad([](json& j) { j["schema_version"] = 2; });
  bad([](json& j) { j["potential"]["epsilon"] = 0.0; });
  bad([](json& j) { j["potential"]["nuclei"][0]["position"] = json::array({0.0, 1.0}); });
  bad([](json& j) { j["initial"]["orbitals"][0].erase(1); });
  bad([](json& j) { j["evolve"]["scheme"] = "rk4"; });
  bad([](json& j) { j["partition"]["labels"] = json::array({1, 1, 2}); });
  bad([](json& j) {
    j["experiment"] = "converge";
    j["cross"]["R"] = json::array({8, 16});
  });
}

TEST(Config, InitialStateAdmissible) {
  const auto c = parse_config(small_evolve());
  const auto u = build_initial(c, c.grid.make());
  EXPECT_NEAR(l2_norm(u), 1.0, 1e-14);
  EXPECT_LT(pauli_residual(u, c.partition()), 1e-12);
  json j = small_evolve();
  j["initial"] = {{"kind", "random"}, {"band", 3}, {"decay", 1.0}};
  const auto r = parse_config(j);
  EXPECT_LT(pauli_residual(build_initial(r, r.grid.make()), r.partition()), 1e-12);
}

TEST(Window, RejectsOutsideUnlessOverridden) {
  auto c = parse_config(small_evolve());
  EXPECT_THROW(check_window(c, 0.1, false), ConfigError);
  const auto w = check_window(c, 0.1, true);
  EXPECT_FALSE(w.inside);
  EXPECT_TRUE(w.overridden);
  EXPECT_LT(w.window.margin(0.1), 0.0);
  const auto in = check_window(c, 0.5 * w.window.T_max, false);
  EXPECT_TRUE(in.inside);
}

TEST(Evolve, TracesAndResume) {
  const auto c = parse_config(small_evolve());
  const auto r = run_evolve(c);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.times.size(), 6u);
  EXPECT_LT(r.max_norm_drift, 1e-12);
  std::ostringstream os;
  r.write_csv(os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,l2_norm,pauli_residual,energy");

  // Stop at T/2, checkpoint, resume to T: identical final state.
  const auto dir = scratch("resume");
  json j = small_evolve();
  j["evolve"]["T"] = 0.05;
  const auto c1 = parse_config(j);
  const auto r1 = run_evolve(c1);
  auto meta = checkpoint_meta(c1, 50);
  meta["initial_norm"] = r1.norms.front();
  save_checkpoint((dir / "a.ckpt").string(), r1.final_state, meta);
  j["evolve"]["T"] = 0.1;
  j["resume_from"] = (dir / "a.ckpt").string();
  const auto r2 = run_evolve(parse_config(j));
  EXPECT_EQ(r2.start_step, 50);
  EXPECT_EQ(r2.final_state.coeffs, r.final_state.coeffs);
}

TEST(Converge, SmallSweep) {
  json j = small_evolve();
  j["experiment"] = "converge";
  j["initial"]["s_decay"] = 1.1;
  j["evolve"]["T"] = 0.05;
  j["evolve"]["snapshot_stride"] = 10;
  j["cross"] = {{"R", {4, 8, 16}}};
  const auto r = run_converge(parse_config(j));
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_TRUE(r.monotone);
  for (const auto& row : r.rows) {
    EXPECT_LE(row.err_t0, row.bound * (1 + 1e-12));
    EXPECT_GT(row.err_l2, 0.0);
  }
  EXPECT_LT(r.slope, 0.0);
  EXPECT_LT(r.reference_norm_drift, 1e-12);
  const auto back = ConvergenceResult::from_json(r.to_json());
  EXPECT_TRUE(back == r);
}

TEST(Converge, FullCrossIsExact) {
  json j = small_evolve();
  j["experiment"] = "converge";
  j["grid"]["n"] = 8;
  j["evolve"]["T"] = 0.01;
  j["cross"] = {{"R", {1000, 2000, 4000}}};
  const auto r = run_converge(parse_config(j));
  EXPECT_TRUE(r.exact);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.to_json()["slope"], "exact");
}

TEST(Inequalities, SubsetAndErrorsCollected) {
  json j = {{"experiment", "inequalities"},
            {"inequalities",
             {{"checks", {"exponents", "magnetic_hardy", "dispersive"}},
              {"dispersive", {{"L", 2.0}, {"n", 64}, {"times", {1.0, 2.0, 4.0}}}}}}};
  const auto rep = run_inequalities(parse_config(j));
  ASSERT_EQ(rep.checks.size(), 3u);
  EXPECT_EQ(rep.checks[0].status, CheckStatus::pass);
  EXPECT_EQ(rep.checks[1].status, CheckStatus::pass);
  EXPECT_EQ(rep.checks[2].status, CheckStatus::error);
  EXPECT_FALSE(rep.pass());
  j["inequalities"]["checks"] = {"nope"};
  EXPECT_THROW(run_inequalities(parse_config(j)), ConfigError);
}

TEST(Inequalities, InconclusiveDoesNotFail) {
  json j = {{"experiment", "inequalities"},
            {"inequalities", {{"checks", {"pair_hardy"}}, {"pair_hardy", {{"samples", 640}, {"max_rel_stderr", 1e-6}}}}}};
  const auto rep = run_inequalities(parse_config(j));
  EXPECT_EQ(rep.checks[0].status, CheckStatus::inconclusive);
  EXPECT_TRUE(rep.pass());
}

TEST(Persist, RoundTripAndVersion) {
  const auto dir = scratch("persist");
  const json r = {{"kind", "x"}, {"pass", true}, {"value", 1.5}};
  persist(r, (dir / "r.json").string());
  EXPECT_EQ(load_result((dir / "r.json").string()), r);
  write_json(dir / "old.json", {{"schema_version", 0}, {"result", r}});
  EXPECT_THROW(load_result((dir / "old.json").string()), SchemaError);
  std::ofstream(dir / "junk.json") << "{not json";
  EXPECT_THROW(load_result((dir / "junk.json").string()), std::runtime_error);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  write_json(dir / "evolve.json", small_evolve());
  const std::string out = " --out " + (dir / "out").string();
  EXPECT_EQ(run_cli("evolve --config " + (dir / "evolve.json").string() + out), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "evolve.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "evolve.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "final.ckpt"));
  EXPECT_EQ(run_cli("report" + out), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "report.json"));

  json bad = small_evolve();
  bad["grid"]["n"] = 31;
  write_json(dir / "bad.json", bad);
  EXPECT_EQ(run_cli("evolve --config " + (dir / "bad.json").string() + out), 2);
  EXPECT_EQ(run_cli("picard --config " + (dir / "evolve.json").string() + out), 2);
  EXPECT_EQ(run_cli("evolve"), 2);

  json pic = small_evolve();
  pic["experiment"] = "picard";
  pic["potential"] = {{"epsilon", 0.5}, {"nuclei", {{{"Z", 0.2}, {"position", {0.0}}}}}};
  pic["evolve"] = {{"T", 0.02}, {"dt", 0.001}};
  write_json(dir / "picard.json", pic);
  EXPECT_EQ(run_cli("picard --config " + (dir / "picard.json").string() + out), 2);
  EXPECT_EQ(run_cli("picard --override-contraction --config " + (dir / "picard.json").string() + out), 0);

  json ineq = {{"experiment", "inequalities"}, {"inequalities", {{"checks", {"dispersive"}}, {"dispersive", {{"d", 1}, {"L", 2.0}, {"n", 64}, {"times", {1.0, 2.0}}}}}}};
  write_json(dir / "ineq.json", ineq);
  EXPECT_EQ(run_cli("inequalities --config " + (dir / "ineq.json").string() + out), 1);
  EXPECT_EQ(run_cli("report" + out), 1);
}
