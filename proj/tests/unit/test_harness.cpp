#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "warpflow/errors.hpp"
#include "warpflow/harness.hpp"

using namespace warpflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("scenario defaults") {
  const ExperimentConfig c = parse_config(R"({"scenario": "cylinder"})");
  CHECK(c.grid.points == 512);
  CHECK(c.a_star == 1.0);
  CHECK(c.integrator.stop_time.value() == 0.9);
  const ExperimentConfig d = parse_config(R"({"scenario": "doubly_warped"})");
  CHECK(d.eta == 2.0);
  CHECK(d.a_star == 0.1);
  CHECK(d.grid.radius == 1000.0);
}

TEST_CASE("config errors name the field") {
  CHECK(config_error_message(R"({"scenario": "doubly_warped", "eta": -1})").find("eta") != std::string::npos);
  CHECK(config_error_message(R"({"scenario": "doubly_warped", "grid": {"points": "many"}})").find("grid.points") !=
        std::string::npos);
  CHECK(config_error_message(R"({"scenario": "doubly_warped", "colour": 1})").find("colour") != std::string::npos);
  CHECK(config_error_message(R"({"scenario": "torus"})").find("scenario") != std::string::npos);
  CHECK(config_error_message(R"({"scenario": "cylinder", "schema_version": 7})").find("schema_version") !=
        std::string::npos);
  CHECK(config_error_message("{not json").find("<root>") != std::string::npos);
}

TEST_CASE("overrides and the effective config round-trip") {
  const ExperimentConfig c = parse_config(R"({"scenario": "perturbed_cylinder"})",
                                          {{"grid.points", "257"}, {"integrator.bc_mode", "neumann"}, {"seed", "9"}});
  CHECK(c.grid.points == 257);
  CHECK(c.integrator.bc_mode == BoundaryMode::neumann);
  CHECK(c.seed == 9);
  const ExperimentConfig back = parse_config(dump_config(c));
  CHECK(dump_config(back) == dump_config(c));
}

TEST_CASE("custom scenario") {
  const ExperimentConfig c = parse_config(R"({"scenario": "custom", "fibers": [
      {"dim": 2, "mu": 1, "offset": 0.2, "profile": {"kind": "gaussian", "scale": 0.5}, "control": "square"},
      {"dim": 1, "mu": 0, "offset": 1.0, "profile": {"kind": "constant", "scale": 0.1}}]})");
  const Example ex = build_example(c);
  CHECK(ex.spec.fibers.size() == 2);
  CHECK(ex.state.v[0][ex.state.size() / 2] == doctest::Approx(0.5));
  CHECK(config_error_message(R"({"scenario": "custom"})").find("fibers") != std::string::npos);
  CHECK(config_error_message(R"({"scenario": "custom", "fibers": [{"control": "cosh"}]})").find("fibers[0].control") !=
        std::string::npos);
}

TEST_CASE("runs are deterministic and comparable") {
  const fs::path root = fs::temp_directory_path() / "warpflow_unit_harness";
  fs::remove_all(root);
  const ExperimentConfig c = parse_config(R"({"scenario": "cylinder"})", {{"grid.points", "65"}});
  std::ostringstream log;
  CHECK(run_experiment(c, (root / "a").string(), log) == exit_pass);
  CHECK(run_experiment(c, (root / "b").string(), log) == exit_pass);
  for (const char* f : {"verdicts/exact_solution.json", "diagnostics.csv", "trajectory.wftrj", "manifest.json"})
    CHECK(slurp(root / "a" / f) == slurp(root / "b" / f));

  const CompareReport r = compare_runs((root / "a").string(), (root / "b").string());
  CHECK_FALSE(r.entries.empty());
  CHECK(r.max_rel_diff == 0.0);

  CHECK(analyze_run((root / "a").string(), log) == exit_pass);
  CHECK(slurp(root / "a" / "verdicts/exact_solution.json") == slurp(root / "b" / "verdicts/exact_solution.json"));

  {
    std::ofstream out(root / "b" / "manifest.json");
    out << R"({"schema_version": 99, "files": []})";
  }
  CHECK_THROWS_AS(compare_runs((root / "a").string(), (root / "b").string()), Error);
  fs::remove_all(root);
}

TEST_CASE("resolve_output_dir honours the output root") {
  CHECK(resolve_output_dir("/abs/dir") == "/abs/dir");
}

TEST_CASE("soliton tool") {
  std::ostringstream log;
  CHECK(soliton_tool(2, 2, -0.5, 1e-3, 2.0, 1e-3, "", log) == exit_pass);
  CHECK(log.str().find("departure") != std::string::npos);
}
