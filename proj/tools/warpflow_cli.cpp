#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "warpflow/errors.hpp"
#include "warpflow/harness.hpp"

namespace {

std::vector<std::pair<std::string, std::string>> split_overrides(const std::vector<std::string>& raw) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : raw) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) warpflow::fail(warpflow::ErrorCode::config, s + ": expected key=value");
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

// Config file when given; otherwise a bare scenario name.
warpflow::ExperimentConfig resolve(const std::string& file, const std::string& scenario,
                                   const std::vector<std::string>& sets) {
  auto overrides = split_overrides(sets);
  if (!file.empty()) return warpflow::load_config(file, overrides);
  std::ostringstream text;
  text << R"({"scenario": ")" << scenario << R"("})";
  return warpflow::parse_config(text.str(), overrides);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"warpflow: Ricci flow of multiply-warped products on a line"};
  app.require_subcommand(1);

  std::string config_file, scenario = "cylinder", out_dir;
  std::vector<std::string> sets;
  auto add_config_opts = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_file, "JSON experiment config");
    sub->add_option("-s,--scenario", scenario, "scenario used when no config file is given");
    sub->add_option("--set", sets, "override a config field, e.g. --set grid.points=1025");
    sub->add_option("-o,--out", out_dir, "output directory (default from config)");
  };

  auto* validate = app.add_subcommand("validate", "check the main assumptions on the initial data");
  add_config_opts(validate);
  auto* run = app.add_subcommand("run", "integrate the flow and write the full artifact tree");
  add_config_opts(run);
  std::string resume;
  run->add_option("--resume", resume, "start from a checkpoint file");

  auto* analyze = app.add_subcommand("analyze", "recompute verdicts from a stored run");
  std::string analyze_dir;
  analyze->add_option("dir", analyze_dir, "artifact directory")->required();

  auto* compare = app.add_subcommand("compare", "per-metric relative differences of two runs");
  std::string dir_a, dir_b;
  compare->add_option("dir_a", dir_a)->required();
  compare->add_option("dir_b", dir_b)->required();

  auto* soliton = app.add_subcommand("soliton", "soliton ODE: constant solutions and a perturbed start");
  int p1 = 2, p2 = 2;
  double lambda = -0.5, perturbation = 1e-3, span = 10.0, dy = 1e-3;
  std::string soliton_out;
  soliton->add_option("--p1", p1);
  soliton->add_option("--p2", p2);
  soliton->add_option("--lambda", lambda);
  soliton->add_option("--perturbation", perturbation);
  soliton->add_option("--span", span);
  soliton->add_option("--dy", dy);
  soliton->add_option("-o,--out", soliton_out, "directory for soliton_profile.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : warpflow::exit_config;
  }

  try {
    if (*validate || *run) {
      auto cfg = resolve(config_file, scenario, sets);
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (!resume.empty()) cfg.resume_from = resume;
      const std::string dir = warpflow::resolve_output_dir(cfg.output_dir);
      if (*validate) return warpflow::validate_experiment(cfg, dir, std::cout);
      return warpflow::run_experiment(cfg, dir, std::cout);
    }
    if (*analyze) return warpflow::analyze_run(analyze_dir, std::cout);
    if (*compare) {
      const auto r = warpflow::compare_runs(dir_a, dir_b);
      warpflow::write_compare_report(r, std::cout);
      return warpflow::exit_pass;
    }
    if (*soliton) return warpflow::soliton_tool(p1, p2, lambda, perturbation, span, dy, soliton_out, std::cout);
  } catch (const warpflow::Error& e) {
    std::cerr << e.what() << '\n';
    switch (e.code()) {
      case warpflow::ErrorCode::config:
      case warpflow::ErrorCode::parameter:
      case warpflow::ErrorCode::schema:
      case warpflow::ErrorCode::io:
        return warpflow::exit_config;
      default:
        return warpflow::exit_numeric;
    }
  }
  return warpflow::exit_pass;
}
