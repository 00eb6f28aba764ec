#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "warpflow/assumptions.hpp"
#include "warpflow/flow.hpp"

namespace warpflow {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kArtifactSchemaVersion = 1;

enum class Scenario { cylinder, perturbed_cylinder, doubly_warped, circle_fiber, custom };

const char* to_string(Scenario s) noexcept;

// Perturbation profile for custom scenarios.
struct ProfileSpec {
  std::string kind = "inverse_square";  // inverse_square, gaussian, constant, interior_minimum
  double scale = 1.0;
};

struct CustomFiber {
  FiberSpec fiber;
  ProfileSpec profile;
  std::string control = "cubic_over_1ps";
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  Scenario scenario = Scenario::cylinder;
  int p = 2;
  double eta = 2.0;
  double a_star = 0.1;
  std::optional<double> mu;  // cylinder only
  double eps = 0.0;          // cylinder only
  std::vector<CustomFiber> fibers;
  GridSpec grid;
  IntegratorConfig integrator;
  bool theorem_checks = true;
  bool blowup = true;
  bool soliton = true;
  std::string output_dir = "warpflow_out";
  std::uint64_t seed = 0;
  std::string resume_from;  // checkpoint file; empty starts from the scenario's initial data
};

// Defaults depend on the scenario; fields present in the text override them.
// Overrides are dotted paths such as "grid.points" with JSON or bare-string values.
// Errors carry ErrorCode::config and name the offending field.
ExperimentConfig parse_config(const std::string& text,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {});
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides = {});
std::string dump_config(const ExperimentConfig& cfg);

// Output directory after applying WARPFLOW_OUTPUT_ROOT to relative paths.
std::string resolve_output_dir(const std::string& dir);

Example build_example(const ExperimentConfig& cfg);

enum ExitCode : int { exit_pass = 0, exit_acceptance = 1, exit_config = 2, exit_numeric = 3 };

// Writes only the assumptions report.
int validate_experiment(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);
int run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);
// Recomputes every verdict from the stored trajectory.
int analyze_run(const std::string& dir, std::ostream& log);

struct CompareEntry {
  std::string key;
  double a = 0.0;
  double b = 0.0;
  double rel_diff = 0.0;
};

struct CompareReport {
  std::vector<CompareEntry> entries;
  std::vector<std::string> only_in_a, only_in_b;
  double max_rel_diff = 0.0;
};

CompareReport compare_runs(const std::string& dir_a, const std::string& dir_b);
void write_compare_report(const CompareReport& r, std::ostream& out);

// Constant-solution sweep and a perturbed IVP; profile CSV written to out_dir when non-empty.
int soliton_tool(int p1, int p2, double lambda, double perturbation, double span, double dy, const std::string& out_dir,
                 std::ostream& log);

}  // namespace warpflow
