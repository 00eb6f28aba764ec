#include "warpflow/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "warpflow/blowup.hpp"
#include "warpflow/diagnostics.hpp"
#include "warpflow/errors.hpp"
#include "warpflow/geometry.hpp"
#include "warpflow/persistence.hpp"
#include "warpflow/soliton_ode.hpp"
#include "warpflow/theorem_verify.hpp"

namespace fs = std::filesystem;

namespace warpflow {

using nlohmann::json;

const char* to_string(Scenario s) noexcept {
  switch (s) {
    case Scenario::cylinder: return "cylinder";
    case Scenario::perturbed_cylinder: return "perturbed_cylinder";
    case Scenario::doubly_warped: return "doubly_warped";
    case Scenario::circle_fiber: return "circle_fiber";
    case Scenario::custom: return "custom";
  }
  return "unknown";
}

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& msg) { fail(ErrorCode::config, path + ": " + msg); }

Scenario scenario_from(const json& j) {
  if (!j.is_string()) config_error("scenario", "expected a string");
  const auto s = j.get<std::string>();
  for (Scenario c : {Scenario::cylinder, Scenario::perturbed_cylinder, Scenario::doubly_warped, Scenario::circle_fiber,
                     Scenario::custom})
    if (s == to_string(c)) return c;
  config_error("scenario", "unknown scenario '" + s + "'");
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) config_error(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_error(path, "expected a finite number");
  return v;
}

long long get_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) config_error(path, "expected an integer");
  return j.get<long long>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) config_error(path, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) config_error(path, "expected a string");
  return j.get<std::string>();
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) config_error(path.empty() ? "<root>" : path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) config_error(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
  }
}

void apply_defaults(ExperimentConfig& c) {
  switch (c.scenario) {
    case Scenario::cylinder:
      c.a_star = 1.0;
      c.mu = 1.0;
      c.grid = {512, 10.0, 0.0};
      c.integrator.stop_time = 0.9;
      c.blowup = false;
      break;
    case Scenario::perturbed_cylinder:
    case Scenario::doubly_warped:
      c.grid = {2049, 1000.0, 2.0};
      break;
    case Scenario::circle_fiber:
      c.grid = {1025, 1000.0, 2.0};
      c.blowup = false;
      break;
    case Scenario::custom:
      c.grid = {1025, 100.0, 2.0};
      c.blowup = false;
      break;
  }
  if (c.scenario == Scenario::perturbed_cylinder) c.blowup = false;
}

void set_path(json& root, const std::string& dotted, const std::string& raw) {
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &root;
  std::stringstream ss(dotted);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) config_error(dotted, "empty override key");
  for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
    json& next = (*node)[parts[k]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) config_error(dotted, "cannot descend into a non-object");
    node = &next;
  }
  (*node)[parts.back()] = value;
}

ProfileSpec profile_from(const json& j, const std::string& path) {
  check_keys(j, path, {"kind", "scale"});
  ProfileSpec p;
  if (j.contains("kind")) p.kind = get_string(j["kind"], path + ".kind");
  if (j.contains("scale")) p.scale = get_number(j["scale"], path + ".scale");
  if (p.kind != "inverse_square" && p.kind != "gaussian" && p.kind != "constant" && p.kind != "interior_minimum")
    config_error(path + ".kind", "unknown profile '" + p.kind + "'");
  if (!(p.scale > 0.0)) config_error(path + ".scale", "must be positive");
  return p;
}

Profile make_profile(const ProfileSpec& p) {
  const double c = p.scale;
  if (p.kind == "gaussian") return [c](double r) { return c * std::exp(-r * r); };
  if (p.kind == "constant") return [c](double) { return c; };
  if (p.kind == "interior_minimum") return [c](double r) { return c * (0.02 + 0.5 * r * r / (1.0 + r * r)); };
  return [c](double r) { return c * inverse_square_profile(r); };
}

void validate_config(const ExperimentConfig& c) {
  if (c.schema_version != kConfigSchemaVersion)
    config_error("schema_version", "unsupported version " + std::to_string(c.schema_version));
  if (c.p < 2) config_error("p", "must be >= 2");
  if (!(c.eta > 0.0)) config_error("eta", "must be positive");
  if (!(c.a_star > 0.0)) config_error("a_star", "must be positive");
  if (c.mu && !(*c.mu > 0.0)) config_error("mu", "must be positive");
  if (c.eps < 0.0) config_error("eps", "must be >= 0");
  if (c.grid.points < 5) config_error("grid.points", "must be >= 5");
  if (!(c.grid.radius > 0.0)) config_error("grid.radius", "must be positive");
  if (c.grid.stretch < 0.0) config_error("grid.stretch", "must be >= 0");
  try {
    c.integrator.validate();
  } catch (const Error& e) {
    config_error("integrator", e.what());
  }
  if (c.scenario == Scenario::custom) {
    if (c.fibers.empty()) config_error("fibers", "custom scenarios need at least one fiber");
    WarpedProductSpec spec;
    for (const auto& f : c.fibers) spec.fibers.push_back(f.fiber);
    try {
      spec.validate();
    } catch (const Error& e) {
      config_error("fibers", e.what());
    }
    for (std::size_t k = 0; k < c.fibers.size(); ++k) {
      try {
        named_function(c.fibers[k].control);
      } catch (const Error&) {
        config_error("fibers[" + std::to_string(k) + "].control", "unknown control function");
      }
    }
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::vector<std::pair<std::string, std::string>>& overrides) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    config_error("<root>", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("<root>", "expected an object");
  for (const auto& [k, v] : overrides) set_path(j, k, v);
  check_keys(j, "", {"schema_version", "scenario", "p", "eta", "a_star", "mu", "eps", "fibers", "grid", "integrator",
                     "analysis", "output_dir", "seed", "resume_from"});
  if (!j.contains("scenario")) config_error("scenario", "missing");

  ExperimentConfig c;
  c.scenario = scenario_from(j["scenario"]);
  apply_defaults(c);
  if (j.contains("schema_version")) c.schema_version = int(get_integer(j["schema_version"], "schema_version"));
  if (j.contains("p")) c.p = int(get_integer(j["p"], "p"));
  if (j.contains("eta")) c.eta = get_number(j["eta"], "eta");
  if (j.contains("a_star")) c.a_star = get_number(j["a_star"], "a_star");
  if (j.contains("mu")) c.mu = get_number(j["mu"], "mu");
  if (j.contains("eps")) c.eps = get_number(j["eps"], "eps");
  if (j.contains("output_dir")) c.output_dir = get_string(j["output_dir"], "output_dir");
  if (j.contains("resume_from")) c.resume_from = get_string(j["resume_from"], "resume_from");
  if (j.contains("seed")) {
    const long long s = get_integer(j["seed"], "seed");
    if (s < 0) config_error("seed", "must be >= 0");
    c.seed = std::uint64_t(s);
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    check_keys(g, "grid", {"points", "radius", "stretch"});
    if (g.contains("points")) {
      const long long n = get_integer(g["points"], "grid.points");
      if (n < 5) config_error("grid.points", "must be >= 5");
      c.grid.points = std::size_t(n);
    }
    if (g.contains("radius")) c.grid.radius = get_number(g["radius"], "grid.radius");
    if (g.contains("stretch")) c.grid.stretch = get_number(g["stretch"], "grid.stretch");
  }
  if (j.contains("integrator")) {
    const json& g = j["integrator"];
    check_keys(g, "integrator", {"cfl_safety", "dt_max", "bc_mode", "stop_u_floor", "stop_time", "checkpoint_every",
                                 "frame_u_drop", "u_rate_fraction", "max_steps"});
    auto& ic = c.integrator;
    if (g.contains("cfl_safety")) ic.cfl_safety = get_number(g["cfl_safety"], "integrator.cfl_safety");
    if (g.contains("dt_max")) ic.dt_max = get_number(g["dt_max"], "integrator.dt_max");
    if (g.contains("bc_mode")) {
      try {
        ic.bc_mode = boundary_mode_from_string(get_string(g["bc_mode"], "integrator.bc_mode"));
      } catch (const Error&) {
        config_error("integrator.bc_mode", "expected asymptotic_dirichlet or neumann");
      }
    }
    if (g.contains("stop_u_floor")) ic.stop_u_floor = get_number(g["stop_u_floor"], "integrator.stop_u_floor");
    if (g.contains("stop_time")) {
      if (g["stop_time"].is_null()) ic.stop_time.reset();
      else ic.stop_time = get_number(g["stop_time"], "integrator.stop_time");
    }
    if (g.contains("checkpoint_every")) {
      const long long k = get_integer(g["checkpoint_every"], "integrator.checkpoint_every");
      if (k < 0) config_error("integrator.checkpoint_every", "must be >= 0");
      ic.checkpoint_every = std::size_t(k);
    }
    if (g.contains("frame_u_drop")) ic.frame_u_drop = get_number(g["frame_u_drop"], "integrator.frame_u_drop");
    if (g.contains("u_rate_fraction")) ic.u_rate_fraction = get_number(g["u_rate_fraction"], "integrator.u_rate_fraction");
    if (g.contains("max_steps")) {
      const long long k = get_integer(g["max_steps"], "integrator.max_steps");
      if (k <= 0) config_error("integrator.max_steps", "must be positive");
      ic.max_steps = std::size_t(k);
    }
  }
  if (j.contains("analysis")) {
    const json& g = j["analysis"];
    check_keys(g, "analysis", {"theorem_checks", "blowup", "soliton"});
    if (g.contains("theorem_checks")) c.theorem_checks = get_bool(g["theorem_checks"], "analysis.theorem_checks");
    if (g.contains("blowup")) c.blowup = get_bool(g["blowup"], "analysis.blowup");
    if (g.contains("soliton")) c.soliton = get_bool(g["soliton"], "analysis.soliton");
  }
  if (j.contains("fibers")) {
    const json& fl = j["fibers"];
    if (!fl.is_array()) config_error("fibers", "expected an array");
    for (std::size_t k = 0; k < fl.size(); ++k) {
      const std::string path = "fibers[" + std::to_string(k) + "]";
      check_keys(fl[k], path, {"dim", "mu", "offset", "profile", "control"});
      CustomFiber cf;
      if (fl[k].contains("dim")) cf.fiber.dim = int(get_integer(fl[k]["dim"], path + ".dim"));
      if (fl[k].contains("mu")) cf.fiber.mu = get_number(fl[k]["mu"], path + ".mu");
      if (fl[k].contains("offset")) cf.fiber.offset = get_number(fl[k]["offset"], path + ".offset");
      if (fl[k].contains("profile")) cf.profile = profile_from(fl[k]["profile"], path + ".profile");
      if (fl[k].contains("control")) cf.control = get_string(fl[k]["control"], path + ".control");
      c.fibers.push_back(cf);
    }
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(path);
  if (!in) config_error("<file>", "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string dump_config(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["scenario"] = to_string(c.scenario);
  j["p"] = c.p;
  j["eta"] = c.eta;
  j["a_star"] = c.a_star;
  if (c.mu) j["mu"] = *c.mu;
  j["eps"] = c.eps;
  j["grid"] = {{"points", c.grid.points}, {"radius", c.grid.radius}, {"stretch", c.grid.stretch}};
  const auto& ic = c.integrator;
  j["integrator"] = {{"cfl_safety", ic.cfl_safety},
                     {"dt_max", ic.dt_max},
                     {"bc_mode", to_string(ic.bc_mode)},
                     {"stop_u_floor", ic.stop_u_floor},
                     {"stop_time", ic.stop_time ? json(*ic.stop_time) : json(nullptr)},
                     {"checkpoint_every", ic.checkpoint_every},
                     {"frame_u_drop", ic.frame_u_drop},
                     {"u_rate_fraction", ic.u_rate_fraction},
                     {"max_steps", ic.max_steps}};
  j["analysis"] = {{"theorem_checks", c.theorem_checks}, {"blowup", c.blowup}, {"soliton", c.soliton}};
  if (!c.fibers.empty()) {
    json fl = json::array();
    for (const auto& f : c.fibers)
      fl.push_back({{"dim", f.fiber.dim},
                    {"mu", f.fiber.mu},
                    {"offset", f.fiber.offset},
                    {"profile", {{"kind", f.profile.kind}, {"scale", f.profile.scale}}},
                    {"control", f.control}});
    j["fibers"] = fl;
  }
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  if (!c.resume_from.empty()) j["resume_from"] = c.resume_from;
  return j.dump(2);
}

std::string resolve_output_dir(const std::string& dir) {
  fs::path p(dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv("WARPFLOW_OUTPUT_ROOT"); root && *root) p = fs::path(root) / p;
  }
  return p.string();
}

Example build_example(const ExperimentConfig& c) {
  switch (c.scenario) {
    case Scenario::cylinder: return build_cylinder(c.a_star, c.mu.value_or(1.0), c.p, c.eps, c.grid);
    case Scenario::perturbed_cylinder: return build_perturbed_cylinder(c.a_star, c.p, c.grid);
    case Scenario::doubly_warped: return build_canonical_example(c.eta, c.a_star, c.p, c.grid);
    case Scenario::circle_fiber: return build_circle_fiber(c.a_star, c.p, c.grid);
    case Scenario::custom: {
      Example ex;
      ex.grid = make_grid(c.grid);
      for (const auto& f : c.fibers) {
        ex.spec.fibers.push_back(f.fiber);
        ex.deltas.push_back(make_profile(f.profile));
        ex.gs.push_back(named_function(f.control));
      }
      ex.state = state_from_profiles(ex.grid, ex.deltas);
      return ex;
    }
  }
  fail(ErrorCode::config, "scenario: unsupported");
}

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p);
  if (!out) fail(ErrorCode::io, "cannot write " + p.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) fail(ErrorCode::io, "cannot read " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::schema, p.string() + ": " + e.what());
  }
}

struct Manifest {
  json files = json::array();
  void add(const std::string& file, const std::string& producer, const std::string& frames) {
    files.push_back({{"file", file}, {"producer", producer}, {"frames", frames}});
  }
};

json assumptions_json(const AssumptionReport& r) {
  json notes = r.notes;
  json gm = json::array(), cm = json::array(), gn = json::array();
  for (double v : r.gamma_margin) gm.push_back(num(v));
  for (double v : r.chi_margin) cm.push_back(num(v));
  for (double v : r.g_norm) gn.push_back(num(v));
  return {{"c_init", num(r.c_init)},
          {"gamma_margin", gm},
          {"chi_margin", cm},
          {"rho_margin", r.rho_margin},
          {"g_norm", gn},
          {"positive", r.positive},
          {"has_positive_mu", r.has_positive_mu},
          {"grad_rm_bounded", r.grad_rm_bounded},
          {"grad_rm_sup", num(r.grad_rm_sup)},
          {"tail_min_v", num(r.tail_min_v)},
          {"passed", r.passed},
          {"notes", notes}};
}

void write_profile_csv(const fs::path& p, const RescaledFrame& fr) {
  std::ofstream out(p);
  if (!out) fail(ErrorCode::io, "cannot write " + p.string());
  out << "y";
  for (std::size_t a = 0; a < fr.u.size(); ++a) out << ",u_" << a;
  out << '\n';
  char buf[40];
  for (std::size_t k = 0; k < fr.y.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", fr.y[k]);
    out << buf;
    for (const auto& ua : fr.u) {
      std::snprintf(buf, sizeof buf, ",%.17g", ua[k]);
      out << buf;
    }
    out << '\n';
  }
}

json sequence_json(const BlowupSequence& seq) {
  json pts = json::array();
  for (const auto& p : seq.points) {
    json c = json::array();
    for (double v : p.c_achieved) c.push_back(num(v));
    pts.push_back({{"frame", p.frame},
                   {"x", p.x},
                   {"r", p.r},
                   {"t", p.t},
                   {"lambda", p.lambda},
                   {"target_c", p.target_c},
                   {"c_achieved", c},
                   {"certificate", p.certificate}});
  }
  return {{"mode", to_string(seq.mode)},
          {"T", seq.T},
          {"eta", seq.eta},
          {"points", pts},
          {"skipped", seq.skipped},
          {"limsup_lambda_gap", seq.max_lambda_gap},
          {"min_certificate", seq.min_certificate}};
}

// Runs every enabled analysis on a finished trajectory and writes the verdict tree.
int analyze_artifacts(const ExperimentConfig& cfg, const Example& ex, const Trajectory& tr, const fs::path& dir,
                      Manifest& man, std::ostream& log) {
  fs::create_directories(dir / "verdicts");
  json checks = json::object();
  const double floor = cfg.integrator.stop_u_floor;
  const SingularityReport sing = analyze_singularity(tr, floor);
  const std::string all_frames = "0.." + std::to_string(tr.frames.size() - 1);

  write_json(dir / "verdicts" / "singularity.json",
             {{"detected", sing.detected},
              {"t_sing_est", num(sing.t_sing_est)},
              {"t_form", sing.t_form},
              {"type_one_constant", num(sing.type_one_constant)},
              {"at_spatial_infinity", sing.at_spatial_infinity},
              {"degenerate", sing.degenerate},
              {"varsigma", sing.varsigma},
              {"tail_offset", sing.tail_offset},
              {"final_min_u", sing.final_min_u},
              {"fit_points", sing.fit_points}});
  man.add("verdicts/singularity.json", "flow.run/analyze_singularity", all_frames);

  write_diagnostics_csv((dir / "diagnostics.csv").string(), tr, sing.t_sing_est, ex.gs);
  man.add("diagnostics.csv", "diagnostics.compute_frame", all_frames);

  if (cfg.scenario == Scenario::cylinder) {
    double err = 0.0;
    for (const auto& f : tr.frames)
      for (std::size_t i = 0; i < f.size(); ++i)
        err = std::max(err, std::abs(warping(tr.spec, f, 0, i) - (tr.spec.fibers[0].offset - tr.spec.fibers[0].mu * f.t)));
    const bool ok = err <= 1e-6;
    write_json(dir / "verdicts" / "exact_solution.json", {{"max_abs_error", err}, {"t_end", tr.frames.back().t}, {"pass", ok}});
    man.add("verdicts/exact_solution.json", "flow.step", all_frames);
    checks["exact_solution"] = ok;
  }

  if (cfg.theorem_checks) {
    // gamma identity on a three-frame window near 0.2 t_form
    std::size_t k = 0;
    const double tw = 0.2 * tr.spec.t_form();
    for (std::size_t i = 0; i < tr.frames.size(); ++i)
      if (std::abs(tr.frames[i].t - tw) < std::abs(tr.frames[k].t - tw)) k = i;
    const FlowState& base = tr.frames[k];
    const double h = base.spacing();
    double mphi = std::numeric_limits<double>::infinity();
    for (double p : base.phi) mphi = std::min(mphi, p * h);
    const double dt = 0.5 * cfg.integrator.cfl_safety * mphi * mphi / 2.0;
    const Window w = build_window(tr.spec, base, dt, cfg.integrator.bc_mode);
    const ResidualReport rr = check_evolution_inequalities(tr.spec, w);
    const bool id_ok = cfg.scenario == Scenario::cylinder ? rr.identity_gamma_residual <= 1e-10 : true;
    write_json(dir / "verdicts" / "identities.json",
               {{"t_window", base.t},
                {"dt", dt},
                {"grid_h", rr.grid_h},
                {"identity_gamma_residual", rr.identity_gamma_residual},
                {"identity_gradient_form", rr.identity_gradient_form},
                {"ineq_gamma_margin", rr.ineq_gamma_margin},
                {"ineq_gamma_margin_quarter", rr.ineq_gamma_margin_quarter},
                {"fitted_C_N_chi", num(rr.fitted_C_N_chi)},
                {"ineq_chi_margin", num(rr.ineq_chi_margin)},
                {"fitted_C_hessian", num(rr.fitted_C_hessian)},
                {"ineq_rho_margin", rr.ineq_rho_margin},
                {"rho_lhs_sup", rr.rho_lhs_sup}});
    man.add("verdicts/identities.json", "diagnostics.check_evolution_inequalities", "window at " + std::to_string(k));
    if (cfg.scenario == Scenario::cylinder) checks["identities"] = id_ok;

    const ShrinkVerdict sv = verify_corollary_shrink(sing, tr);
    bool shrink_ok = sv.conclusive && sv.rel_error_t <= 0.02;
    if (cfg.scenario == Scenario::perturbed_cylinder || cfg.scenario == Scenario::doubly_warped)
      shrink_ok = shrink_ok && sv.type_one_rel_error <= 0.05 && sv.at_spatial_infinity && sv.argmax_rm_outer;
    write_json(dir / "verdicts" / "shrink.json",
               {{"conclusive", sv.conclusive},
                {"t_sing_est", num(sv.t_sing_est)},
                {"t_form", sv.t_form},
                {"rel_error_t", num(sv.rel_error_t)},
                {"type_one_constant", num(sv.type_one_constant)},
                {"type_one_expected", sv.type_one_expected},
                {"type_one_rel_error", num(sv.type_one_rel_error)},
                {"at_spatial_infinity", sv.at_spatial_infinity},
                {"argmax_rm_outer", sv.argmax_rm_outer},
                {"degenerate", sv.degenerate},
                {"inner_rm_growth", num(sv.inner_rm_growth)},
                {"compact_regular", sv.compact_regular},
                {"note", sv.note}});
    man.add("verdicts/shrink.json", "theorem_verify.verify_corollary_shrink", all_frames);
    if (cfg.scenario != Scenario::cylinder || sv.conclusive) checks["shrink"] = shrink_ok;

    const TheoremEstimates te = measure_uniform_equivalence(tr);
    json trends = json::array();
    bool trend_ok = true;
    const bool decaying = cfg.scenario == Scenario::perturbed_cylinder || cfg.scenario == Scenario::doubly_warped;
    for (std::size_t a = 0; a < tr.spec.num_fibers(); ++a) {
      if (!decaying) break;
      const TailTrend tt = tail_trend(tr, te.asymptotic_correction[a]);
      trends.push_back({{"fiber", a}, {"spearman", tt.spearman}, {"strictly_decreasing", tt.strictly_decreasing}});
      trend_ok = trend_ok && tt.strictly_decreasing;
    }
    double phi_corr = 0.0;
    for (double v : te.phi_correction) phi_corr = std::max(phi_corr, v);
    write_json(dir / "verdicts" / "uniform_equivalence.json",
               {{"c_star_measured", num(te.c_star_measured)},
                {"window_end", te.window_end},
                {"frames_used", te.frames_used},
                {"tail_trends", trends},
                {"sup_phi_correction", phi_corr}});
    man.add("verdicts/uniform_equivalence.json", "theorem_verify.measure_uniform_equivalence", "t <= 0.9 t_form");
    checks["uniform_equivalence"] = std::isfinite(te.c_star_measured) && trend_ok;

    const AssumptionReport ar = validate_main_assumptions(tr.spec, tr.frames.front(), ex.gs);
    if (ar.positive && std::isfinite(ar.c_init)) {
      const MainEstimates me = measure_main_estimates(tr, ex.gs, ar.c_init);
      json cg = json::array(), cc = json::array();
      for (double v : me.c_star_gamma) cg.push_back(num(v));
      for (double v : me.c_star_chi) cc.push_back(num(v));
      write_json(dir / "verdicts" / "main_estimates.json",
                 {{"c_init", me.c_init}, {"c_star_gamma", cg}, {"c_star_chi", cc}, {"c_star_rho", me.c_star_rho},
                  {"window_end", me.window_end}});
      man.add("verdicts/main_estimates.json", "theorem_verify.measure_main_estimates", "t <= 0.9 t_form");
    }

    if (cfg.scenario == Scenario::perturbed_cylinder) {
      const StabilityReport st = verify_cylinder_stability(tr);
      const bool ok = st.tail_points > 0 && st.tail_min >= 0.9 && st.tail_max <= 1.1;
      write_json(dir / "verdicts" / "stability.json",
                 {{"lower", st.lower}, {"upper", st.upper}, {"fitted_C", st.fitted_C}, {"tail_min", num(st.tail_min)},
                  {"tail_max", st.tail_max}, {"tail_points", st.tail_points}, {"pass", ok}});
      man.add("verdicts/stability.json", "theorem_verify.verify_cylinder_stability", all_frames);
      checks["stability"] = ok;
    }
  }

  if (cfg.blowup && tr.spec.num_fibers() >= 2 && sing.detected) {
    json out;
    bool ok = true;
    for (BlowupMode mode : {BlowupMode::non_soliton, BlowupMode::soliton_seeking}) {
      const std::string tag = to_string(mode);
      try {
        const BlowupSequence seq = build_sequence(tr, sing.t_sing_est, mode);
        const LimitEstimate lr = limit_ratio(seq, tr);
        const SolitonVerdict sc = soliton_criterion(seq, tr);
        for (std::size_t j = 0; j < seq.points.size(); ++j) {
          const std::string name = "rescaled_" + tag + "_" + std::to_string(j) + ".csv";
          try {
            write_profile_csv(dir / name, rescale(seq, tr, j));
            man.add(name, "blowup.rescale", std::to_string(seq.points[j].frame));
          } catch (const Error& e) {
            if (e.code() != ErrorCode::truncation) throw;
          }
        }
        const double c2 = seq.points.back().c_achieved[1];
        const double closed = closed_form_ratio(ex.eta, c2);
        out[tag] = {{"sequence", sequence_json(seq)},
                    {"limit_ratio", lr.value},
                    {"limit_ratio_spread", lr.spread},
                    {"closed_form_ratio", closed},
                    {"soliton_ratio", sc.ratio.value},
                    {"is_soliton_limit", sc.is_soliton_limit},
                    {"consistent", sc.consistent_with_ratio}};
        if (mode == BlowupMode::non_soliton)
          ok = ok && std::abs(lr.value - closed) <= 0.05 * closed && !sc.is_soliton_limit;
        else
          ok = ok && std::abs(lr.value - 1.0) <= 0.02 && sc.is_soliton_limit;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::feasibility && e.code() != ErrorCode::inconclusive) throw;
        out[tag] = {{"error", e.what()}};
        ok = false;
      }
    }
    write_json(dir / "verdicts" / "blowup.json", out);
    man.add("verdicts/blowup.json", "blowup.build_sequence/limit_ratio/soliton_criterion", all_frames);
    checks["blowup"] = ok;
  }

  if (cfg.soliton) {
    double worst = 0.0;
    std::vector<double> y;
    for (int k = 0; k <= 40; ++k) y.push_back(-5.0 + 0.25 * k);
    for (int p : {2, 3, 4})
      for (double lam : {-2.0, -1.0, -0.5}) {
        const SolitonParams sp = constant_solution(p, p, lam, y);
        for (std::size_t i = 0; i < y.size(); ++i)
          for (double r : ode_residual(sp, i)) worst = std::max(worst, std::abs(r));
      }
    const bool ok = worst <= 1e-12;
    write_json(dir / "verdicts" / "soliton.json", {{"constant_solution_residual", worst}, {"pass", ok}});
    man.add("verdicts/soliton.json", "soliton_ode.ode_residual", "none");
    checks["soliton"] = ok;
  }

  bool pass = true;
  for (auto it = checks.begin(); it != checks.end(); ++it) pass = pass && it.value().get<bool>();
  write_json(dir / "summary.json", {{"checks", checks}, {"pass", pass}, {"seed", cfg.seed}, {"scenario", to_string(cfg.scenario)}});
  man.add("summary.json", "harness.run_experiment", "none");
  for (auto it = checks.begin(); it != checks.end(); ++it)
    log << (it.value().get<bool>() ? "PASS " : "FAIL ") << it.key() << '\n';
  return pass ? exit_pass : exit_acceptance;
}

void write_manifest(const fs::path& dir, const Manifest& man, const std::string& status, std::uint64_t seed) {
  write_json(dir / "manifest.json",
             {{"schema_version", kArtifactSchemaVersion}, {"status", status}, {"seed", seed}, {"files", man.files}});
}

}  // namespace

int validate_experiment(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log) {
  try {
    const Example ex = build_example(cfg);
    const AssumptionReport r = validate_main_assumptions(ex.spec, ex.state, ex.gs);
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    json j = assumptions_json(r);
    j["soliton_degenerate"] = ex.soliton_degenerate;
    write_json(dir / "assumptions.json", j);
    log << "c_init " << r.c_init << (r.passed ? "  passed\n" : "  failed\n");
    return r.passed ? exit_pass : exit_acceptance;
  } catch (const Error& e) {
    log << e.what() << '\n';
    return e.code() == ErrorCode::parameter || e.code() == ErrorCode::config || e.code() == ErrorCode::class_membership
               ? exit_config
               : exit_numeric;
  }
}

int run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const fs::path dir(out_dir);
  Manifest man;
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "effective_config.json");
    out << dump_config(cfg) << '\n';
  }
  man.add("effective_config.json", "harness.parse_config", "none");
  write_manifest(dir, man, "incomplete", cfg.seed);

  Example ex;
  try {
    ex = build_example(cfg);
  } catch (const Error& e) {
    log << e.what() << '\n';
    return exit_config;
  }
  try {
    const AssumptionReport ar = validate_main_assumptions(ex.spec, ex.state, ex.gs);
    json j = assumptions_json(ar);
    j["soliton_degenerate"] = ex.soliton_degenerate;
    write_json(dir / "assumptions.json", j);
    man.add("assumptions.json", "assumptions.validate_main_assumptions", "0");
    if (!ar.passed) log << "warning: initial data does not satisfy the main assumptions\n";

    FlowState start = ex.state;
    if (!cfg.resume_from.empty()) {
      WarpedProductSpec stored;
      load_checkpoint(cfg.resume_from, stored, start);
      if (stored.fibers.size() != ex.spec.fibers.size() || start.size() != ex.state.size())
        fail(ErrorCode::config, "resume_from: checkpoint does not match the configured scenario");
    }
    save_checkpoint((dir / "checkpoint_initial.json").string(), ex.spec, start);
    man.add("checkpoint_initial.json", cfg.resume_from.empty() ? "assumptions.build_example" : "persistence.load_checkpoint",
            "0");
    const RunResult rr = run(ex.spec, start, cfg.integrator, ex.grid.r);
    log << "steps " << rr.trajectory.steps << ", frames " << rr.trajectory.frames.size() << ", t_end "
        << rr.trajectory.frames.back().t << ", stop " << rr.report.stop_reason << '\n';
    save_trajectory((dir / "trajectory.wftrj").string(), rr.trajectory);
    man.add("trajectory.wftrj", "flow.run", "all");
    save_checkpoint((dir / "checkpoint_final.json").string(), ex.spec, rr.trajectory.frames.back());
    man.add("checkpoint_final.json", "flow.run", std::to_string(rr.trajectory.frames.size() - 1));
    write_manifest(dir, man, "incomplete", cfg.seed);
    const int code = analyze_artifacts(cfg, ex, rr.trajectory, dir, man, log);
    write_manifest(dir, man, "complete", cfg.seed);
    return code;
  } catch (const Error& e) {
    log << e.what() << '\n';
    write_manifest(dir, man, "incomplete", cfg.seed);
    if (e.code() == ErrorCode::config || e.code() == ErrorCode::parameter) return exit_config;
    return exit_numeric;
  }
}

int analyze_run(const std::string& dir_s, std::ostream& log) {
  const fs::path dir(dir_s);
  try {
    const ExperimentConfig cfg = load_config((dir / "effective_config.json").string());
    const Example ex = build_example(cfg);
    const Trajectory tr = load_trajectory((dir / "trajectory.wftrj").string());
    Manifest man;
    const json old = read_json(dir / "manifest.json");
    if (old.value("schema_version", 0) != kArtifactSchemaVersion) fail(ErrorCode::schema, "artifact schema mismatch");
    for (const auto& f : old.at("files")) {
      const std::string name = f.at("file");
      if (name.rfind("verdicts/", 0) != 0 && name != "summary.json" && name != "diagnostics.csv" &&
          name.rfind("rescaled_", 0) != 0)
        man.files.push_back(f);
    }
    const int code = analyze_artifacts(cfg, ex, tr, dir, man, log);
    write_manifest(dir, man, "complete", cfg.seed);
    return code;
  } catch (const Error& e) {
    log << e.what() << '\n';
    if (e.code() == ErrorCode::config) return exit_config;
    return exit_numeric;
  }
}

namespace {

void flatten(const json& j, const std::string& prefix, std::map<std::string, double>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array()) {
    for (std::size_t k = 0; k < j.size(); ++k) flatten(j[k], prefix + "[" + std::to_string(k) + "]", out);
  } else if (j.is_number()) {
    out[prefix] = j.get<double>();
  } else if (j.is_boolean()) {
    out[prefix] = j.get<bool>() ? 1.0 : 0.0;
  }
}

std::map<std::string, double> collect(const fs::path& dir) {
  const json man = read_json(dir / "manifest.json");
  if (man.value("schema_version", 0) != kArtifactSchemaVersion)
    fail(ErrorCode::schema, dir.string() + ": artifact schema version " + std::to_string(man.value("schema_version", 0)));
  std::map<std::string, double> out;
  std::vector<fs::path> files;
  if (fs::exists(dir / "verdicts"))
    for (const auto& e : fs::directory_iterator(dir / "verdicts"))
      if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) flatten(read_json(f), f.stem().string(), out);
  return out;
}

}  // namespace

CompareReport compare_runs(const std::string& dir_a, const std::string& dir_b) {
  const auto a = collect(dir_a), b = collect(dir_b);
  CompareReport r;
  for (const auto& [k, va] : a) {
    auto it = b.find(k);
    if (it == b.end()) {
      r.only_in_a.push_back(k);
      continue;
    }
    const double vb = it->second;
    const double scale = std::max(std::abs(va), std::abs(vb));
    const double rel = scale > 0.0 ? std::abs(va - vb) / scale : 0.0;
    r.entries.push_back({k, va, vb, rel});
    r.max_rel_diff = std::max(r.max_rel_diff, rel);
  }
  for (const auto& [k, vb] : b)
    if (!a.count(k)) r.only_in_b.push_back(k);
  return r;
}

void write_compare_report(const CompareReport& r, std::ostream& out) {
  char buf[256];
  for (const auto& e : r.entries) {
    std::snprintf(buf, sizeof buf, "%-60s %.10g %.10g %.3e\n", e.key.c_str(), e.a, e.b, e.rel_diff);
    out << buf;
  }
  for (const auto& k : r.only_in_a) out << "only in A: " << k << '\n';
  for (const auto& k : r.only_in_b) out << "only in B: " << k << '\n';
  std::snprintf(buf, sizeof buf, "max relative difference %.3e\n", r.max_rel_diff);
  out << buf;
}

int soliton_tool(int p1, int p2, double lambda, double perturbation, double span, double dy, const std::string& out_dir,
                 std::ostream& log) {
  try {
    double worst = 0.0;
    std::vector<double> y;
    for (int k = 0; k <= 40; ++k) y.push_back(-5.0 + 0.25 * k);
    for (int p : {2, 3, 4})
      for (double lam : {-2.0, -1.0, -0.5}) {
        const SolitonParams sp = constant_solution(p, p, lam, y);
        for (std::size_t i = 0; i < y.size(); ++i)
          for (double r : ode_residual(sp, i)) worst = std::max(worst, std::abs(r));
      }
    IvpStart st;
    st.p1 = p1;
    st.p2 = p2;
    st.lambda = lambda;
    st.phi1 = std::sqrt((p1 - 1) / -lambda) + perturbation;
    st.phi2 = std::sqrt((p2 - 1) / -lambda);
    const IvpResult r = integrate_ivp(st, span, dy);
    log << "constant-solution residual " << worst << '\n';
    log << "perturbed start: departure " << r.max_departure << ", growth rate " << r.growth_rate << ", y_end " << r.y_end
        << (r.finite_span ? " (stopped early)" : "") << '\n';
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      std::ofstream out(fs::path(out_dir) / "soliton_profile.csv");
      out << "y,f,phi1,phi1_y,phi2,phi2_y\n";
      char buf[160];
      const auto& p = r.profile;
      for (std::size_t i = 0; i < p.y.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", p.y[i], p.f[i], p.phi1[i], p.phi1_y[i],
                      p.phi2[i], p.phi2_y[i]);
        out << buf;
      }
    }
    return worst <= 1e-12 ? exit_pass : exit_acceptance;
  } catch (const Error& e) {
    log << e.what() << '\n';
    return e.code() == ErrorCode::parameter || e.code() == ErrorCode::domain ? exit_config : exit_numeric;
  }
}

}  // namespace warpflow
