// Acceptance suite: one PASS/FAIL line per criterion.  Exit status is the
// number of failing criteria (capped at 125).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "christoffel_oracle.hpp"
#include "warpflow/assumptions.hpp"
#include "warpflow/blowup.hpp"
#include "warpflow/control.hpp"
#include "warpflow/diagnostics.hpp"
#include "warpflow/errors.hpp"
#include "warpflow/flow.hpp"
#include "warpflow/geometry.hpp"
#include "warpflow/soliton_ode.hpp"
#include "warpflow/theorem_verify.hpp"

using namespace warpflow;

namespace tol {
constexpr double exact_solution = 1e-6;
constexpr double exact_runtime_s = 10.0;
constexpr double oracle_order = 1.8;
constexpr double gamma_ratio_lo = 3.5, gamma_ratio_hi = 4.5;
constexpr double type_one_rel = 0.05;
constexpr double t_sing_rel = 0.02;
constexpr double type_one_runtime_s = 120.0;
constexpr double c_star_drift = 0.10;
constexpr double soliton_ratio = 0.02;
constexpr double achieved_c = 0.05;
constexpr double non_soliton_ratio = 0.075;
constexpr double non_soliton_criterion_max = 0.6;
constexpr double soliton_residual = 1e-12;
constexpr double stability_lo = 0.9, stability_hi = 1.1;
constexpr double stability_delta = 1e-3;
constexpr double stability_C_drift = 0.10;
constexpr double c_n_drift = 0.20;
constexpr double calculus_slack = 1e-9;  // relative, for rounding in both sides
}  // namespace tol

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("AC%-2d %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GridSpec canonical_grid(std::size_t n) { return {n, 1000.0, 2.0}; }

RunResult canonical_run(std::size_t n, std::optional<double> stop = std::nullopt) {
  const Example ex = build_canonical_example(2.0, 0.1, 2, canonical_grid(n));
  IntegratorConfig cfg;
  cfg.stop_time = stop;
  return run(ex.spec, ex.state, cfg, ex.grid.r);
}

// Window of three frames a fixed multiple of h^2 apart, at time t.
ResidualReport window_report(std::size_t n, double t) {
  const RunResult r = canonical_run(n, t);
  const FlowState& s = r.trajectory.frames.back();
  const double h = s.spacing();
  const Window w = build_window(r.trajectory.spec, s, 0.05 * h * h, BoundaryMode::asymptotic_dirichlet);
  return check_evolution_inequalities(r.trajectory.spec, w);
}

void ac1_exact_solution() {
  const auto t0 = std::chrono::steady_clock::now();
  const Example ex = build_cylinder(1.0, 1.0, 2, 0.0, {512, 10.0, 0.0});
  IntegratorConfig cfg;
  cfg.stop_time = 0.9;
  const RunResult r = run(ex.spec, ex.state, cfg, ex.grid.r);
  double err = 0.0;
  for (const auto& f : r.trajectory.frames)
    for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(warping(ex.spec, f, 0, i) - (1.0 - f.t)));
  const double secs = seconds_since(t0);
  const double t_end = r.trajectory.frames.back().t;
  report(1, err <= tol::exact_solution && secs < tol::exact_runtime_s && std::abs(t_end - 0.9) < 1e-12,
         fmt("cylinder 512 pts to t=%.3f: max|u-(1-t)| = %.3e, %.2f s", t_end, err, secs));
}

struct RandomModel {
  WarpedProductSpec spec;
  oracle::WarpedModel model;
};

RandomModel random_model(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::uniform_int_distribution<int> nf(1, 3), dim(1, 3);
  RandomModel m;
  const int A = nf(rng);
  const double pa = 0.1 + 0.3 * U(rng), pk = 0.3 + U(rng), pp = 6.28 * U(rng);
  m.model.phi = [=](double x) { return 1.0 + pa * std::sin(pk * x + pp); };
  for (int a = 0; a < A; ++a) {
    FiberSpec f;
    f.dim = dim(rng);
    f.mu = f.dim == 1 ? 0.0 : 0.5 + 1.5 * U(rng);
    f.offset = 1.0;
    m.spec.fibers.push_back(f);
    const double c1 = 0.4 * U(rng), c2 = 0.4 * U(rng), c0 = c1 + c2 + 0.3 + U(rng);
    const double k1 = 0.5 + U(rng), k2 = 0.5 + U(rng), p1 = 6.28 * U(rng);
    m.model.u.push_back([=](double x) { return c0 + c1 * std::sin(k1 * x + p1) + c2 * std::tanh(k2 * x); });
    m.model.dims.push_back(f.dim);
    m.model.kappa.push_back(f.kappa());
  }
  return m;
}

// Largest component error against the oracle at x0 with spacing h.
double oracle_error(const RandomModel& m, const oracle::Curvature& c, double x0, double h) {
  const std::size_t M = 8;
  FlowState s;
  for (std::size_t i = 0; i <= 2 * M; ++i) s.x.push_back(x0 + (double(i) - double(M)) * h);
  s.v.resize(m.spec.num_fibers());
  for (double x : s.x) {
    s.phi.push_back(m.model.phi(x));
    for (std::size_t a = 0; a < m.spec.num_fibers(); ++a) s.v[a].push_back(m.model.u[a](x) - 1.0);
  }
  const PointGeometry g = curvature_components(m.spec, s, M);
  double err = 0.0;
  for (std::size_t a = 0; a < m.spec.num_fibers(); ++a) {
    const std::size_t oa = m.model.offset(a);
    err = std::max(err, std::abs(g.K_base_fiber[a] - c.sectional(0, oa)));
    if (m.model.dims[a] > 1) err = std::max(err, std::abs(g.K_fiber_internal[a] - c.sectional(oa, oa + 1)));
    for (std::size_t b = a + 1; b < m.spec.num_fibers(); ++b)
      err = std::max(err, std::abs(g.K_cross[a][b] - c.sectional(oa, m.model.offset(b))));
  }
  return err;
}

void ac2_curvature_oracle() {
  std::mt19937_64 rng(20240517);
  std::uniform_real_distribution<double> X(-1.0, 1.0);
  double min_order = std::numeric_limits<double>::infinity(), worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const RandomModel m = random_model(rng);
    const double x0 = X(rng);
    const oracle::Curvature c(m.model, m.model.point(x0));
    const double e1 = oracle_error(m, c, x0, 0.04), e2 = oracle_error(m, c, x0, 0.02);
    min_order = std::min(min_order, std::log2(e1 / e2));
    worst = std::max(worst, e2);
  }
  report(2, min_order >= tol::oracle_order,
         fmt("20 random states, min observed order %.3f, worst error at h/2 %.2e", min_order, worst));
}

void ac3_gamma_identity() {
  const double t = 0.02;
  const ResidualReport a = window_report(1025, t), b = window_report(2049, t);
  const double ratio = a.identity_gamma_residual / b.identity_gamma_residual;
  report(3, ratio >= tol::gamma_ratio_lo && ratio <= tol::gamma_ratio_hi,
         fmt("canonical t=%.2f: sup residual %.4e (1025) / %.4e (2049) = %.3f", t, a.identity_gamma_residual,
             b.identity_gamma_residual, ratio));
}

void ac4_type_one(const RunResult& r, double secs) {
  const ShrinkVerdict v = verify_corollary_shrink(r.report, r.trajectory);
  const bool ok = v.conclusive && v.type_one_rel_error <= tol::type_one_rel && v.rel_error_t <= tol::t_sing_rel &&
                  v.argmax_rm_outer && secs < tol::type_one_runtime_s;
  report(4, ok,
         fmt("2048 pts: sup|Rm|(T-t) = %.5f (expected %.3f), t_sing = %.6f (t_form %.3f), argmax outer %s, %.1f s",
             v.type_one_constant, v.type_one_expected, v.t_sing_est, v.t_form, v.argmax_rm_outer ? "yes" : "no", secs));
}

void ac5_uniform_equivalence(const RunResult& coarse, const RunResult& fine) {
  const TheoremEstimates a = measure_uniform_equivalence(coarse.trajectory);
  const TheoremEstimates b = measure_uniform_equivalence(fine.trajectory);
  const double drift = std::abs(a.c_star_measured - b.c_star_measured) / b.c_star_measured;
  bool trends = true;
  std::string rho;
  for (std::size_t f = 0; f < fine.trajectory.spec.num_fibers(); ++f) {
    const TailTrend t = tail_trend(fine.trajectory, b.asymptotic_correction[f]);
    trends = trends && t.strictly_decreasing;
    rho += fmt(" %.2f", t.spearman);
  }
  const bool ok = std::isfinite(a.c_star_measured) && std::isfinite(b.c_star_measured) && drift < tol::c_star_drift && trends;
  report(5, ok,
         fmt("c_star %.5f (1025) vs %.5f (2049), drift %.2f%%; tail correction strictly decreasing %s, spearman%s",
             a.c_star_measured, b.c_star_measured, 100 * drift, trends ? "yes" : "no", rho.c_str()));
}

void ac6_blowup(const RunResult& r) {
  const double T = r.report.t_sing_est;
  try {
    const BlowupSequence ss = build_sequence(r.trajectory, T, BlowupMode::soliton_seeking);
    const LimitEstimate lr_s = limit_ratio(ss, r.trajectory);
    const SolitonVerdict sc_s = soliton_criterion(ss, r.trajectory);
    const BlowupSequence ns = build_sequence(r.trajectory, T, BlowupMode::non_soliton);
    const LimitEstimate lr_n = limit_ratio(ns, r.trajectory);
    const SolitonVerdict sc_n = soliton_criterion(ns, r.trajectory);
    double c_dev = 0.0;
    for (const auto& p : ns.points) c_dev = std::max(c_dev, std::abs(p.c_achieved[1] - 1.0));
    const bool ok = std::abs(lr_s.value - 1.0) <= tol::soliton_ratio &&
                    std::abs(sc_s.ratio.value - 1.0) <= tol::soliton_ratio && c_dev <= tol::achieved_c &&
                    std::abs(lr_n.value - 1.5) <= tol::non_soliton_ratio &&
                    sc_n.ratio.value <= tol::non_soliton_criterion_max;
    report(6, ok,
           fmt("soliton-seeking: u1/u2 -> %.4f, criterion -> %.4f; non-soliton (|c2-1| <= %.1e): u1/u2 -> %.4f, "
               "criterion -> %.4f",
               lr_s.value, sc_s.ratio.value, c_dev, lr_n.value, sc_n.ratio.value));
  } catch (const Error& e) {
    report(6, false, e.what());
  }
}

void ac7_soliton_ode() {
  double worst = 0.0;
  std::vector<double> y;
  for (int k = 0; k <= 80; ++k) y.push_back(-10.0 + 0.25 * k);
  for (int p : {2, 3, 4, 5})
    for (double lam : {-2.0, -1.0, -0.5, -0.25}) {
      const SolitonParams s = constant_solution(p, p, lam, y);
      for (std::size_t i = 0; i < y.size(); ++i)
        for (double r : ode_residual(s, i)) worst = std::max(worst, std::abs(r));
    }
  IvpStart st;
  st.lambda = -0.5;
  st.phi1 = std::sqrt(2.0) + 1e-4;
  st.phi2 = std::sqrt(2.0);
  const IvpResult r = integrate_ivp(st, 10.0, 1e-3);
  report(7, worst <= tol::soliton_residual && r.max_departure > 1e-4,
         fmt("constant-solution residual %.2e over 16 (p, lambda); perturbed start (1e-4) departs to %.3e by y=%.2f, "
             "rate %.3f",
             worst, r.max_departure, r.y_end, r.growth_rate));
}

void ac8_stability() {
  StabilityReport rep[2];
  const std::size_t sizes[2] = {1025, 2049};
  for (int k = 0; k < 2; ++k) {
    const Example ex = build_perturbed_cylinder(0.1, 2, canonical_grid(sizes[k]));
    IntegratorConfig cfg;
    const RunResult r = run(ex.spec, ex.state, cfg, ex.grid.r);
    rep[k] = verify_cylinder_stability(r.trajectory, tol::stability_delta);
  }
  bool tails = true;
  for (const auto& s : rep)
    tails = tails && s.tail_points > 0 && s.tail_min >= tol::stability_lo && s.tail_max <= tol::stability_hi;
  const double drift = std::abs(rep[0].fitted_C - rep[1].fitted_C) / rep[1].fitted_C;
  report(8, tails && drift < tol::stability_C_drift,
         fmt("tail ratio [%.4f, %.4f] over %zu pts (2049); fitted C %.4f vs %.4f, drift %.2f%%", rep[1].tail_min,
             rep[1].tail_max, rep[1].tail_points, rep[0].fitted_C, rep[1].fitted_C, 100 * drift));
}

void ac9_inequalities() {
  bool margin_ok = true, cn_ok = true, rho_ok = true;
  std::string detail;
  for (double t : {0.02, 0.05, 0.08}) {
    const ResidualReport a = window_report(1025, t), b = window_report(2049, t);
    // Richardson estimate of the discretization error left in the finer margin.
    const double tolerance = std::abs(a.ineq_gamma_margin - b.ineq_gamma_margin) / 3.0;
    margin_ok = margin_ok && b.ineq_gamma_margin >= -tolerance;
    const double drift = std::abs(a.fitted_C_N_chi - b.fitted_C_N_chi) / b.fitted_C_N_chi;
    cn_ok = cn_ok && std::isfinite(drift) && drift < tol::c_n_drift;
    rho_ok = rho_ok && a.rho_lhs_sup == 0.0 && b.rho_lhs_sup == 0.0 && b.ineq_rho_margin == 0.0;
    detail += fmt(" t=%.2f: margin %.4f (tol %.1e, quarter %.1e), C_N %.4f/%.4f;", t, b.ineq_gamma_margin, tolerance,
                  b.ineq_gamma_margin_quarter, a.fitted_C_N_chi, b.fitted_C_N_chi);
  }
  detail += fmt(" rho == 0: %s", rho_ok ? "yes" : "no");
  report(9, margin_ok && cn_ok && rho_ok, detail);
}

// Space-time test function on a static flat line: value, d_t, d_x, d_xx.
struct Jet {
  double v, t, x, xx;
};

struct SpaceTime {
  double c0, c1, b, d, c2, k, w;
  Jet at(double x, double t) const {
    const double e = c1 * std::exp(b * x + d * t);
    const double s = std::sin(k * x + w * t), c = std::cos(k * x + w * t);
    return {c0 + e + c2 * (1.0 + s), d * e + c2 * w * c, b * e + c2 * k * c, b * b * e - c2 * k * k * s};
  }
};

double parexp_of(const Jet& j) { return parexp(j.v, j.t - j.xx, j.x * j.x); }

Jet product_jet(const Jet& a, const Jet& b) {
  return {a.v * b.v, a.t * b.v + a.v * b.t, a.x * b.v + a.v * b.x, a.xx * b.v + 2 * a.x * b.x + a.v * b.xx};
}

Jet sum_jet(const Jet& a, const Jet& b) { return {a.v + b.v, a.t + b.t, a.x + b.x, a.xx + b.xx}; }

Jet compose_jet(const ControlFunction& g, const Jet& a) {
  const double g1 = g.d1(a.v), g2 = g.d2(a.v);
  return {g(a.v), g1 * a.t, g1 * a.x, g1 * a.xx + g2 * a.x * a.x};
}

bool leq(double lhs, double rhs) { return lhs <= rhs * (1.0 + tol::calculus_slack) + 1e-300; }

void ac10_calculus() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto random_g = [&] {
    const double a = 2.0 + 2.0 * U(rng);
    const double m = (a - 2.0) + U(rng);
    return power_rational(0.2 + 3.0 * U(rng), a, 0.1 + 10.0 * U(rng), m);
  };
  auto random_psi = [&] {
    return SpaceTime{0.05 + U(rng), U(rng), -2.0 + 4.0 * U(rng), -1.0 + 2.0 * U(rng), U(rng), 3.0 * U(rng),
                     -2.0 + 4.0 * U(rng)};
  };
  int bad[6] = {0, 0, 0, 0, 0, 0};
  for (int k = 0; k < 100; ++k) {
    const ControlFunction g1 = random_g(), g2 = random_g();
    const double p1 = polyd(g1), p2 = polyd(g2);
    bad[0] += !leq(polyd(sum(g1, g2)), p1 + p2);
    bad[1] += !leq(polyd(product(g1, g2)), p1 * p2);
    bad[2] += !leq(polyd(compose(g1, g2)), p1 * p2 * p2);

    const SpaceTime s1 = random_psi(), s2 = random_psi();
    bool b3 = false, b4 = false, b5 = false;
    for (int q = 0; q < 25; ++q) {
      const double x = -2.0 + 4.0 * U(rng), t = U(rng);
      const Jet j1 = s1.at(x, t), j2 = s2.at(x, t);
      const double e1 = parexp_of(j1), e2 = parexp_of(j2);
      b3 = b3 || !leq(parexp_of(compose_jet(g1, j1)), p1 * p1 * e1);
      b4 = b4 || !leq(parexp_of(product_jet(j1, j2)), e1 + e2);
      b5 = b5 || !leq(parexp_of(sum_jet(j1, j2)), 2.0 * (e1 + e2));
    }
    bad[3] += b3;
    bad[4] += b4;
    bad[5] += b5;
  }
  const GClassReport sq = g_class_report(square_function());
  bool all = sq.polyd == 5.0 && sq.g_norm == 6.0;
  for (int b : bad) all = all && b == 0;
  report(10, all,
         fmt("violations per inequality over 100 pairs: [%d %d %d %d %d %d]; polyd(s^2) = %.17g, norm = %.17g", bad[0],
             bad[1], bad[2], bad[3], bad[4], bad[5], sq.polyd, sq.g_norm));
}

template <class F>
void guarded(int id, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded(1, ac1_exact_solution);
  guarded(2, ac2_curvature_oracle);
  guarded(3, ac3_gamma_identity);

  RunResult fine, coarse;
  double fine_secs = 0.0;
  bool have_runs = false;
  try {
    const auto t0 = std::chrono::steady_clock::now();
    fine = canonical_run(2048);
    fine_secs = seconds_since(t0);
    coarse = canonical_run(1025);
    have_runs = true;
  } catch (const std::exception& e) {
    for (int id : {4, 5, 6}) report(id, false, std::string("canonical run failed: ") + e.what());
  }
  if (have_runs) {
    guarded(4, [&] { ac4_type_one(fine, fine_secs); });
    guarded(5, [&] {
      // one refinement: 1025 -> 2049 nested points
      const RunResult mid = canonical_run(2049);
      ac5_uniform_equivalence(coarse, mid);
    });
    guarded(6, [&] { ac6_blowup(fine); });
  }
  guarded(7, ac7_soliton_ode);
  guarded(8, ac8_stability);
  guarded(9, ac9_inequalities);
  guarded(10, ac10_calculus);
  std::printf("%d of 10 criteria failed\n", failures);
  return std::min(failures, 125);
}
