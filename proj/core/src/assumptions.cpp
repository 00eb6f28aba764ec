#include "warpflow/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "warpflow/errors.hpp"
#include "warpflow/geometry.hpp"

namespace warpflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Indices of the outer tail on each side, ordered from inside to the boundary.
std::vector<std::vector<std::size_t>> tail_indices(const FlowState& s, double fraction, std::size_t margin) {
  const std::size_t n = s.size();
  const double lo = s.x.front(), hi = s.x.back();
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  std::vector<std::size_t> right, left;
  for (std::size_t i = margin; i + margin < n; ++i) {
    const double d = std::abs(s.x[i] - mid) / half;
    if (d < 1.0 - fraction) continue;
    (s.x[i] > mid ? right : left).push_back(i);
  }
  std::reverse(left.begin(), left.end());
  return {left, right};
}

double log_slope(const std::vector<double>& ratio, const std::vector<double>& r, const std::vector<std::size_t>& idx) {
  if (idx.size() < 2) return 0.0;
  const std::size_t a = idx.front(), b = idx.back();
  const double ra = ratio[a], rb = ratio[b];
  if (!(ra > 0.0) || !(rb > 0.0)) return rb > 0.0 ? kInf : 0.0;
  const double da = std::abs(r[a]), db = std::abs(r[b]);
  if (!(db > da)) return 0.0;
  return std::log(rb / ra) / std::log(db / da);
}

}  // namespace

AssumptionReport validate_main_assumptions(const WarpedProductSpec& spec, const FlowState& s,
                                           const std::vector<ControlFunction>& gs) {
  spec.validate();
  validate_state(spec, s);
  const std::size_t A = spec.num_fibers();
  if (gs.size() != A) fail(ErrorCode::parameter, "need one control function per fiber");

  AssumptionReport rep;
  rep.has_positive_mu = spec.has_shrinking_fiber();
  for (const auto& g : gs) {
    const GClassReport cr = g_class_report(g);
    if (!cr.in_class) fail(ErrorCode::class_membership, g.name() + " is not in the class");
    rep.g_norm.push_back(cr.g_norm);
  }

  rep.positive = true;
  rep.tail_min_v = kInf;
  for (std::size_t a = 0; a < A; ++a) {
    for (double vi : s.v[a])
      if (!(vi > 0.0)) rep.positive = false;
    rep.tail_min_v = std::min({rep.tail_min_v, s.v[a].front(), s.v[a].back()});
  }

  rep.gamma_margin.assign(A, 0.0);
  rep.chi_margin.assign(A, 0.0);
  rep.rho_margin = 0.0;
  const std::size_t n = s.size();
  if (rep.positive) {
    std::vector<double> args(A);
    for (std::size_t i = kStencilMargin; i + kStencilMargin < n; ++i) {
      for (std::size_t a = 0; a < A; ++a) args[a] = s.v[a][i];
      for (std::size_t a = 0; a < A; ++a) {
        const Derivs d = arclength_derivatives(s, s.v[a], i);
        const double gamma = d.d_ds * d.d_ds;
        const double chi = d.d2_ds2 * d.d2_ds2;
        rep.gamma_margin[a] = std::max(rep.gamma_margin[a], gamma / gs[a].value(args[a]));
        rep.chi_margin[a] = std::max(rep.chi_margin[a], chi / H_vector(gs, a, args));
      }
      rep.rho_margin = std::max(rep.rho_margin, rho(spec, s, i));
    }
    rep.c_init = rep.rho_margin;
    for (std::size_t a = 0; a < A; ++a)
      rep.c_init = std::max({rep.c_init, rep.gamma_margin[a], rep.chi_margin[a], rep.g_norm[a]});
  } else {
    rep.c_init = kInf;
    rep.notes.push_back("v is not strictly positive");
  }

  // |grad Rm| proxy: arclength derivative of the pointwise norm; the outer tail
  // must not exceed what the interior already reaches.
  const RiemannField rf = riemann_field(spec, s);
  double inner = 0.0, tail = 0.0;
  bool finite = true;
  const auto tails = tail_indices(s, 0.2, kStencilMargin + 1);
  std::vector<bool> in_tail(n, false);
  for (const auto& side : tails)
    for (std::size_t i : side) in_tail[i] = true;
  for (std::size_t i = kStencilMargin + 1; i + kStencilMargin + 1 < n; ++i) {
    const double g = std::abs(rf.pointwise[i + 1] - rf.pointwise[i - 1]) / ((s.x[i + 1] - s.x[i - 1]) * s.phi[i]);
    if (!std::isfinite(g)) finite = false;
    double& slot = in_tail[i] ? tail : inner;
    slot = std::max(slot, g);
  }
  rep.grad_rm_sup = std::max(inner, tail);
  rep.grad_rm_bounded = finite && tail <= inner * (1.0 + 1e-9) + 1e-300;
  if (!rep.grad_rm_bounded) rep.notes.push_back("|grad Rm| grows toward the boundary");
  if (!rep.has_positive_mu) rep.notes.push_back("no fiber with mu > 0");

  rep.passed = rep.positive && std::isfinite(rep.c_init) && rep.has_positive_mu && rep.grad_rm_bounded;
  return rep;
}

AdmissibilityReport admissibility_check(const WarpedProductSpec& spec, const Grid& grid,
                                        const std::vector<Profile>& deltas, const std::vector<ControlFunction>& gs,
                                        const TailOptions& tail) {
  const std::size_t A = spec.num_fibers();
  if (deltas.size() != A || gs.size() != A) fail(ErrorCode::parameter, "need one profile and one control function per fiber");
  FlowState s = state_from_profiles(grid, deltas);
  for (std::size_t a = 0; a < A; ++a)
    for (double d : s.v[a])
      if (!(d > 0.0)) fail(ErrorCode::domain, "profiles must be positive on the grid");

  AdmissibilityReport out;
  out.assumptions = validate_main_assumptions(spec, s, gs);
  const auto tails = tail_indices(s, tail.fraction, kStencilMargin);

  for (std::size_t a = 0; a < A; ++a) {
    const auto& v = s.v[a];
    const double vmax = *std::max_element(v.begin(), v.end());
    bool dec = true;
    for (const auto& side : tails) {
      for (std::size_t k = 1; k < side.size(); ++k)
        if (!(v[side[k]] < v[side[k - 1]])) dec = false;
    }
    dec = dec && v.front() <= 1e-2 * vmax && v.back() <= 1e-2 * vmax;
    out.decays.push_back(dec);
    out.g_decay.push_back(g_class_report(gs[a]).decay_flag);
  }

  std::vector<double> args(A);
  const std::size_t n = s.size();
  for (std::size_t a = 0; a < A; ++a) {
    std::vector<double> gr(n, 0.0), cr(n, 0.0);
    for (std::size_t i = kStencilMargin; i + kStencilMargin < n; ++i) {
      for (std::size_t b = 0; b < A; ++b) args[b] = s.v[b][i];
      const Derivs d = arclength_derivatives(s, s.v[a], i);
      gr[i] = d.d_ds * d.d_ds / gs[a].value(args[a]);
      cr[i] = d.d2_ds2 * d.d2_ds2 / H_vector(gs, a, args);
    }
    double gs_max = -kInf, cs_max = -kInf;
    for (const auto& side : tails) {
      gs_max = std::max(gs_max, log_slope(gr, grid.r, side));
      cs_max = std::max(cs_max, log_slope(cr, grid.r, side));
    }
    out.gamma_tail_slope.push_back(gs_max);
    out.gamma_tail_bounded.push_back(gs_max <= tail.max_log_slope);
    out.chi_tail_bounded.push_back(cs_max <= tail.max_log_slope);
  }

  out.admissible = out.assumptions.passed;
  for (std::size_t a = 0; a < A; ++a)
    out.admissible = out.admissible && out.decays[a] && out.g_decay[a] && out.gamma_tail_bounded[a] && out.chi_tail_bounded[a];
  return out;
}

Example build_canonical_example(double eta, double a_star, int p, const GridSpec& gspec) {
  if (!(eta > 0.0)) fail(ErrorCode::parameter, "eta must be positive");
  if (!(a_star > 0.0)) fail(ErrorCode::parameter, "a_star must be positive");
  if (p < 2) fail(ErrorCode::parameter, "p must be >= 2");
  Example ex;
  ex.spec.fibers = {FiberSpec{p, 1.0, a_star}, FiberSpec{p, 1.0, a_star}};
  ex.grid = make_grid(gspec);
  ex.deltas = {[eta](double r) { return eta * inverse_square_profile(r); }, inverse_square_profile};
  ex.state = state_from_profiles(ex.grid, ex.deltas);
  ex.gs = {cubic_over_1ps(), cubic_over_1ps()};
  ex.eta = eta;
  ex.soliton_degenerate = eta == 1.0;
  return ex;
}

Example build_perturbed_cylinder(double a_star, int p, const GridSpec& gspec, Profile delta) {
  if (!(a_star > 0.0)) fail(ErrorCode::parameter, "a_star must be positive");
  if (p < 2) fail(ErrorCode::parameter, "p must be >= 2");
  Example ex;
  ex.spec.fibers = {FiberSpec{p, 1.0, a_star}};
  ex.grid = make_grid(gspec);
  ex.deltas = {std::move(delta)};
  ex.state = state_from_profiles(ex.grid, ex.deltas);
  ex.gs = {cubic_over_1ps()};
  return ex;
}

Example build_cylinder(double a, double mu, int p, double eps, const GridSpec& gspec) {
  if (!(a > 0.0) || !(mu > 0.0)) fail(ErrorCode::parameter, "cylinder needs a > 0 and mu > 0");
  if (p < 2) fail(ErrorCode::parameter, "p must be >= 2");
  if (eps < 0.0) fail(ErrorCode::parameter, "eps must be >= 0");
  Example ex;
  ex.spec.fibers = {FiberSpec{p, mu, a}};
  ex.grid = make_grid(gspec);
  ex.deltas = {[eps](double) { return eps; }};
  ex.state = state_from_profiles(ex.grid, ex.deltas);
  ex.gs = {square_function()};
  return ex;
}

Example build_interior_minimum(double a_star, int p, const GridSpec& gspec) {
  if (!(a_star > 0.0)) fail(ErrorCode::parameter, "a_star must be positive");
  Example ex;
  ex.spec.fibers = {FiberSpec{p, 1.0, a_star}};
  ex.grid = make_grid(gspec);
  ex.deltas = {[](double r) { return 0.02 + 0.5 * r * r / (1.0 + r * r); }};
  ex.state = state_from_profiles(ex.grid, ex.deltas);
  ex.gs = {cubic_over_1ps()};
  return ex;
}

Example build_circle_fiber(double a_star, int p, const GridSpec& gspec) {
  if (!(a_star > 0.0)) fail(ErrorCode::parameter, "a_star must be positive");
  Example ex;
  ex.spec.fibers = {FiberSpec{1, 0.0, 1.0}, FiberSpec{p, 1.0, a_star}};
  ex.grid = make_grid(gspec);
  ex.deltas = {inverse_square_profile, inverse_square_profile};
  ex.state = state_from_profiles(ex.grid, ex.deltas);
  ex.gs = {cubic_over_1ps(), cubic_over_1ps()};
  return ex;
}

}  // namespace warpflow
