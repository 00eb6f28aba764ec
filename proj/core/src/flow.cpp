#include "warpflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "warpflow/errors.hpp"
#include "warpflow/geometry.hpp"

namespace warpflow {

const char* to_string(BoundaryMode m) noexcept {
  return m == BoundaryMode::neumann ? "neumann" : "asymptotic_dirichlet";
}

BoundaryMode boundary_mode_from_string(const std::string& s) {
  if (s == "asymptotic_dirichlet" || s == "dirichlet") return BoundaryMode::asymptotic_dirichlet;
  if (s == "neumann") return BoundaryMode::neumann;
  fail(ErrorCode::parameter, "unknown boundary mode '" + s + "'");
}

void IntegratorConfig::validate() const {
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) fail(ErrorCode::parameter, "cfl_safety must lie in (0, 1]");
  if (!(dt_max > 0.0)) fail(ErrorCode::parameter, "dt_max must be positive");
  if (!(stop_u_floor > 0.0)) fail(ErrorCode::parameter, "stop_u_floor must be positive");
  if (stop_time && !(*stop_time >= 0.0)) fail(ErrorCode::parameter, "stop_time must be >= 0");
  if (!(frame_u_drop > 0.0 && frame_u_drop < 1.0)) fail(ErrorCode::parameter, "frame_u_drop must lie in (0, 1)");
  if (!(u_rate_fraction > 0.0 && u_rate_fraction <= 0.5)) fail(ErrorCode::parameter, "u_rate_fraction must lie in (0, 0.5]");
}

void rhs(const WarpedProductSpec& spec, const FlowState& s, BoundaryMode bc, Rhs& out) {
  const std::size_t n = s.size();
  const std::size_t A = spec.num_fibers();
  out.dphi.assign(n, 0.0);
  out.dv.resize(A);
  for (auto& d : out.dv) d.assign(n, 0.0);

  std::vector<double> hom(A), us(A), uss(A), u(A), dimw(A);
  for (std::size_t a = 0; a < A; ++a) {
    hom[a] = spec.homogeneous(a, s.t);
    dimw[a] = spec.fibers[a].dim;
  }
  const double h = s.spacing();

  auto point = [&](std::size_t i, bool mirror) {
    for (std::size_t a = 0; a < A; ++a) {
      u[a] = hom[a] + s.v[a][i];
      if (!(u[a] > 0.0)) fail(ErrorCode::singular_state, "u <= 0 at index " + std::to_string(i));
      if (mirror) {
        // Ghost value equals the first interior neighbour.
        const std::size_t j = i == 0 ? 1 : n - 2;
        us[a] = 0.0;
        uss[a] = 2.0 * (s.v[a][j] - s.v[a][i]) / (h * h * s.phi[i] * s.phi[i]);
      } else {
        const Derivs d = arclength_derivatives_unchecked(s, s.v[a].data(), i);
        us[a] = d.d_ds;
        uss[a] = d.d2_ds2;
      }
    }
    double drift = 0.0, k = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
      const double q = us[a] / u[a];
      drift += 0.5 * dimw[a] * q;
      k += dimw[a] * (0.5 * uss[a] / u[a] - 0.25 * q * q);
    }
    for (std::size_t a = 0; a < A; ++a) out.dv[a][i] = uss[a] + drift * us[a] - us[a] * us[a] / u[a];
    out.dphi[i] = s.phi[i] * k;
  };

  for (std::size_t i = 1; i + 1 < n; ++i) point(i, false);
  if (bc == BoundaryMode::neumann) {
    point(0, true);
    point(n - 1, true);
  }
  for (std::size_t i = 0; i < n; ++i) {
    bool ok = std::isfinite(out.dphi[i]);
    for (std::size_t a = 0; a < A; ++a) ok = ok && std::isfinite(out.dv[a][i]);
    if (!ok) fail(ErrorCode::numeric, "non-finite right-hand side at index " + std::to_string(i));
  }
}

Rhs rhs(const WarpedProductSpec& spec, const FlowState& s, BoundaryMode bc) {
  Rhs out;
  rhs(spec, s, bc, out);
  return out;
}

namespace {

double cfl_dt(const FlowState& s, const IntegratorConfig& cfg) {
  const double h = s.spacing();
  double m = std::numeric_limits<double>::infinity();
  for (double p : s.phi) m = std::min(m, p * h);
  return cfg.cfl_safety * m * m / 2.0;
}

double rate_dt(const WarpedProductSpec& spec, const FlowState& s, const Rhs& k, double fraction) {
  double dt = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < spec.num_fibers(); ++a) {
    const double hom = spec.homogeneous(a, s.t);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double rate = std::abs(k.dv[a][i] - spec.fibers[a].mu);
      if (rate > 0.0) dt = std::min(dt, fraction * (hom + s.v[a][i]) / rate);
    }
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double rate = std::abs(k.dphi[i]);
    if (rate > 0.0) dt = std::min(dt, 5.0 * fraction * s.phi[i] / rate);
  }
  return dt;
}

bool admissible(const WarpedProductSpec& spec, const FlowState& s) {
  for (double p : s.phi)
    if (!(p > 0.0) || !std::isfinite(p)) return false;
  for (std::size_t a = 0; a < spec.num_fibers(); ++a) {
    const double hom = spec.homogeneous(a, s.t);
    for (double vi : s.v[a])
      if (!std::isfinite(vi) || !(hom + vi > 0.0)) return false;
  }
  return true;
}

void axpy(FlowState& out, const FlowState& base, const Rhs& k, double dt) {
  out.t = base.t + dt;
  out.x = base.x;
  for (std::size_t i = 0; i < base.size(); ++i) out.phi[i] = base.phi[i] + dt * k.dphi[i];
  for (std::size_t a = 0; a < base.v.size(); ++a)
    for (std::size_t i = 0; i < base.size(); ++i) out.v[a][i] = base.v[a][i] + dt * k.dv[a][i];
}

FlowState heun(const WarpedProductSpec& spec, const FlowState& s, const Rhs& k1, double dt, BoundaryMode bc,
               int max_rejections, StepInfo* info) {
  FlowState stage = s, out = s;
  Rhs k2;
  int rejected = 0;
  for (;;) {
    bool ok = false;
    axpy(stage, s, k1, dt);
    if (admissible(spec, stage)) {
      try {
        rhs(spec, stage, bc, k2);
        ok = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::singular_state && e.code() != ErrorCode::numeric) throw;
      }
    }
    if (ok) {
      out.t = s.t + dt;
      for (std::size_t i = 0; i < s.size(); ++i) out.phi[i] = s.phi[i] + 0.5 * dt * (k1.dphi[i] + k2.dphi[i]);
      for (std::size_t a = 0; a < s.v.size(); ++a)
        for (std::size_t i = 0; i < s.size(); ++i) out.v[a][i] = s.v[a][i] + 0.5 * dt * (k1.dv[a][i] + k2.dv[a][i]);
      if (admissible(spec, out)) break;
    }
    if (++rejected > max_rejections) fail(ErrorCode::numeric, "step size underflow, singularity imminent");
    dt *= 0.5;
  }
  if (info) {
    info->dt = dt;
    info->rejections = rejected;
  }
  return out;
}

}  // namespace

double stable_dt(const WarpedProductSpec& spec, const FlowState& s, const IntegratorConfig& cfg) {
  const Rhs k = rhs(spec, s, cfg.bc_mode);
  double dt = std::min({cfg.dt_max, cfl_dt(s, cfg), rate_dt(spec, s, k, cfg.u_rate_fraction)});
  if (cfg.stop_time) dt = std::min(dt, *cfg.stop_time - s.t);
  return dt;
}

FlowState step_fixed(const WarpedProductSpec& spec, const FlowState& s, double dt, BoundaryMode bc, int max_rejections,
                     StepInfo* info) {
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorCode::parameter, "dt must be positive");
  const Rhs k1 = rhs(spec, s, bc);
  return heun(spec, s, k1, dt, bc, max_rejections, info);
}

FlowState step(const WarpedProductSpec& spec, const FlowState& s, const IntegratorConfig& cfg, StepInfo* info) {
  const Rhs k1 = rhs(spec, s, cfg.bc_mode);
  double dt = std::min({cfg.dt_max, cfl_dt(s, cfg), rate_dt(spec, s, k1, cfg.u_rate_fraction)});
  if (cfg.stop_time) {
    const double left = *cfg.stop_time - s.t;
    if (!(left > 0.0)) fail(ErrorCode::parameter, "state already at stop_time");
    // Land exactly on stop_time instead of leaving a sliver.
    if (dt >= left || left - dt < 1e-3 * dt) dt = left;
  }
  return heun(spec, s, k1, dt, cfg.bc_mode, cfg.max_rejections, info);
}

bool in_outer_region(const FlowState& s, std::size_t i, double fraction) {
  const double lo = s.x.front(), hi = s.x.back();
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  return std::abs(s.x[i] - mid) >= (1.0 - fraction) * half;
}

namespace {

double min_shrinking_u(const WarpedProductSpec& spec, const FlowState& s) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < spec.num_fibers(); ++a)
    if (spec.fibers[a].mu > 0.0) m = std::min(m, min_warping(spec, s, a));
  return m;
}

}  // namespace

RunResult run(const WarpedProductSpec& spec, const FlowState& state0, const IntegratorConfig& cfg,
              std::vector<double> radius) {
  spec.validate();
  cfg.validate();
  validate_state(spec, state0);
  if (!radius.empty() && radius.size() != state0.size()) fail(ErrorCode::parameter, "radius length differs from grid");

  RunResult res;
  Trajectory& tr = res.trajectory;
  tr.spec = spec;
  tr.radius = radius.empty() ? state0.x : std::move(radius);
  tr.frames.push_back(state0);
  tr.min_dt = std::numeric_limits<double>::infinity();

  FlowState s = state0;
  double last_store_u = min_shrinking_u(spec, s);
  bool last_stored = true;
  std::string reason = "max_steps";
  while (tr.steps < cfg.max_steps) {
    if (cfg.stop_time && s.t >= *cfg.stop_time) {
      reason = "stop_time";
      break;
    }
    if (min_shrinking_u(spec, s) < cfg.stop_u_floor) {
      reason = "u_floor";
      break;
    }
    StepInfo info;
    try {
      s = step(spec, s, cfg, &info);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::numeric && e.code() != ErrorCode::singular_state) throw;
      reason = "dt_underflow";
      break;
    }
    ++tr.steps;
    tr.min_dt = std::min(tr.min_dt, info.dt);
    const double mu = min_shrinking_u(spec, s);
    last_stored = false;
    if ((cfg.checkpoint_every && tr.steps % cfg.checkpoint_every == 0) || mu <= last_store_u * (1.0 - cfg.frame_u_drop)) {
      tr.frames.push_back(s);
      last_store_u = mu;
      last_stored = true;
    }
  }
  if (!last_stored) tr.frames.push_back(s);
  res.report = analyze_singularity(tr, cfg.stop_u_floor);
  res.report.stop_reason = reason;
  return res;
}

SingularityReport analyze_singularity(const Trajectory& tr, double stop_u_floor) {
  const WarpedProductSpec& spec = tr.spec;
  if (tr.frames.empty()) fail(ErrorCode::parameter, "empty trajectory");
  SingularityReport rep;
  rep.t_form = spec.t_form();
  const FlowState& last = tr.frames.back();

  // Ties in a/mu go to the fiber that is actually smallest at the end.
  const double tf = rep.t_form;
  std::size_t vs = spec.varsigma();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < spec.num_fibers(); ++a) {
    const auto& f = spec.fibers[a];
    if (f.mu <= 0.0 || std::abs(f.offset / f.mu - tf) > 1e-12 * tf) continue;
    const double m = min_warping(spec, last, a);
    if (m < best) {
      best = m;
      vs = a;
    }
  }
  rep.varsigma = vs;
  const auto& v0 = tr.frames.front().v[vs];
  rep.tail_offset = std::min(v0.front(), v0.back());
  rep.final_min_u = min_warping(spec, last, vs);
  rep.detected = rep.final_min_u < stop_u_floor;

  const std::size_t F = tr.frames.size();
  std::vector<double> ts, ms;
  for (const auto& f : tr.frames) {
    ts.push_back(f.t);
    ms.push_back(min_warping(spec, f, vs));
  }
  std::vector<std::size_t> fit;
  for (std::size_t k = 0; k < F; ++k)
    if (ms[k] <= 10.0 * rep.final_min_u) fit.push_back(k);
  if (fit.size() < 3) {
    fit.clear();
    for (std::size_t k = F >= 3 ? F - 3 : 0; k < F; ++k) fit.push_back(k);
  }
  rep.fit_points = fit.size();
  if (fit.size() >= 2) {
    double st = 0, sm = 0, stt = 0, stm = 0;
    for (std::size_t k : fit) {
      st += ts[k];
      sm += ms[k];
      stt += ts[k] * ts[k];
      stm += ts[k] * ms[k];
    }
    const double N = double(fit.size());
    const double den = N * stt - st * st;
    const double slope = den != 0.0 ? (N * stm - st * sm) / den : 0.0;
    const double icpt = (sm - slope * st) / N;
    rep.t_sing_est = slope < 0.0 ? -icpt / slope : std::numeric_limits<double>::infinity();
  } else {
    rep.t_sing_est = std::numeric_limits<double>::infinity();
  }

  if (std::isfinite(rep.t_sing_est)) {
    const double gap_last = rep.t_sing_est - last.t;
    double acc = 0.0;
    std::size_t cnt = 0;
    for (const auto& f : tr.frames) {
      const double gap = rep.t_sing_est - f.t;
      if (!(gap > 0.0) || gap > 10.0 * gap_last) continue;
      acc += riemann_sup_norm(spec, f) * gap;
      ++cnt;
    }
    rep.type_one_constant = cnt ? acc / double(cnt) : 0.0;
  }

  const RiemannField rf = riemann_field(spec, last);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = kStencilMargin; i + kStencilMargin < last.size(); ++i) {
    lo = std::min(lo, rf.pointwise[i]);
    hi = std::max(hi, rf.pointwise[i]);
  }
  rep.degenerate = hi - lo <= 1e-9 * hi;

  bool outer = true;
  const std::size_t first = F > 10 ? F - 10 : 0;
  for (std::size_t k = first; k < F; ++k) {
    const FlowState& f = tr.frames[k];
    const double hom = spec.homogeneous(vs, f.t);
    std::size_t arg = kStencilMargin;
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = kStencilMargin; i + kStencilMargin < f.size(); ++i) {
      const double u = hom + f.v[vs][i];
      if (u < m) {
        m = u;
        arg = i;
      }
    }
    outer = outer && in_outer_region(f, arg, 0.1);
  }
  rep.at_spatial_infinity = rep.detected && !rep.degenerate && outer;
  return rep;
}

}  // namespace warpflow
