#include "warpflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "warpflow/errors.hpp"
#include "warpflow/geometry.hpp"

namespace warpflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Fields {
  std::vector<std::vector<double>> u, vs, vss, gamma, chi;
};

// First and second arclength derivatives of every v on [1, n-2].
Fields fields_of(const WarpedProductSpec& spec, const FlowState& s) {
  const std::size_t n = s.size(), A = spec.num_fibers();
  Fields f;
  for (auto* a : {&f.u, &f.vs, &f.vss, &f.gamma, &f.chi}) a->assign(A, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < A; ++a) {
    const double hom = spec.homogeneous(a, s.t);
    for (std::size_t i = 0; i < n; ++i) f.u[a][i] = hom + s.v[a][i];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (!(f.u[a][i] > 0.0)) fail(ErrorCode::singular_state, "u <= 0 at index " + std::to_string(i));
      const Derivs d = arclength_derivatives_unchecked(s, s.v[a].data(), i);
      if (!std::isfinite(d.d_ds) || !std::isfinite(d.d2_ds2)) fail(ErrorCode::numeric, "non-finite derivative");
      f.vs[a][i] = d.d_ds;
      f.vss[a][i] = d.d2_ds2;
      f.gamma[a][i] = d.d_ds * d.d_ds;
      f.chi[a][i] = d.d2_ds2 * d.d2_ds2;
    }
  }
  return f;
}

double lap_at(const WarpedProductSpec& spec, const Fields& f, const FlowState& s, const double* field, std::size_t i,
              Derivs* out = nullptr) {
  const Derivs d = arclength_derivatives_unchecked(s, field, i);
  double lap = d.d2_ds2;
  for (std::size_t b = 0; b < spec.num_fibers(); ++b) lap += 0.5 * spec.fibers[b].dim * f.vs[b][i] / f.u[b][i] * d.d_ds;
  if (out) *out = d;
  return lap;
}

}  // namespace

DiagnosticsFrame compute_frame(const WarpedProductSpec& spec, const FlowState& s, const std::vector<ControlFunction>& gs) {
  validate_state(spec, s);
  if (!gs.empty() && gs.size() != spec.num_fibers()) fail(ErrorCode::parameter, "need one control function per fiber");
  const std::size_t n = s.size(), A = spec.num_fibers();
  const Fields f = fields_of(spec, s);
  DiagnosticsFrame d;
  d.t = s.t;
  d.gamma.assign(A, std::vector<double>(n, 0.0));
  d.chi.assign(A, std::vector<double>(n, 0.0));
  d.rho.assign(n, 0.0);
  d.L.assign(n, 0.0);
  d.sup_gamma.assign(A, 0.0);
  d.sup_chi.assign(A, 0.0);
  if (!gs.empty()) d.E.assign(A, std::vector<double>(n, 0.0));
  for (std::size_t i = kStencilMargin; i + kStencilMargin < n; ++i) {
    d.rho[i] = rho(spec, s, i);
    double L = std::sqrt(d.rho[i]);
    for (std::size_t a = 0; a < A; ++a) {
      d.gamma[a][i] = f.gamma[a][i];
      d.chi[a][i] = f.chi[a][i];
      d.sup_gamma[a] = std::max(d.sup_gamma[a], f.gamma[a][i]);
      d.sup_chi[a] = std::max(d.sup_chi[a], f.chi[a][i]);
      const double u = f.u[a][i];
      L += f.gamma[a][i] / (u * u) + std::sqrt(f.chi[a][i]) / u;
      if (!gs.empty() && s.v[a][i] > gs[a].domain_floor()) d.E[a][i] = E_of(gs[a], s.v[a][i]);
    }
    d.L[i] = L;
  }
  const RiemannField rf = riemann_field(spec, s);
  d.rm_pointwise = rf.pointwise;
  d.rm_sup = rf.sup;
  d.rm_argmax = rf.argmax;
  d.min_u_varsigma = min_warping(spec, s, spec.varsigma());
  return d;
}

std::vector<double> heat_residual(std::span<const double> f_prev, std::span<const double> f_mid,
                                  std::span<const double> f_next, const WarpedProductSpec& spec,
                                  const FlowState& state_mid, double dt) {
  const std::size_t n = state_mid.size();
  if (f_prev.size() != n || f_mid.size() != n || f_next.size() != n) fail(ErrorCode::alignment, "frame lengths differ");
  if (!(dt > 0.0)) fail(ErrorCode::alignment, "dt must be positive");
  const Fields f = fields_of(spec, state_mid);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = kStencilMargin; i + kStencilMargin < n; ++i)
    out[i] = (f_next[i] - f_prev[i]) / (2.0 * dt) - lap_at(spec, f, state_mid, f_mid.data(), i);
  return out;
}

Window build_window(const WarpedProductSpec& spec, const FlowState& s, double dt, BoundaryMode bc) {
  Window w;
  w.dt = dt;
  w.frames[0] = s;
  StepInfo info;
  for (int k = 1; k < 3; ++k) {
    w.frames[k] = step_fixed(spec, w.frames[k - 1], dt, bc, 0, &info);
    // step_fixed halves on rejection; a window needs the exact spacing.
    if (info.dt != dt) fail(ErrorCode::alignment, "window step was rejected");
  }
  // Times taken from the first frame so both gaps are exactly dt.
  w.frames[1].t = s.t + dt;
  w.frames[2].t = s.t + 2.0 * dt;
  return w;
}

void check_window(const Window& w) {
  const auto& f = w.frames;
  const std::size_t n = f[0].size();
  for (const auto& fr : f)
    if (fr.size() != n || fr.x != f[0].x) fail(ErrorCode::alignment, "window frames use different grids");
  const double d1 = f[1].t - f[0].t, d2 = f[2].t - f[1].t;
  if (!(w.dt > 0.0) || std::abs(d1 - w.dt) > 1e-9 * w.dt || std::abs(d2 - w.dt) > 1e-9 * w.dt)
    fail(ErrorCode::alignment, "window frames are not uniformly spaced in time");
}

std::vector<double> gamma_identity_residual(const WarpedProductSpec& spec, const Window& w, std::size_t a) {
  check_window(w);
  const std::size_t n = w.frames[1].size();
  const Fields fp = fields_of(spec, w.frames[0]);
  const Fields fm = fields_of(spec, w.frames[1]);
  const Fields fn = fields_of(spec, w.frames[2]);
  const FlowState& s = w.frames[1];
  std::vector<double> res(n, 0.0);
  for (std::size_t i = kStencilMargin; i + kStencilMargin < n; ++i) {
    Derivs dg;
    const double lhs = (fn.gamma[a][i] - fp.gamma[a][i]) / (2.0 * w.dt) - lap_at(spec, fm, s, fm.gamma[a].data(), i, &dg);
    const double u = fm.u[a][i], vs = fm.vs[a][i], g = fm.gamma[a][i];
    double hess = fm.vss[a][i] * fm.vss[a][i];
    for (std::size_t b = 0; b < spec.num_fibers(); ++b) {
      const double blk = 0.5 * fm.vs[b][i] * vs / fm.u[b][i];
      hess += spec.fibers[b].dim * blk * blk;
    }
    const double rhs = -2.0 * hess - 2.0 * dg.d_ds * vs / u + 2.0 * g * g / (u * u);
    res[i] = lhs - rhs;
  }
  return res;
}

ResidualReport check_gamma_identity(const WarpedProductSpec& spec, const Window& w) {
  check_window(w);
  ResidualReport r;
  r.grid_h = w.frames[1].spacing();
  r.dt_used = w.dt;
  const Fields fm = fields_of(spec, w.frames[1]);
  const std::size_t n = w.frames[1].size();
  for (std::size_t a = 0; a < spec.num_fibers(); ++a) {
    const auto res = gamma_identity_residual(spec, w, a);
    for (std::size_t i = kStencilMargin; i + kStencilMargin < n; ++i) {
      r.identity_gamma_residual = std::max(r.identity_gamma_residual, std::abs(res[i]));
      const Derivs dg = arclength_derivatives_unchecked(w.frames[1], fm.gamma[a].data(), i);
      const double lhs = dg.d_ds * fm.vs[a][i];
      const double rhs = 2.0 * fm.vss[a][i] * fm.gamma[a][i];
      r.identity_gradient_form = std::max(r.identity_gradient_form, std::abs(lhs - rhs));
    }
  }
  return r;
}

ResidualReport check_evolution_inequalities(const WarpedProductSpec& spec, const Window& w) {
  check_window(w);
  ResidualReport r = check_gamma_identity(spec, w);
  const FlowState& s = w.frames[1];
  const std::size_t n = s.size(), A = spec.num_fibers();
  const Fields fp = fields_of(spec, w.frames[0]);
  const Fields fm = fields_of(spec, s);
  const Fields fn = fields_of(spec, w.frames[2]);
  const double N = spec.total_fiber_dim();

  double gmin = kInf, gmin4 = kInf, cfit = 0.0, hfit = 0.0;
  std::size_t gargmin = 0;
  // Cached per-point pieces for the chi margin once C_N is known.
  struct ChiPoint {
    double lhs_plus_grad, load;
  };
  std::vector<ChiPoint> chi_points, hess_points;

  for (std::size_t a = 0; a < A; ++a) {
    std::vector<double> w_s(n, 0.0);  // third derivative of v via the Hessian array
    for (std::size_t i = kStencilMargin; i + kStencilMargin < n; ++i)
      w_s[i] = arclength_derivatives_unchecked(s, fm.vss[a].data(), i).d_ds;

    for (std::size_t i = kStencilMargin; i + kStencilMargin < n; ++i) {
      const double u = fm.u[a][i], vs = fm.vs[a][i], vss = fm.vss[a][i];
      const double g = fm.gamma[a][i], chi = fm.chi[a][i];

      double L = 0.0, sum_gu = 0.0, sum_q2 = 0.0;
      for (std::size_t b = 0; b < A; ++b) {
        const double ub = fm.u[b][i];
        L += fm.gamma[b][i] / (ub * ub) + std::sqrt(fm.chi[b][i]) / ub;
        sum_gu += fm.gamma[b][i] / (ub * ub);
        const double q = fm.vs[b][i] / ub;
        sum_q2 += q * q;
      }

      if (g > kGammaCutoff) {
        Derivs dg;
        const double lhs = (fn.gamma[a][i] - fp.gamma[a][i]) / (2.0 * w.dt) - lap_at(spec, fm, s, fm.gamma[a].data(), i, &dg);
        const double grad = dg.d_ds * dg.d_ds / g;
        const double m2 = -0.5 * grad + 6.0 * g * g / (u * u) - lhs;
        const double m4 = -0.25 * grad + 6.0 * g * g / (u * u) - lhs;
        if (m2 < gmin) {
          gmin = m2;
          gargmin = i;
        }
        gmin4 = std::min(gmin4, m4);
      }

      const double lhs_chi = (fn.chi[a][i] - fp.chi[a][i]) / (2.0 * w.dt) - lap_at(spec, fm, s, fm.chi[a].data(), i);
      if (chi > kGammaCutoff) {
        // chi = v_ss^2 on a line, so |grad chi|^2 / chi = 4 v_sss^2 exactly; differencing chi
        // and dividing would amplify the O(h^2) stencil error near zeros of v_ss.
        const double excess = lhs_chi + 2.0 * w_s[i] * w_s[i];
        const double load = L * chi + L * sum_gu * g;
        chi_points.push_back({excess, load});
        if (excess > 0.0) cfit = std::max(cfit, load > 0.0 ? excess / load : kInf);
      }

      // Explicit part of the Hessian evolution bound; Rm_B vanishes on a line.
      const Derivs dg = arclength_derivatives_unchecked(s, fm.gamma[a].data(), i);
      const double explicit_terms = -2.0 * w_s[i] * w_s[i] + 2.0 * g * chi / (u * u) -
                                    2.0 * vs * dg.d_ds * g / (u * u * u) + 4.0 * vss * vs * dg.d_ds / (u * u) -
                                    2.0 * vss * dg.d2_ds2 / u + N * g / (u * u) * (-chi + 0.25 * vs * dg.d_ds / u);
      double hess_full = vss * vss;
      for (std::size_t b = 0; b < A; ++b) {
        const double blk = 0.5 * fm.vs[b][i] * vs / fm.u[b][i];
        hess_full += spec.fibers[b].dim * blk * blk;
      }
      const double weight = sum_q2 * std::sqrt(hess_full) * std::abs(vss);
      hess_points.push_back({lhs_chi - explicit_terms, weight});
    }
  }

  r.ineq_gamma_margin = std::isfinite(gmin) ? gmin : 0.0;
  r.ineq_gamma_margin_quarter = std::isfinite(gmin4) ? gmin4 : 0.0;
  r.argmin_gamma_margin = gargmin;
  r.fitted_C_N_chi = cfit;
  // The weight vanishes at critical points of v and at zeros of v_ss, where the ratio is
  // 0/0 up to stencil error; fit only where the weight is a fair share of its sup.
  double wmax = 0.0;
  for (const auto& p : hess_points) wmax = std::max(wmax, p.load);
  for (const auto& p : hess_points)
    if (p.load > kHessianWeightShare * wmax && p.lhs_plus_grad > 0.0) hfit = std::max(hfit, p.lhs_plus_grad / p.load);
  r.fitted_C_hessian = hfit;
  double cm = kInf;
  for (const auto& p : chi_points) cm = std::min(cm, cfit * p.load - p.lhs_plus_grad);
  r.ineq_chi_margin = std::isfinite(cm) ? cm : 0.0;

  // rho vanishes identically, so both sides of its inequality are zero.
  std::vector<double> rp(n, 0.0), rm(n, 0.0), rn(n, 0.0);
  for (std::size_t i = kStencilMargin; i + kStencilMargin < n; ++i) {
    rp[i] = rho(spec, w.frames[0], i);
    rm[i] = rho(spec, s, i);
    rn[i] = rho(spec, w.frames[2], i);
  }
  const auto hr = heat_residual(rp, rm, rn, spec, s, w.dt);
  double rmin = kInf;
  for (std::size_t i = kStencilMargin; i + kStencilMargin < n; ++i) {
    r.rho_lhs_sup = std::max(r.rho_lhs_sup, std::abs(hr[i]));
    rmin = std::min(rmin, 0.0 - hr[i]);
  }
  r.ineq_rho_margin = std::isfinite(rmin) ? rmin : 0.0;
  return r;
}

void write_diagnostics_csv(const std::string& path, const Trajectory& tr, double t_sing,
                           const std::vector<ControlFunction>& gs) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write " + path);
  const std::size_t A = tr.spec.num_fibers();
  out << "t";
  for (std::size_t a = 0; a < A; ++a) out << ",sup_gamma_" << a;
  for (std::size_t a = 0; a < A; ++a) out << ",sup_chi_" << a;
  out << ",rm_sup,min_u_varsigma,type_one_product\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    out << buf;
  };
  for (const auto& f : tr.frames) {
    const DiagnosticsFrame d = compute_frame(tr.spec, f, gs);
    std::snprintf(buf, sizeof buf, "%.17g", f.t);
    out << buf;
    for (double g : d.sup_gamma) put(g);
    for (double c : d.sup_chi) put(c);
    put(d.rm_sup);
    put(d.min_u_varsigma);
    put(std::isfinite(t_sing) ? d.rm_sup * (t_sing - f.t) : std::nan(""));
    out << '\n';
  }
}

}  // namespace warpflow
