#include "warpflow/theorem_verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "warpflow/errors.hpp"
#include "warpflow/geometry.hpp"

namespace warpflow {

namespace {

double default_end(const Trajectory& tr, double t_end) { return t_end > 0.0 ? t_end : 0.9 * tr.spec.t_form(); }

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t k = 0; k < idx.size();) {
    std::size_t j = k;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[k]]) ++j;
    const double avg = 0.5 * double(k + j);
    for (std::size_t m = k; m <= j; ++m) r[idx[m]] = avg;
    k = j + 1;
  }
  return r;
}

}  // namespace

double spearman_rho(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) fail(ErrorCode::parameter, "spearman needs two equal series of length >= 2");
  const auto ra = ranks(a), rb = ranks(b);
  const double n = double(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return saa > 0 && sbb > 0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

TheoremEstimates measure_uniform_equivalence(const Trajectory& tr, double t_end) {
  if (tr.frames.empty()) fail(ErrorCode::parameter, "empty trajectory");
  const double te = default_end(tr, t_end);
  const FlowState& f0 = tr.frames.front();
  const std::size_t n = f0.size(), A = tr.spec.num_fibers();
  TheoremEstimates est;
  est.window_end = te;
  est.equiv_ratio_field.assign(A, std::vector<double>(n, 1.0));
  est.asymptotic_correction.assign(A, std::vector<double>(n, 0.0));
  est.phi_correction.assign(n, 0.0);
  for (const auto& f : tr.frames) {
    if (f.t > te * (1.0 + 1e-12)) continue;
    ++est.frames_used;
    for (std::size_t a = 0; a < A; ++a)
      for (std::size_t i = 0; i < n; ++i) {
        const double v0 = f0.v[a][i], v = f.v[a][i];
        if (v0 == v) continue;
        const double r = (v0 > 0.0 && v > 0.0) ? std::max(v / v0, v0 / v) : std::numeric_limits<double>::infinity();
        est.equiv_ratio_field[a][i] = std::max(est.equiv_ratio_field[a][i], r);
        if (v0 > 0.0) est.asymptotic_correction[a][i] = std::max(est.asymptotic_correction[a][i], std::abs(v / v0 - 1.0));
      }
    for (std::size_t i = 0; i < n; ++i)
      est.phi_correction[i] = std::max(est.phi_correction[i], std::abs(f.phi[i] / f0.phi[i] - 1.0));
  }
  est.c_star_measured = 1.0;
  for (const auto& row : est.equiv_ratio_field)
    for (double r : row) est.c_star_measured = std::max(est.c_star_measured, r);
  return est;
}

TailTrend tail_trend(const Trajectory& tr, const std::vector<double>& field, std::size_t bins) {
  if (tr.frames.empty() || field.size() != tr.frames.front().size()) fail(ErrorCode::parameter, "field does not match grid");
  if (bins < 2) fail(ErrorCode::parameter, "need at least two bins");
  const FlowState& f0 = tr.frames.front();
  const double lo = f0.x.front(), hi = f0.x.back();
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  std::vector<double> vmax(bins, -std::numeric_limits<double>::infinity()), rsum(bins, 0.0);
  std::vector<std::size_t> cnt(bins, 0);
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double d = std::abs(f0.x[i] - mid) / half;
    if (d < 0.5) continue;
    const std::size_t b = std::min(bins - 1, std::size_t((d - 0.5) / 0.5 * double(bins)));
    vmax[b] = std::max(vmax[b], field[i]);
    rsum[b] += std::abs(tr.radius[i]);
    ++cnt[b];
  }
  TailTrend t;
  for (std::size_t b = 0; b < bins; ++b) {
    if (!cnt[b]) continue;
    t.bin_center.push_back(rsum[b] / double(cnt[b]));
    t.bin_value.push_back(vmax[b]);
  }
  if (t.bin_value.size() < 2) fail(ErrorCode::parameter, "too few points in the outer half for a trend");
  t.spearman = spearman_rho(t.bin_center, t.bin_value);
  t.strictly_decreasing = true;
  for (std::size_t k = 1; k < t.bin_value.size(); ++k)
    if (!(t.bin_value[k] < t.bin_value[k - 1])) t.strictly_decreasing = false;
  return t;
}

MainEstimates measure_main_estimates(const Trajectory& tr, const std::vector<ControlFunction>& gs, double c_init,
                                     double t_end) {
  if (tr.frames.empty()) fail(ErrorCode::parameter, "empty trajectory");
  const std::size_t A = tr.spec.num_fibers();
  if (gs.size() != A) fail(ErrorCode::parameter, "need one control function per fiber");
  if (!(c_init > 0.0)) fail(ErrorCode::parameter, "c_init must be positive");
  MainEstimates m;
  m.c_init = c_init;
  m.window_end = default_end(tr, t_end);
  m.c_star_gamma.assign(A, 0.0);
  m.c_star_chi.assign(A, 0.0);
  std::vector<double> args(A);
  for (const auto& f : tr.frames) {
    if (f.t > m.window_end * (1.0 + 1e-12) || !(f.t > 0.0)) continue;
    const std::size_t n = f.size();
    for (std::size_t i = kStencilMargin; i + kStencilMargin < n; ++i) {
      bool pos = true;
      for (std::size_t a = 0; a < A; ++a) {
        args[a] = f.v[a][i];
        pos = pos && args[a] > 0.0;
      }
      if (!pos) continue;
      for (std::size_t a = 0; a < A; ++a) {
        const Derivs d = arclength_derivatives_unchecked(f, f.v[a].data(), i);
        const double G = gs[a].value(args[a]);
        const double E = G / (args[a] * args[a]);
        const double need_g = (d.d_ds * d.d_ds / (c_init * G) - 1.0) / (f.t * E);
        m.c_star_gamma[a] = std::max(m.c_star_gamma[a], need_g);
        const double H = H_vector(gs, a, args);
        const double need_c = (d.d2_ds2 * d.d2_ds2 / (c_init * H) - 1.0) / f.t;
        m.c_star_chi[a] = std::max(m.c_star_chi[a], need_c);
      }
      // rho = 0 on a line, so any C_* works for the rho bound.
    }
  }
  return m;
}

ShrinkVerdict verify_corollary_shrink(const SingularityReport& rep, const Trajectory& tr) {
  ShrinkVerdict v;
  v.t_form = rep.t_form;
  v.t_sing_est = rep.t_sing_est;
  v.degenerate = rep.degenerate;
  v.at_spatial_infinity = rep.at_spatial_infinity;
  v.type_one_constant = rep.type_one_constant;
  const auto& fib = tr.spec.fibers[rep.varsigma];
  v.type_one_expected = fib.kappa();
  if (!rep.detected || !std::isfinite(rep.t_sing_est) || tr.frames.empty()) {
    v.note = "no singularity detected";
    return v;
  }
  v.conclusive = true;
  v.rel_error_t = std::abs(rep.t_sing_est - rep.t_form) / rep.t_form;
  v.type_one_rel_error = v.type_one_expected > 0.0 ? std::abs(rep.type_one_constant - v.type_one_expected) / v.type_one_expected
                                                   : std::numeric_limits<double>::infinity();
  const FlowState& last = tr.frames.back();
  const RiemannField rf = riemann_field(tr.spec, last);
  v.argmax_rm_outer = in_outer_region(last, rf.argmax, 0.1);

  auto inner_sup = [&](const FlowState& f) {
    const RiemannField r = riemann_field(tr.spec, f);
    double m = 0.0;
    for (std::size_t i = kStencilMargin; i + kStencilMargin < f.size(); ++i)
      if (!in_outer_region(f, i, 0.75)) m = std::max(m, r.pointwise[i]);
    return m;
  };
  const double first = inner_sup(tr.frames.front()), end = inner_sup(last);
  v.inner_rm_growth = first > 0.0 ? end / first : 0.0;
  // A compact core that is not itself blowing up at the Type-I rate.
  const double gap = rep.t_sing_est - last.t;
  v.compact_regular = gap > 0.0 && end * gap <= 0.1 * std::max(rep.type_one_constant, 1e-300);
  if (v.degenerate) v.note = "|Rm| is spatially constant; the location of the singularity is undefined";
  else if (!v.at_spatial_infinity) v.note = "singularity at a finite point";
  return v;
}

StabilityReport verify_cylinder_stability(const Trajectory& tr, double tail_delta) {
  if (tr.frames.empty()) fail(ErrorCode::parameter, "empty trajectory");
  if (tr.spec.num_fibers() != 1) fail(ErrorCode::parameter, "stability check expects one fiber");
  const FlowState& f0 = tr.frames.front();
  const std::size_t n = f0.size();
  StabilityReport s;
  s.stability_sup.assign(n, 0.0);
  s.ratio.assign(n, 0.0);
  for (const auto& f : tr.frames)
    for (std::size_t i = 0; i < n; ++i) s.stability_sup[i] = std::max(s.stability_sup[i], std::abs(f.v[0][i]));
  s.lower = std::numeric_limits<double>::infinity();
  s.upper = 0.0;
  s.tail_min = std::numeric_limits<double>::infinity();
  s.tail_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = f0.v[0][i];
    if (!(d > 0.0)) continue;
    const double r = s.stability_sup[i] / d;
    s.ratio[i] = r;
    s.lower = std::min(s.lower, r);
    s.upper = std::max(s.upper, r);
    if (d < tail_delta) {
      ++s.tail_points;
      s.tail_min = std::min(s.tail_min, r);
      s.tail_max = std::max(s.tail_max, r);
    }
  }
  if (!std::isfinite(s.lower)) {
    s.lower = s.upper = 1.0;
  }
  s.fitted_C = std::max(s.upper, 1.0 / s.lower);
  return s;
}

}  // namespace warpflow
