#include "warpflow/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "warpflow/errors.hpp"
#include "warpflow/geometry.hpp"
#include "warpflow/soliton_ode.hpp"

namespace warpflow {

const char* to_string(BlowupMode m) noexcept {
  return m == BlowupMode::soliton_seeking ? "soliton_seeking" : "non_soliton";
}

namespace {

struct Locator {
  std::size_t k = 0;
  double w = 0.0;  // weight of k + 1
};

Locator locate(const std::vector<double>& x, double xq) {
  auto it = std::upper_bound(x.begin(), x.end(), xq);
  std::size_t k = it == x.begin() ? 0 : std::size_t(it - x.begin()) - 1;
  k = std::min(k, x.size() - 2);
  return {k, (xq - x[k]) / (x[k + 1] - x[k])};
}

double interp(const std::vector<double>& f, const Locator& l) { return (1.0 - l.w) * f[l.k] + l.w * f[l.k + 1]; }

double warping_at(const WarpedProductSpec& spec, const FlowState& f, std::size_t a, const Locator& l) {
  return spec.homogeneous(a, f.t) + interp(f.v[a], l);
}

// Point on the positive side where the decreasing profile crosses level.
bool crossing(const FlowState& f0, const std::vector<double>& prof, double level, double& xq) {
  const std::size_t n = prof.size();
  const std::size_t c = n / 2;
  const std::size_t last = n - 1 - kStencilMargin - 1;
  if (level > prof[c] || level < prof[last]) return false;
  for (std::size_t k = c; k < last; ++k) {
    if (prof[k] >= level && level >= prof[k + 1]) {
      const double w = prof[k] == prof[k + 1] ? 0.0 : (prof[k] - level) / (prof[k] - prof[k + 1]);
      xq = f0.x[k] + w * (f0.x[k + 1] - f0.x[k]);
      return true;
    }
  }
  return false;
}

}  // namespace

double closed_form_ratio(double eta, double c2) { return (1.0 + c2 * eta) / (1.0 + c2); }

BlowupSequence build_sequence(const Trajectory& tr, double T, BlowupMode mode, const BlowupParams& p) {
  const auto& spec = tr.spec;
  if (tr.frames.size() < 2) fail(ErrorCode::parameter, "trajectory too short");
  if (p.fiber >= spec.num_fibers()) fail(ErrorCode::parameter, "blowup fiber out of range");
  if (!std::isfinite(T) || !(T > tr.frames.front().t)) fail(ErrorCode::parameter, "singular time must be finite");
  const FlowState& f0 = tr.frames.front();
  const auto& delta = f0.v[p.fiber];
  const std::size_t A = spec.num_fibers();

  BlowupSequence seq;
  seq.mode = mode;
  seq.T = T;
  std::vector<std::size_t> used;
  std::size_t order = 0;
  for (double gap : p.gaps) {
    std::size_t best = tr.frames.size();
    double err = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < tr.frames.size(); ++k) {
      const double g = T - tr.frames[k].t;
      if (!(g > 0.0)) continue;
      const double e = std::abs(std::log(g / gap));
      if (e < err) {
        err = e;
        best = k;
      }
    }
    const double c = mode == BlowupMode::non_soliton ? p.target_c : p.soliton_c0 * std::pow(p.soliton_decay, double(order));
    ++order;
    if (best == tr.frames.size() || std::find(used.begin(), used.end(), best) != used.end() || err > std::log(2.0)) {
      ++seq.skipped;
      continue;
    }
    const FlowState& f = tr.frames[best];
    const double a_t = spec.homogeneous(p.fiber, f.t);
    double xq = 0.0;
    if (!(a_t > 0.0) || !crossing(f0, delta, c * a_t, xq)) {
      ++seq.skipped;
      continue;
    }
    used.push_back(best);
    BlowupPoint pt;
    pt.frame = best;
    pt.x = xq;
    pt.t = f.t;
    pt.lambda = 1.0 / (T - f.t);
    pt.target_c = c;
    const Locator l = locate(f.x, xq);
    pt.r = interp(tr.radius, l);
    for (std::size_t a = 0; a < A; ++a) pt.c_achieved.push_back(interp(f0.v[a], l) / spec.homogeneous(a, f.t));
    const RiemannField rf = riemann_field(spec, f);
    pt.certificate = interp(rf.pointwise, l) * (T - f.t);
    seq.points.push_back(pt);
    seq.target_c.push_back(c);
  }
  if (seq.points.size() < p.min_usable)
    fail(ErrorCode::feasibility, std::string(to_string(mode)) + ": only " + std::to_string(seq.points.size()) +
                                     " feasible points; the domain is too small for the requested targets");
  seq.min_certificate = std::numeric_limits<double>::infinity();
  for (const auto& pt : seq.points) {
    seq.max_lambda_gap = std::max(seq.max_lambda_gap, pt.lambda * (T - pt.t));
    seq.min_certificate = std::min(seq.min_certificate, pt.certificate);
  }
  if (A >= 2) {
    const auto& last = seq.points.back();
    const Locator l = locate(f0.x, last.x);
    const std::size_t other = p.fiber == 0 ? 1 : 0;
    seq.eta = interp(f0.v[other], l) / interp(delta, l);
  }
  return seq;
}

LimitEstimate tail_limit(const std::vector<double>& series) {
  if (series.empty()) fail(ErrorCode::inconclusive, "sequence too short");
  LimitEstimate e;
  e.series = series;
  const std::size_t k = std::min<std::size_t>(3, series.size());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, acc = 0.0;
  for (std::size_t i = series.size() - k; i < series.size(); ++i) {
    acc += series[i];
    lo = std::min(lo, series[i]);
    hi = std::max(hi, series[i]);
  }
  e.value = acc / double(k);
  e.spread = hi - lo;
  return e;
}

LimitEstimate limit_ratio(const BlowupSequence& seq, const Trajectory& tr, std::size_t a, std::size_t b) {
  if (a >= tr.spec.num_fibers() || b >= tr.spec.num_fibers()) fail(ErrorCode::parameter, "limit_ratio needs two fibers");
  if (seq.points.size() < 3) fail(ErrorCode::inconclusive, "sequence too short");
  std::vector<double> series;
  for (const auto& pt : seq.points) {
    const FlowState& f = tr.frames[pt.frame];
    const Locator l = locate(f.x, pt.x);
    series.push_back(warping_at(tr.spec, f, a, l) / warping_at(tr.spec, f, b, l));
  }
  return tail_limit(series);
}

SolitonVerdict soliton_criterion(const BlowupSequence& seq, const Trajectory& tr, double tolerance) {
  if (seq.points.size() < 3) fail(ErrorCode::inconclusive, "sequence too short");
  std::vector<double> series, u1, u2;
  for (const auto& pt : seq.points) {
    const FlowState& f = tr.frames[pt.frame];
    const RiemannField rf = riemann_field(tr.spec, f);
    const Locator l = locate(f.x, pt.x);
    series.push_back(interp(rf.pointwise, l) / rf.sup);
    if (tr.spec.num_fibers() >= 2) {
      u1.push_back(pt.lambda * warping_at(tr.spec, f, 0, l));
      u2.push_back(pt.lambda * warping_at(tr.spec, f, 1, l));
    }
  }
  SolitonVerdict v;
  v.ratio = tail_limit(series);
  v.is_soliton_limit = std::abs(v.ratio.value - 1.0) <= tolerance;
  if (!u1.empty()) {
    const auto& sp = tr.spec.fibers;
    const bool constant_soliton =
        classify_blowup_limit(tail_limit(u1).value, tail_limit(u2).value, sp[0].dim, sp[1].dim, tolerance);
    v.consistent_with_ratio = constant_soliton == v.is_soliton_limit;
  } else {
    v.consistent_with_ratio = true;
  }
  return v;
}

RescaledFrame rescale(const BlowupSequence& seq, const Trajectory& tr, std::size_t j, double window, std::size_t samples) {
  if (j >= seq.points.size()) fail(ErrorCode::parameter, "sequence index out of range");
  if (samples < 2 || !(window > 0.0)) fail(ErrorCode::parameter, "bad rescaling window");
  const BlowupPoint& pt = seq.points[j];
  const FlowState& f = tr.frames[pt.frame];
  const std::size_t n = f.size(), A = tr.spec.num_fibers();

  // Arclength along the base at t_j.
  std::vector<double> s(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) s[i] = s[i - 1] + 0.5 * (f.phi[i] + f.phi[i - 1]) * (f.x[i] - f.x[i - 1]);
  const double sj = interp(s, locate(f.x, pt.x));
  const double scale = 1.0 / std::sqrt(pt.lambda);
  const double smin = s[kStencilMargin], smax = s[n - 1 - kStencilMargin];

  RescaledFrame out;
  out.tau = pt.lambda * (pt.t - seq.T);
  out.u.assign(A, {});
  for (std::size_t k = 0; k < samples; ++k) {
    const double y = -window + 2.0 * window * double(k) / double(samples - 1);
    const double sq = sj + y * scale;
    if (sq < smin || sq > smax) fail(ErrorCode::truncation, "rescaling window leaves the domain");
    const Locator ls = locate(s, sq);
    const double xq = interp(f.x, ls);
    const Locator lx = locate(f.x, xq);
    out.y.push_back(y);
    for (std::size_t a = 0; a < A; ++a) {
      const double u = pt.lambda * warping_at(tr.spec, f, a, lx);
      if (!(u > 0.0)) fail(ErrorCode::singular_state, "rescaled warping is not positive");
      out.u[a].push_back(u);
    }
  }
  for (const auto& ua : out.u) {
    const auto [lo, hi] = std::minmax_element(ua.begin(), ua.end());
    double mean = 0.0;
    for (double u : ua) mean += u;
    mean /= double(ua.size());
    out.oscillation = std::max(out.oscillation, (*hi - *lo) / mean);
  }
  return out;
}

}  // namespace warpflow
