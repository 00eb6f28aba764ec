#include "warpflow/soliton_ode.hpp"

#include <algorithm>
#include <cmath>

#include "warpflow/errors.hpp"

namespace warpflow {

void SolitonParams::validate() const {
  if (p1 < 2 || p2 < 2) fail(ErrorCode::parameter, "soliton dimensions must be >= 2");
  if (!(lambda < 0.0)) fail(ErrorCode::parameter, "lambda must be negative");
  const std::size_t n = y.size();
  for (const auto* v : {&f, &f_y, &phi1, &phi1_y, &phi1_yy, &phi2, &phi2_y, &phi2_yy})
    if (v->size() != n) fail(ErrorCode::parameter, "profile arrays differ in length");
}

std::array<double, 3> ode_residual(const SolitonParams& p, std::size_t i) {
  if (i >= p.y.size()) fail(ErrorCode::parameter, "profile index out of range");
  const double a = p.phi1[i], b = p.phi2[i];
  if (!(a > 0.0) || !(b > 0.0)) fail(ErrorCode::domain, "phi must be positive");
  const double a1 = p.phi1_y[i], b1 = p.phi2_y[i];
  const double qa = p.phi1_yy[i] / a, qb = p.phi2_yy[i] / b;
  const double f = p.f[i], lam = p.lambda;
  const double cross = a1 * b1 / (a * b);
  const double rf = p.f_y[i] - (p.p1 * qa + p.p2 * qb - lam);
  const double r1 = qa - ((p.p1 - 1) * (1.0 - a1 * a1) / (a * a) - p.p2 * cross + a1 / a * f + lam);
  const double r2 = qb - ((p.p2 - 1) * (1.0 - b1 * b1) / (b * b) - p.p1 * cross + b1 / b * f + lam);
  return {rf, r1, r2};
}

SolitonParams constant_solution(int p1, int p2, double lambda, const std::vector<double>& y) {
  SolitonParams p;
  p.p1 = p1;
  p.p2 = p2;
  p.lambda = lambda;
  p.y = y;
  const std::size_t n = y.size();
  const double a = std::sqrt((p1 - 1) / -lambda), b = std::sqrt((p2 - 1) / -lambda);
  p.f.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.f[i] = -lambda * y[i];
  p.f_y.assign(n, -lambda);
  p.phi1.assign(n, a);
  p.phi2.assign(n, b);
  p.phi1_y.assign(n, 0.0);
  p.phi1_yy.assign(n, 0.0);
  p.phi2_y.assign(n, 0.0);
  p.phi2_yy.assign(n, 0.0);
  p.validate();
  return p;
}

namespace {

using State = std::array<double, 5>;  // f, phi1, phi1', phi2, phi2'

struct Accel {
  double a2, b2, fy;
};

Accel accel(const IvpStart& c, const State& s) {
  const double f = s[0], a = s[1], a1 = s[2], b = s[3], b1 = s[4];
  const double cross = a1 * b1 / (a * b);
  const double qa = (c.p1 - 1) * (1.0 - a1 * a1) / (a * a) - c.p2 * cross + a1 / a * f + c.lambda;
  const double qb = (c.p2 - 1) * (1.0 - b1 * b1) / (b * b) - c.p1 * cross + b1 / b * f + c.lambda;
  return {qa * a, qb * b, c.p1 * qa + c.p2 * qb - c.lambda};
}

State deriv(const IvpStart& c, const State& s) {
  const Accel q = accel(c, s);
  return {q.fy, s[2], q.a2, s[4], q.b2};
}

State axpy(const State& s, const State& k, double h) {
  State o;
  for (std::size_t i = 0; i < 5; ++i) o[i] = s[i] + h * k[i];
  return o;
}

void push(SolitonParams& p, const IvpStart& c, double y, const State& s) {
  const Accel q = accel(c, s);
  p.y.push_back(y);
  p.f.push_back(s[0]);
  p.f_y.push_back(q.fy);
  p.phi1.push_back(s[1]);
  p.phi1_y.push_back(s[2]);
  p.phi1_yy.push_back(q.a2);
  p.phi2.push_back(s[3]);
  p.phi2_y.push_back(s[4]);
  p.phi2_yy.push_back(q.b2);
}

}  // namespace

IvpResult integrate_ivp(const IvpStart& c, double span, double dy) {
  if (c.p1 < 2 || c.p2 < 2) fail(ErrorCode::parameter, "soliton dimensions must be >= 2");
  if (!(c.lambda < 0.0)) fail(ErrorCode::parameter, "lambda must be negative");
  if (!(c.phi1 > 0.0) || !(c.phi2 > 0.0)) fail(ErrorCode::domain, "initial phi must be positive");
  if (!(dy > 0.0) || !(span > 0.0)) fail(ErrorCode::parameter, "span and dy must be positive");
  IvpResult r;
  r.profile.p1 = c.p1;
  r.profile.p2 = c.p2;
  r.profile.lambda = c.lambda;
  State s{c.f0, c.phi1, c.dphi1, c.phi2, c.dphi2};
  double y = c.y0;
  push(r.profile, c, y, s);
  const std::size_t steps = std::size_t(std::llround(span / dy));
  std::vector<double> ly, ld;
  for (std::size_t k = 0; k < steps; ++k) {
    const State k1 = deriv(c, s);
    const State k2 = deriv(c, axpy(s, k1, 0.5 * dy));
    const State k3 = deriv(c, axpy(s, k2, 0.5 * dy));
    const State k4 = deriv(c, axpy(s, k3, dy));
    State nxt;
    for (std::size_t i = 0; i < 5; ++i) nxt[i] = s[i] + dy / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    bool ok = nxt[1] > 0.0 && nxt[3] > 0.0 && std::abs(nxt[2]) < 1e6 && std::abs(nxt[4]) < 1e6;
    for (double v : nxt) ok = ok && std::isfinite(v);
    if (!ok) {
      r.finite_span = true;
      break;
    }
    s = nxt;
    y = c.y0 + double(k + 1) * dy;
    push(r.profile, c, y, s);
    const double dep = std::max(std::abs(s[1] - c.phi1), std::abs(s[3] - c.phi2));
    r.max_departure = std::max(r.max_departure, dep);
    if (dep > 0.0) {
      ly.push_back(y);
      ld.push_back(std::log(dep));
    }
  }
  r.y_end = y;
  if (ly.size() >= 2) {
    // Least-squares slope over the second half of the recorded span.
    const std::size_t from = ly.size() / 2;
    double sy = 0, sd = 0, syy = 0, syd = 0;
    const double N = double(ly.size() - from);
    for (std::size_t i = from; i < ly.size(); ++i) {
      sy += ly[i];
      sd += ld[i];
      syy += ly[i] * ly[i];
      syd += ly[i] * ld[i];
    }
    const double den = N * syy - sy * sy;
    r.growth_rate = den != 0.0 ? (N * syd - sy * sd) / den : 0.0;
  }
  return r;
}

double profile_fd_residual(const SolitonParams& p) {
  p.validate();
  const std::size_t n = p.y.size();
  if (n < 3) fail(ErrorCode::parameter, "profile too short");
  SolitonParams q = p;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h = 0.5 * (p.y[i + 1] - p.y[i - 1]);
    q.f_y[i] = (p.f[i + 1] - p.f[i - 1]) / (2.0 * h);
    q.phi1_y[i] = (p.phi1[i + 1] - p.phi1[i - 1]) / (2.0 * h);
    q.phi1_yy[i] = (p.phi1[i + 1] - 2.0 * p.phi1[i] + p.phi1[i - 1]) / (h * h);
    q.phi2_y[i] = (p.phi2[i + 1] - p.phi2[i - 1]) / (2.0 * h);
    q.phi2_yy[i] = (p.phi2[i + 1] - 2.0 * p.phi2[i] + p.phi2[i - 1]) / (h * h);
    const auto r = ode_residual(q, i);
    worst = std::max({worst, std::abs(r[0]), std::abs(r[1]), std::abs(r[2])});
  }
  return worst;
}

// With g_F normalised by 2 Rc = mu g_F, the constant soliton has u_i = mu_i (T - t)
// for every sphere dimension, so the limit ratio must be 1.
bool classify_blowup_limit(double u1_inf, double u2_inf, int p1, int p2, double tolerance) {
  if (p1 < 2 || p2 < 2) return false;
  if (!(u1_inf > 0.0) || !(u2_inf > 0.0)) return false;
  return std::abs(u1_inf - u2_inf) <= tolerance * std::max(u1_inf, u2_inf);
}

}  // namespace warpflow
