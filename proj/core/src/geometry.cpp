#include "warpflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "warpflow/errors.hpp"

namespace warpflow {

namespace {

void check_index(const FlowState& s, std::size_t i) {
  const std::size_t n = s.size();
  if (n < 2 * kStencilMargin + 1 || i < kStencilMargin || i + kStencilMargin >= n)
    fail(ErrorCode::boundary_stencil, "index " + std::to_string(i) + " is within the boundary margin");
}

struct Jet {
  double u, us, uss;
};

void warping_jets(const WarpedProductSpec& spec, const FlowState& s, std::size_t i, std::vector<Jet>& out) {
  out.resize(spec.num_fibers());
  for (std::size_t a = 0; a < spec.num_fibers(); ++a) {
    const double u = warping(spec, s, a, i);
    if (!(u > 0.0)) fail(ErrorCode::singular_state, "u <= 0 at index " + std::to_string(i));
    const Derivs d = arclength_derivatives_unchecked(s, s.v[a].data(), i);
    out[a] = {u, d.d_ds, d.d2_ds2};
  }
}

}  // namespace

Derivs arclength_derivatives_unchecked(const FlowState& s, const double* f, std::size_t i) noexcept {
  const double h = s.x[i + 1] - s.x[i - 1];
  const double inv2h = 1.0 / h;
  const double invh2 = 4.0 / (h * h);
  const double fx = (f[i + 1] - f[i - 1]) * inv2h;
  const double fxx = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * invh2;
  const double* p = s.phi.data();
  const double phx = (p[i + 1] - p[i - 1]) * inv2h;
  const double ph = p[i];
  return {fx / ph, (fxx - (phx / ph) * fx) / (ph * ph)};
}

Derivs arclength_derivatives(const FlowState& s, std::span<const double> field, std::size_t i) {
  if (field.size() != s.size() || s.phi.size() != s.size())
    fail(ErrorCode::parameter, "field length differs from grid");
  check_index(s, i);
  for (std::size_t k = i - 1; k <= i + 1; ++k)
    if (!std::isfinite(field[k]) || !std::isfinite(s.phi[k])) fail(ErrorCode::numeric, "non-finite stencil value");
  return arclength_derivatives_unchecked(s, field.data(), i);
}

double laplacian_scalar(const WarpedProductSpec& spec, const FlowState& s, std::span<const double> field, std::size_t i) {
  const Derivs f = arclength_derivatives(s, field, i);
  double lap = f.d2_ds2;
  for (std::size_t b = 0; b < spec.num_fibers(); ++b) {
    const double u = warping(spec, s, b, i);
    if (!(u > 0.0)) fail(ErrorCode::singular_state, "u <= 0");
    const Derivs du = arclength_derivatives(s, s.v[b], i);
    lap += 0.5 * spec.fibers[b].dim * du.d_ds * f.d_ds / u;
  }
  return lap;
}

double full_hessian_norm_sq(const WarpedProductSpec& spec, const FlowState& s, std::size_t alpha, std::size_t i) {
  if (alpha >= spec.num_fibers()) fail(ErrorCode::parameter, "fiber index out of range");
  const Derivs dv = arclength_derivatives(s, s.v[alpha], i);
  double total = dv.d2_ds2 * dv.d2_ds2;
  for (std::size_t b = 0; b < spec.num_fibers(); ++b) {
    const double u = warping(spec, s, b, i);
    if (!(u > 0.0)) fail(ErrorCode::singular_state, "u <= 0");
    const Derivs du = arclength_derivatives(s, s.v[b], i);
    const double block = 0.5 * du.d_ds * dv.d_ds / u;
    total += spec.fibers[b].dim * block * block;
  }
  return total;
}

PointGeometry curvature_components(const WarpedProductSpec& spec, const FlowState& s, std::size_t i) {
  check_index(s, i);
  const std::size_t A = spec.num_fibers();
  std::vector<Jet> jets;
  warping_jets(spec, s, i, jets);

  PointGeometry g;
  g.u.resize(A);
  g.du_ds.resize(A);
  g.d2u_ds2.resize(A);
  g.K_base_fiber.resize(A);
  g.K_fiber_internal.resize(A);
  g.K_cross.assign(A, std::vector<double>(A, 0.0));
  g.ric_vertical.resize(A);

  std::vector<double> q(A);  // u'/u
  for (std::size_t a = 0; a < A; ++a) {
    const Jet& j = jets[a];
    q[a] = j.us / j.u;
    g.u[a] = j.u;
    g.du_ds[a] = j.us;
    g.d2u_ds2[a] = j.uss;
    g.K_base_fiber[a] = -(0.5 * j.uss / j.u - 0.25 * q[a] * q[a]);
    g.K_fiber_internal[a] = spec.fibers[a].kappa() / j.u - 0.25 * q[a] * q[a];
  }
  for (std::size_t a = 0; a < A; ++a)
    for (std::size_t b = a + 1; b < A; ++b) {
      const double k = -0.25 * q[a] * q[b];
      g.K_cross[a][b] = k;
      g.K_cross[b][a] = k;
    }

  double ric_h = 0.0;
  for (std::size_t a = 0; a < A; ++a) ric_h += spec.fibers[a].dim * g.K_base_fiber[a];
  g.ric_horizontal = ric_h;

  for (std::size_t a = 0; a < A; ++a) {
    double lap = jets[a].uss;
    for (std::size_t b = 0; b < A; ++b) lap += 0.5 * spec.fibers[b].dim * q[b] * jets[a].us;
    g.ric_vertical[a] = 0.5 * spec.fibers[a].mu - 0.5 * (lap - jets[a].us * q[a]);
  }
  return g;
}

double riemann_pointwise(const WarpedProductSpec& spec, const PointGeometry& g) {
  const std::size_t A = spec.num_fibers();
  double m = 0.0;
  for (std::size_t a = 0; a < A; ++a) {
    m = std::max(m, std::abs(g.K_base_fiber[a]));
    if (spec.fibers[a].dim >= 2) m = std::max(m, std::abs(g.K_fiber_internal[a]));
    for (std::size_t b = a + 1; b < A; ++b) m = std::max(m, std::abs(g.K_cross[a][b]));
  }
  return m;
}

double riemann_frobenius(const WarpedProductSpec& spec, const PointGeometry& g) {
  const std::size_t A = spec.num_fibers();
  double sum = 0.0;
  for (std::size_t a = 0; a < A; ++a) {
    const double na = spec.fibers[a].dim;
    sum += na * g.K_base_fiber[a] * g.K_base_fiber[a];
    sum += 0.5 * na * (na - 1.0) * g.K_fiber_internal[a] * g.K_fiber_internal[a];
    for (std::size_t b = a + 1; b < A; ++b) sum += na * spec.fibers[b].dim * g.K_cross[a][b] * g.K_cross[a][b];
  }
  return std::sqrt(4.0 * sum);
}

RiemannField riemann_field(const WarpedProductSpec& spec, const FlowState& s) {
  const std::size_t n = s.size();
  if (n < 2 * kStencilMargin + 1) fail(ErrorCode::boundary_stencil, "grid too small");
  const std::size_t A = spec.num_fibers();
  RiemannField out;
  out.pointwise.assign(n, 0.0);
  out.argmax = kStencilMargin;
  std::vector<Jet> jets;
  std::vector<double> q(A);
  for (std::size_t i = kStencilMargin; i + kStencilMargin < n; ++i) {
    warping_jets(spec, s, i, jets);
    double m = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
      const Jet& j = jets[a];
      q[a] = j.us / j.u;
      const double qq = 0.25 * q[a] * q[a];
      m = std::max(m, std::abs(-(0.5 * j.uss / j.u - qq)));
      if (spec.fibers[a].dim >= 2) m = std::max(m, std::abs(spec.fibers[a].kappa() / j.u - qq));
    }
    for (std::size_t a = 0; a < A; ++a)
      for (std::size_t b = a + 1; b < A; ++b) m = std::max(m, std::abs(0.25 * q[a] * q[b]));
    if (!std::isfinite(m)) fail(ErrorCode::numeric, "non-finite curvature at index " + std::to_string(i));
    out.pointwise[i] = m;
    if (m > out.sup) {
      out.sup = m;
      out.argmax = i;
    }
  }
  return out;
}

double riemann_sup_norm(const WarpedProductSpec& spec, const FlowState& s) { return riemann_field(spec, s).sup; }

double rho(const WarpedProductSpec&, const FlowState& s, std::size_t i) {
  check_index(s, i);
  // |Rm[g_B]|^2 for a k-dimensional base; every component vanishes when k = 1.
  return 0.0;
}

CylinderDeviation cylinder_deviation(const WarpedProductSpec& spec, const FlowState& s, std::size_t i) {
  const PointGeometry g = curvature_components(spec, s, i);
  const std::size_t A = spec.num_fibers();
  CylinderDeviation d;
  for (std::size_t a = 0; a < A; ++a) {
    d.lhs = std::max(d.lhs, std::abs(g.K_base_fiber[a]));
    if (spec.fibers[a].dim >= 2)
      d.lhs = std::max(d.lhs, std::abs(g.K_fiber_internal[a] - spec.fibers[a].kappa() / g.u[a]));
    for (std::size_t b = a + 1; b < A; ++b) d.lhs = std::max(d.lhs, std::abs(g.K_cross[a][b]));
  }
  d.rhs = std::sqrt(rho(spec, s, i));
  for (std::size_t a = 0; a < A; ++a) {
    const Derivs dv = arclength_derivatives(s, s.v[a], i);
    const double gamma = dv.d_ds * dv.d_ds;
    const double chi = dv.d2_ds2 * dv.d2_ds2;
    d.rhs += gamma / (g.u[a] * g.u[a]) + std::sqrt(chi) / g.u[a];
  }
  return d;
}

}  // namespace warpflow
