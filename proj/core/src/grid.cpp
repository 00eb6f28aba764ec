#include <cmath>

#include "warpflow/assumptions.hpp"
#include "warpflow/errors.hpp"

namespace warpflow {

Grid make_grid(const GridSpec& spec) {
  if (spec.points < 5) fail(ErrorCode::parameter, "grid.points must be >= 5");
  if (!(spec.radius > 0.0)) fail(ErrorCode::parameter, "grid.radius must be positive");
  if (spec.stretch < 0.0) fail(ErrorCode::parameter, "grid.stretch must be >= 0");
  const double l = spec.stretch;
  const double xi_max = l > 0.0 ? l * std::asinh(spec.radius / l) : spec.radius;
  Grid g;
  const std::size_t n = spec.points;
  g.h = 2.0 * xi_max / double(n - 1);
  g.xi.resize(n);
  g.r.resize(n);
  g.phi0.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = -xi_max + double(i) * g.h;
    g.xi[i] = xi;
    if (l > 0.0) {
      g.r[i] = l * std::sinh(xi / l);
      g.phi0[i] = std::cosh(xi / l);
    } else {
      g.r[i] = xi;
      g.phi0[i] = 1.0;
    }
  }
  // Pin the centre and the ends exactly so symmetric data stays symmetric.
  if (n % 2 == 1) {
    g.xi[n / 2] = 0.0;
    g.r[n / 2] = 0.0;
    g.phi0[n / 2] = 1.0;
  }
  g.xi.front() = -xi_max;
  g.xi.back() = xi_max;
  g.r.front() = -spec.radius;
  g.r.back() = spec.radius;
  return g;
}

double inverse_square_profile(double r) { return 1.0 / (1.0 + r * r); }

FlowState state_from_profiles(const Grid& grid, const std::vector<Profile>& deltas) {
  FlowState s;
  s.t = 0.0;
  s.x = grid.xi;
  s.phi = grid.phi0;
  s.v.assign(deltas.size(), std::vector<double>(grid.r.size()));
  for (std::size_t a = 0; a < deltas.size(); ++a)
    for (std::size_t i = 0; i < grid.r.size(); ++i) s.v[a][i] = deltas[a](grid.r[i]);
  return s;
}

}  // namespace warpflow
