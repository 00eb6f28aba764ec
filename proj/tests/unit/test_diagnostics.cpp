#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "warpflow/assumptions.hpp"
#include "warpflow/diagnostics.hpp"
#include "warpflow/errors.hpp"

using namespace warpflow;

TEST_CASE("frame diagnostics on the exact cylinder") {
  const Example ex = build_cylinder(1.0, 1.0, 2, 0.0, {65, 5.0, 0.0});
  const DiagnosticsFrame d = compute_frame(ex.spec, ex.state, ex.gs);
  CHECK(d.sup_gamma[0] == 0.0);
  CHECK(d.sup_chi[0] == 0.0);
  CHECK(d.rm_sup == doctest::Approx(0.5));
  CHECK(d.min_u_varsigma == doctest::Approx(1.0));
}

TEST_CASE("gamma identity residual vanishes on a homogeneous window") {
  const Example ex = build_cylinder(1.0, 1.0, 2, 0.0, {65, 5.0, 0.0});
  const Window w = build_window(ex.spec, ex.state, 1e-4, BoundaryMode::asymptotic_dirichlet);
  const ResidualReport r = check_evolution_inequalities(ex.spec, w);
  CHECK(r.identity_gamma_residual == 0.0);
  CHECK(r.rho_lhs_sup == 0.0);
}

TEST_CASE("heat residual of a stationary harmonic function") {
  WarpedProductSpec spec;
  spec.fibers = {{2, 0.0, 1.0}};
  FlowState s;
  for (int i = 0; i < 21; ++i) s.x.push_back(0.1 * i);
  s.phi.assign(21, 1.0);
  s.v = {std::vector<double>(21, 0.0)};
  std::vector<double> f(s.x.begin(), s.x.end());
  const auto r = heat_residual(f, f, f, spec, s, 0.01);
  for (double e : r) CHECK(std::abs(e) < 1e-12);
}

TEST_CASE("windows must be evenly spaced") {
  const Example ex = build_cylinder(1.0, 1.0, 2, 0.0, {65, 5.0, 0.0});
  Window w = build_window(ex.spec, ex.state, 1e-4, BoundaryMode::asymptotic_dirichlet);
  CHECK_NOTHROW(check_window(w));
  w.frames[2].t += 1e-5;
  CHECK_THROWS_AS(check_window(w), Error);
}

TEST_CASE("quarter-coefficient gradient inequality holds on the canonical data") {
  const Example ex = build_canonical_example(2.0, 0.1, 2, {513, 1000.0, 2.0});
  const double h = ex.state.spacing();
  double m = 1e300;
  for (double p : ex.state.phi) m = std::min(m, p * h);
  const Window w = build_window(ex.spec, ex.state, 0.1 * m * m, BoundaryMode::asymptotic_dirichlet);
  const ResidualReport r = check_evolution_inequalities(ex.spec, w);
  CHECK(r.ineq_gamma_margin_quarter > -1e-6);
  CHECK(r.ineq_rho_margin == 0.0);
  CHECK(std::isfinite(r.fitted_C_N_chi));
}
