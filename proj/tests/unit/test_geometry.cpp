#include <cmath>
#include <random>

#include "christoffel_oracle.hpp"
#include "doctest.h"
#include "warpflow/errors.hpp"
#include "warpflow/geometry.hpp"

using namespace warpflow;

namespace {

FlowState sample(const WarpedProductSpec& spec, const oracle::WarpedModel& m, double lo, double hi, std::size_t n) {
  FlowState s;
  const double h = (hi - lo) / double(n - 1);
  for (std::size_t i = 0; i < n; ++i) s.x.push_back(lo + h * double(i));
  s.v.resize(spec.num_fibers());
  for (double x : s.x) {
    s.phi.push_back(m.phi(x));
    for (std::size_t a = 0; a < spec.num_fibers(); ++a) s.v[a].push_back(m.u[a](x) - spec.fibers[a].offset);
  }
  return s;
}

}  // namespace

TEST_CASE("oracle reproduces the round sphere") {
  oracle::WarpedModel m;
  m.phi = [](double) { return 1.0; };
  m.u = {[](double x) { return std::pow(std::sin(x), 2); }};
  m.dims = {2};
  m.kappa = {1.0};
  const oracle::Curvature c(m, m.point(0.9));
  CHECK(c.sectional(0, 1) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(c.sectional(1, 2) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(c.sectional(0, 2) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("sectional components agree with the Christoffel oracle") {
  WarpedProductSpec spec;
  spec.fibers = {{2, 1.0, 1.0}, {3, 2.0, 1.5}, {1, 0.0, 0.5}};
  oracle::WarpedModel m;
  m.phi = [](double x) { return 1.0 + 0.3 * std::sin(0.7 * x); };
  m.u = {[](double x) { return 1.0 + 0.4 * std::cos(x); }, [](double x) { return 1.5 + 0.5 * std::tanh(x); },
         [](double x) { return 0.5 + 0.2 * x * x; }};
  m.dims = {2, 3, 1};
  for (const auto& f : spec.fibers) m.kappa.push_back(f.kappa());

  const FlowState s = sample(spec, m, -2.0, 2.0, 801);
  const std::size_t i = 500;
  const oracle::Curvature c(m, m.point(s.x[i]));
  const PointGeometry g = curvature_components(spec, s, i);
  for (std::size_t a = 0; a < 3; ++a) {
    const std::size_t oa = m.offset(a);
    CHECK(g.K_base_fiber[a] == doctest::Approx(c.sectional(0, oa)).epsilon(1e-4));
    if (m.dims[a] > 1) CHECK(g.K_fiber_internal[a] == doctest::Approx(c.sectional(oa, oa + 1)).epsilon(1e-4));
    for (std::size_t b = a + 1; b < 3; ++b)
      CHECK(g.K_cross[a][b] == doctest::Approx(c.sectional(oa, m.offset(b))).epsilon(1e-4));
  }
}

TEST_CASE("cylinder curvature is kappa / u and the base stays flat") {
  WarpedProductSpec spec;
  spec.fibers = {{2, 1.0, 0.8}};
  FlowState s;
  for (int i = 0; i < 21; ++i) s.x.push_back(-1.0 + 0.1 * i);
  s.phi.assign(21, 1.0);
  s.v = {std::vector<double>(21, 0.0)};
  const RiemannField f = riemann_field(spec, s);
  CHECK(f.sup == doctest::Approx(0.5 / 0.8));
  CHECK(f.pointwise.front() == 0.0);
  CHECK(rho(spec, s, 10) == 0.0);
  const CylinderDeviation d = cylinder_deviation(spec, s, 10);
  CHECK(d.lhs == doctest::Approx(0.0));
}

TEST_CASE("stencil range is enforced") {
  WarpedProductSpec spec;
  spec.fibers = {{2, 1.0, 1.0}};
  FlowState s;
  for (int i = 0; i < 9; ++i) s.x.push_back(0.1 * i);
  s.phi.assign(9, 1.0);
  s.v = {std::vector<double>(9, 0.0)};
  CHECK_THROWS_AS(arclength_derivatives(s, s.v[0], 0), Error);
  CHECK_NOTHROW(arclength_derivatives(s, s.v[0], 4));
}

TEST_CASE("laplacian of a quadratic in a flat product") {
  WarpedProductSpec spec;
  spec.fibers = {{2, 0.0, 1.0}};
  FlowState s;
  for (int i = 0; i < 11; ++i) s.x.push_back(0.1 * i);
  s.phi.assign(11, 1.0);
  s.v = {std::vector<double>(11, 0.0)};
  std::vector<double> f;
  for (double x : s.x) f.push_back(x * x);
  CHECK(laplacian_scalar(spec, s, f, 5) == doctest::Approx(2.0));
}
