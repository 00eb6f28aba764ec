#pragma once

#include <functional>
#include <string>
#include <vector>

#include "warpflow/control.hpp"
#include "warpflow/types.hpp"

namespace warpflow {

// Symmetric base grid.  With stretch > 0 the uniform coordinate xi maps to
// radius r = stretch * sinh(xi / stretch), so phi(xi, 0) = cosh(xi / stretch)
// and the initial base metric is dr^2.  stretch = 0 gives r = xi.
struct GridSpec {
  std::size_t points = 513;
  double radius = 10.0;
  double stretch = 0.0;
};

struct Grid {
  std::vector<double> xi;
  std::vector<double> r;     // signed radius
  std::vector<double> phi0;  // dr / dxi
  double h = 0.0;
};

Grid make_grid(const GridSpec& spec);

using Profile = std::function<double(double r)>;

double inverse_square_profile(double r);  // 1 / (1 + r^2)

struct AssumptionReport {
  double c_init = 0.0;
  std::vector<double> gamma_margin;  // sup gamma / G(v)
  std::vector<double> chi_margin;    // sup chi / H(v)
  double rho_margin = 0.0;
  std::vector<double> g_norm;
  bool positive = false;
  bool has_positive_mu = false;
  bool grad_rm_bounded = false;
  double grad_rm_sup = 0.0;
  double tail_min_v = 0.0;  // smallest boundary value of v, the truncated-grid stand-in for inf v
  bool passed = false;
  std::vector<std::string> notes;
};

struct TailOptions {
  double fraction = 0.2;     // outer share of the coordinate range
  double max_log_slope = 0.1; // bounded-at-infinity threshold for d log(ratio) / d log r
};

AssumptionReport validate_main_assumptions(const WarpedProductSpec& spec, const FlowState& state0,
                                           const std::vector<ControlFunction>& gs);

struct AdmissibilityReport {
  bool admissible = false;
  std::vector<bool> decays;      // delta_alpha -> 0 toward both ends
  std::vector<bool> g_decay;     // G(s)/s^2 -> 0
  std::vector<bool> gamma_tail_bounded;
  std::vector<bool> chi_tail_bounded;
  std::vector<double> gamma_tail_slope;
  AssumptionReport assumptions;
};

// Builds the metric a_alpha + delta_alpha on the grid and checks every condition.
AdmissibilityReport admissibility_check(const WarpedProductSpec& spec, const Grid& grid,
                                        const std::vector<Profile>& deltas, const std::vector<ControlFunction>& gs,
                                        const TailOptions& tail = {});

FlowState state_from_profiles(const Grid& grid, const std::vector<Profile>& deltas);

struct Example {
  WarpedProductSpec spec;
  FlowState state;
  Grid grid;
  std::vector<ControlFunction> gs;
  std::vector<Profile> deltas;
  bool soliton_degenerate = false;
  double eta = 1.0;
};

// R x S^p x S^p, mu = 1, offsets a_star, delta_2 = 1/(1+r^2), delta_1 = eta delta_2.
Example build_canonical_example(double eta, double a_star, int p, const GridSpec& grid);
// R x S^p with u(x, 0) = a_star + delta(x).
Example build_perturbed_cylinder(double a_star, int p, const GridSpec& grid, Profile delta = inverse_square_profile);
// Exact cylinder with constant v = eps.
Example build_cylinder(double a, double mu, int p, double eps, const GridSpec& grid);
// v with an interior minimum at r = 0; the singularity forms at a finite point.
Example build_interior_minimum(double a_star, int p, const GridSpec& grid);
// S^1 x S^p fibers: the circle keeps its scale while the sphere shrinks.
Example build_circle_fiber(double a_star, int p, const GridSpec& grid);

}  // namespace warpflow
