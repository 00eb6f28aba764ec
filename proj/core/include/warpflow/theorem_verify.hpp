#pragma once

#include <string>
#include <vector>

#include "warpflow/control.hpp"
#include "warpflow/flow.hpp"

namespace warpflow {

struct TheoremEstimates {
  double c_star_measured = 1.0;
  double window_end = 0.0;
  std::size_t frames_used = 0;
  // Per fiber, per grid point.
  std::vector<std::vector<double>> equiv_ratio_field;      // sup_t max(v/v0, v0/v)
  std::vector<std::vector<double>> asymptotic_correction;  // sup_t |v/v0 - 1|
  std::vector<double> phi_correction;                      // sup_t |phi/phi0 - 1|
};

// Frames with t <= t_end; t_end <= 0 means 0.9 t_form.
TheoremEstimates measure_uniform_equivalence(const Trajectory& tr, double t_end = 0.0);

struct TailTrend {
  std::vector<double> bin_center;  // mean |r| per bin
  std::vector<double> bin_value;   // max of the field per bin
  double spearman = 0.0;           // rank correlation of bin value against bin radius
  bool strictly_decreasing = false;
};

// Bins the outer half of the coordinate domain (both sides folded by |x|).
TailTrend tail_trend(const Trajectory& tr, const std::vector<double>& field, std::size_t bins = 10);

double spearman_rho(const std::vector<double>& a, const std::vector<double>& b);

struct MainEstimates {
  double c_init = 0.0;
  std::vector<double> c_star_gamma;  // per fiber
  std::vector<double> c_star_chi;
  double c_star_rho = 0.0;
  double window_end = 0.0;
};

MainEstimates measure_main_estimates(const Trajectory& tr, const std::vector<ControlFunction>& gs, double c_init,
                                     double t_end = 0.0);

struct ShrinkVerdict {
  bool conclusive = false;
  double t_sing_est = 0.0;
  double t_form = 0.0;
  double rel_error_t = 0.0;
  double type_one_constant = 0.0;
  double type_one_expected = 0.0;  // mu / (2(n - 1)) of the collapsing fiber
  double type_one_rel_error = 0.0;
  bool at_spatial_infinity = false;
  bool argmax_rm_outer = false;    // argmax |Rm| in the outer 10% at the last frame
  bool degenerate = false;
  double inner_rm_growth = 0.0;    // sup |Rm| on the inner half, last frame over first
  bool compact_regular = false;
  std::string note;
};

ShrinkVerdict verify_corollary_shrink(const SingularityReport& rep, const Trajectory& tr);

struct StabilityReport {
  std::vector<double> stability_sup;  // sup_t |u - (a - t)|
  std::vector<double> ratio;          // stability_sup / delta
  double lower = 0.0;                 // min ratio over the grid
  double upper = 0.0;                 // max ratio over the grid
  double fitted_C = 0.0;              // max(upper, 1 / lower)
  double tail_min = 0.0;              // over points with delta < tail_delta
  double tail_max = 0.0;
  std::size_t tail_points = 0;
};

// Single-fiber runs; delta is the initial perturbation on the grid.
StabilityReport verify_cylinder_stability(const Trajectory& tr, double tail_delta = 1e-3);

}  // namespace warpflow
