#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "warpflow/types.hpp"

namespace warpflow {

enum class BoundaryMode { asymptotic_dirichlet, neumann };

const char* to_string(BoundaryMode m) noexcept;
BoundaryMode boundary_mode_from_string(const std::string& s);

struct IntegratorConfig {
  double cfl_safety = 0.25;
  double dt_max = 1e-3;
  BoundaryMode bc_mode = BoundaryMode::asymptotic_dirichlet;
  double stop_u_floor = 1e-4;
  std::optional<double> stop_time;
  std::size_t checkpoint_every = 0;  // store every k-th step; 0 disables
  double frame_u_drop = 0.07;        // also store when min u fell by this fraction
  double u_rate_fraction = 0.02;     // dt <= fraction * min u / max mu
  std::size_t max_steps = 100000000;
  int max_rejections = 40;

  void validate() const;
};

struct Rhs {
  std::vector<double> dphi;
  std::vector<std::vector<double>> dv;
};

// dv/dt = Delta_M v - |grad v|^2 / u, dphi/dt = -phi Rc(e_s, e_s).
void rhs(const WarpedProductSpec& spec, const FlowState& s, BoundaryMode bc, Rhs& out);
Rhs rhs(const WarpedProductSpec& spec, const FlowState& s, BoundaryMode bc);

double stable_dt(const WarpedProductSpec& spec, const FlowState& s, const IntegratorConfig& cfg);

struct StepInfo {
  double dt = 0.0;
  int rejections = 0;
};

// One Heun step of the given size, halving on loss of positivity.
FlowState step_fixed(const WarpedProductSpec& spec, const FlowState& s, double dt, BoundaryMode bc,
                     int max_rejections = 40, StepInfo* info = nullptr);
FlowState step(const WarpedProductSpec& spec, const FlowState& s, const IntegratorConfig& cfg, StepInfo* info = nullptr);

struct SingularityReport {
  bool detected = false;
  double t_sing_est = 0.0;
  double t_form = 0.0;
  double type_one_constant = 0.0;
  bool at_spatial_infinity = false;
  bool degenerate = false;  // |Rm| spatially constant, location undefined
  std::size_t varsigma = 0;
  double tail_offset = 0.0;  // boundary value of v_varsigma at t = 0
  double final_min_u = 0.0;
  std::size_t fit_points = 0;
  std::string stop_reason;
};

struct Trajectory {
  WarpedProductSpec spec;
  std::vector<FlowState> frames;
  std::vector<double> radius;  // initial signed radius per grid point, for reporting
  std::size_t steps = 0;
  double min_dt = 0.0;
};

struct RunResult {
  Trajectory trajectory;
  SingularityReport report;
};

RunResult run(const WarpedProductSpec& spec, const FlowState& state0, const IntegratorConfig& cfg,
              std::vector<double> radius = {});

// Fit and Type-I analysis on a finished trajectory.
SingularityReport analyze_singularity(const Trajectory& traj, double stop_u_floor);

// True when x_i lies in the outer share of the coordinate domain (either side).
bool in_outer_region(const FlowState& s, std::size_t i, double fraction);

}  // namespace warpflow
