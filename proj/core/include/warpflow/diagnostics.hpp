#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "warpflow/control.hpp"
#include "warpflow/flow.hpp"

namespace warpflow {

struct DiagnosticsFrame {
  double t = 0.0;
  std::vector<std::vector<double>> gamma;  // |grad v_alpha|^2
  std::vector<std::vector<double>> chi;    // |Hess_B v_alpha|^2
  std::vector<std::vector<double>> E;      // G_alpha(v) / v^2, empty without control functions
  std::vector<double> rho;
  std::vector<double> L;
  std::vector<double> rm_pointwise;
  double rm_sup = 0.0;
  std::size_t rm_argmax = 0;
  std::vector<double> sup_gamma;
  std::vector<double> sup_chi;
  double min_u_varsigma = 0.0;
};

// Boundary cells (kStencilMargin on each side) are left at zero.
DiagnosticsFrame compute_frame(const WarpedProductSpec& spec, const FlowState& s,
                               const std::vector<ControlFunction>& gs = {});

// Central-in-time (f_next - f_prev) / 2dt minus Delta_M f at the middle frame,
// on indices [2, n-3]; the rest is zero.
std::vector<double> heat_residual(std::span<const double> f_prev, std::span<const double> f_mid,
                                  std::span<const double> f_next, const WarpedProductSpec& spec,
                                  const FlowState& state_mid, double dt);

// Three frames a fixed dt apart.
struct Window {
  std::array<FlowState, 3> frames;
  double dt = 0.0;
};

Window build_window(const WarpedProductSpec& spec, const FlowState& s, double dt, BoundaryMode bc);
void check_window(const Window& w);

struct ResidualReport {
  double identity_gamma_residual = 0.0;   // sup |(d_t - Delta) gamma - RHS|
  double identity_gradient_form = 0.0;    // sup |<grad gamma, grad v> - 2 Hess v(grad v, grad v)|
  double ineq_gamma_margin = 0.0;         // min (RHS - LHS), coefficient 1/2
  double ineq_gamma_margin_quarter = 0.0; // same with coefficient 1/4
  double ineq_chi_margin = 0.0;           // min (RHS - LHS) with the fitted C_N
  double fitted_C_N_chi = 0.0;
  double fitted_C_hessian = 0.0;
  double ineq_rho_margin = 0.0;
  double rho_lhs_sup = 0.0;
  double grid_h = 0.0;
  double dt_used = 0.0;
  std::size_t argmin_gamma_margin = 0;
};

inline constexpr double kGammaCutoff = 1e-12;
// Hessian-evolution fit uses points whose weight exceeds this share of the sup.
inline constexpr double kHessianWeightShare = 1e-3;

ResidualReport check_gamma_identity(const WarpedProductSpec& spec, const Window& w);
ResidualReport check_evolution_inequalities(const WarpedProductSpec& spec, const Window& w);

// Pointwise residual of the gamma identity for fiber alpha.
std::vector<double> gamma_identity_residual(const WarpedProductSpec& spec, const Window& w, std::size_t alpha);

// t, sup gamma_a, sup chi_a, rm_sup, min u_varsigma, rm_sup * (t_sing - t)
void write_diagnostics_csv(const std::string& path, const Trajectory& tr, double t_sing,
                           const std::vector<ControlFunction>& gs = {});

}  // namespace warpflow
