#pragma once

#include <array>
#include <vector>

namespace warpflow {

// Profiles of a doubly-warped gradient shrinking soliton dy^2 + phi_1^2 g + phi_2^2 g.
struct SolitonParams {
  int p1 = 2;
  int p2 = 2;
  double lambda = -1.0;
  std::vector<double> y;
  std::vector<double> f, f_y;
  std::vector<double> phi1, phi1_y, phi1_yy;
  std::vector<double> phi2, phi2_y, phi2_yy;

  void validate() const;
};

// (r_f, r_1, r_2), each LHS - RHS.
std::array<double, 3> ode_residual(const SolitonParams& p, std::size_t i);

// f = -lambda y, phi_i^2 = (p_i - 1) / (-lambda), sampled on y.
SolitonParams constant_solution(int p1, int p2, double lambda, const std::vector<double>& y);

struct IvpStart {
  int p1 = 2;
  int p2 = 2;
  double lambda = -1.0;
  double y0 = 0.0;
  double f0 = 0.0;
  double phi1 = 1.0, dphi1 = 0.0;
  double phi2 = 1.0, dphi2 = 0.0;
};

struct IvpResult {
  SolitonParams profile;
  bool finite_span = false;  // stopped early: phi -> 0 or phi' blew up
  double y_end = 0.0;
  double max_departure = 0.0;  // max |phi_i - phi_i(y0)|
  double growth_rate = 0.0;    // fitted d log(departure) / dy
};

// Classical RK4 on (f, phi1, phi1', phi2, phi2') with step dy.
IvpResult integrate_ivp(const IvpStart& start, double span, double dy);

// Residuals of the stored profile with derivatives replaced by central differences.
double profile_fd_residual(const SolitonParams& p);

bool classify_blowup_limit(double u1_inf, double u2_inf, int p1, int p2, double tolerance);

}  // namespace warpflow
