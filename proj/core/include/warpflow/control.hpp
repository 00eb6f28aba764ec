#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace warpflow {

// A positive scalar function on (0, inf) with its first two derivatives.
class ControlFunction {
 public:
  using Fn = std::function<double(double)>;

  ControlFunction(std::string name, Fn value, Fn d1, Fn d2, double domain_floor = 1e-300);

  // Derivatives by central differences; flagged non-analytic.
  static ControlFunction from_value(std::string name, Fn value, double domain_floor = 1e-300);

  double value(double s) const { return value_(s); }
  double d1(double s) const { return d1_(s); }
  double d2(double s) const { return d2_(s); }
  double operator()(double s) const { return value_(s); }

  const std::string& name() const noexcept { return name_; }
  bool analytic() const noexcept { return analytic_; }
  double domain_floor() const noexcept { return floor_; }

 private:
  std::string name_;
  Fn value_, d1_, d2_;
  double floor_;
  bool analytic_ = true;
};

ControlFunction constant_function(double c);
ControlFunction square_function();
ControlFunction cubic_over_1ps();
ControlFunction exponential_function(double k = 1.0);
// c s^a / (1 + k s)^m
ControlFunction power_rational(double c, double a, double k, double m);
// Polynomial ratio with coefficients in increasing degree.
ControlFunction rational_function(std::vector<double> num, std::vector<double> den);
// "square", "cubic_over_1ps"
ControlFunction named_function(const std::string& key);

ControlFunction scaled(const ControlFunction& g, double c);
ControlFunction sum(const ControlFunction& a, const ControlFunction& b);
ControlFunction product(const ControlFunction& a, const ControlFunction& b);
ControlFunction compose(const ControlFunction& outer, const ControlFunction& inner);
// G(s) / s^2
ControlFunction ratio_over_square(const ControlFunction& g);

struct ProbeGrid {
  double lo = 1e-8;
  double hi = 1e8;
  int per_decade = 64;
  std::vector<double> s;

  static ProbeGrid make(double lo, double hi, int per_decade);
  static const ProbeGrid& standard();
  int decades() const;
};

// Max relative mismatch between the supplied derivatives and central differences.
double derivative_consistency(const ControlFunction& g, const ProbeGrid& probe = ProbeGrid::standard());

struct SupScan {
  double value = 0.0;
  bool saturated = true;
  double argmax = 0.0;
};

// Supremum over the probe grid with a saturation test on the edge decades.
SupScan sup_scan(const std::function<double(double)>& f, const ProbeGrid& probe = ProbeGrid::standard());

// sup (1 + s|G'|/G + s^2|G''|/G); +inf when the scan does not saturate.
double polyd(const ControlFunction& g, const ProbeGrid& probe = ProbeGrid::standard());

// |(d_t - Delta) psi| / psi + |grad psi|^2 / psi^2
double parexp(double psi_value, double psi_heat_residual, double psi_grad_sq);

struct GClassReport {
  double polyd = 0.0;
  double sup_G_over_s2 = 0.0;
  double g_norm = 0.0;
  bool in_class = false;
  bool decay_flag = false;
};

GClassReport g_class_report(const ControlFunction& g, const ProbeGrid& probe = ProbeGrid::standard());

// H_alpha on the diagonal s_beta = s.
ControlFunction make_H(const std::vector<ControlFunction>& gs, std::size_t alpha);
// H_alpha with one argument per fiber.
double H_vector(const std::vector<ControlFunction>& gs, std::size_t alpha, std::span<const double> s);

double E_of(const ControlFunction& g, double s);

}  // namespace warpflow
