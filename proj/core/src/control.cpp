#include "warpflow/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "warpflow/errors.hpp"

namespace warpflow {

ControlFunction::ControlFunction(std::string name, Fn value, Fn d1, Fn d2, double domain_floor)
    : name_(std::move(name)), value_(std::move(value)), d1_(std::move(d1)), d2_(std::move(d2)), floor_(domain_floor) {
  if (!(floor_ > 0.0)) fail(ErrorCode::parameter, "domain floor must be positive");
}

ControlFunction ControlFunction::from_value(std::string name, Fn value, double domain_floor) {
  auto d1 = [value](double s) {
    const double h = 1e-4 * s;
    return (value(s + h) - value(s - h)) / (2.0 * h);
  };
  auto d2 = [value](double s) {
    const double h = 1e-4 * s;
    return (value(s + h) - 2.0 * value(s) + value(s - h)) / (h * h);
  };
  ControlFunction g(std::move(name), value, d1, d2, domain_floor);
  g.analytic_ = false;
  return g;
}

ControlFunction constant_function(double c) {
  if (!(c > 0.0)) fail(ErrorCode::domain, "constant control function must be positive");
  return {"constant", [c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

ControlFunction square_function() {
  return {"square", [](double s) { return s * s; }, [](double s) { return 2.0 * s; }, [](double) { return 2.0; }};
}

ControlFunction cubic_over_1ps() {
  return {"cubic_over_1ps",
          [](double s) { return s * s * s / (1.0 + s); },
          [](double s) {
            const double p = 1.0 + s;
            return (2.0 * s * s * s + 3.0 * s * s) / (p * p);
          },
          [](double s) {
            const double p = 1.0 + s;
            return (2.0 * s * s * s + 6.0 * s * s + 6.0 * s) / (p * p * p);
          }};
}

ControlFunction exponential_function(double k) {
  return {"exp", [k](double s) { return std::exp(k * s); }, [k](double s) { return k * std::exp(k * s); },
          [k](double s) { return k * k * std::exp(k * s); }};
}

ControlFunction power_rational(double c, double a, double k, double m) {
  if (!(c > 0.0) || k < 0.0) fail(ErrorCode::parameter, "power_rational needs c > 0 and k >= 0");
  auto val = [=](double s) { return c * std::pow(s, a) / std::pow(1.0 + k * s, m); };
  auto l1 = [=](double s) { return a / s - m * k / (1.0 + k * s); };
  auto l1p = [=](double s) {
    const double q = 1.0 + k * s;
    return -a / (s * s) + m * k * k / (q * q);
  };
  return {"power_rational", val, [=](double s) { return val(s) * l1(s); },
          [=](double s) {
            const double l = l1(s);
            return val(s) * (l * l + l1p(s));
          }};
}

namespace {

struct Poly {
  std::vector<double> c;
  double operator()(double s) const {
    double r = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * s + *it;
    return r;
  }
  Poly derivative() const {
    Poly d;
    for (std::size_t k = 1; k < c.size(); ++k) d.c.push_back(double(k) * c[k]);
    return d;
  }
};

}  // namespace

ControlFunction rational_function(std::vector<double> num, std::vector<double> den) {
  if (num.empty() || den.empty()) fail(ErrorCode::parameter, "rational form needs numerator and denominator coefficients");
  const Poly N{std::move(num)}, D{std::move(den)};
  const Poly N1 = N.derivative(), N2 = N1.derivative();
  const Poly D1 = D.derivative(), D2 = D1.derivative();
  return {"rational", [=](double s) { return N(s) / D(s); },
          [=](double s) {
            const double d = D(s);
            return N1(s) / d - N(s) * D1(s) / (d * d);
          },
          [=](double s) {
            const double d = D(s), dp = D1(s);
            return N2(s) / d - 2.0 * N1(s) * dp / (d * d) - N(s) * D2(s) / (d * d) + 2.0 * N(s) * dp * dp / (d * d * d);
          }};
}

ControlFunction named_function(const std::string& key) {
  if (key == "square") return square_function();
  if (key == "cubic_over_1ps") return cubic_over_1ps();
  fail(ErrorCode::parameter, "unknown control function '" + key + "'");
}

ControlFunction scaled(const ControlFunction& g, double c) {
  if (!(c > 0.0)) fail(ErrorCode::parameter, "scale must be positive");
  return {g.name() + "*c", [g, c](double s) { return c * g.value(s); }, [g, c](double s) { return c * g.d1(s); },
          [g, c](double s) { return c * g.d2(s); }, g.domain_floor()};
}

ControlFunction sum(const ControlFunction& a, const ControlFunction& b) {
  return {"(" + a.name() + "+" + b.name() + ")", [a, b](double s) { return a.value(s) + b.value(s); },
          [a, b](double s) { return a.d1(s) + b.d1(s); }, [a, b](double s) { return a.d2(s) + b.d2(s); },
          std::max(a.domain_floor(), b.domain_floor())};
}

ControlFunction product(const ControlFunction& a, const ControlFunction& b) {
  return {"(" + a.name() + "*" + b.name() + ")", [a, b](double s) { return a.value(s) * b.value(s); },
          [a, b](double s) { return a.d1(s) * b.value(s) + a.value(s) * b.d1(s); },
          [a, b](double s) { return a.d2(s) * b.value(s) + 2.0 * a.d1(s) * b.d1(s) + a.value(s) * b.d2(s); },
          std::max(a.domain_floor(), b.domain_floor())};
}

ControlFunction compose(const ControlFunction& outer, const ControlFunction& inner) {
  return {outer.name() + "o" + inner.name(), [outer, inner](double s) { return outer.value(inner.value(s)); },
          [outer, inner](double s) { return outer.d1(inner.value(s)) * inner.d1(s); },
          [outer, inner](double s) {
            const double g = inner.value(s), g1 = inner.d1(s);
            return outer.d2(g) * g1 * g1 + outer.d1(g) * inner.d2(s);
          },
          inner.domain_floor()};
}

ControlFunction ratio_over_square(const ControlFunction& g) {
  return {g.name() + "/s^2", [g](double s) { return g.value(s) / (s * s); },
          [g](double s) { return g.d1(s) / (s * s) - 2.0 * g.value(s) / (s * s * s); },
          [g](double s) {
            const double s2 = s * s;
            return g.d2(s) / s2 - 4.0 * g.d1(s) / (s2 * s) + 6.0 * g.value(s) / (s2 * s2);
          },
          g.domain_floor()};
}

ProbeGrid ProbeGrid::make(double lo, double hi, int per_decade) {
  if (!(lo > 0.0) || !(hi > lo) || per_decade < 1) fail(ErrorCode::parameter, "bad probe grid");
  ProbeGrid p;
  p.lo = lo;
  p.hi = hi;
  p.per_decade = per_decade;
  const int total = int(std::lround(std::log10(hi / lo) * per_decade));
  p.s.reserve(std::size_t(total) + 1);
  for (int k = 0; k <= total; ++k) p.s.push_back(lo * std::pow(10.0, double(k) / per_decade));
  return p;
}

const ProbeGrid& ProbeGrid::standard() {
  static const ProbeGrid grid = make(1e-8, 1e8, 64);
  return grid;
}

int ProbeGrid::decades() const { return int(std::lround(std::log10(hi / lo))); }

double derivative_consistency(const ControlFunction& g, const ProbeGrid& probe) {
  double worst = 0.0;
  for (double s : probe.s) {
    const double h = 1e-3 * s;
    const double f0 = g.value(s), fp = g.value(s + h), fm = g.value(s - h);
    if (!std::isfinite(f0) || !std::isfinite(fp) || !std::isfinite(fm)) continue;
    const double fd1 = (fp - fm) / (2.0 * h);
    const double fd2 = (fp - 2.0 * f0 + fm) / (h * h);
    const double sc1 = std::max(std::abs(g.d1(s)), std::abs(f0) / s);
    const double sc2 = std::max(std::abs(g.d2(s)), std::abs(f0) / (s * s));
    if (sc1 > 0.0) worst = std::max(worst, std::abs(g.d1(s) - fd1) / sc1);
    if (sc2 > 0.0) worst = std::max(worst, std::abs(g.d2(s) - fd2) / sc2);
  }
  return worst;
}

SupScan sup_scan(const std::function<double(double)>& f, const ProbeGrid& probe) {
  const int D = std::max(1, probe.decades());
  std::vector<double> decade_max(std::size_t(D), -std::numeric_limits<double>::infinity());
  SupScan out;
  out.value = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < probe.s.size(); ++k) {
    const double s = probe.s[k];
    const double val = f(s);
    if (!std::isfinite(val)) {
      out.value = std::numeric_limits<double>::infinity();
      out.saturated = false;
      out.argmax = s;
      return out;
    }
    const std::size_t d = std::min<std::size_t>(std::size_t(D - 1), k / std::size_t(probe.per_decade));
    decade_max[d] = std::max(decade_max[d], val);
    if (val > out.value) {
      out.value = val;
      out.argmax = s;
    }
  }
  if (D >= 2) {
    const double tol = 1e-3;
    const auto grows = [&](double edge, double next) { return edge > next + tol * std::abs(next); };
    if (out.value == decade_max.front() && grows(decade_max[0], decade_max[1])) out.saturated = false;
    if (out.value == decade_max.back() && grows(decade_max[std::size_t(D - 1)], decade_max[std::size_t(D - 2)]))
      out.saturated = false;
  }
  return out;
}

namespace {

void require_positive(const ControlFunction& g, const ProbeGrid& probe) {
  for (double s : probe.s) {
    const double v = g.value(s);
    if (std::isnan(v) || v <= 0.0) fail(ErrorCode::domain, g.name() + " is not positive at s = " + std::to_string(s));
  }
  if (!g.analytic()) {
    const double err = derivative_consistency(g, probe);
    if (err > 1e-6) fail(ErrorCode::numeric, g.name() + ": finite-difference derivatives inconsistent (" + std::to_string(err) + ")");
  }
}

}  // namespace

double polyd(const ControlFunction& g, const ProbeGrid& probe) {
  require_positive(g, probe);
  const SupScan scan = sup_scan(
      [&g](double s) {
        const double v = g.value(s);
        return 1.0 + s * std::abs(g.d1(s)) / v + s * s * std::abs(g.d2(s)) / v;
      },
      probe);
  return scan.saturated ? scan.value : std::numeric_limits<double>::infinity();
}

double parexp(double psi_value, double psi_heat_residual, double psi_grad_sq) {
  if (!(psi_value > 0.0)) fail(ErrorCode::domain, "parexp needs psi > 0");
  return std::abs(psi_heat_residual) / psi_value + psi_grad_sq / (psi_value * psi_value);
}

GClassReport g_class_report(const ControlFunction& g, const ProbeGrid& probe) {
  GClassReport r;
  r.polyd = polyd(g, probe);
  const SupScan e = sup_scan([&g](double s) { return g.value(s) / (s * s); }, probe);
  r.sup_G_over_s2 = e.saturated ? e.value : std::numeric_limits<double>::infinity();
  r.g_norm = r.polyd + r.sup_G_over_s2;
  r.in_class = std::isfinite(r.g_norm);

  // G/s^2 must fall well below its supremum and keep falling across the lowest two decades.
  const std::size_t span = std::min(probe.s.size(), std::size_t(2 * probe.per_decade) + 1);
  bool falling = true;
  for (std::size_t k = 1; k < span; ++k) {
    const double a = probe.s[k - 1], b = probe.s[k];
    if (g.value(a) / (a * a) > g.value(b) / (b * b)) falling = false;
  }
  const double lo = probe.s.front();
  const double e_lo = g.value(lo) / (lo * lo);
  r.decay_flag = falling && std::isfinite(r.sup_G_over_s2) && e_lo <= 1e-3 * r.sup_G_over_s2;
  return r;
}

ControlFunction make_H(const std::vector<ControlFunction>& gs, std::size_t alpha) {
  if (alpha >= gs.size()) fail(ErrorCode::parameter, "fiber index out of range for H");
  ControlFunction e = ratio_over_square(gs[0]);
  for (std::size_t b = 1; b < gs.size(); ++b) e = sum(e, ratio_over_square(gs[b]));
  ControlFunction h = product(e, gs[alpha]);
  return {"H" + std::to_string(alpha), [h](double s) { return h.value(s); }, [h](double s) { return h.d1(s); },
          [h](double s) { return h.d2(s); }, h.domain_floor()};
}

double H_vector(const std::vector<ControlFunction>& gs, std::size_t alpha, std::span<const double> s) {
  if (alpha >= gs.size() || s.size() != gs.size()) fail(ErrorCode::parameter, "H needs one argument per fiber");
  double e = 0.0;
  for (std::size_t b = 0; b < gs.size(); ++b) e += gs[b].value(s[b]) / (s[b] * s[b]);
  return e * gs[alpha].value(s[alpha]);
}

double E_of(const ControlFunction& g, double s) {
  if (!(s > g.domain_floor())) fail(ErrorCode::domain, "E_of needs s above the domain floor");
  return g.value(s) / (s * s);
}

}  // namespace warpflow
