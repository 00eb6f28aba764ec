#pragma once

#include <cstddef>
#include <vector>

namespace warpflow {

struct FiberSpec {
  int dim = 2;
  double mu = 1.0;      // mu * g_F = 2 Rc[g_F]
  double offset = 1.0;  // a_alpha

  // Sectional curvature of the unit space form; 0 for circles.
  double kappa() const noexcept;
};

struct WarpedProductSpec {
  int base_dim = 1;
  std::vector<FiberSpec> fibers;

  std::size_t num_fibers() const noexcept { return fibers.size(); }
  int total_fiber_dim() const noexcept;
  bool has_shrinking_fiber() const noexcept;

  // a - mu t, the homogeneous part of u_alpha.
  double homogeneous(std::size_t alpha, double t) const noexcept {
    return fibers[alpha].offset - fibers[alpha].mu * t;
  }

  // argmin a/mu over shrinking fibers; throws if none shrinks.
  std::size_t varsigma() const;
  double t_form() const;

  void validate() const;
};

// Coordinate x must be uniform; phi carries the base metric phi^2 dx^2.
struct FlowState {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> phi;
  std::vector<std::vector<double>> v;

  std::size_t size() const noexcept { return x.size(); }
  double spacing() const noexcept { return x.size() > 1 ? (x.back() - x.front()) / double(x.size() - 1) : 0.0; }
};

inline double warping(const WarpedProductSpec& spec, const FlowState& s, std::size_t alpha, std::size_t i) noexcept {
  return spec.homogeneous(alpha, s.t) + s.v[alpha][i];
}

std::vector<double> warping_field(const WarpedProductSpec& spec, const FlowState& s, std::size_t alpha);

// Throws singular_state when some u_alpha <= 0, parameter for shape problems,
// numeric for non-finite entries.
void validate_state(const WarpedProductSpec& spec, const FlowState& s);

double min_warping(const WarpedProductSpec& spec, const FlowState& s, std::size_t alpha);

}  // namespace warpflow
