#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "warpflow/types.hpp"

namespace warpflow {

// Cells within this many points of either end are excluded from diagnostics.
inline constexpr std::size_t kStencilMargin = 2;

struct Derivs {
  double d_ds = 0.0;
  double d2_ds2 = 0.0;
};

// Covariant first and second derivatives along the base, arclength normalised.
Derivs arclength_derivatives(const FlowState& s, std::span<const double> field, std::size_t i);

// Same stencil without range or finiteness checks; requires 1 <= i <= n-2.
Derivs arclength_derivatives_unchecked(const FlowState& s, const double* field, std::size_t i) noexcept;

// Delta_M of a base function.
double laplacian_scalar(const WarpedProductSpec& spec, const FlowState& s, std::span<const double> field, std::size_t i);

// |Hess v_alpha|^2 in the full metric: base block plus the fiber blocks.
double full_hessian_norm_sq(const WarpedProductSpec& spec, const FlowState& s, std::size_t alpha, std::size_t i);

struct PointGeometry {
  std::vector<double> u;
  std::vector<double> du_ds;
  std::vector<double> d2u_ds2;
  std::vector<double> K_base_fiber;
  std::vector<double> K_fiber_internal;
  // Off-diagonal only; the diagonal is left at zero and never read.
  std::vector<std::vector<double>> K_cross;
  double ric_horizontal = 0.0;
  std::vector<double> ric_vertical;
};

PointGeometry curvature_components(const WarpedProductSpec& spec, const FlowState& s, std::size_t i);

// Max absolute sectional component at a point.  Internal planes of circle
// fibers do not exist and are skipped.
double riemann_pointwise(const WarpedProductSpec& spec, const PointGeometry& g);

// Frobenius-type |Rm|, sqrt(sum over planes of 4 K^2).
double riemann_frobenius(const WarpedProductSpec& spec, const PointGeometry& g);

struct RiemannField {
  std::vector<double> pointwise;  // zero on excluded cells
  double sup = 0.0;
  std::size_t argmax = 0;
};

RiemannField riemann_field(const WarpedProductSpec& spec, const FlowState& s);
double riemann_sup_norm(const WarpedProductSpec& spec, const FlowState& s);

// The base is one-dimensional, hence flat.
double rho(const WarpedProductSpec& spec, const FlowState& s, std::size_t i);

struct CylinderDeviation {
  double lhs = 0.0;
  double rhs = 0.0;
};

CylinderDeviation cylinder_deviation(const WarpedProductSpec& spec, const FlowState& s, std::size_t i);

}  // namespace warpflow
