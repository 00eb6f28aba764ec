#include "warpflow/types.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "warpflow/errors.hpp"

namespace warpflow {

double FiberSpec::kappa() const noexcept {
  if (dim < 2) return 0.0;
  return mu / (2.0 * (dim - 1));
}

int WarpedProductSpec::total_fiber_dim() const noexcept {
  int n = 0;
  for (const auto& f : fibers) n += f.dim;
  return n;
}

bool WarpedProductSpec::has_shrinking_fiber() const noexcept {
  for (const auto& f : fibers)
    if (f.mu > 0.0) return true;
  return false;
}

std::size_t WarpedProductSpec::varsigma() const {
  std::size_t best = fibers.size();
  double best_time = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < fibers.size(); ++a) {
    if (fibers[a].mu <= 0.0) continue;
    const double t = fibers[a].offset / fibers[a].mu;
    if (t < best_time) {
      best_time = t;
      best = a;
    }
  }
  if (best == fibers.size()) fail(ErrorCode::parameter, "no fiber with mu > 0");
  return best;
}

double WarpedProductSpec::t_form() const {
  const auto& f = fibers[varsigma()];
  return f.offset / f.mu;
}

void WarpedProductSpec::validate() const {
  if (base_dim != 1) fail(ErrorCode::parameter, "base_dim must be 1");
  if (fibers.empty()) fail(ErrorCode::parameter, "fiber list is empty");
  for (std::size_t a = 0; a < fibers.size(); ++a) {
    const auto& f = fibers[a];
    const std::string tag = "fibers[" + std::to_string(a) + "]";
    if (f.dim < 1) fail(ErrorCode::parameter, tag + ".dim must be >= 1");
    if (!std::isfinite(f.mu) || !std::isfinite(f.offset)) fail(ErrorCode::parameter, tag + " has non-finite entries");
    if (f.dim == 1 && f.mu != 0.0) fail(ErrorCode::parameter, tag + ": circle fibers have mu = 0");
    // A flat fiber never shrinks, so a zero offset is allowed there.
    if (f.offset < 0.0 || (f.offset == 0.0 && f.mu != 0.0))
      fail(ErrorCode::parameter, tag + ".offset must be > 0");
  }
  if (!has_shrinking_fiber()) fail(ErrorCode::parameter, "at least one fiber needs mu > 0");
}

std::vector<double> warping_field(const WarpedProductSpec& spec, const FlowState& s, std::size_t alpha) {
  std::vector<double> u(s.size());
  const double h = spec.homogeneous(alpha, s.t);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = h + s.v[alpha][i];
  return u;
}

double min_warping(const WarpedProductSpec& spec, const FlowState& s, std::size_t alpha) {
  double m = std::numeric_limits<double>::infinity();
  const double h = spec.homogeneous(alpha, s.t);
  for (double vi : s.v[alpha]) m = std::min(m, h + vi);
  return m;
}

void validate_state(const WarpedProductSpec& spec, const FlowState& s) {
  const std::size_t n = s.size();
  if (n < 5) fail(ErrorCode::parameter, "state needs at least 5 grid points");
  if (s.phi.size() != n) fail(ErrorCode::parameter, "phi length differs from x");
  if (s.v.size() != spec.num_fibers()) fail(ErrorCode::parameter, "state carries a different number of fibers than the spec");
  for (const auto& va : s.v)
    if (va.size() != n) fail(ErrorCode::parameter, "v length differs from x");
  if (!std::isfinite(s.t)) fail(ErrorCode::numeric, "non-finite time");
  const double h = s.spacing();
  if (!(h > 0.0)) fail(ErrorCode::parameter, "x must be strictly increasing");
  for (std::size_t i = 1; i < n; ++i) {
    const double d = s.x[i] - s.x[i - 1];
    if (!(d > 0.0)) fail(ErrorCode::parameter, "x must be strictly increasing");
    if (std::abs(d - h) > 1e-8 * h) fail(ErrorCode::parameter, "x must be uniformly spaced");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(s.phi[i])) fail(ErrorCode::numeric, "non-finite phi");
    if (!(s.phi[i] > 0.0)) fail(ErrorCode::singular_state, "phi must be positive");
  }
  for (std::size_t a = 0; a < spec.num_fibers(); ++a) {
    const double hom = spec.homogeneous(a, s.t);
    for (std::size_t i = 0; i < n; ++i) {
      const double vi = s.v[a][i];
      if (!std::isfinite(vi)) fail(ErrorCode::numeric, "non-finite v");
      if (!(hom + vi > 0.0))
        fail(ErrorCode::singular_state, "u[" + std::to_string(a) + "] <= 0 at index " + std::to_string(i));
    }
  }
}

}  // namespace warpflow
