#pragma once

// Brute-force curvature of a coordinate metric: Christoffel symbols and the
// Riemann tensor from finite differences of g itself.  Independent of the
// warped-product formulas in warpflow/geometry.hpp.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;
using MetricFn = std::function<Mat(const Vec&)>;

inline Mat zeros(std::size_t n) { return Mat(n, Vec(n, 0.0)); }

inline Mat invert(Mat a) {
  const std::size_t n = a.size();
  Mat inv = zeros(n);
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    const double d = a[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c][k] /= d;
      inv[c][k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

class Curvature {
 public:
  // h: finite-difference step in every coordinate.
  Curvature(const MetricFn& g, const Vec& p, double h = 1e-3) : n_(p.size()) {
    g_ = g(p);
    ginv_ = invert(g_);
    dg_.assign(n_, zeros(n_));
    ddg_.assign(n_, std::vector<Mat>(n_, zeros(n_)));
    auto shifted = [&](std::size_t a, double da, std::size_t b, double db) {
      Vec q = p;
      q[a] += da;
      q[b] += db;
      return g(q);
    };
    // fourth-order stencils
    for (std::size_t a = 0; a < n_; ++a) {
      const Mat p1 = shifted(a, h, a, 0), m1 = shifted(a, -h, a, 0);
      const Mat p2 = shifted(a, 2 * h, a, 0), m2 = shifted(a, -2 * h, a, 0);
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) {
          dg_[a][i][j] = (-p2[i][j] + 8 * p1[i][j] - 8 * m1[i][j] + m2[i][j]) / (12 * h);
          ddg_[a][a][i][j] = (-p2[i][j] + 16 * p1[i][j] - 30 * g_[i][j] + 16 * m1[i][j] - m2[i][j]) / (12 * h * h);
        }
    }
    for (std::size_t a = 0; a < n_; ++a)
      for (std::size_t b = a + 1; b < n_; ++b) {
        Mat acc = zeros(n_);
        const double w[4] = {-1, 8, -8, 1};
        const double o[4] = {2, 1, -1, -2};
        for (int ka = 0; ka < 4; ++ka)
          for (int kb = 0; kb < 4; ++kb) {
            const Mat s = shifted(a, o[ka] * h, b, o[kb] * h);
            for (std::size_t i = 0; i < n_; ++i)
              for (std::size_t j = 0; j < n_; ++j) acc[i][j] += w[ka] * w[kb] * s[i][j];
          }
        for (std::size_t i = 0; i < n_; ++i)
          for (std::size_t j = 0; j < n_; ++j) ddg_[a][b][i][j] = ddg_[b][a][i][j] = acc[i][j] / (144 * h * h);
      }
    build();
  }

  // R_{abcd} = g(R(e_c, e_d) e_b, e_a)
  double riemann(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += g_[a][i] * R_[i][b][c][d];
    return s;
  }

  double sectional(std::size_t a, std::size_t b) const {
    return riemann(a, b, a, b) / (g_[a][a] * g_[b][b] - g_[a][b] * g_[a][b]);
  }

  const Mat& metric() const { return g_; }

 private:
  void build() {
    // Gamma^i_{jk} and its coordinate derivatives
    using T3 = std::vector<Mat>;
    T3 gam(n_, zeros(n_));
    std::vector<T3> dgam(n_, T3(n_, zeros(n_)));
    std::vector<Mat> dginv(n_, zeros(n_));
    for (std::size_t m = 0; m < n_; ++m)
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t l = 0; l < n_; ++l) {
          double s = 0.0;
          for (std::size_t p = 0; p < n_; ++p)
            for (std::size_t q = 0; q < n_; ++q) s -= ginv_[i][p] * dg_[m][p][q] * ginv_[q][l];
          dginv[m][i][l] = s;
        }
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        for (std::size_t k = 0; k < n_; ++k) {
          double s = 0.0;
          for (std::size_t l = 0; l < n_; ++l) s += 0.5 * ginv_[i][l] * (dg_[j][l][k] + dg_[k][l][j] - dg_[l][j][k]);
          gam[i][j][k] = s;
          for (std::size_t m = 0; m < n_; ++m) {
            double d = 0.0;
            for (std::size_t l = 0; l < n_; ++l) {
              d += 0.5 * dginv[m][i][l] * (dg_[j][l][k] + dg_[k][l][j] - dg_[l][j][k]);
              d += 0.5 * ginv_[i][l] * (ddg_[m][j][l][k] + ddg_[m][k][l][j] - ddg_[m][l][j][k]);
            }
            dgam[m][i][j][k] = d;
          }
        }
    // R^i_{jkl} = d_k Gamma^i_{lj} - d_l Gamma^i_{kj} + Gamma^i_{km} Gamma^m_{lj} - Gamma^i_{lm} Gamma^m_{kj}
    R_.assign(n_, T3(n_, zeros(n_)));
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        for (std::size_t k = 0; k < n_; ++k)
          for (std::size_t l = 0; l < n_; ++l) {
            double s = dgam[k][i][l][j] - dgam[l][i][k][j];
            for (std::size_t m = 0; m < n_; ++m) s += gam[i][k][m] * gam[m][l][j] - gam[i][l][m] * gam[m][k][j];
            R_[i][j][k][l] = s;
          }
  }

  std::size_t n_;
  Mat g_, ginv_;
  std::vector<Mat> dg_;
  std::vector<std::vector<Mat>> ddg_;
  std::vector<std::vector<Mat>> R_;
};

// Warped product over a line: phi(x)^2 dx^2 + sum_a u_a(x) h_a, where h_a is
// the unit space form of curvature kappa_a in polar coordinates.
struct WarpedModel {
  std::function<double(double)> phi;
  std::vector<std::function<double(double)>> u;
  std::vector<int> dims;
  std::vector<double> kappa;

  std::size_t dimension() const {
    std::size_t d = 1;
    for (int n : dims) d += std::size_t(n);
    return d;
  }

  // First coordinate of fiber a.
  std::size_t offset(std::size_t a) const {
    std::size_t o = 1;
    for (std::size_t b = 0; b < a; ++b) o += std::size_t(dims[b]);
    return o;
  }

  Mat operator()(const Vec& c) const {
    const std::size_t n = dimension();
    Mat g = zeros(n);
    const double x = c[0];
    g[0][0] = phi(x) * phi(x);
    for (std::size_t a = 0; a < dims.size(); ++a) {
      const std::size_t o = offset(a);
      const double ua = u[a](x);
      if (dims[a] == 1) {
        g[o][o] = ua;
        continue;
      }
      const double k = kappa[a];
      const double th = c[o];
      const double sn = k > 0 ? std::sin(std::sqrt(k) * th) / std::sqrt(k) : th;
      g[o][o] = ua;
      double w = ua * sn * sn;
      for (int m = 1; m < dims[a]; ++m) {
        g[o + m][o + m] = w;
        w *= std::pow(std::sin(c[o + m]), 2);
      }
    }
    return g;
  }

  // A generic evaluation point away from the coordinate singularities.
  Vec point(double x) const {
    Vec p(dimension(), 1.1);
    p[0] = x;
    return p;
  }
};

}  // namespace oracle
