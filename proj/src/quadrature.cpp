#include "sdg/quadrature.hpp"
#include <cmath>

namespace sdg {

void gauss_legendre(int n, VectorXd& x, VectorXd& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton from the Chebyshev estimate; converges in a handful of steps
    double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = xi;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2 * j - 1) * xi * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      double dx = p1 / dp;
      xi -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = xi;
    for (int j = 2; j <= n; ++j) {
      double p2 = ((2 * j - 1) * xi * p1 - (j - 1) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
    x[n - 1 - i] = xi;
    w[n - 1 - i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
  }
}

VectorXd legendre(int m, const VectorXd& s) {
  if (m == 0) return VectorXd::Ones(s.size());
  VectorXd p0 = VectorXd::Ones(s.size()), p1 = s;
  for (int j = 2; j <= m; ++j) {
    VectorXd p2 = ((2 * j - 1) * s.cwiseProduct(p1) - (j - 1) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

static constexpr int kMaxExactness = 25;

QuadratureRule edge_rule(int exactness) {
  if (exactness < 1 || exactness > kMaxExactness)
    throw ConfigError("edge_rule: unsupported exactness " + std::to_string(exactness));
  int n = exactness / 2 + 1;
  VectorXd x, w;
  gauss_legendre(n, x, w);
  QuadratureRule r;
  r.pts.resize(n, 2);
  r.pts.col(0) = x;
  r.pts.col(1).setZero();
  r.w = w;
  r.exactness = exactness;
  return r;
}

QuadratureRule triangle_rule(int exactness) {
  if (exactness < 1 || exactness > kMaxExactness)
    throw ConfigError("triangle_rule: unsupported exactness " + std::to_string(exactness));
  // Duffy (collapsed tensor) rule; the extra factor (1-u) in the Jacobian
  // raises the u-direction degree by one.
  int n = (exactness + 1) / 2 + 1;
  VectorXd x, w;
  gauss_legendre(n, x, w);
  QuadratureRule r;
  r.pts.resize(n * n, 2);
  r.w.resize(n * n);
  int q = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j, ++q) {
      double u = 0.5 * (x[i] + 1.0);
      double v = 0.5 * (x[j] + 1.0);
      r.pts(q, 0) = u;
      r.pts(q, 1) = v * (1.0 - u);
      r.w[q] = 0.25 * w[i] * w[j] * (1.0 - u);
    }
  r.exactness = exactness;
  return r;
}

MappedQuad map_to_triangle(const QuadratureRule& r, const TriPts& pts) {
  MappedQuad m;
  int nq = r.pts.rows();
  m.x.resize(nq, 2);
  for (int q = 0; q < nq; ++q) {
    double l1 = r.pts(q, 0), l2 = r.pts(q, 1), l0 = 1.0 - l1 - l2;
    m.x.row(q) = l0 * pts.row(0) + l1 * pts.row(1) + l2 * pts.row(2);
  }
  m.w = r.w * (2.0 * triangle_area(pts));
  return m;
}

MappedQuad map_to_segment(const QuadratureRule& r, const Vec2& p0, const Vec2& p1) {
  MappedQuad m;
  int nq = r.pts.rows();
  m.x.resize(nq, 2);
  m.s = r.pts.col(0);
  for (int q = 0; q < nq; ++q) {
    double s = m.s[q];
    m.x.row(q) = (0.5 * (1.0 - s) * p0 + 0.5 * (1.0 + s) * p1).transpose();
  }
  m.w = r.w * (0.5 * (p1 - p0).norm());
  return m;
}

} // namespace sdg
