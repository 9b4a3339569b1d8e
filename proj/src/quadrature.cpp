#include "svflow/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace svflow {

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

}  // namespace

SegmentRule segment_rule(int exactness) {
  if (exactness < 0) throw std::invalid_argument("segment_rule: negative exactness");
  const int n = exactness / 2 + 1;  // n-point GL is exact to degree 2n-1
  Eigen::VectorXd x, w;
  gauss_legendre(n, x, w);
  SegmentRule rule;
  rule.t = (x.array() + 1.0) * 0.5;
  rule.w = w * 0.5;
  rule.exactness = 2 * n - 1;
  return rule;
}

QuadratureRule triangle_rule(int exactness) {
  if (exactness < 0) throw std::invalid_argument("triangle_rule: negative exactness");
  // Duffy map (u,v) in [0,1]^2 -> (lam1, lam2, lam3) = ((1-u)(1-v), u(1-v), v)
  // with Jacobian factor (1-v): a degree-d integrand has degree <= d in u and
  // <= d+1 in v after the transform.
  const int d = exactness;
  const int n = (d + 2) / 2 + 1;
  Eigen::VectorXd x, w;
  gauss_legendre(n, x, w);
  Eigen::VectorXd u = (x.array() + 1.0) * 0.5;
  Eigen::VectorXd wu = w * 0.5;
  QuadratureRule rule;
  rule.exactness = d;
  rule.points.reserve(n * n);
  rule.weights.resize(n * n);
  int idx = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double uu = u[i], vv = u[j];
      const double l2 = uu * (1.0 - vv);
      const double l3 = vv;
      rule.points.push_back({1.0 - l2 - l3, l2, l3});
      rule.weights[idx++] = 2.0 * wu[i] * wu[j] * (1.0 - vv);
    }
  }
  return rule;
}

}  // namespace svflow
