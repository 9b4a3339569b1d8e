#ifndef SVFLOW_QUADRATURE_HPP
#define SVFLOW_QUADRATURE_HPP

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace svflow {

/// Quadrature rule on the reference triangle in barycentric coordinates.
/// Weights are area-normalized (they sum to 1), so an integral over a physical
/// triangle K is area(K) * sum_i w_i f(x_i).
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  Eigen::VectorXd weights;
  int exactness = 0;
  int size() const { return static_cast<int>(points.size()); }
};

/// Rule exact for all polynomials of total degree <= exactness, built from
/// collapsed-coordinate tensor Gauss-Legendre rules.
QuadratureRule triangle_rule(int exactness);

/// Gauss-Legendre rule on [0,1]; weights sum to 1.
struct SegmentRule {
  Eigen::VectorXd t;
  Eigen::VectorXd w;
  int exactness = 0;
  int size() const { return static_cast<int>(t.size()); }
};
SegmentRule segment_rule(int exactness);

}  // namespace svflow

#endif
