#ifndef SVFLOW_ELEMENT_HPP
#define SVFLOW_ELEMENT_HPP

#include <Eigen/Dense>
#include <array>

#include "svflow/bernstein.hpp"
#include "svflow/dofmap.hpp"
#include "svflow/problems.hpp"
#include "svflow/quadrature.hpp"

namespace svflow {

/// Affine geometry of one triangle: vertex coordinates, area, and the constant
/// barycentric gradients used by the chain rule.
struct ElementGeometry {
  std::array<Eigen::Vector2d, 3> v;
  double area = 0.0;
  Eigen::Matrix<double, 3, 2> grad_lambda;

  ElementGeometry() = default;
  ElementGeometry(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                  const Eigen::Vector2d& c);
  ElementGeometry(const Mesh& mesh, int t);

  Eigen::Vector2d point(const std::array<double, 3>& lam) const {
    return lam[0] * v[0] + lam[1] * v[1] + lam[2] * v[2];
  }
  std::array<double, 3> barycentric(const Eigen::Vector2d& x) const;
};

/// Element matrices of the flow forms, partitioned into boundary (vertex+edge)
/// and interior column/row groups. Dof order: B slots then I slots, component
/// interleaved (see DofMap).
///
///   E: a_K(.,.) for the configured form        (n_b+n_i)^2
///   C: (div u, div v)_K                        (n_b+n_i)^2
///   G: -(psi, div v)_K, interior pressure rows  n_press x (n_b+n_i)
///   L: (f, v)_K + (g, v)_{Gamma_N cap dK}       n_b+n_i
struct ElementBlocks {
  int p = 0;
  int n_b = 0, n_i = 0, n_press = 0;
  Eigen::MatrixXd E, C, G;
  Eigen::VectorXd L;
  int quad_exactness = 0;

  auto E_BB() const { return E.topLeftCorner(n_b, n_b); }
  auto E_BI() const { return E.topRightCorner(n_b, n_i); }
  auto E_IB() const { return E.bottomLeftCorner(n_i, n_b); }
  auto E_II() const { return E.bottomRightCorner(n_i, n_i); }
  auto C_BB() const { return C.topLeftCorner(n_b, n_b); }
  auto C_BI() const { return C.topRightCorner(n_b, n_i); }
  auto C_IB() const { return C.bottomLeftCorner(n_i, n_b); }
  auto C_II() const { return C.bottomRightCorner(n_i, n_i); }
  auto G_B() const { return G.leftCols(n_b); }
  auto G_I() const { return G.rightCols(n_i); }
  auto L_B() const { return L.head(n_b); }
  auto L_I() const { return L.tail(n_i); }
};

/// Local Neumann edge: local edge index (opposite local vertex) on Gamma_N.
struct NeumannEdge {
  int local_edge;
};

/// Quadrature order used for a problem: 2p+2, bumped to 2p+6 when the
/// convection field is not polynomial of known degree.
int assembly_exactness(int p, const FlowProblem& problem);

ElementBlocks element_blocks(const ElementGeometry& geom, int p,
                             const FlowProblem& problem,
                             const std::vector<NeumannEdge>& neumann_edges = {});

/// Same layout as element_blocks but for the (component-block-diagonal) full
/// H1 inner product (u,v) + (grad u, grad v); `seminorm` drops the mass part.
Eigen::MatrixXd element_h1_gram(const ElementGeometry& geom, int p, bool seminorm = false);

/// Exact degree-(p-1) Bernstein coefficients of div v from local velocity
/// coefficients in local slot order (rows in MultiIndexSet(p-1) order).
Eigen::MatrixXd local_divergence_matrix(const ElementGeometry& geom, int p,
                                        const std::vector<int>& set_to_local);

/// Conversion between MultiIndexSet(p) enumeration (2 comps interleaved) and
/// the local slot order of ElementBlocks.
Eigen::VectorXd set_order_to_local(const std::vector<int>& set_to_local,
                                   const Eigen::VectorXd& coeffs_set);
Eigen::VectorXd local_order_to_set(const std::vector<int>& set_to_local,
                                   const Eigen::VectorXd& coeffs_local);

/// Local slot permutation of a mesh-free element (single-triangle contexts
/// such as random-triangle property tests).
std::vector<int> standalone_set_to_local(int p);

/// Interpolates a vector field by collocation at the domain points alpha/p;
/// reproduces any polynomial field of degree <= p. Returns coefficients in
/// MultiIndexSet order, interleaved components.
Eigen::VectorXd interpolate_at_domain_points(const ElementGeometry& geom, int p,
                                             const VectorField& field);

}  // namespace svflow

#endif
