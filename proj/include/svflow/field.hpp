#ifndef SVFLOW_FIELD_HPP
#define SVFLOW_FIELD_HPP

#include <Eigen/Dense>
#include <vector>

#include "svflow/element.hpp"
#include "svflow/mesh.hpp"
#include "svflow/problems.hpp"

namespace svflow {

/// Element-wise Bernstein representation of a discrete (velocity, pressure)
/// pair: velocity coefficients at degree p (MultiIndexSet order, components
/// interleaved), pressure coefficients at degree p-1.
class SolutionField {
 public:
  SolutionField(const Mesh& mesh, int p);

  const Mesh& mesh() const { return *mesh_; }
  int p() const { return p_; }
  std::vector<Eigen::VectorXd>& velocity() { return velocity_; }
  std::vector<Eigen::VectorXd>& pressure() { return pressure_; }
  const std::vector<Eigen::VectorXd>& velocity() const { return velocity_; }
  const std::vector<Eigen::VectorXd>& pressure() const { return pressure_; }

  /// Element containing the point (barycentric tolerance), -1 if outside.
  int locate(const Eigen::Vector2d& x) const;
  Eigen::Vector2d velocity_at(const Eigen::Vector2d& x) const;
  Eigen::Vector2d velocity_in_element(int t, const std::array<double, 3>& lam) const;
  double pressure_at(const Eigen::Vector2d& x) const;
  double pressure_in_element(int t, const std::array<double, 3>& lam) const;

  /// Area-weighted mean of the pressure field (closed form).
  double pressure_mean() const;
  void shift_pressure(double c);

 private:
  const Mesh* mesh_;
  int p_;
  std::vector<Eigen::VectorXd> velocity_;
  std::vector<Eigen::VectorXd> pressure_;
  std::vector<ElementGeometry> geoms_;
};

/// Exact L2 norm of div u via the degree-(p-1) coefficient representation and
/// the closed-form Bernstein mass (no quadrature).
double divergence_l2(const SolutionField& field);

/// Full H1 norm of the velocity, by quadrature at exactness 2p+2.
double velocity_h1_norm(const SolutionField& field);

struct ErrorPair {
  double rel_h1_velocity = 0.0;
  double rel_l2_pressure = 0.0;
};
/// Relative H1 velocity and L2 pressure errors against an exact solution,
/// element-wise quadrature at the given exactness; pressures are compared
/// after aligning both to zero mean.
ErrorPair error_norms(const SolutionField& field, const ExactSolution& exact,
                      int quad_exactness);

/// H1 norm of the velocity difference of two fields on the same mesh/degree.
double velocity_h1_diff(const SolutionField& a, const SolutionField& b);
/// L2 norm of the pressure difference after aligning both means.
double pressure_l2_diff(const SolutionField& a, const SolutionField& b);
/// L2 norm of the mean-aligned pressure (closed-form mass).
double pressure_l2_norm(const SolutionField& a);

}  // namespace svflow

#endif
