#ifndef SVFLOW_BERNSTEIN_HPP
#define SVFLOW_BERNSTEIN_HPP

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace svflow {

using Index3 = std::array<int, 3>;

/// Enumeration of the multi-indices {alpha in Z^3_+ : |alpha| = k} together
/// with the interior mask {alpha : alpha_i < k for all i}, i.e. the indices of
/// the Bernstein polynomials that vanish at the triangle vertices.
class MultiIndexSet {
 public:
  explicit MultiIndexSet(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(indices_.size()); }
  const Index3& operator[](int i) const { return indices_[i]; }
  const std::vector<Index3>& indices() const { return indices_; }

  /// Position of (a0,a1,a2) in the enumeration.
  int index_of(int a0, int a1, int a2) const;
  int index_of(const Index3& a) const { return index_of(a[0], a[1], a[2]); }

  bool is_interior(int i) const { return interior_mask_[i]; }
  /// Positions of the interior indices, in enumeration order.
  const std::vector<int>& interior() const { return interior_; }

 private:
  int degree_;
  std::vector<Index3> indices_;
  std::vector<char> interior_mask_;
  std::vector<int> interior_;
  std::vector<int> lookup_;  // (k+1)*(k+1) table over (a0, a1)
};

double binomial(int n, int k);
double multinomial(int k, const Index3& a);

/// Values of all B^k_alpha at a barycentric point, in MultiIndexSet order.
/// Sum over alpha is 1 at every admissible point.
Eigen::VectorXd eval_bernstein(const MultiIndexSet& set,
                               const std::array<double, 3>& lam);

/// Barycentric-direction derivatives dB^k_alpha/dlambda_i; column i holds the
/// derivative with respect to lambda_i. Physical gradients follow by the chain
/// rule with the (constant) barycentric gradients of the triangle.
Eigen::MatrixXd eval_bernstein_dlam(const MultiIndexSet& set,
                                    const std::array<double, 3>& lam);

/// Physical-space gradients (rows: basis functions, cols: x/y) given the
/// barycentric gradient matrix grad_lambda (3x2).
Eigen::MatrixXd eval_bernstein_grad(const MultiIndexSet& set,
                                    const std::array<double, 3>& lam,
                                    const Eigen::Matrix<double, 3, 2>& grad_lambda);

/// Closed-form mass matrix int_K B^k_a B^k_b over a triangle of given area.
Eigen::MatrixXd bernstein_mass(const MultiIndexSet& set, double area);

/// Closed-form int_K B^k_alpha = 2*area/((k+1)(k+2)), equal for all alpha.
double bernstein_integral(int degree, double area);

/// Interior pressure basis on one element: functions B^{p-1}_alpha -
/// B^{p-1}_gamma for alpha in the interior set minus a fixed anchor gamma
/// (lexicographically smallest interior index). A basis of the mean-zero
/// degree-(p-1) polynomials vanishing at the vertices; size p(p+1)/2 - 4.
struct InteriorPressureBasis {
  int p;                     // velocity degree; basis lives at degree p-1
  int anchor;                // position of gamma in the degree-(p-1) set
  std::vector<int> members;  // positions of alpha != gamma, set order
  int size() const { return static_cast<int>(members.size()); }
};
InteriorPressureBasis interior_pressure_basis(int p);

/// Exact Bernstein coefficients of div v at degree p-1 from the velocity
/// coefficients (2 per scalar basis function, x-component first), given the
/// barycentric gradients of the triangle. Row r of the returned matrix maps
/// velocity coefficients to the degree-(p-1) coefficient at position r.
Eigen::MatrixXd divergence_matrix(const MultiIndexSet& vel_set,
                                  const MultiIndexSet& press_set,
                                  const Eigen::Matrix<double, 3, 2>& grad_lambda);

}  // namespace svflow

#endif
