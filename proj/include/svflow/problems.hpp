#ifndef SVFLOW_PROBLEMS_HPP
#define SVFLOW_PROBLEMS_HPP

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "svflow/dofmap.hpp"
#include "svflow/mesh.hpp"

namespace svflow {

using ScalarField = std::function<double(const Eigen::Vector2d&)>;
using VectorField = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;
using MatrixField = std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>;

enum class FormKind { Stokes, Oseen, Perturbed };

/// Bilinear form a(u,v): 2*nu*(eps(u),eps(v)) for Stokes, plus ((w.grad)u, v)
/// for Oseen, and (u,v) + delta*{Oseen form} for the perturbed variant.
struct FlowForm {
  FormKind kind = FormKind::Stokes;
  double nu = 1.0;
  double delta = 1.0;  // perturbed variant only
  VectorField convection;
  /// Degree when the convection field is polynomial; empty means
  /// non-polynomial, which bumps the assembly quadrature order.
  std::optional<int> convection_degree;

  bool has_convection() const { return kind != FormKind::Stokes; }
};

struct ExactSolution {
  VectorField velocity;
  MatrixField velocity_gradient;  // row i = grad of component i
  ScalarField pressure;           // mean-adjusted
};

struct FlowProblem {
  FlowForm form;
  VectorField body_force;
  std::optional<VectorField> neumann_traction;
  VectorField dirichlet_data;
  std::optional<ExactSolution> exact;
};

/// Oseen benchmark on (-0.5,2)x(-0.5,1.5): convection equals the exact
/// velocity, f = 0, full Dirichlet with the exact trace. kappa = 1/(2 nu) -
/// sqrt(1/(4 nu^2) + 4 pi^2); the pressure mean is removed in closed form.
FlowProblem kovasznay_problem(double nu = 0.1);
std::array<double, 4> kovasznay_domain();
double kovasznay_kappa(double nu);

/// Lid-driven Stokes flow in the wedge: u = (1 - x^2, 0) on the lid, zero on
/// the remaining (Dirichlet) boundary, f = 0, nu = 1.
FlowProblem moffatt_problem();

/// Boundary values for all constrained dofs: vertex dofs interpolate the data;
/// edge dofs come from a per-edge L2 projection of the residual constrained to
/// preserve each edge's data integral (so the discrete trace carries the exact
/// boundary flux). Returns a vector over boundary dofs, zero on free dofs.
Eigen::VectorXd dirichlet_lift(const DofMap& dofmap, const VectorField& data);

/// Integral of data . n over the Dirichlet boundary (compatibility check).
double dirichlet_flux(const Mesh& mesh, const VectorField& data, int quad_exactness = 30);

/// L2(Gamma_D) norm of (lift - data), by edgewise quadrature.
double lift_trace_error(const DofMap& dofmap, const Eigen::VectorXd& lift,
                        const VectorField& data, int quad_exactness = 40);

}  // namespace svflow

#endif
