#include "svflow/problems.hpp"

#include <cmath>

#include "svflow/quadrature.hpp"

namespace svflow {

double kovasznay_kappa(double nu) {
  return 0.5 / nu - std::sqrt(0.25 / (nu * nu) + 4.0 * M_PI * M_PI);
}

std::array<double, 4> kovasznay_domain() { return {-0.5, -0.5, 2.0, 1.5}; }

FlowProblem kovasznay_problem(double nu) {
  if (nu <= 0.0) throw std::invalid_argument("kovasznay_problem: nu must be positive");
  const double kappa = kovasznay_kappa(nu);
  auto velocity = [kappa](const Eigen::Vector2d& x) {
    const double ex = std::exp(kappa * x.x());
    return Eigen::Vector2d(1.0 - ex * std::cos(2.0 * M_PI * x.y()),
                           kappa / (2.0 * M_PI) * ex * std::sin(2.0 * M_PI * x.y()));
  };
  auto gradient = [kappa](const Eigen::Vector2d& x) {
    const double ex = std::exp(kappa * x.x());
    const double c = std::cos(2.0 * M_PI * x.y()), s = std::sin(2.0 * M_PI * x.y());
    Eigen::Matrix2d g;
    g(0, 0) = -kappa * ex * c;
    g(0, 1) = 2.0 * M_PI * ex * s;
    g(1, 0) = kappa * kappa / (2.0 * M_PI) * ex * s;
    g(1, 1) = kappa * ex * c;
    return g;
  };
  // mean of -exp(2 kappa x)/2 over the rectangle, in closed form
  const auto dom = kovasznay_domain();
  const double x0 = dom[0], x1 = dom[2];
  const double qbar = -(std::exp(2.0 * kappa * x1) - std::exp(2.0 * kappa * x0)) /
                      (4.0 * kappa * (x1 - x0));
  auto pressure = [kappa, qbar](const Eigen::Vector2d& x) {
    return -0.5 * std::exp(2.0 * kappa * x.x()) - qbar;
  };

  FlowProblem prob;
  prob.form.kind = FormKind::Oseen;
  prob.form.nu = nu;
  prob.form.convection = velocity;
  prob.form.convection_degree = std::nullopt;  // exponential field
  prob.body_force = [](const Eigen::Vector2d&) { return Eigen::Vector2d::Zero().eval(); };
  prob.dirichlet_data = velocity;
  prob.exact = ExactSolution{velocity, gradient, pressure};
  return prob;
}

FlowProblem moffatt_problem() {
  FlowProblem prob;
  prob.form.kind = FormKind::Stokes;
  prob.form.nu = 1.0;
  prob.body_force = [](const Eigen::Vector2d&) { return Eigen::Vector2d::Zero().eval(); };
  prob.dirichlet_data = [](const Eigen::Vector2d& x) {
    // lid profile on y = 0, zero on the walls; 1 - x^2 vanishes at the lid
    // corners so the data is continuous
    if (std::abs(x.y()) < 1e-12) return Eigen::Vector2d(1.0 - x.x() * x.x(), 0.0);
    return Eigen::Vector2d(0.0, 0.0);
  };
  return prob;
}

Eigen::VectorXd dirichlet_lift(const DofMap& dofmap, const VectorField& data) {
  const Mesh& mesh = dofmap.mesh();
  const int p = dofmap.p();
  Eigen::VectorXd lift = Eigen::VectorXd::Zero(dofmap.n_boundary_dofs());

  for (int v : dofmap.dirichlet_vertices()) {
    const Eigen::Vector2d g = data(mesh.vertex(v));
    lift[dofmap.vertex_dof(v, 0)] = g.x();
    lift[dofmap.vertex_dof(v, 1)] = g.y();
  }

  // per-edge constrained L2 projection of the endpoint-corrected residual onto
  // the edge bubble span {B^p_k, 1 <= k <= p-1}
  const int m = p - 1;
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
  for (int k = 1; k <= m; ++k) {
    for (int l = 1; l <= m; ++l)
      kkt(k - 1, l - 1) =
          binomial(p, k) * binomial(p, l) / (binomial(2 * p, k + l) * (2 * p + 1));
    kkt(k - 1, m) = 1.0 / (p + 1);  // int_0^1 B^p_k dt
    kkt(m, k - 1) = 1.0 / (p + 1);
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> kkt_lu(kkt);

  const SegmentRule rule = segment_rule(2 * p + 8);
  for (int e : dofmap.dirichlet_edges()) {
    const auto& edge = mesh.edges()[e];
    const Eigen::Vector2d pa = mesh.vertex(edge.a), pb = mesh.vertex(edge.b);
    const Eigen::Vector2d ga = data(pa), gb = data(pb);
    for (int comp = 0; comp < 2; ++comp) {
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
      for (int q = 0; q < rule.size(); ++q) {
        const double t = rule.t[q];
        const Eigen::Vector2d x = (1.0 - t) * pa + t * pb;
        const double endpoint =
            ga[comp] * std::pow(1.0 - t, p) + gb[comp] * std::pow(t, p);
        const double r = data(x)[comp] - endpoint;
        for (int k = 1; k <= m; ++k)
          rhs[k - 1] += rule.w[q] * r * binomial(p, k) * std::pow(1.0 - t, p - k) *
                        std::pow(t, k);
        rhs[m] += rule.w[q] * r;
      }
      const Eigen::VectorXd sol = kkt_lu.solve(rhs);
      for (int k = 1; k <= m; ++k) lift[dofmap.edge_dof(e, k - 1, comp)] = sol[k - 1];
    }
  }
  return lift;
}

double dirichlet_flux(const Mesh& mesh, const VectorField& data, int quad_exactness) {
  const SegmentRule rule = segment_rule(quad_exactness);
  double flux = 0.0;
  for (const auto& edge : mesh.edges()) {
    if (edge.boundary_idx < 0) continue;
    const auto& be = mesh.boundary_edges()[edge.boundary_idx];
    if (be.tag != BoundaryTag::Dirichlet) continue;
    // outward normal from the (CCW) incident triangle: edge a->b oriented so
    // the triangle lies on the left
    const auto& tri = mesh.triangle(edge.elems[0]);
    int i = 0;
    while (tri[i] == edge.a || tri[i] == edge.b) ++i;
    const int a = tri[(i + 1) % 3], b = tri[(i + 2) % 3];
    const Eigen::Vector2d pa = mesh.vertex(a), pb = mesh.vertex(b);
    const Eigen::Vector2d tangent = pb - pa;
    const Eigen::Vector2d normal(tangent.y(), -tangent.x());  // outward, length = |e|
    for (int q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d x = (1.0 - rule.t[q]) * pa + rule.t[q] * pb;
      flux += rule.w[q] * data(x).dot(normal);
    }
  }
  return flux;
}

double lift_trace_error(const DofMap& dofmap, const Eigen::VectorXd& lift,
                        const VectorField& data, int quad_exactness) {
  const Mesh& mesh = dofmap.mesh();
  const int p = dofmap.p();
  const SegmentRule rule = segment_rule(quad_exactness);
  double err2 = 0.0;
  for (int e : dofmap.dirichlet_edges()) {
    const auto& edge = mesh.edges()[e];
    const Eigen::Vector2d pa = mesh.vertex(edge.a), pb = mesh.vertex(edge.b);
    const double len = (pb - pa).norm();
    for (int q = 0; q < rule.size(); ++q) {
      const double t = rule.t[q];
      const Eigen::Vector2d x = (1.0 - t) * pa + t * pb;
      for (int comp = 0; comp < 2; ++comp) {
        double val = lift[dofmap.vertex_dof(edge.a, comp)] * std::pow(1.0 - t, p) +
                     lift[dofmap.vertex_dof(edge.b, comp)] * std::pow(t, p);
        for (int k = 1; k <= p - 1; ++k)
          val += lift[dofmap.edge_dof(e, k - 1, comp)] * binomial(p, k) *
                 std::pow(1.0 - t, p - k) * std::pow(t, k);
        const double diff = val - data(x)[comp];
        err2 += rule.w[q] * len * diff * diff;
      }
    }
  }
  return std::sqrt(err2);
}

}  // namespace svflow
