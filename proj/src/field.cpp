#include "svflow/field.hpp"

#include <cmath>
#include <stdexcept>

#include "svflow/quadrature.hpp"

namespace svflow {

SolutionField::SolutionField(const Mesh& mesh, int p) : mesh_(&mesh), p_(p) {
  const MultiIndexSet vel_set(p);
  const MultiIndexSet press_set(p - 1);
  velocity_.assign(mesh.n_triangles(), Eigen::VectorXd::Zero(2 * vel_set.size()));
  pressure_.assign(mesh.n_triangles(), Eigen::VectorXd::Zero(press_set.size()));
  geoms_.reserve(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) geoms_.emplace_back(mesh, t);
}

int SolutionField::locate(const Eigen::Vector2d& x) const {
  int best = -1;
  double best_min = -1e-9;
  for (int t = 0; t < mesh_->n_triangles(); ++t) {
    const auto lam = geoms_[t].barycentric(x);
    const double mn = std::min({lam[0], lam[1], lam[2]});
    if (mn > best_min) {
      best_min = mn;
      best = t;
    }
  }
  return best_min >= -1e-9 ? best : -1;
}

Eigen::Vector2d SolutionField::velocity_in_element(int t,
                                                   const std::array<double, 3>& lam) const {
  const MultiIndexSet set(p_);
  const Eigen::VectorXd b = eval_bernstein(set, lam);
  Eigen::Vector2d u = Eigen::Vector2d::Zero();
  const Eigen::VectorXd& c = velocity_[t];
  for (int i = 0; i < set.size(); ++i) {
    u.x() += c[2 * i] * b[i];
    u.y() += c[2 * i + 1] * b[i];
  }
  return u;
}

Eigen::Vector2d SolutionField::velocity_at(const Eigen::Vector2d& x) const {
  const int t = locate(x);
  if (t < 0) throw std::domain_error("SolutionField: point outside mesh");
  return velocity_in_element(t, geoms_[t].barycentric(x));
}

double SolutionField::pressure_in_element(int t, const std::array<double, 3>& lam) const {
  const MultiIndexSet set(p_ - 1);
  return eval_bernstein(set, lam).dot(pressure_[t]);
}

double SolutionField::pressure_at(const Eigen::Vector2d& x) const {
  const int t = locate(x);
  if (t < 0) throw std::domain_error("SolutionField: point outside mesh");
  return pressure_in_element(t, geoms_[t].barycentric(x));
}

double SolutionField::pressure_mean() const {
  // all Bernstein polynomials of one degree share the integral 2A/((k+1)(k+2))
  const int k = p_ - 1;
  double integral = 0.0;
  for (int t = 0; t < mesh_->n_triangles(); ++t)
    integral += pressure_[t].sum() * bernstein_integral(k, mesh_->area(t));
  return integral / mesh_->total_area();
}

void SolutionField::shift_pressure(double c) {
  for (auto& q : pressure_) q.array() -= c;
}

double divergence_l2(const SolutionField& field) {
  const Mesh& mesh = field.mesh();
  const int p = field.p();
  const MultiIndexSet vel_set(p);
  const MultiIndexSet press_set(p - 1);
  double norm2 = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry geom(mesh, t);
    const Eigen::MatrixXd dmat = divergence_matrix(vel_set, press_set, geom.grad_lambda);
    const Eigen::VectorXd d = dmat * field.velocity()[t];
    const Eigen::MatrixXd m = bernstein_mass(press_set, geom.area);
    norm2 += d.dot(m * d);
  }
  return std::sqrt(std::max(0.0, norm2));
}

double velocity_h1_norm(const SolutionField& field) {
  const Mesh& mesh = field.mesh();
  const int p = field.p();
  const MultiIndexSet set(p);
  const QuadratureRule rule = triangle_rule(2 * p + 2);
  double norm2 = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry geom(mesh, t);
    const Eigen::VectorXd& c = field.velocity()[t];
    for (int q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * geom.area;
      const Eigen::VectorXd b = eval_bernstein(set, rule.points[q]);
      const Eigen::MatrixXd g = eval_bernstein_grad(set, rule.points[q], geom.grad_lambda);
      Eigen::Vector2d u = Eigen::Vector2d::Zero();
      Eigen::Matrix2d gu = Eigen::Matrix2d::Zero();
      for (int i = 0; i < set.size(); ++i) {
        u.x() += c[2 * i] * b[i];
        u.y() += c[2 * i + 1] * b[i];
        gu.row(0) += c[2 * i] * g.row(i);
        gu.row(1) += c[2 * i + 1] * g.row(i);
      }
      norm2 += w * (u.squaredNorm() + gu.squaredNorm());
    }
  }
  return std::sqrt(norm2);
}

ErrorPair error_norms(const SolutionField& field, const ExactSolution& exact,
                      int quad_exactness) {
  const Mesh& mesh = field.mesh();
  const int p = field.p();
  const MultiIndexSet vel_set(p);
  const MultiIndexSet press_set(p - 1);
  const QuadratureRule rule = triangle_rule(quad_exactness);

  // align both pressures to zero mean
  const double field_mean = field.pressure_mean();
  double exact_mean = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry geom(mesh, t);
    for (int q = 0; q < rule.size(); ++q)
      exact_mean += rule.weights[q] * geom.area * exact.pressure(geom.point(rule.points[q]));
  }
  exact_mean /= mesh.total_area();

  double err_u2 = 0.0, norm_u2 = 0.0, err_q2 = 0.0, norm_q2 = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry geom(mesh, t);
    const Eigen::VectorXd& c = field.velocity()[t];
    const Eigen::VectorXd& qq = field.pressure()[t];
    for (int q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * geom.area;
      const Eigen::Vector2d x = geom.point(rule.points[q]);
      const Eigen::VectorXd b = eval_bernstein(vel_set, rule.points[q]);
      const Eigen::MatrixXd g = eval_bernstein_grad(vel_set, rule.points[q], geom.grad_lambda);
      Eigen::Vector2d u = Eigen::Vector2d::Zero();
      Eigen::Matrix2d gu = Eigen::Matrix2d::Zero();
      for (int i = 0; i < vel_set.size(); ++i) {
        u.x() += c[2 * i] * b[i];
        u.y() += c[2 * i + 1] * b[i];
        gu.row(0) += c[2 * i] * g.row(i);
        gu.row(1) += c[2 * i + 1] * g.row(i);
      }
      const Eigen::Vector2d ue = exact.velocity(x);
      const Eigen::Matrix2d ge = exact.velocity_gradient(x);
      err_u2 += w * ((u - ue).squaredNorm() + (gu - ge).squaredNorm());
      norm_u2 += w * (ue.squaredNorm() + ge.squaredNorm());

      const double qv = eval_bernstein(press_set, rule.points[q]).dot(qq) - field_mean;
      const double qe = exact.pressure(x) - exact_mean;
      err_q2 += w * (qv - qe) * (qv - qe);
      norm_q2 += w * qe * qe;
    }
  }
  ErrorPair out;
  out.rel_h1_velocity = std::sqrt(err_u2 / norm_u2);
  out.rel_l2_pressure = norm_q2 > 0 ? std::sqrt(err_q2 / norm_q2) : std::sqrt(err_q2);
  return out;
}

double velocity_h1_diff(const SolutionField& a, const SolutionField& b) {
  const Mesh& mesh = a.mesh();
  const int p = a.p();
  double norm2 = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry geom(mesh, t);
    const Eigen::MatrixXd gram = element_h1_gram(geom, p);
    const std::vector<int> s2l = standalone_set_to_local(p);
    const Eigen::VectorXd d =
        set_order_to_local(s2l, (a.velocity()[t] - b.velocity()[t]).eval());
    norm2 += d.dot(gram * d);
  }
  return std::sqrt(std::max(0.0, norm2));
}

double pressure_l2_norm(const SolutionField& a) {
  const Mesh& mesh = a.mesh();
  const MultiIndexSet press_set(a.p() - 1);
  const double mean = a.pressure_mean();
  double norm2 = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry geom(mesh, t);
    Eigen::VectorXd d = a.pressure()[t];
    d.array() -= mean;
    const Eigen::MatrixXd m = bernstein_mass(press_set, geom.area);
    norm2 += d.dot(m * d);
  }
  return std::sqrt(std::max(0.0, norm2));
}

double pressure_l2_diff(const SolutionField& a, const SolutionField& b) {
  const Mesh& mesh = a.mesh();
  const MultiIndexSet press_set(a.p() - 1);
  const double shift = a.pressure_mean() - b.pressure_mean();
  double norm2 = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry geom(mesh, t);
    Eigen::VectorXd d = a.pressure()[t] - b.pressure()[t];
    d.array() -= shift;  // compare mean-aligned fields
    const Eigen::MatrixXd m = bernstein_mass(press_set, geom.area);
    norm2 += d.dot(m * d);
  }
  return std::sqrt(std::max(0.0, norm2));
}

}  // namespace svflow
