#include "svflow/element.hpp"

#include <stdexcept>

namespace svflow {

ElementGeometry::ElementGeometry(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                 const Eigen::Vector2d& c)
    : v{a, b, c} {
  const Eigen::Vector2d e1 = b - a, e2 = c - a;
  const double signed2 = e1.x() * e2.y() - e1.y() * e2.x();
  if (signed2 <= 0.0) throw std::invalid_argument("ElementGeometry: triangle not CCW");
  area = 0.5 * signed2;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d e = v[(i + 2) % 3] - v[(i + 1) % 3];
    grad_lambda(i, 0) = -e.y() / signed2;
    grad_lambda(i, 1) = e.x() / signed2;
  }
}

ElementGeometry::ElementGeometry(const Mesh& mesh, int t)
    : ElementGeometry(mesh.vertex(mesh.triangle(t)[0]), mesh.vertex(mesh.triangle(t)[1]),
                      mesh.vertex(mesh.triangle(t)[2])) {}

std::array<double, 3> ElementGeometry::barycentric(const Eigen::Vector2d& x) const {
  Eigen::Matrix2d a;
  a.col(0) = v[1] - v[0];
  a.col(1) = v[2] - v[0];
  const Eigen::Vector2d s = a.inverse() * (x - v[0]);
  return {1.0 - s.x() - s.y(), s.x(), s.y()};
}

int assembly_exactness(int p, const FlowProblem& problem) {
  int ex = 2 * p + 2;
  if (problem.form.has_convection() && !problem.form.convection_degree) ex = 2 * p + 6;
  return ex;
}

ElementBlocks element_blocks(const ElementGeometry& geom, int p,
                             const FlowProblem& problem,
                             const std::vector<NeumannEdge>& neumann_edges) {
  if (p < 4) throw std::invalid_argument("element_blocks: requires p >= 4");
  const MultiIndexSet vel_set(p);
  const MultiIndexSet press_set(p - 1);
  const InteriorPressureBasis pbasis = interior_pressure_basis(p);
  const std::vector<int> s2l = standalone_set_to_local(p);

  const int n = vel_set.size();
  const int nb_s = 3 * p;
  const int ni_s = (p - 1) * (p - 2) / 2;

  ElementBlocks blocks;
  blocks.p = p;
  blocks.n_b = 2 * nb_s;
  blocks.n_i = 2 * ni_s;
  blocks.n_press = pbasis.size();
  blocks.quad_exactness = assembly_exactness(p, problem);

  const FlowForm& form = problem.form;
  const double eps_coef = 2.0 * form.nu * (form.kind == FormKind::Perturbed ? form.delta : 1.0);
  const double conv_coef =
      form.has_convection() ? (form.kind == FormKind::Perturbed ? form.delta : 1.0) : 0.0;
  const double mass_coef = (form.kind == FormKind::Perturbed) ? 1.0 : 0.0;

  // accumulate scalar-level matrices in MultiIndexSet order
  Eigen::MatrixXd k1 = Eigen::MatrixXd::Zero(n, n);            // grad . grad
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(n, n);          // values
  Eigen::MatrixXd conv = Eigen::MatrixXd::Zero(n, n);          // N_t (w . g_s)
  std::array<std::array<Eigen::MatrixXd, 2>, 2> outer;         // g_{t,c} g_{s,d}
  for (int c = 0; c < 2; ++c)
    for (int d = 0; d < 2; ++d) outer[c][d] = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd gpress = Eigen::MatrixXd::Zero(pbasis.size(), 2 * n);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(2 * n);

  const QuadratureRule rule = triangle_rule(blocks.quad_exactness);
  for (int q = 0; q < rule.size(); ++q) {
    const double w = rule.weights[q] * geom.area;
    const auto& lam = rule.points[q];
    const Eigen::VectorXd nv = eval_bernstein(vel_set, lam);
    const Eigen::MatrixXd gd = eval_bernstein_grad(vel_set, lam, geom.grad_lambda);
    const Eigen::Vector2d x = geom.point(lam);

    k1.noalias() += w * (gd * gd.transpose());
    for (int c = 0; c < 2; ++c)
      for (int d = 0; d < 2; ++d)
        outer[c][d].noalias() += w * (gd.col(c) * gd.col(d).transpose());
    if (mass_coef != 0.0) mass.noalias() += w * (nv * nv.transpose());
    if (conv_coef != 0.0) {
      const Eigen::Vector2d wx = form.convection(x);
      conv.noalias() += w * (nv * (gd * wx).transpose());
    }

    const Eigen::VectorXd pv = eval_bernstein(press_set, lam);
    Eigen::VectorXd psi(pbasis.size());
    for (int m = 0; m < pbasis.size(); ++m)
      psi[m] = pv[pbasis.members[m]] - pv[pbasis.anchor];
    for (int c = 0; c < 2; ++c)
      gpress.block(0, c * n, pbasis.size(), n).noalias() -=
          w * (psi * gd.col(c).transpose());

    const Eigen::Vector2d f = problem.body_force(x);
    for (int c = 0; c < 2; ++c) load.segment(c * n, n) += (w * f[c]) * nv;
  }

  // Neumann traction terms on tagged local edges
  if (!neumann_edges.empty() && problem.neumann_traction) {
    const SegmentRule seg = segment_rule(blocks.quad_exactness);
    for (const NeumannEdge& ne : neumann_edges) {
      const int e = ne.local_edge;
      const int j = (e + 1) % 3, k = (e + 2) % 3;
      const double len = (geom.v[k] - geom.v[j]).norm();
      for (int q = 0; q < seg.size(); ++q) {
        std::array<double, 3> lam{0.0, 0.0, 0.0};
        lam[j] = 1.0 - seg.t[q];
        lam[k] = seg.t[q];
        const Eigen::VectorXd nv = eval_bernstein(vel_set, lam);
        const Eigen::Vector2d g = (*problem.neumann_traction)(geom.point(lam));
        const double w = seg.w[q] * len;
        for (int c = 0; c < 2; ++c) load.segment(c * n, n) += (w * g[c]) * nv;
      }
    }
  }

  // scatter to the local slot layout (B group first, components interleaved)
  const int ndof = blocks.n_b + blocks.n_i;
  blocks.E.setZero(ndof, ndof);
  blocks.C.setZero(ndof, ndof);
  blocks.G.setZero(blocks.n_press, ndof);
  blocks.L.setZero(ndof);
  for (int i = 0; i < n; ++i) {
    const int st = s2l[i];
    for (int j = 0; j < n; ++j) {
      const int ss = s2l[j];
      const double visc_iso = 0.5 * eps_coef * k1(i, j);
      const double iso = conv_coef * conv(i, j) + mass_coef * mass(i, j);
      for (int d = 0; d < 2; ++d) {
        for (int c = 0; c < 2; ++c) {
          double e = 0.5 * eps_coef * outer[c][d](i, j);
          if (c == d) e += visc_iso + iso;
          blocks.E(2 * st + d, 2 * ss + c) = e;
          blocks.C(2 * st + d, 2 * ss + c) = outer[d][c](i, j);
        }
      }
    }
    for (int m = 0; m < blocks.n_press; ++m)
      for (int c = 0; c < 2; ++c) blocks.G(m, 2 * st + c) = gpress(m, c * n + i);
    for (int c = 0; c < 2; ++c) blocks.L[2 * st + c] = load[c * n + i];
  }
  return blocks;
}

Eigen::MatrixXd element_h1_gram(const ElementGeometry& geom, int p, bool seminorm) {
  const MultiIndexSet set(p);
  const std::vector<int> s2l = standalone_set_to_local(p);
  const int n = set.size();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  const QuadratureRule rule = triangle_rule(2 * p + 2);
  for (int q = 0; q < rule.size(); ++q) {
    const double w = rule.weights[q] * geom.area;
    const Eigen::MatrixXd gd = eval_bernstein_grad(set, rule.points[q], geom.grad_lambda);
    gram.noalias() += w * (gd * gd.transpose());
    if (!seminorm) {
      const Eigen::VectorXd nv = eval_bernstein(set, rule.points[q]);
      gram.noalias() += w * (nv * nv.transpose());
    }
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int c = 0; c < 2; ++c) out(2 * s2l[i] + c, 2 * s2l[j] + c) = gram(i, j);
  return out;
}

Eigen::MatrixXd local_divergence_matrix(const ElementGeometry& geom, int p,
                                        const std::vector<int>& set_to_local) {
  const MultiIndexSet vel_set(p);
  const MultiIndexSet press_set(p - 1);
  const Eigen::MatrixXd d = divergence_matrix(vel_set, press_set, geom.grad_lambda);
  Eigen::MatrixXd out(d.rows(), d.cols());
  for (int i = 0; i < vel_set.size(); ++i)
    for (int c = 0; c < 2; ++c) out.col(2 * set_to_local[i] + c) = d.col(2 * i + c);
  return out;
}

Eigen::VectorXd set_order_to_local(const std::vector<int>& set_to_local,
                                   const Eigen::VectorXd& coeffs_set) {
  Eigen::VectorXd out(coeffs_set.size());
  for (size_t i = 0; i < set_to_local.size(); ++i)
    for (int c = 0; c < 2; ++c) out[2 * set_to_local[i] + c] = coeffs_set[2 * i + c];
  return out;
}

Eigen::VectorXd local_order_to_set(const std::vector<int>& set_to_local,
                                   const Eigen::VectorXd& coeffs_local) {
  Eigen::VectorXd out(coeffs_local.size());
  for (size_t i = 0; i < set_to_local.size(); ++i)
    for (int c = 0; c < 2; ++c) out[2 * i + c] = coeffs_local[2 * set_to_local[i] + c];
  return out;
}

std::vector<int> standalone_set_to_local(int p) {
  const MultiIndexSet set(p);
  std::vector<int> s2l(set.size(), -1);
  int interior_count = 0;
  for (int i = 0; i < set.size(); ++i) {
    const Index3& a = set[i];
    int zero_count = 0, zero_pos = -1;
    for (int c = 0; c < 3; ++c)
      if (a[c] == 0) {
        ++zero_count;
        zero_pos = c;
      }
    if (zero_count == 2) {
      int v = 0;
      while (a[v] != p) ++v;
      s2l[i] = v;
    } else if (zero_count == 1) {
      const int e = zero_pos;
      const int k = (e + 2) % 3;
      s2l[i] = 3 + e * (p - 1) + (a[k] - 1);
    } else {
      s2l[i] = 3 * p + interior_count++;
    }
  }
  return s2l;
}

Eigen::VectorXd interpolate_at_domain_points(const ElementGeometry& geom, int p,
                                             const VectorField& field) {
  const MultiIndexSet set(p);
  const int n = set.size();
  Eigen::MatrixXd colloc(n, n);
  Eigen::MatrixXd values(n, 2);
  for (int q = 0; q < n; ++q) {
    const Index3& a = set[q];
    const std::array<double, 3> lam{double(a[0]) / p, double(a[1]) / p, double(a[2]) / p};
    colloc.row(q) = eval_bernstein(set, lam).transpose();
    values.row(q) = field(geom.point(lam)).transpose();
  }
  const Eigen::MatrixXd coeffs = Eigen::PartialPivLU<Eigen::MatrixXd>(colloc).solve(values);
  Eigen::VectorXd out(2 * n);
  for (int i = 0; i < n; ++i) {
    out[2 * i] = coeffs(i, 0);
    out[2 * i + 1] = coeffs(i, 1);
  }
  return out;
}

}  // namespace svflow
