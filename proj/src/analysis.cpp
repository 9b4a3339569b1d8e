#include "svflow/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <sstream>

namespace svflow {

namespace {

// dense pairing matrix (div phi_j, m)_Omega: rows elementwise degree-(p-1)
// Bernstein tests, columns free velocity dofs
Eigen::MatrixXd divergence_pairing(const DofMap& dofmap) {
  const Mesh& mesh = dofmap.mesh();
  const int p = dofmap.p();
  const MultiIndexSet press_set(p - 1);
  const int rows_per_elem = press_set.size();
  const long rows = long(rows_per_elem) * mesh.n_triangles();
  const long cols = dofmap.n_free_boundary() + dofmap.n_interior_dofs();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(rows, cols);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry geom(mesh, t);
    const Eigen::MatrixXd d = local_divergence_matrix(geom, p, dofmap.set_to_local(t));
    const Eigen::MatrixXd pairing = bernstein_mass(press_set, geom.area) * d;
    const auto& gather = dofmap.boundary_gather(t);
    const int nb = dofmap.n_b(), ni = dofmap.n_i();
    for (int c = 0; c < nb; ++c) {
      const int fc = dofmap.free_boundary_index(gather[c]);
      if (fc < 0) continue;
      b.block(long(t) * rows_per_elem, fc, rows_per_elem, 1) += pairing.col(c);
    }
    const long ibase =
        dofmap.n_free_boundary() + (dofmap.interior_base(t) - dofmap.n_boundary_dofs());
    b.block(long(t) * rows_per_elem, ibase, rows_per_elem, ni) = pairing.rightCols(ni);
  }
  return b;
}

}  // namespace

std::vector<double> EddyScan::intensity_ratios() const {
  std::vector<double> out;
  for (size_t i = 0; i + 1 < peak_speeds.size(); ++i)
    out.push_back(peak_speeds[i] / peak_speeds[i + 1]);
  return out;
}

EddyScan moffatt_eddy_scan(const SolutionField& field, int n_samples) {
  const Mesh& mesh = field.mesh();
  double y_min = 0.0, y_max = 0.0;
  for (const auto& v : mesh.vertices()) {
    y_min = std::min(y_min, v.y());
    y_max = std::max(y_max, v.y());
  }
  const double depth = y_max - y_min;

  EddyScan scan;
  double band_peak = 0.0;
  double prev_sign = 0.0;
  // log-spaced distances from the apex, starting just below the lid
  const double t_top = 0.995, t_bottom = 1e-5;
  for (int i = 0; i < n_samples; ++i) {
    const double t =
        t_top * std::pow(t_bottom / t_top, double(i) / (n_samples - 1));
    const Eigen::Vector2d x(0.0, y_max - depth * (1.0 - t));
    const int elem = field.locate(x);
    if (elem < 0) continue;
    const double u1 = field.velocity_at(x).x();
    if (std::abs(u1) < 1e-14) continue;  // below round-off, sign meaningless
    band_peak = std::max(band_peak, std::abs(u1));
    const double sign = u1 > 0 ? 1.0 : -1.0;
    if (prev_sign != 0.0 && sign != prev_sign) {
      ++scan.sign_alternations;
      scan.alternation_y.push_back(x.y());
      scan.peak_speeds.push_back(band_peak);
      band_peak = std::abs(u1);
    }
    prev_sign = sign;
  }
  if (band_peak > 0.0) scan.peak_speeds.push_back(band_peak);
  return scan;
}

bool dense_guard_ok(const DofMap& dofmap) {
  const long rows =
      long(dofmap.p()) * (dofmap.p() + 1) / 2 * dofmap.mesh().n_triangles();
  const long cols = dofmap.n_free_boundary() + dofmap.n_interior_dofs();
  return rows <= 20000 && cols <= 20000;
}

int global_div_rank(const DofMap& dofmap) {
  if (!dense_guard_ok(dofmap))
    throw std::invalid_argument("global_div_rank: mesh too large for dense rank");
  const Eigen::MatrixXd b = divergence_pairing(dofmap);
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(b);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double thr = 1e-9 * sv[0];
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > thr) ++rank;
  return rank;
}

double infsup_estimate(const DofMap& dofmap, H1Variant variant) {
  if (!dense_guard_ok(dofmap))
    throw std::invalid_argument("infsup_estimate: mesh too large for dense eigensolve");
  const Mesh& mesh = dofmap.mesh();
  const int p = dofmap.p();
  const MultiIndexSet press_set(p - 1);
  const long nfree = dofmap.n_free_boundary() + dofmap.n_interior_dofs();

  // H1 Gram on the velocity space
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(nfree, nfree);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry geom(mesh, t);
    const Eigen::MatrixXd gram =
        element_h1_gram(geom, p, variant == H1Variant::Seminorm);
    const auto& gather = dofmap.boundary_gather(t);
    const int nb = dofmap.n_b(), ni = dofmap.n_i();
    std::vector<long> fidx(nb + ni, -1);
    for (int r = 0; r < nb; ++r) fidx[r] = dofmap.free_boundary_index(gather[r]);
    const long ibase =
        dofmap.n_free_boundary() + (dofmap.interior_base(t) - dofmap.n_boundary_dofs());
    for (int r = 0; r < ni; ++r) fidx[nb + r] = ibase + r;
    for (int r = 0; r < nb + ni; ++r) {
      if (fidx[r] < 0) continue;
      for (int c = 0; c < nb + ni; ++c)
        if (fidx[c] >= 0) k(fidx[r], fidx[c]) += gram(r, c);
    }
  }

  const Eigen::MatrixXd b = divergence_pairing(dofmap);
  const long w_dim = b.rows();

  // pressure mass (block diagonal over elements)
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(w_dim, w_dim);
  const int rpe = press_set.size();
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry geom(mesh, t);
    m.block(long(t) * rpe, long(t) * rpe, rpe, rpe) = bernstein_mass(press_set, geom.area);
  }

  const Eigen::LLT<Eigen::MatrixXd> k_llt(k);
  if (k_llt.info() != Eigen::Success)
    throw std::runtime_error("infsup_estimate: H1 Gram not positive definite");
  const Eigen::MatrixXd s = b * k_llt.solve(b.transpose());

  const Eigen::LLT<Eigen::MatrixXd> m_llt(m);
  const Eigen::MatrixXd l_inv_s =
      m_llt.matrixL().solve(m_llt.matrixL().solve(s).transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(l_inv_s);
  const Eigen::VectorXd ev = eig.eigenvalues();
  const double max_ev = ev.maxCoeff();
  const double thr = 1e-10 * max_ev;
  double min_nonzero = max_ev;
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > thr) min_nonzero = std::min(min_nonzero, ev[i]);
  return std::sqrt(min_nonzero);
}

Eigen::MatrixXd interior_nullspace(const ElementBlocks& blocks) {
  const Eigen::MatrixXd gi = blocks.G_I();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gi, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double thr = sv.size() > 0 ? 1e-9 * sv[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > thr) ++rank;
  return svd.matrixV().rightCols(gi.cols() - rank);
}

ExtensionResiduals extension_identity_check(const ElementGeometry& geom,
                                            const ElementBlocks& blocks,
                                            const CondensedElement& ce, int trials,
                                            std::mt19937& rng) {
  const int nb = blocks.n_b, ni = blocks.n_i, np = blocks.n_press;
  const int p = blocks.p;
  const MultiIndexSet press_set(p - 1);
  const InteriorPressureBasis pbasis = interior_pressure_basis(p);
  const Eigen::MatrixXd dmat =
      local_divergence_matrix(geom, p, standalone_set_to_local(p));
  const Eigen::MatrixXd mass = bernstein_mass(press_set, geom.area);

  // projection onto the interior pressure span in coefficient space
  Eigen::MatrixXd pmat = Eigen::MatrixXd::Zero(press_set.size(), np);
  for (int mcol = 0; mcol < np; ++mcol) {
    pmat(pbasis.members[mcol], mcol) = 1.0;
    pmat(pbasis.anchor, mcol) -= 1.0;
  }
  const Eigen::MatrixXd ptm = pmat.transpose() * mass;
  const Eigen::LLT<Eigen::MatrixXd> gram_llt((ptm * pmat).eval());

  // defining-identity residuals via multiply-back of the retained solves
  Eigen::MatrixXd m_saddle = Eigen::MatrixXd::Zero(ni + np, ni + np);
  m_saddle.topLeftCorner(ni, ni) = blocks.E_II();
  m_saddle.topRightCorner(ni, np) = blocks.G_I().transpose();
  m_saddle.bottomLeftCorner(np, ni) = blocks.G_I();
  Eigen::MatrixXd rhs_s(ni + np, nb);
  rhs_s.topRows(ni) = blocks.E_IB();
  rhs_s.bottomRows(np) = blocks.G_B();
  const Eigen::MatrixXd y_s = ce.saddle.lu.solve(rhs_s);
  Eigen::MatrixXd rhs_t(ni + np, nb);
  rhs_t.topRows(ni) = blocks.E_BI().transpose();
  rhs_t.bottomRows(np) = blocks.G_B();
  const Eigen::MatrixXd y_t = ce.saddle.inverse.transpose() * rhs_t;
  const double rhs_scale = std::max(rhs_s.norm(), rhs_t.norm());
  ExtensionResiduals res;
  res.st_identity =
      std::max((m_saddle * y_s - rhs_s).norm(), (m_saddle.transpose() * y_t - rhs_t).norm()) /
      rhs_scale;

  const Eigen::MatrixXd nullspace = interior_nullspace(blocks);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (int trial = 0; trial < trials; ++trial) {
    Eigen::VectorXd u(nb + ni), v(nb + ni);
    for (int i = 0; i < nb + ni; ++i) {
      u[i] = gauss(rng);
      v[i] = gauss(rng);
    }
    auto s_ext = [&](const Eigen::VectorXd& z) {
      Eigen::VectorXd out(nb + ni);
      out.head(nb) = z.head(nb);
      out.tail(ni) = ce.S * z.head(nb);
      return out;
    };
    auto t_ext = [&](const Eigen::VectorXd& z) {
      Eigen::VectorXd out(nb + ni);
      out.head(nb) = z.head(nb);
      out.tail(ni) = ce.T * z.head(nb);
      return out;
    };
    const Eigen::VectorXd su = s_ext(u), sv = s_ext(v);
    const Eigen::VectorXd tu = t_ext(u), tv = t_ext(v);

    // idempotence: a second extension reproduces the first
    res.idempotence = std::max(
        res.idempotence, (s_ext(su) - su).norm() / std::max(1.0, su.norm()));

    // div(Su) = complement part of div u (interior components drop out)
    const Eigen::VectorXd d_s = dmat * su;
    const Eigen::VectorXd d_u = dmat * u;
    const Eigen::VectorXd proj_s = pmat * gram_llt.solve(ptm * d_s);
    const Eigen::VectorXd proj_u = pmat * gram_llt.solve(ptm * d_u);
    const double dscale = std::max(1.0, std::sqrt(d_u.dot(mass * d_u)));
    const Eigen::VectorXd mismatch = d_s - (d_u - proj_u);
    res.divergence = std::max(
        res.divergence,
        std::max(std::sqrt(std::abs(proj_s.dot(mass * proj_s))),
                 std::sqrt(std::abs(mismatch.dot(mass * mismatch)))) /
            dscale);

    // a(Su, Sv) = a(Su, Tv) = a(Tu, Tv)
    const double a1 = sv.dot(blocks.E * su);
    const double a2 = tv.dot(blocks.E * su);
    const double a3 = tv.dot(blocks.E * tu);
    const double ascale = std::max({1.0, std::abs(a1), std::abs(a3)});
    res.aform = std::max(res.aform,
                         std::max(std::abs(a1 - a2), std::abs(a2 - a3)) / ascale);

    // decoupling: (div Su, psi) = 0 and a(Su, z) = 0 for z in N_I
    const double uscale = std::max(1.0, u.head(nb).norm());
    const Eigen::VectorXd gres = blocks.G * su;
    double dec = gres.norm() / uscale;
    if (nullspace.cols() > 0) {
      const Eigen::VectorXd arow =
          blocks.E_IB() * su.head(nb) + blocks.E_II() * su.tail(ni);
      dec = std::max(dec, (nullspace.transpose() * arow).norm() / uscale);
    }
    res.decoupling = std::max(res.decoupling, dec);

    // adjoint conditions for the T extension
    const Eigen::VectorXd gres_t = blocks.G * tu;
    double adj = gres_t.norm() / uscale;
    if (nullspace.cols() > 0) {
      const Eigen::VectorXd acol = blocks.E.rightCols(ni).transpose() * tu;
      adj = std::max(adj, (nullspace.transpose() * acol).norm() / uscale);
    }
    res.adjoint = std::max(res.adjoint, adj);
  }
  return res;
}

DiagnosticsReport build_diagnostics(const Mesh& mesh, int p, bool with_rank,
                                    bool with_infsup) {
  DiagnosticsReport rep;
  rep.n_vertices = mesh.n_vertices();
  rep.n_triangles = mesh.n_triangles();
  rep.n_edges = mesh.n_edges();
  rep.p = p;
  const VertexClassification vc = classify_vertices(mesh);
  rep.n_singular_interior = vc.n_singular_interior;
  rep.n_singular_dirichlet = vc.n_singular_dirichlet;
  rep.singular_vertices = vc.singular_vertices;
  const CornerSplitResult cs = is_corner_split(mesh, vc);
  rep.corner_split = cs.corner_split;
  rep.offending_corners = cs.offending_vertices;
  rep.dim_qd_predicted = pressure_space_dim(mesh, vc, p);

  const DofMap dofmap(mesh, p);
  if (with_rank && dense_guard_ok(dofmap)) rep.div_rank = global_div_rank(dofmap);
  if (with_infsup && dense_guard_ok(dofmap)) rep.infsup_beta = infsup_estimate(dofmap);

  FlowProblem stokes;
  stokes.form.kind = FormKind::Stokes;
  stokes.body_force = [](const Eigen::Vector2d&) { return Eigen::Vector2d::Zero().eval(); };
  stokes.dirichlet_data = [](const Eigen::Vector2d&) { return Eigen::Vector2d::Zero().eval(); };
  const ElementGeometry geom(mesh, 0);
  const ElementBlocks blocks = element_blocks(geom, p, stokes);
  InteriorSaddle saddle = interior_saddle(blocks, 0);
  const STMaps st = compute_st(blocks, saddle);
  const CondensedElement ce = condense_element(blocks, saddle, st, 1e3);
  std::mt19937 rng(1234);
  rep.extension = extension_identity_check(geom, blocks, ce, 20, rng);
  return rep;
}

std::string format_diagnostics(const DiagnosticsReport& rep) {
  std::ostringstream os;
  os << "mesh: " << rep.n_vertices << " vertices, " << rep.n_edges << " edges, "
     << rep.n_triangles << " triangles, p = " << rep.p << "\n";
  os << "singular vertices: " << rep.singular_vertices.size() << " (interior "
     << rep.n_singular_interior << ", Dirichlet " << rep.n_singular_dirichlet << ")";
  if (!rep.singular_vertices.empty()) {
    os << " [";
    for (size_t i = 0; i < rep.singular_vertices.size(); ++i)
      os << (i ? " " : "") << rep.singular_vertices[i];
    os << "]";
  }
  os << "\n";
  os << "corner-split at Dirichlet vertices: " << (rep.corner_split ? "yes" : "NO");
  if (!rep.offending_corners.empty()) {
    os << " (offending:";
    for (int v : rep.offending_corners) os << " " << v;
    os << ")";
  }
  os << "\n";
  os << "predicted dim div X_D: " << rep.dim_qd_predicted << "\n";
  if (rep.div_rank)
    os << "numerical divergence rank: " << *rep.div_rank
       << (*rep.div_rank == rep.dim_qd_predicted ? " (matches)" : " (MISMATCH)") << "\n";
  else
    os << "numerical divergence rank: skipped (size guard)\n";
  if (rep.infsup_beta)
    os << "inf-sup estimate beta(p): " << *rep.infsup_beta << "\n";
  else
    os << "inf-sup estimate: skipped (size guard)\n";
  if (rep.extension) {
    os << "extension identities (element 0): st " << rep.extension->st_identity
       << ", idem " << rep.extension->idempotence << ", div " << rep.extension->divergence
       << ", aform " << rep.extension->aform << "\n";
  }
  os << "additional mesh regularity conditions beyond corner-split: not checked\n";
  return os.str();
}

std::string format_diagnostics_kv(const DiagnosticsReport& rep) {
  std::ostringstream os;
  os.precision(12);
  os << "n_vertices=" << rep.n_vertices << "\n";
  os << "n_edges=" << rep.n_edges << "\n";
  os << "n_triangles=" << rep.n_triangles << "\n";
  os << "p=" << rep.p << "\n";
  os << "n_singular_interior=" << rep.n_singular_interior << "\n";
  os << "n_singular_dirichlet=" << rep.n_singular_dirichlet << "\n";
  os << "corner_split=" << (rep.corner_split ? 1 : 0) << "\n";
  os << "dim_qd_predicted=" << rep.dim_qd_predicted << "\n";
  if (rep.div_rank) os << "div_rank=" << *rep.div_rank << "\n";
  if (rep.infsup_beta) os << "infsup_beta=" << *rep.infsup_beta << "\n";
  if (rep.extension) {
    os << "ext_st_identity=" << rep.extension->st_identity << "\n";
    os << "ext_idempotence=" << rep.extension->idempotence << "\n";
    os << "ext_divergence=" << rep.extension->divergence << "\n";
    os << "ext_aform=" << rep.extension->aform << "\n";
  }
  os << "mesh_conditions_checked=corner_split_only\n";
  return os.str();
}

}  // namespace svflow
