#include "svflow/condense.hpp"

#include <string>

namespace svflow {

InteriorSaddle interior_saddle(const ElementBlocks& blocks, int element_id) {
  InteriorSaddle saddle;
  saddle.n_i = blocks.n_i;
  saddle.n_press = blocks.n_press;
  const int n = saddle.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  m.topLeftCorner(blocks.n_i, blocks.n_i) = blocks.E_II();
  m.topRightCorner(blocks.n_i, blocks.n_press) = blocks.G_I().transpose();
  m.bottomLeftCorner(blocks.n_press, blocks.n_i) = blocks.G_I();
  saddle.lu.compute(m);
  if (saddle.lu.rank() < n) {
    throw SolverError("interior saddle matrix singular on element " +
                      std::to_string(element_id) + " (rank " +
                      std::to_string(saddle.lu.rank()) + " of " + std::to_string(n) +
                      ", max pivot " + std::to_string(saddle.lu.maxPivot()) + ")");
  }
  saddle.inverse = saddle.lu.inverse();
  return saddle;
}

STMaps compute_st(const ElementBlocks& blocks, const InteriorSaddle& saddle) {
  const int n_i = blocks.n_i, n_b = blocks.n_b, n_press = blocks.n_press;
  Eigen::MatrixXd rhs_s(n_i + n_press, n_b);
  rhs_s.topRows(n_i) = blocks.E_IB();
  rhs_s.bottomRows(n_press) = blocks.G_B();
  Eigen::MatrixXd rhs_t(n_i + n_press, n_b);
  rhs_t.topRows(n_i) = blocks.E_BI().transpose();
  rhs_t.bottomRows(n_press) = blocks.G_B();

  STMaps st;
  st.S = -(saddle.lu.solve(rhs_s)).topRows(n_i);
  // the adjoint map solves with the transposed saddle matrix
  st.T = -(saddle.inverse.transpose() * rhs_t).topRows(n_i);
  return st;
}

CondensedElement condense_element(const ElementBlocks& blocks, const InteriorSaddle& saddle,
                                  const STMaps& st, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("condense_element: lambda must be > 0");
  CondensedElement ce;
  ce.n_b = blocks.n_b;
  ce.n_i = blocks.n_i;
  ce.n_press = blocks.n_press;
  ce.S = st.S;
  ce.T = st.T;
  ce.saddle = saddle;
  ce.E_IS = blocks.E_IB() + blocks.E_II() * st.S;
  ce.L_I = blocks.L_I();

  const Eigen::MatrixXd tt = st.T.transpose();
  ce.Etilde = blocks.E_BB() + blocks.E_BI() * st.S + tt * blocks.E_IB() +
              tt * blocks.E_II() * st.S;
  ce.Ctilde = blocks.C_BB() + blocks.C_BI() * st.S + tt * blocks.C_IB() +
              tt * blocks.C_II() * st.S;
  ce.Atilde = ce.Etilde + lambda * ce.Ctilde;
  ce.Ltilde = blocks.L_B() + tt * blocks.L_I();
  return ce;
}

LocalInteriorSolution local_interior_solve(const CondensedElement& ce,
                                           const Eigen::VectorXd& u_boundary_local) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ce.saddle.size());
  rhs.head(ce.n_i) = ce.L_I - ce.E_IS * u_boundary_local;
  const Eigen::VectorXd sol = ce.saddle.lu.solve(rhs);
  LocalInteriorSolution out;
  out.u = sol.head(ce.n_i);
  out.q = sol.tail(ce.n_press);
  return out;
}

Eigen::VectorXd gather_boundary(const DofMap& dofmap, int t, const Eigen::VectorXd& boundary) {
  const auto& gather = dofmap.boundary_gather(t);
  Eigen::VectorXd out(gather.size());
  for (size_t i = 0; i < gather.size(); ++i) out[i] = boundary[gather[i]];
  return out;
}

namespace {

// splits a local boundary matrix into (free,free) and (free,constrained)
// triplets using the dofmap's compressed numberings
void scatter_boundary_matrix(const DofMap& dofmap, int t, const Eigen::MatrixXd& local,
                             std::vector<Eigen::Triplet<double>>& ff,
                             std::vector<Eigen::Triplet<double>>& fc) {
  const auto& gather = dofmap.boundary_gather(t);
  const int n = static_cast<int>(gather.size());
  for (int r = 0; r < n; ++r) {
    const int fr = dofmap.free_boundary_index(gather[r]);
    if (fr < 0) continue;
    for (int c = 0; c < n; ++c) {
      const double v = local(r, c);
      if (v == 0.0) continue;
      const int fcol = dofmap.free_boundary_index(gather[c]);
      if (fcol >= 0)
        ff.emplace_back(fr, fcol, v);
      else
        fc.emplace_back(fr, dofmap.constrained_index(gather[c]), v);
    }
  }
}

}  // namespace

BoundarySystem assemble_boundary_system(const DofMap& dofmap,
                                        const std::vector<CondensedElement>& elems) {
  BoundarySystem sys;
  sys.n_free = dofmap.n_free_boundary();
  sys.n_constrained = dofmap.n_constrained();
  sys.L_f = Eigen::VectorXd::Zero(sys.n_free);
  std::vector<Eigen::Triplet<double>> a_ff, a_fc, c_ff, c_fc;
  for (int t = 0; t < static_cast<int>(elems.size()); ++t) {
    scatter_boundary_matrix(dofmap, t, elems[t].Atilde, a_ff, a_fc);
    scatter_boundary_matrix(dofmap, t, elems[t].Ctilde, c_ff, c_fc);
    const auto& gather = dofmap.boundary_gather(t);
    for (size_t r = 0; r < gather.size(); ++r) {
      const int fr = dofmap.free_boundary_index(gather[r]);
      if (fr >= 0) sys.L_f[fr] += elems[t].Ltilde[r];
    }
  }
  sys.A_ff.resize(sys.n_free, sys.n_free);
  sys.A_fc.resize(sys.n_free, sys.n_constrained);
  sys.C_ff.resize(sys.n_free, sys.n_free);
  sys.C_fc.resize(sys.n_free, sys.n_constrained);
  sys.A_ff.setFromTriplets(a_ff.begin(), a_ff.end());
  sys.A_fc.setFromTriplets(a_fc.begin(), a_fc.end());
  sys.C_ff.setFromTriplets(c_ff.begin(), c_ff.end());
  sys.C_fc.setFromTriplets(c_fc.begin(), c_fc.end());
  return sys;
}

FullSystem assemble_full_system(const DofMap& dofmap, const std::vector<ElementBlocks>& elems) {
  FullSystem sys;
  sys.n_free = dofmap.n_free_boundary() + dofmap.n_interior_dofs();
  sys.n_constrained = dofmap.n_constrained();
  sys.L_f = Eigen::VectorXd::Zero(sys.n_free);
  std::vector<Eigen::Triplet<double>> e_ff, e_fc, c_ff, c_fc;

  const int nt = static_cast<int>(elems.size());
  for (int t = 0; t < nt; ++t) {
    const ElementBlocks& blocks = elems[t];
    const auto& gather = dofmap.boundary_gather(t);
    const int nb = blocks.n_b, ni = blocks.n_i;
    // free-system index per local dof, -1 when constrained
    std::vector<long> fidx(nb + ni);
    std::vector<int> cidx(nb + ni, -1);
    for (int r = 0; r < nb; ++r) {
      fidx[r] = dofmap.free_boundary_index(gather[r]);
      if (fidx[r] < 0) cidx[r] = dofmap.constrained_index(gather[r]);
    }
    for (int r = 0; r < ni; ++r)
      fidx[nb + r] = dofmap.n_free_boundary() + (dofmap.interior_base(t) + r -
                                                 dofmap.n_boundary_dofs());
    for (int r = 0; r < nb + ni; ++r) {
      if (fidx[r] < 0) continue;
      sys.L_f[fidx[r]] += blocks.L[r];
      for (int c = 0; c < nb + ni; ++c) {
        const double ev = blocks.E(r, c), cv = blocks.C(r, c);
        if (fidx[c] >= 0) {
          if (ev != 0.0) e_ff.emplace_back(fidx[r], fidx[c], ev);
          if (cv != 0.0) c_ff.emplace_back(fidx[r], fidx[c], cv);
        } else {
          if (ev != 0.0) e_fc.emplace_back(fidx[r], cidx[c], ev);
          if (cv != 0.0) c_fc.emplace_back(fidx[r], cidx[c], cv);
        }
      }
    }
  }
  sys.E_ff.resize(sys.n_free, sys.n_free);
  sys.E_fc.resize(sys.n_free, sys.n_constrained);
  sys.C_ff.resize(sys.n_free, sys.n_free);
  sys.C_fc.resize(sys.n_free, sys.n_constrained);
  sys.E_ff.setFromTriplets(e_ff.begin(), e_ff.end());
  sys.E_fc.setFromTriplets(e_fc.begin(), e_fc.end());
  sys.C_ff.setFromTriplets(c_ff.begin(), c_ff.end());
  sys.C_fc.setFromTriplets(c_fc.begin(), c_fc.end());
  return sys;
}

}  // namespace svflow
