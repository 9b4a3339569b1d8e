#ifndef SVFLOW_CONDENSE_HPP
#define SVFLOW_CONDENSE_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "svflow/dofmap.hpp"
#include "svflow/element.hpp"
#include "svflow/parallel.hpp"

namespace svflow {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Factorization of the interior saddle matrix [[E_II, G_I^T],[G_I, 0]].
/// Uniquely solvable for any elliptic form; a singular factorization signals
/// an assembly bug and throws. The explicit inverse is retained so that both
/// the map and its adjoint (transposed system) can be applied later.
struct InteriorSaddle {
  Eigen::FullPivLU<Eigen::MatrixXd> lu;
  Eigen::MatrixXd inverse;
  int n_i = 0, n_press = 0;
  int size() const { return n_i + n_press; }
};
InteriorSaddle interior_saddle(const ElementBlocks& blocks, int element_id = -1);

/// Boundary-to-interior maps of the condensation spaces:
///   S = -[I 0] saddle^{-1} [E_IB; G_B]
///   T = -[I 0] saddle^{-T} [E_BI^T; G_B]
/// For a symmetric form the two coincide.
struct STMaps {
  Eigen::MatrixXd S, T;
};
STMaps compute_st(const ElementBlocks& blocks, const InteriorSaddle& saddle);

/// Condensed element operators acting on boundary dofs only:
///   Etilde = E_BB + E_BI S + T^T E_IB + T^T E_II S     (Ctilde analogous)
///   Atilde = Etilde + lambda Ctilde
///   Ltilde = L_B + T^T L_I
/// The saddle factorization is retained for the post-iteration local solves.
struct CondensedElement {
  Eigen::MatrixXd S, T;
  Eigen::MatrixXd Etilde, Ctilde, Atilde;
  Eigen::VectorXd Ltilde;
  InteriorSaddle saddle;
  /// Interior rows of E applied to the S-extension: E_IB + E_II S. The local
  /// solves test a_K(u~, v) against interior v, and u~ carries its S-extended
  /// interior part, so both terms enter the right-hand side.
  Eigen::MatrixXd E_IS;
  Eigen::VectorXd L_I;
  int n_b = 0, n_i = 0, n_press = 0;
};
CondensedElement condense_element(const ElementBlocks& blocks, const InteriorSaddle& saddle,
                                  const STMaps& st, double lambda);

/// Solves the local interior Stokes system
///   [[E_II, G_I^T],[G_I, 0]] [u_K; q_K] = [L_I - (E_IB + E_II S) u_B; 0]
/// using the retained factorization.
struct LocalInteriorSolution {
  Eigen::VectorXd u;  // n_i
  Eigen::VectorXd q;  // n_press
};
LocalInteriorSolution local_interior_solve(const CondensedElement& ce,
                                           const Eigen::VectorXd& u_boundary_local);

/// Global sparse operators over boundary dofs split into free (f) and
/// Dirichlet-constrained (c) columns. Element contributions are merged in
/// element-index order, so assembly is reproducible bit for bit.
struct BoundarySystem {
  Eigen::SparseMatrix<double> A_ff, A_fc;
  Eigen::SparseMatrix<double> C_ff, C_fc;
  Eigen::VectorXd L_f;
  long n_free = 0, n_constrained = 0;
};
BoundarySystem assemble_boundary_system(const DofMap& dofmap,
                                        const std::vector<CondensedElement>& elems);

/// Full-space sparse operators (boundary + interior dofs) for the standard
/// iterated penalty method. Free dofs are ordered boundary-free first, then
/// all element interiors.
struct FullSystem {
  Eigen::SparseMatrix<double> E_ff, E_fc, C_ff, C_fc;
  Eigen::VectorXd L_f;
  long n_free = 0, n_constrained = 0;
};
FullSystem assemble_full_system(const DofMap& dofmap, const std::vector<ElementBlocks>& elems);

/// Gathers the element-local boundary coefficient vector from a global
/// boundary vector.
Eigen::VectorXd gather_boundary(const DofMap& dofmap, int t, const Eigen::VectorXd& boundary);

}  // namespace svflow

#endif
