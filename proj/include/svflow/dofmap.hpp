#ifndef SVFLOW_DOFMAP_HPP
#define SVFLOW_DOFMAP_HPP

#include <Eigen/Dense>
#include <vector>

#include "svflow/bernstein.hpp"
#include "svflow/mesh.hpp"

namespace svflow {

/// Global velocity numbering for the continuous degree-p vector space.
///
/// Layout: vertex dofs (2 per mesh vertex), then edge dofs (2(p-1) per mesh
/// edge), then per-element interior dofs (2 per interior scalar function).
/// Boundary dofs = vertex + edge; interiors are never shared. Local dof order
/// inside an element interleaves components: scalar slot s gives dofs
/// (2s, 2s+1), with B slots [v0 v1 v2 e0... e1... e2...] before interior slots.
class DofMap {
 public:
  DofMap(const Mesh& mesh, int p);

  int p() const { return p_; }
  const Mesh& mesh() const { return *mesh_; }

  int boundary_scalar_per_elem() const { return 3 * p_; }
  int interior_scalar_per_elem() const { return (p_ - 1) * (p_ - 2) / 2; }
  int n_b() const { return 2 * boundary_scalar_per_elem(); }  // per element
  int n_i() const { return 2 * interior_scalar_per_elem(); }

  long n_boundary_dofs() const { return n_boundary_; }
  long n_interior_dofs() const { return 2L * interior_scalar_per_elem() * mesh_->n_triangles(); }
  long n_total_dofs() const { return n_boundary_dofs() + n_interior_dofs(); }
  long interior_base(int t) const { return n_boundary_ + 2L * interior_scalar_per_elem() * t; }

  /// Global dof ids for the element's boundary (B) slots, local order.
  const std::vector<long>& boundary_gather(int t) const { return gather_[t]; }

  /// Permutation from MultiIndexSet enumeration to local scalar slots.
  /// set_to_local[i] = slot of the i-th multi-index of MultiIndexSet(p).
  const std::vector<int>& set_to_local(int t) const { return set_to_local_[t]; }

  bool constrained(long boundary_dof) const { return constrained_[boundary_dof] != 0; }
  /// Compressed index among free boundary dofs, -1 if constrained.
  int free_boundary_index(long boundary_dof) const { return free_index_[boundary_dof]; }
  /// Compressed index among constrained boundary dofs, -1 if free.
  int constrained_index(long boundary_dof) const { return constrained_index_[boundary_dof]; }
  long n_free_boundary() const { return n_free_boundary_; }
  long n_constrained() const { return n_constrained_; }
  const std::vector<long>& constrained_dofs() const { return constrained_dofs_; }

  /// Dirichlet vertex and edge lists (for lifting).
  const std::vector<int>& dirichlet_vertices() const { return dirichlet_vertices_; }
  const std::vector<int>& dirichlet_edges() const { return dirichlet_edges_; }

  long vertex_dof(int v, int comp) const { return 2L * v + comp; }
  long edge_dof(int e, int k, int comp) const {  // k in [0, p-2]
    return 2L * mesh_->n_vertices() + 2L * ((p_ - 1) * long(e) + k) + comp;
  }

 private:
  const Mesh* mesh_;
  int p_;
  long n_boundary_;
  std::vector<std::vector<long>> gather_;
  std::vector<std::vector<int>> set_to_local_;
  std::vector<char> constrained_;
  std::vector<int> free_index_;
  std::vector<int> constrained_index_;
  std::vector<long> constrained_dofs_;
  long n_free_boundary_ = 0;
  long n_constrained_ = 0;
  std::vector<int> dirichlet_vertices_;
  std::vector<int> dirichlet_edges_;
};

}  // namespace svflow

#endif
