#include "svflow/dofmap.hpp"

#include <stdexcept>

namespace svflow {

DofMap::DofMap(const Mesh& mesh, int p) : mesh_(&mesh), p_(p) {
  if (p < 4) throw std::invalid_argument("DofMap: requires p >= 4");
  const int nv = mesh.n_vertices();
  const int ne = mesh.n_edges();
  const int nt = mesh.n_triangles();
  n_boundary_ = 2L * nv + 2L * (p - 1) * ne;

  MultiIndexSet set(p);
  gather_.resize(nt);
  set_to_local_.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangle(t);
    const auto& tedges = mesh.triangle_edges(t);
    auto& gather = gather_[t];
    gather.assign(n_b(), -1);
    auto& s2l = set_to_local_[t];
    s2l.assign(set.size(), -1);
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
        // vertex function: alpha = p * e_v
        int v = 0;
        while (a[v] != p) ++v;
        s2l[i] = v;
        gather[2 * v] = vertex_dof(tri[v], 0);
        gather[2 * v + 1] = vertex_dof(tri[v], 1);
      } else if (zero_count == 1) {
        // edge function on the edge opposite vertex zero_pos
        const int e = zero_pos;
        const int j = (e + 1) % 3, k = (e + 2) % 3;
        const int slot_in_edge = a[k];  // 1..p-1, exponent on the second local vertex
        const int slot = 3 + e * (p - 1) + (slot_in_edge - 1);
        s2l[i] = slot;
        const int ge = tedges[e];
        // orientation: global edge dof index counts the exponent on the
        // larger-id endpoint, so shared edges match across elements
        const int kglob = (tri[j] < tri[k]) ? a[k] : a[j];
        gather[2 * slot] = edge_dof(ge, kglob - 1, 0);
        gather[2 * slot + 1] = edge_dof(ge, kglob - 1, 1);
      } else {
        s2l[i] = 3 * p + interior_count;
        ++interior_count;
      }
    }
  }

  // Dirichlet constraints: vertex and edge dofs on the closure of Gamma_D
  constrained_.assign(n_boundary_, 0);
  std::vector<char> vflag(nv, 0), eflag(ne, 0);
  for (const auto& e : mesh.edges()) {
    if (e.boundary_idx < 0) continue;
    if (mesh.boundary_edges()[e.boundary_idx].tag != BoundaryTag::Dirichlet) continue;
    vflag[e.a] = 1;
    vflag[e.b] = 1;
    const int eid = static_cast<int>(&e - mesh.edges().data());
    eflag[eid] = 1;
  }
  for (int v = 0; v < nv; ++v)
    if (vflag[v]) {
      dirichlet_vertices_.push_back(v);
      constrained_[vertex_dof(v, 0)] = 1;
      constrained_[vertex_dof(v, 1)] = 1;
    }
  for (int e = 0; e < ne; ++e)
    if (eflag[e]) {
      dirichlet_edges_.push_back(e);
      for (int k = 0; k < p - 1; ++k) {
        constrained_[edge_dof(e, k, 0)] = 1;
        constrained_[edge_dof(e, k, 1)] = 1;
      }
    }

  free_index_.assign(n_boundary_, -1);
  constrained_index_.assign(n_boundary_, -1);
  for (long d = 0; d < n_boundary_; ++d) {
    if (constrained_[d]) {
      constrained_index_[d] = static_cast<int>(n_constrained_++);
      constrained_dofs_.push_back(d);
    } else {
      free_index_[d] = static_cast<int>(n_free_boundary_++);
    }
  }
}

}  // namespace svflow
