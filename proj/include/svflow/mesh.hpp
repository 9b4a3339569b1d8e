#ifndef SVFLOW_MESH_HPP
#define SVFLOW_MESH_HPP

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

namespace svflow {

enum class BoundaryTag { Dirichlet, Neumann };

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Conforming triangulation with boundary tags and adjacency. Immutable after
/// construction; safe for shared concurrent reads.
class Mesh {
 public:
  struct BoundaryEdge {
    int a, b;  // vertex ids as given (a->b follows the triangle orientation)
    BoundaryTag tag;
  };
  struct Edge {
    int a, b;          // a < b
    int elems[2];      // incident elements; elems[1] = -1 on the boundary
    int boundary_idx;  // index into boundary_edges, or -1 for interior edges
  };

  /// Validates, orients triangles counter-clockwise, and builds adjacency.
  /// Throws MeshError on nonconforming input or inconsistent boundary tags.
  Mesh(std::vector<Eigen::Vector2d> vertices,
       std::vector<std::array<int, 3>> triangles,
       std::vector<BoundaryEdge> boundary_edges);

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_triangles() const { return static_cast<int>(triangles_.size()); }
  int n_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<Eigen::Vector2d>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  const std::vector<Edge>& edges() const { return edges_; }

  const Eigen::Vector2d& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 3>& triangle(int t) const { return triangles_[t]; }

  /// Edge indices of triangle t; entry i is the edge opposite local vertex i.
  const std::array<int, 3>& triangle_edges(int t) const { return tri_edges_[t]; }
  /// Elements incident to a vertex, in angular (fan) order. For boundary
  /// vertices the fan starts at a boundary edge.
  const std::vector<int>& vertex_fan(int v) const { return vertex_fan_[v]; }
  /// Angles of the fan elements at the vertex, same order as vertex_fan.
  const std::vector<double>& vertex_fan_angles(int v) const { return vertex_angles_[v]; }

  bool vertex_on_boundary(int v) const { return vertex_boundary_[v]; }
  double area(int t) const { return areas_[t]; }
  double total_area() const { return total_area_; }
  bool full_dirichlet() const { return full_dirichlet_; }

 private:
  std::vector<Eigen::Vector2d> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<std::vector<int>> vertex_fan_;
  std::vector<std::vector<double>> vertex_angles_;
  std::vector<char> vertex_boundary_;
  std::vector<double> areas_;
  double total_area_ = 0.0;
  bool full_dirichlet_ = true;
};

/// Text format: "vertices N" + N lines "x y"; "triangles M" + M lines
/// "i j k" (0-based); "boundary B" + B lines "i j TAG", TAG in {D, N}.
/// '#' starts a comment.
Mesh load_mesh(const std::string& path);
Mesh parse_mesh(std::istream& in, const std::string& name);
void write_mesh(std::ostream& out, const Mesh& mesh);

/// nx-by-ny grid of cells on the rectangle, each cell split into four
/// triangles by both diagonals. All outer edges tagged Dirichlet.
Mesh gen_crisscross(int nx, int ny,
                    const std::array<double, 4>& rect = {0.0, 0.0, 1.0, 1.0});

struct WedgeOptions {
  double opening_angle_deg = 28.5;  // total angle at the apex
  int bands = 5;                    // graded bands between lid and apex fan
  /// Geometric grading ratio toward the apex. The corner-eddy centers are
  /// spaced by a factor ~2 for the default angle; 0.55 keeps one band per
  /// eddy so successive eddies stay resolved.
  double ratio = 0.55;
};
/// Wedge for the corner-eddy benchmark: lid from (-1,0) to (1,0), apex below
/// on the y-axis, triangulation graded toward the apex; all edges Dirichlet.
Mesh gen_wedge(const WedgeOptions& opts = {});

enum class VertexCategory {
  Interior,
  DirichletBoundary,
  NeumannBoundary,
  DNJunction,
  DomainCorner
};

struct VertexInfo {
  VertexCategory category = VertexCategory::Interior;
  bool on_dirichlet = false;   // touches the closure of the Dirichlet boundary
  bool on_neumann = false;
  bool dn_junction = false;
  bool domain_corner = false;  // incident boundary edges are not collinear
  double xi = 0.0;
  bool singular = false;       // xi <= xi_tol
  double angle_sum = 0.0;
};

struct VertexClassification {
  std::vector<VertexInfo> info;
  double xi_tol = 1e-10;
  int n_singular_interior = 0;
  /// Singular non-junction Dirichlet-boundary vertices (corners included) --
  /// the constraint set of the discrete pressure space.
  int n_singular_dirichlet = 0;
  std::vector<int> singular_vertices;
};

/// Computes the vertex fans' angle sums and the singularity indicator
/// xi(a) = sum |sin(theta_i + theta_{i+1})| (cyclic for interior vertices,
/// open for boundary vertices).
VertexClassification classify_vertices(const Mesh& mesh, double xi_tol = 1e-10);

struct CornerSplitResult {
  bool corner_split = true;
  std::vector<int> offending_vertices;  // singular Dirichlet domain corners
};
CornerSplitResult is_corner_split(const Mesh& mesh, const VertexClassification& vc);

/// dim div X_D by topological counting: |T| p(p+1)/2 minus one constraint per
/// singular interior vertex, per singular non-junction Dirichlet vertex, and
/// one mean-value constraint when the whole boundary is Dirichlet.
int pressure_space_dim(const Mesh& mesh, const VertexClassification& vc, int p);

}  // namespace svflow

#endif
