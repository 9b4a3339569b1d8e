#include "svflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace svflow {

namespace {

double wrap_2pi(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a < 0) a += 2.0 * M_PI;
  return a;
}

// CCW angular distance from a to b in [0, 2*pi)
double ccw_delta(double a, double b) { return wrap_2pi(b - a); }

}  // namespace

Mesh::Mesh(std::vector<Eigen::Vector2d> vertices,
           std::vector<std::array<int, 3>> triangles,
           std::vector<BoundaryEdge> boundary_edges)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)) {
  const int nv = n_vertices();
  const int nt = n_triangles();
  if (nt == 0) throw MeshError("mesh has no triangles");

  areas_.resize(nt);
  for (int t = 0; t < nt; ++t) {
    auto& tri = triangles_[t];
    for (int i = 0; i < 3; ++i) {
      if (tri[i] < 0 || tri[i] >= nv)
        throw MeshError("triangle " + std::to_string(t) + ": vertex index out of range");
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw MeshError("triangle " + std::to_string(t) + ": repeated vertex");
    const Eigen::Vector2d e1 = vertices_[tri[1]] - vertices_[tri[0]];
    const Eigen::Vector2d e2 = vertices_[tri[2]] - vertices_[tri[0]];
    double signed2 = e1.x() * e2.y() - e1.y() * e2.x();
    if (signed2 < 0) {
      std::swap(tri[1], tri[2]);
      signed2 = -signed2;
    }
    const double scale = std::max(e1.norm(), e2.norm());
    if (signed2 <= 1e-14 * scale * scale)
      throw MeshError("triangle " + std::to_string(t) + ": degenerate (zero area)");
    areas_[t] = 0.5 * signed2;
    total_area_ += areas_[t];
  }

  // edge table
  std::map<std::pair<int, int>, int> edge_ids;
  tri_edges_.assign(nt, {-1, -1, -1});
  for (int t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    for (int i = 0; i < 3; ++i) {
      const int a = tri[(i + 1) % 3], b = tri[(i + 2) % 3];
      const auto key = std::minmax(a, b);
      auto it = edge_ids.find(key);
      if (it == edge_ids.end()) {
        Edge e;
        e.a = key.first;
        e.b = key.second;
        e.elems[0] = t;
        e.elems[1] = -1;
        e.boundary_idx = -1;
        it = edge_ids.emplace(key, static_cast<int>(edges_.size())).first;
        edges_.push_back(e);
      } else {
        Edge& e = edges_[it->second];
        if (e.elems[1] != -1)
          throw MeshError("nonconforming mesh: edge (" + std::to_string(e.a) + "," +
                          std::to_string(e.b) + ") shared by more than two triangles");
        e.elems[1] = t;
      }
      tri_edges_[t][i] = it->second;
    }
  }

  // attach boundary tags
  for (int bi = 0; bi < static_cast<int>(boundary_edges_.size()); ++bi) {
    const auto& be = boundary_edges_[bi];
    const auto key = std::minmax(be.a, be.b);
    auto it = edge_ids.find(key);
    if (it == edge_ids.end())
      throw MeshError("inconsistent boundary tags: listed edge (" + std::to_string(be.a) +
                      "," + std::to_string(be.b) + ") is not a mesh edge");
    Edge& e = edges_[it->second];
    if (e.elems[1] != -1)
      throw MeshError("inconsistent boundary tags: edge (" + std::to_string(be.a) + "," +
                      std::to_string(be.b) + ") is interior");
    if (e.boundary_idx != -1)
      throw MeshError("inconsistent boundary tags: edge (" + std::to_string(be.a) + "," +
                      std::to_string(be.b) + ") tagged twice");
    e.boundary_idx = bi;
    if (be.tag != BoundaryTag::Dirichlet) full_dirichlet_ = false;
  }

  vertex_boundary_.assign(nv, 0);
  for (const Edge& e : edges_) {
    if (e.elems[1] == -1) {
      if (e.boundary_idx == -1) {
        // A one-element edge without a tag: either a hanging vertex sits on a
        // neighbor's edge, or the boundary list is incomplete.
        for (int v = 0; v < nv; ++v) {
          if (v == e.a || v == e.b) continue;
          const Eigen::Vector2d pa = vertices_[e.a], pb = vertices_[e.b];
          const Eigen::Vector2d d = pb - pa, r = vertices_[v] - pa;
          const double len2 = d.squaredNorm();
          const double s = r.dot(d) / len2;
          const double off = std::abs(d.x() * r.y() - d.y() * r.x()) / std::sqrt(len2);
          if (s > 1e-10 && s < 1.0 - 1e-10 && off < 1e-10 * std::sqrt(len2))
            throw MeshError("nonconforming mesh: vertex " + std::to_string(v) +
                            " lies mid-edge of (" + std::to_string(e.a) + "," +
                            std::to_string(e.b) + ")");
        }
        throw MeshError("inconsistent boundary tags: edge (" + std::to_string(e.a) + "," +
                        std::to_string(e.b) + ") is on the boundary but untagged");
      }
      vertex_boundary_[e.a] = 1;
      vertex_boundary_[e.b] = 1;
    }
  }

  // vertex fans: sort incident elements by centroid direction, then verify the
  // angular sectors chain without overlap
  std::vector<std::vector<int>> incident(nv);
  for (int t = 0; t < nt; ++t)
    for (int v : triangles_[t]) incident[v].push_back(t);

  vertex_fan_.resize(nv);
  vertex_angles_.resize(nv);
  for (int v = 0; v < nv; ++v) {
    auto& elems = incident[v];
    if (elems.empty())
      throw MeshError("vertex " + std::to_string(v) + " belongs to no triangle");
    struct Sector {
      int t;
      double start, sweep;
    };
    std::vector<Sector> sectors;
    for (int t : elems) {
      const auto& tri = triangles_[t];
      int i = 0;
      while (tri[i] != v) ++i;
      const Eigen::Vector2d d1 = vertices_[tri[(i + 1) % 3]] - vertices_[v];
      const Eigen::Vector2d d2 = vertices_[tri[(i + 2) % 3]] - vertices_[v];
      const double a1 = std::atan2(d1.y(), d1.x());
      const double a2 = std::atan2(d2.y(), d2.x());
      sectors.push_back({t, a1, ccw_delta(a1, a2)});
    }
    std::sort(sectors.begin(), sectors.end(),
              [](const Sector& x, const Sector& y) { return x.start < y.start; });
    const int m = static_cast<int>(sectors.size());
    // locate the gap (boundary vertex) or verify closure (interior vertex)
    int start_at = 0;
    int gaps = 0;
    for (int i = 0; i < m; ++i) {
      const Sector& cur = sectors[i];
      const Sector& nxt = sectors[(i + 1) % m];
      const double end = cur.start + cur.sweep;
      const double mismatch = ccw_delta(end, nxt.start);
      const double overlap = ccw_delta(nxt.start, end);
      if (overlap > 1e-9 && mismatch > 1e-9) {
        // genuine gap
        ++gaps;
        start_at = (i + 1) % m;
      } else if (std::min(overlap, mismatch) > 1e-9) {
        throw MeshError("fan ordering failure at vertex " + std::to_string(v));
      }
    }
    if (vertex_boundary_[v]) {
      if (gaps != 1)
        throw MeshError("fan ordering failure at boundary vertex " + std::to_string(v));
    } else {
      if (gaps != 0)
        throw MeshError("fan ordering failure at interior vertex " + std::to_string(v));
    }
    auto& fan = vertex_fan_[v];
    auto& angles = vertex_angles_[v];
    for (int i = 0; i < m; ++i) {
      const Sector& s = sectors[(start_at + i) % m];
      fan.push_back(s.t);
      angles.push_back(s.sweep);
    }
  }
}

Mesh parse_mesh(std::istream& in, const std::string& name) {
  // strip comments, then tokenize
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  size_t pos = 0;
  auto next = [&]() -> const std::string& {
    if (pos >= tokens.size()) throw MeshError(name + ": unexpected end of file");
    return tokens[pos++];
  };
  auto next_int = [&]() {
    const std::string& t = next();
    try {
      size_t used = 0;
      const int v = std::stoi(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw MeshError(name + ": expected integer, got '" + t + "'");
    }
  };
  auto next_double = [&]() {
    const std::string& t = next();
    try {
      size_t used = 0;
      const double v = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw MeshError(name + ": expected number, got '" + t + "'");
    }
  };
  auto expect = [&](const char* kw) {
    const std::string& t = next();
    if (t != kw) throw MeshError(name + ": expected '" + kw + "', got '" + t + "'");
  };

  expect("vertices");
  const int nv = next_int();
  std::vector<Eigen::Vector2d> verts(nv);
  for (int i = 0; i < nv; ++i) {
    const double x = next_double();
    const double y = next_double();
    verts[i] = {x, y};
  }
  expect("triangles");
  const int nt = next_int();
  std::vector<std::array<int, 3>> tris(nt);
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < 3; ++j) tris[i][j] = next_int();
  expect("boundary");
  const int nb = next_int();
  std::vector<Mesh::BoundaryEdge> bes(nb);
  for (int i = 0; i < nb; ++i) {
    bes[i].a = next_int();
    bes[i].b = next_int();
    const std::string& tag = next();
    if (tag == "D")
      bes[i].tag = BoundaryTag::Dirichlet;
    else if (tag == "N")
      bes[i].tag = BoundaryTag::Neumann;
    else
      throw MeshError(name + ": boundary tag must be D or N, got '" + tag + "'");
  }
  if (pos != tokens.size()) throw MeshError(name + ": trailing tokens after boundary list");
  return Mesh(std::move(verts), std::move(tris), std::move(bes));
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path + "'");
  return parse_mesh(in, path);
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "vertices " << mesh.n_vertices() << "\n";
  out.precision(17);
  for (const auto& v : mesh.vertices()) out << v.x() << " " << v.y() << "\n";
  out << "triangles " << mesh.n_triangles() << "\n";
  for (const auto& t : mesh.triangles()) out << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "boundary " << mesh.boundary_edges().size() << "\n";
  for (const auto& b : mesh.boundary_edges())
    out << b.a << " " << b.b << " " << (b.tag == BoundaryTag::Dirichlet ? "D" : "N") << "\n";
}

Mesh gen_crisscross(int nx, int ny, const std::array<double, 4>& rect) {
  if (nx < 1 || ny < 1) throw MeshError("gen_crisscross: nx, ny must be >= 1");
  const double x0 = rect[0], y0 = rect[1], x1 = rect[2], y1 = rect[3];
  if (x1 <= x0 || y1 <= y0) throw MeshError("gen_crisscross: empty rectangle");
  std::vector<Eigen::Vector2d> verts;
  auto gx = [&](int i) { return x0 + (x1 - x0) * double(i) / nx; };
  auto gy = [&](int j) { return y0 + (y1 - y0) * double(j) / ny; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) verts.push_back({gx(i), gy(j)});
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int c = static_cast<int>(verts.size());
      verts.push_back({0.5 * (gx(i) + gx(i + 1)), 0.5 * (gy(j) + gy(j + 1))});
      const int sw = vid(i, j), se = vid(i + 1, j), ne = vid(i + 1, j + 1), nw = vid(i, j + 1);
      tris.push_back({sw, se, c});
      tris.push_back({se, ne, c});
      tris.push_back({ne, nw, c});
      tris.push_back({nw, sw, c});
    }
  }
  std::vector<Mesh::BoundaryEdge> bes;
  for (int i = 0; i < nx; ++i) {
    bes.push_back({vid(i, 0), vid(i + 1, 0), BoundaryTag::Dirichlet});
    bes.push_back({vid(i + 1, ny), vid(i, ny), BoundaryTag::Dirichlet});
  }
  for (int j = 0; j < ny; ++j) {
    bes.push_back({vid(0, j + 1), vid(0, j), BoundaryTag::Dirichlet});
    bes.push_back({vid(nx, j), vid(nx, j + 1), BoundaryTag::Dirichlet});
  }
  return Mesh(std::move(verts), std::move(tris), std::move(bes));
}

Mesh gen_wedge(const WedgeOptions& opts) {
  if (opts.bands < 1 || opts.ratio <= 0.0 || opts.ratio >= 1.0 ||
      opts.opening_angle_deg <= 0.0 || opts.opening_angle_deg >= 180.0)
    throw MeshError("gen_wedge: invalid options");
  const double half = 0.5 * opts.opening_angle_deg * M_PI / 180.0;
  const double depth = 1.0 / std::tan(half);  // apex at (0, -depth)
  const Eigen::Vector2d apex(0.0, -depth);

  // levels: horizontal cross-sections at parameter t_k = ratio^k from the lid
  // (t=1) toward the apex; each level carries three vertices (left, mid, right)
  const int m = opts.bands;
  std::vector<double> t(m + 1);
  for (int k = 0; k <= m; ++k) t[k] = std::pow(opts.ratio, k);

  std::vector<Eigen::Vector2d> verts;
  auto level_vertex = [&](double tk, double side) {
    // side in {-1, 0, +1}: apex + tk * (corner - apex)
    const Eigen::Vector2d corner(side, 0.0);
    return (apex + tk * (corner - apex)).eval();
  };
  std::vector<int> L(m + 1), Mv(m + 1), R(m + 1);
  for (int k = 0; k <= m; ++k) {
    L[k] = static_cast<int>(verts.size());
    verts.push_back(level_vertex(t[k], -1.0));
    Mv[k] = static_cast<int>(verts.size());
    verts.push_back(level_vertex(t[k], 0.0));
    R[k] = static_cast<int>(verts.size());
    verts.push_back(level_vertex(t[k], 1.0));
  }
  const int A = static_cast<int>(verts.size());
  verts.push_back(apex);

  std::vector<std::array<int, 3>> tris;
  for (int k = 0; k < m; ++k) {
    // left quad [L_k, M_k, M_{k+1}, L_{k+1}], diagonal L_k - M_{k+1}
    tris.push_back({L[k], Mv[k], Mv[k + 1]});
    tris.push_back({L[k], Mv[k + 1], L[k + 1]});
    // right quad [M_k, R_k, R_{k+1}, M_{k+1}], diagonal R_k - M_{k+1}
    tris.push_back({Mv[k], R[k], Mv[k + 1]});
    tris.push_back({R[k], R[k + 1], Mv[k + 1]});
  }
  tris.push_back({A, Mv[m], L[m]});
  tris.push_back({A, R[m], Mv[m]});

  std::vector<Mesh::BoundaryEdge> bes;
  bes.push_back({L[0], Mv[0], BoundaryTag::Dirichlet});  // lid
  bes.push_back({Mv[0], R[0], BoundaryTag::Dirichlet});
  for (int k = 0; k < m; ++k) {
    bes.push_back({L[k], L[k + 1], BoundaryTag::Dirichlet});
    bes.push_back({R[k], R[k + 1], BoundaryTag::Dirichlet});
  }
  bes.push_back({L[m], A, BoundaryTag::Dirichlet});
  bes.push_back({R[m], A, BoundaryTag::Dirichlet});
  return Mesh(std::move(verts), std::move(tris), std::move(bes));
}

VertexClassification classify_vertices(const Mesh& mesh, double xi_tol) {
  VertexClassification vc;
  vc.xi_tol = xi_tol;
  vc.info.resize(mesh.n_vertices());

  // incident boundary edges per vertex
  std::vector<std::vector<int>> vbe(mesh.n_vertices());
  for (int bi = 0; bi < static_cast<int>(mesh.boundary_edges().size()); ++bi) {
    vbe[mesh.boundary_edges()[bi].a].push_back(bi);
    vbe[mesh.boundary_edges()[bi].b].push_back(bi);
  }

  for (int v = 0; v < mesh.n_vertices(); ++v) {
    VertexInfo& info = vc.info[v];
    const auto& angles = mesh.vertex_fan_angles(v);
    const int m = static_cast<int>(angles.size());
    info.angle_sum = std::accumulate(angles.begin(), angles.end(), 0.0);

    const bool boundary = mesh.vertex_on_boundary(v);
    if (!boundary) {
      info.category = VertexCategory::Interior;
      double xi = 0.0;
      for (int i = 0; i < m; ++i) xi += std::abs(std::sin(angles[i] + angles[(i + 1) % m]));
      info.xi = xi;
    } else {
      if (vbe[v].size() != 2)
        throw MeshError("boundary vertex " + std::to_string(v) + " has " +
                        std::to_string(vbe[v].size()) + " boundary edges (expected 2)");
      for (int bi : vbe[v]) {
        const auto tag = mesh.boundary_edges()[bi].tag;
        info.on_dirichlet |= (tag == BoundaryTag::Dirichlet);
        info.on_neumann |= (tag == BoundaryTag::Neumann);
      }
      info.dn_junction = info.on_dirichlet && info.on_neumann;
      // corner: the two boundary edges leaving v are not collinear
      std::array<Eigen::Vector2d, 2> dir;
      for (int i = 0; i < 2; ++i) {
        const auto& be = mesh.boundary_edges()[vbe[v][i]];
        const int other = (be.a == v) ? be.b : be.a;
        dir[i] = (mesh.vertex(other) - mesh.vertex(v)).normalized();
      }
      const double cross = dir[0].x() * dir[1].y() - dir[0].y() * dir[1].x();
      info.domain_corner = !(std::abs(cross) < 1e-9 && dir[0].dot(dir[1]) < 0.0);
      if (info.dn_junction)
        info.category = VertexCategory::DNJunction;
      else if (info.domain_corner)
        info.category = VertexCategory::DomainCorner;
      else if (info.on_dirichlet)
        info.category = VertexCategory::DirichletBoundary;
      else
        info.category = VertexCategory::NeumannBoundary;

      double xi = 0.0;
      for (int i = 0; i + 1 < m; ++i) xi += std::abs(std::sin(angles[i] + angles[i + 1]));
      info.xi = xi;
    }
    info.singular = info.xi <= xi_tol;
    if (info.singular) {
      vc.singular_vertices.push_back(v);
      if (info.category == VertexCategory::Interior)
        ++vc.n_singular_interior;
      else if (info.on_dirichlet && !info.dn_junction)
        ++vc.n_singular_dirichlet;
    }
  }
  return vc;
}

CornerSplitResult is_corner_split(const Mesh& mesh, const VertexClassification& vc) {
  CornerSplitResult res;
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const VertexInfo& info = vc.info[v];
    if (info.domain_corner && info.on_dirichlet && !info.dn_junction && info.singular) {
      res.corner_split = false;
      res.offending_vertices.push_back(v);
    }
  }
  return res;
}

int pressure_space_dim(const Mesh& mesh, const VertexClassification& vc, int p) {
  if (p < 1) throw std::invalid_argument("pressure_space_dim: p must be >= 1");
  const long per_elem = long(p) * (p + 1) / 2;
  long dim = per_elem * mesh.n_triangles();
  dim -= vc.n_singular_interior;
  dim -= vc.n_singular_dirichlet;
  if (mesh.full_dirichlet()) dim -= 1;
  return static_cast<int>(dim);
}

}  // namespace svflow
