#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "svflow/mesh.hpp"

using namespace svflow;

namespace {

Mesh two_triangle_square() {
  return Mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{{0, 1, 2}}, {{0, 2, 3}}},
              {{0, 1, BoundaryTag::Dirichlet},
               {1, 2, BoundaryTag::Dirichlet},
               {2, 3, BoundaryTag::Dirichlet},
               {3, 0, BoundaryTag::Dirichlet}});
}

}  // namespace

TEST_CASE("single-element mesh from text") {
  std::istringstream in(
      "# smallest valid mesh\n"
      "vertices 3\n0 0\n1 0\n0 1\n"
      "triangles 1\n0 1 2\n"
      "boundary 3\n0 1 D\n1 2 D\n2 0 D\n");
  const Mesh mesh = parse_mesh(in, "inline");
  CHECK(mesh.n_triangles() == 1);
  CHECK(mesh.n_vertices() == 3);
  CHECK(mesh.n_edges() == 3);
  CHECK(mesh.full_dirichlet());
}

TEST_CASE("hanging vertex is rejected as nonconforming") {
  // big triangle (0,1,2); vertex 3 sits mid-edge of it and splits the right side
  std::istringstream in(
      "vertices 5\n0 0\n2 0\n0 2\n1 1\n2 2\n"
      "triangles 3\n0 1 2\n1 4 3\n3 4 2\n"
      "boundary 4\n0 1 D\n2 0 D\n1 4 D\n4 2 D\n");
  CHECK_THROWS_WITH_AS(parse_mesh(in, "inline"), doctest::Contains("nonconforming"),
                       MeshError);
}

TEST_CASE("untagged boundary edge is inconsistent") {
  std::istringstream in(
      "vertices 3\n0 0\n1 0\n0 1\n"
      "triangles 1\n0 1 2\n"
      "boundary 2\n0 1 D\n1 2 D\n");
  CHECK_THROWS_WITH_AS(parse_mesh(in, "inline"), doctest::Contains("boundary"), MeshError);
}

TEST_CASE("two-triangle square adjacency") {
  const Mesh mesh = two_triangle_square();
  CHECK(mesh.n_triangles() == 2);
  CHECK(mesh.n_edges() == 5);
  int interior_edges = 0;
  for (const auto& e : mesh.edges())
    if (e.elems[1] != -1) ++interior_edges;
  CHECK(interior_edges == 1);
  // CW input is reoriented
  const Mesh cw({{0, 0}, {1, 0}, {0, 1}}, {{{0, 2, 1}}},
                {{0, 1, BoundaryTag::Dirichlet},
                 {1, 2, BoundaryTag::Dirichlet},
                 {2, 0, BoundaryTag::Dirichlet}});
  CHECK(cw.area(0) == doctest::Approx(0.5));
}

TEST_CASE("criss-cross generation") {
  SUBCASE("1x1") {
    const Mesh mesh = gen_crisscross(1, 1);
    CHECK(mesh.n_triangles() == 4);
    CHECK(mesh.n_vertices() == 5);
    CHECK(mesh.vertex_fan(4).size() == 4);  // center abuts all four
  }
  SUBCASE("4x4 on the benchmark rectangle") {
    const Mesh mesh = gen_crisscross(4, 4, {-0.5, -0.5, 2.0, 1.5});
    CHECK(mesh.n_triangles() == 64);
    CHECK(mesh.n_vertices() == (4 + 1) * (4 + 1) + 16);
    const VertexClassification vc = classify_vertices(mesh);
    CHECK(vc.n_singular_interior == 16);  // every cell center
    CHECK(mesh.total_area() == doctest::Approx(2.5 * 2.0));
  }
  SUBCASE("2x1") {
    const Mesh mesh = gen_crisscross(2, 1);
    CHECK(mesh.n_triangles() == 8);
    const VertexClassification vc = classify_vertices(mesh);
    CHECK(vc.n_singular_interior == 2);
  }
  CHECK_THROWS_AS(gen_crisscross(0, 1), MeshError);
}

TEST_CASE("mesh text round trip") {
  const Mesh mesh = gen_crisscross(2, 2, {-0.5, -0.5, 2.0, 1.5});
  std::ostringstream out;
  write_mesh(out, mesh);
  std::istringstream in(out.str());
  const Mesh back = parse_mesh(in, "roundtrip");
  CHECK(back.n_triangles() == mesh.n_triangles());
  CHECK(back.n_edges() == mesh.n_edges());
  CHECK(back.total_area() == doctest::Approx(mesh.total_area()));
}

TEST_CASE("vertex classification on the criss-cross") {
  const Mesh mesh = gen_crisscross(1, 1);
  const VertexClassification vc = classify_vertices(mesh);
  // center: four right angles, xi = 4 |sin pi| = 0
  CHECK(vc.info[4].category == VertexCategory::Interior);
  CHECK(vc.info[4].xi == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(vc.info[4].singular);
  CHECK(vc.info[4].angle_sum == doctest::Approx(2 * M_PI));
  // square corners: two 45-degree sectors, xi = |sin(pi/2)| = 1, not singular
  for (int v = 0; v < 4; ++v) {
    CHECK(vc.info[v].domain_corner);
    CHECK(vc.info[v].xi == doctest::Approx(1.0));
    CHECK(!vc.info[v].singular);
  }
}

TEST_CASE("interior vertex with three unequal sectors is not singular") {
  // fan of three triangles around the origin with angles pi/2, 3pi/4, 3pi/4
  std::vector<Eigen::Vector2d> pts;
  pts.push_back({0, 0});
  const double angles[] = {0.0, M_PI / 2, M_PI / 2 + 3 * M_PI / 4, 2 * M_PI};
  for (double a : angles) pts.push_back({std::cos(a), std::sin(a)});
  // pts[1] and pts[4] coincide; use wrap to close the fan
  const Mesh mesh({pts[0], pts[1], pts[2], pts[3]},
                  {{{0, 1, 2}}, {{0, 2, 3}}, {{0, 3, 1}}},
                  {{1, 2, BoundaryTag::Dirichlet},
                   {2, 3, BoundaryTag::Dirichlet},
                   {3, 1, BoundaryTag::Dirichlet}});
  const VertexClassification vc = classify_vertices(mesh);
  CHECK(vc.info[0].category == VertexCategory::Interior);
  const double expected = std::abs(std::sin(M_PI / 2 + 3 * M_PI / 4)) +
                          std::abs(std::sin(3 * M_PI / 4 + 3 * M_PI / 4)) +
                          std::abs(std::sin(3 * M_PI / 4 + M_PI / 2));
  CHECK(vc.info[0].xi == doctest::Approx(expected).epsilon(1e-12));
  CHECK(!vc.info[0].singular);
}

TEST_CASE("boundary vertex with a single element is singular") {
  const Mesh mesh({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}},
                  {{0, 1, BoundaryTag::Dirichlet},
                   {1, 2, BoundaryTag::Dirichlet},
                   {2, 0, BoundaryTag::Dirichlet}});
  const VertexClassification vc = classify_vertices(mesh);
  for (int v = 0; v < 3; ++v) {
    CHECK(vc.info[v].xi == doctest::Approx(0.0));
    CHECK(vc.info[v].singular);
  }
  CHECK(vc.n_singular_dirichlet == 3);
}

TEST_CASE("xi invariance under rigid motions and fan relabeling") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    // random interior fan: 3..7 rays around the origin
    const int m = 3 + int(uni(rng) * 4.99);
    std::vector<double> rays(m);
    for (int i = 0; i < m; ++i) rays[i] = 2 * M_PI * uni(rng);
    std::sort(rays.begin(), rays.end());
    bool degenerate = false;
    for (int i = 0; i < m; ++i) {
      const double gap =
          (i + 1 < m ? rays[i + 1] : rays[0] + 2 * M_PI) - rays[i];
      if (gap < 0.15 || gap > M_PI - 0.15) degenerate = true;
    }
    if (degenerate) continue;

    auto build = [&](double rot, int shift) {
      std::vector<Eigen::Vector2d> pts{{0, 0}};
      for (int i = 0; i < m; ++i) {
        const double a = rays[(i + shift) % m] + rot;
        pts.push_back({std::cos(a), std::sin(a)});
      }
      std::vector<std::array<int, 3>> tris;
      std::vector<Mesh::BoundaryEdge> bes;
      for (int i = 0; i < m; ++i) {
        tris.push_back({0, 1 + i, 1 + (i + 1) % m});
        bes.push_back({1 + i, 1 + (i + 1) % m, BoundaryTag::Dirichlet});
      }
      return Mesh(std::move(pts), std::move(tris), std::move(bes));
    };
    const double xi0 = classify_vertices(build(0.0, 0)).info[0].xi;
    const double xi_rot = classify_vertices(build(1.234, 0)).info[0].xi;
    const double xi_shift = classify_vertices(build(0.0, 1)).info[0].xi;
    CHECK(xi_rot == doctest::Approx(xi0).epsilon(1e-10));
    CHECK(xi_shift == doctest::Approx(xi0).epsilon(1e-10));
  }
}

TEST_CASE("corner-split verdicts") {
  SUBCASE("two-triangle square is not corner-split") {
    const Mesh mesh = two_triangle_square();
    const auto res = is_corner_split(mesh, classify_vertices(mesh));
    CHECK(!res.corner_split);
    CHECK(res.offending_vertices.size() == 2);  // the two single-element corners
  }
  SUBCASE("criss-cross square is corner-split") {
    const Mesh mesh = gen_crisscross(1, 1);
    CHECK(is_corner_split(mesh, classify_vertices(mesh)).corner_split);
  }
  SUBCASE("wedge is corner-split") {
    const Mesh mesh = gen_wedge();
    CHECK(is_corner_split(mesh, classify_vertices(mesh)).corner_split);
  }
}

TEST_CASE("wedge geometry") {
  const WedgeOptions opts;
  const Mesh mesh = gen_wedge(opts);
  CHECK(mesh.n_triangles() >= 20);
  CHECK(mesh.n_triangles() == 22);
  CHECK(mesh.full_dirichlet());
  // apex angle equals the configured opening angle
  const int apex = mesh.n_vertices() - 1;
  const auto& fan = mesh.vertex_fan_angles(apex);
  double total = 0.0;
  for (double a : fan) total += a;
  CHECK(std::abs(total - opts.opening_angle_deg * M_PI / 180.0) < 1e-12);
}

TEST_CASE("generated meshes satisfy the conformity invariants") {
  std::vector<Mesh> meshes;
  meshes.push_back(gen_crisscross(1, 1));
  meshes.push_back(gen_crisscross(3, 2, {-1.0, 0.5, 2.0, 3.5}));
  meshes.push_back(gen_crisscross(5, 5));
  meshes.push_back(gen_wedge());
  meshes.push_back(gen_wedge({45.0, 4, 0.3}));
  for (const Mesh& mesh : meshes) {
    double area = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      CHECK(mesh.area(t) > 0.0);
      area += mesh.area(t);
    }
    CHECK(area == doctest::Approx(mesh.total_area()));
    // every edge belongs to one (boundary) or two (interior) triangles, and
    // the boundary tags cover exactly the one-triangle edges
    for (const auto& e : mesh.edges()) {
      if (e.elems[1] == -1)
        CHECK(e.boundary_idx >= 0);
      else
        CHECK(e.boundary_idx == -1);
    }
    // vertex fans tile the full angle
    const VertexClassification vc = classify_vertices(mesh);
    for (int v = 0; v < mesh.n_vertices(); ++v) {
      for (double theta : mesh.vertex_fan_angles(v)) CHECK(theta > 0.0);
      if (!mesh.vertex_on_boundary(v))
        CHECK(vc.info[v].angle_sum == doctest::Approx(2 * M_PI).epsilon(1e-9));
      else
        CHECK(vc.info[v].angle_sum <= 2 * M_PI + 1e-9);
    }
  }
}

TEST_CASE("load_mesh reads a file from disk") {
  const Mesh mesh = gen_crisscross(2, 3, {-0.5, -0.5, 2.0, 1.5});
  {
    std::ofstream out("/tmp/svflow_mesh_roundtrip.txt");
    write_mesh(out, mesh);
  }
  const Mesh back = load_mesh("/tmp/svflow_mesh_roundtrip.txt");
  CHECK(back.n_triangles() == mesh.n_triangles());
  CHECK(back.total_area() == doctest::Approx(mesh.total_area()));
  CHECK_THROWS_AS(load_mesh("/tmp/svflow_no_such_mesh.txt"), MeshError);
}

TEST_CASE("wedge honors a configured opening angle") {
  const WedgeOptions opts{20.0, 4, 0.5};
  const Mesh mesh = gen_wedge(opts);
  const int apex = mesh.n_vertices() - 1;
  double total = 0.0;
  for (double a : mesh.vertex_fan_angles(apex)) total += a;
  CHECK(std::abs(total - 20.0 * M_PI / 180.0) < 1e-12);
  CHECK(mesh.n_triangles() == 4 * 4 + 2);
}

TEST_CASE("pressure space dimension counting") {
  SUBCASE("single triangle, full Dirichlet, p = 4") {
    const Mesh mesh({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}},
                    {{0, 1, BoundaryTag::Dirichlet},
                     {1, 2, BoundaryTag::Dirichlet},
                     {2, 0, BoundaryTag::Dirichlet}});
    CHECK(pressure_space_dim(mesh, classify_vertices(mesh), 4) == 6);
  }
  SUBCASE("1x1 criss-cross, full Dirichlet") {
    const Mesh mesh = gen_crisscross(1, 1);
    const auto vc = classify_vertices(mesh);
    // 40 - 1 singular center - 1 mean constraint; corners are not singular
    CHECK(pressure_space_dim(mesh, vc, 4) == 38);
    CHECK(pressure_space_dim(mesh, vc, 5) == 58);
  }
  SUBCASE("one Neumann edge removes the mean constraint") {
    Mesh mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}},
              {{{0, 1, 4}}, {{1, 2, 4}}, {{2, 3, 4}}, {{3, 0, 4}}},
              {{0, 1, BoundaryTag::Neumann},
               {1, 2, BoundaryTag::Dirichlet},
               {2, 3, BoundaryTag::Dirichlet},
               {3, 0, BoundaryTag::Dirichlet}});
    CHECK(!mesh.full_dirichlet());
    const auto vc = classify_vertices(mesh);
    CHECK(pressure_space_dim(mesh, vc, 4) == 39);
  }
}
