#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "svflow/analysis.hpp"
#include "svflow/solver.hpp"

using namespace svflow;

namespace {

FlowProblem zero_problem() {
  FlowProblem prob;
  prob.form.kind = FormKind::Stokes;
  prob.body_force = [](const Eigen::Vector2d&) { return Eigen::Vector2d::Zero().eval(); };
  prob.dirichlet_data = [](const Eigen::Vector2d&) { return Eigen::Vector2d::Zero().eval(); };
  return prob;
}

// Stokes problem with polynomial exact solution u = curl(x^3 y^2),
// q = x^2 + y; exact at p >= 4 so solves hit machine precision
FlowProblem manufactured_problem() {
  auto velocity = [](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(2.0 * std::pow(x.x(), 3) * x.y(),
                           -3.0 * x.x() * x.x() * x.y() * x.y());
  };
  auto gradient = [](const Eigen::Vector2d& x) {
    Eigen::Matrix2d g;
    g(0, 0) = 6.0 * x.x() * x.x() * x.y();
    g(0, 1) = 2.0 * std::pow(x.x(), 3);
    g(1, 0) = -6.0 * x.x() * x.y() * x.y();
    g(1, 1) = -6.0 * x.x() * x.x() * x.y();
    return g;
  };
  auto pressure = [](const Eigen::Vector2d& x) { return x.x() * x.x() + x.y(); };

  FlowProblem prob;
  prob.form.kind = FormKind::Stokes;
  prob.form.nu = 1.0;
  // f = -2 div eps(u) + grad q = -lap u + grad q for div-free u
  prob.body_force = [](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(-12.0 * x.x() * x.y() + 2.0 * x.x(),
                           6.0 * x.y() * x.y() + 6.0 * x.x() * x.x() + 1.0);
  };
  prob.dirichlet_data = velocity;
  // traction on the bottom edge (outward normal (0,-1)):
  // g = 2 eps(u) n - q n = (-2 eps12, -2 eps22 + q)
  prob.neumann_traction = [velocity, pressure](const Eigen::Vector2d& x) {
    const double eps12 = std::pow(x.x(), 3) - 3.0 * x.x() * x.y() * x.y();
    const double eps22 = -6.0 * x.x() * x.x() * x.y();
    return Eigen::Vector2d(-2.0 * eps12, -2.0 * eps22 + pressure(x));
  };
  prob.exact = ExactSolution{velocity, gradient, pressure};
  return prob;
}

Mesh crisscross_with_neumann_bottom(int n) {
  Mesh base = gen_crisscross(n, n);
  std::vector<Mesh::BoundaryEdge> bes = base.boundary_edges();
  for (auto& be : bes) {
    if (std::abs(base.vertex(be.a).y()) < 1e-12 && std::abs(base.vertex(be.b).y()) < 1e-12)
      be.tag = BoundaryTag::Neumann;
  }
  return Mesh(base.vertices(), base.triangles(), bes);
}

}  // namespace

TEST_CASE("zero data converges immediately to zero") {
  const Mesh mesh = gen_crisscross(2, 2);
  const DofMap dofmap(mesh, 4);
  PenaltyConfig config;
  for (Method m : {Method::IP, Method::SCIP}) {
    config.method = m;
    const DiscreteSolution sol =
        m == Method::IP ? ip_solve(dofmap, zero_problem(), config)
                        : scip_solve(dofmap, zero_problem(), config);
    CHECK(sol.stats.converged);
    CHECK(sol.stats.iterations == 1);
    CHECK(sol.history[0].div_norm <= config.div_tol);
    CHECK(sol.u_boundary.cwiseAbs().maxCoeff() < 1e-14);
    const SolutionField field = reconstruct(dofmap, sol);
    CHECK(velocity_h1_norm(field) < 1e-13);
  }
}

TEST_CASE("divergence norm of interpolated fields") {
  const Mesh mesh = gen_crisscross(2, 2, {0.0, 0.0, 2.0, 1.0});
  const int p = 4;
  SolutionField field(mesh, p);
  SUBCASE("divergence-free linear field (x, -y)") {
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      const ElementGeometry geom(mesh, t);
      field.velocity()[t] = interpolate_at_domain_points(
          geom, p, [](const Eigen::Vector2d& x) { return Eigen::Vector2d(x.x(), -x.y()); });
    }
    CHECK(divergence_l2(field) < 1e-12);
  }
  SUBCASE("unit-divergence field (x, 0) over total area A gives sqrt(A)") {
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      const ElementGeometry geom(mesh, t);
      field.velocity()[t] = interpolate_at_domain_points(
          geom, p, [](const Eigen::Vector2d& x) { return Eigen::Vector2d(x.x(), 0.0); });
    }
    CHECK(divergence_l2(field) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("kovasznay on the benchmark mesh decays geometrically") {
  const FlowProblem prob = kovasznay_problem(0.1);
  const Mesh mesh = gen_crisscross(4, 4, kovasznay_domain());
  const DofMap dofmap(mesh, 4);
  PenaltyConfig config;
  const DiscreteSolution sol = scip_solve(dofmap, prob, config);
  CHECK(sol.stats.converged);
  CHECK(sol.history.back().div_norm <= 1e-10);
  for (size_t n = 0; n + 1 < sol.history.size(); ++n)
    CHECK(sol.history[n + 1].div_norm < 0.2 * sol.history[n].div_norm);
  // larger lambda decays at least as fast per iteration
  PenaltyConfig small = config;
  small.lambda = 1e2;
  small.track_errors = false;
  const DiscreteSolution slow = scip_solve(dofmap, prob, small);
  CHECK(decay_ratio(sol.history, config.div_tol) <=
        decay_ratio(slow.history, small.div_tol));
}

TEST_CASE("IP and SCIP agree (method equivalence)") {
  const FlowProblem prob = kovasznay_problem(0.1);
  const Mesh mesh = gen_crisscross(2, 2, kovasznay_domain());
  for (int p : {4, 5}) {
    const DofMap dofmap(mesh, p);
    PenaltyConfig config;
    config.div_tol = 1e-10;
    config.track_errors = false;
    const DiscreteSolution ip = ip_solve(dofmap, prob, config);
    const DiscreteSolution scip = scip_solve(dofmap, prob, config);
    REQUIRE(ip.stats.converged);
    REQUIRE(scip.stats.converged);
    const SolutionField f_ip = reconstruct(dofmap, ip);
    const SolutionField f_scip = reconstruct(dofmap, scip);
    const double rel_h1 = velocity_h1_diff(f_ip, f_scip) / velocity_h1_norm(f_ip);
    CHECK(rel_h1 < 1e-8);
    CHECK(pressure_l2_diff(f_ip, f_scip) < 1e-7);
    // pressures agree pointwise at the domain center
    const Eigen::Vector2d center(0.75, 0.5);
    CHECK(std::abs(f_ip.pressure_at(center) - f_scip.pressure_at(center)) < 1e-8);
  }
}

TEST_CASE("system dimensions and factorization counts") {
  const FlowProblem prob = kovasznay_problem(0.1);
  const Mesh mesh = gen_crisscross(4, 4, kovasznay_domain());
  const DofMap dofmap(mesh, 4);
  PenaltyConfig config;
  config.track_errors = false;
  const DiscreteSolution scip = scip_solve(dofmap, prob, config);
  CHECK(scip.stats.system_dim == dofmap.n_free_boundary());
  CHECK(scip.stats.factorization_count == 1);
  const DiscreteSolution ip = ip_solve(dofmap, prob, config);
  CHECK(ip.stats.system_dim == dofmap.n_free_boundary() + dofmap.n_interior_dofs());
  CHECK(ip.stats.factorization_count == 1);
}

TEST_CASE("local interior solves reproduce the IP interiors") {
  const FlowProblem prob = kovasznay_problem(0.1);
  const Mesh mesh = gen_crisscross(2, 2, kovasznay_domain());
  const DofMap dofmap(mesh, 5);
  PenaltyConfig config;
  config.div_tol = 1e-12;
  config.track_errors = false;
  const DiscreteSolution ip = ip_solve(dofmap, prob, config);
  const DiscreteSolution scip = scip_solve(dofmap, prob, config);
  for (int t = 0; t < mesh.n_triangles(); ++t)
    CHECK((ip.u_interior[t] - scip.u_interior[t]).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("reconstructed velocity is continuous across edges") {
  const FlowProblem prob = kovasznay_problem(0.1);
  const Mesh mesh = gen_crisscross(2, 2, kovasznay_domain());
  const DofMap dofmap(mesh, 4);
  PenaltyConfig config;
  config.track_errors = false;
  const DiscreteSolution sol = scip_solve(dofmap, prob, config);
  const SolutionField field = reconstruct(dofmap, sol);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> uni(0.1, 0.9);
  for (const auto& edge : mesh.edges()) {
    if (edge.elems[1] < 0) continue;
    for (int rep = 0; rep < 10; ++rep) {
      const double s = uni(rng);
      const Eigen::Vector2d x =
          (1 - s) * mesh.vertex(edge.a) + s * mesh.vertex(edge.b);
      Eigen::Vector2d vals[2];
      for (int side = 0; side < 2; ++side) {
        const int t = edge.elems[side];
        vals[side] = field.velocity_in_element(t, ElementGeometry(mesh, t).barycentric(x));
      }
      CHECK((vals[0] - vals[1]).norm() < 1e-11);
    }
  }
  CHECK_THROWS_AS(field.velocity_at(Eigen::Vector2d(50.0, 50.0)), std::domain_error);
}

TEST_CASE("kovasznay pressure value at the domain center") {
  const FlowProblem prob = kovasznay_problem(0.1);
  const Mesh mesh = gen_crisscross(4, 4, kovasznay_domain());
  const DofMap dofmap(mesh, 7);
  PenaltyConfig config;
  config.track_errors = false;
  const DiscreteSolution sol = scip_solve(dofmap, prob, config);
  const SolutionField field = reconstruct(dofmap, sol);
  const Eigen::Vector2d center(0.75, 0.5);
  CHECK(field.pressure_at(center) ==
        doctest::Approx(prob.exact->pressure(center)).epsilon(1e-4));
}

TEST_CASE("pressure needs one to two extra iterations to plateau") {
  const FlowProblem prob = kovasznay_problem(0.1);
  const Mesh mesh = gen_crisscross(4, 4, kovasznay_domain());
  const DofMap dofmap(mesh, 7);
  PenaltyConfig config;
  config.div_tol = 1e-13;
  const DiscreteSolution sol = scip_solve(dofmap, prob, config);
  auto plateau_index = [&](auto getter) {
    const double final_err = getter(sol.history.back());
    for (size_t n = 0; n < sol.history.size(); ++n)
      if (getter(sol.history[n]) <= 2.0 * final_err) return n;
    return sol.history.size();
  };
  const size_t vel_idx =
      plateau_index([](const IterationRecord& r) { return r.rel_h1_err; });
  const size_t press_idx =
      plateau_index([](const IterationRecord& r) { return r.rel_press_err; });
  CHECK(press_idx >= vel_idx);
}

TEST_CASE("velocity error is non-increasing until its plateau") {
  const FlowProblem prob = kovasznay_problem(0.1);
  const Mesh mesh = gen_crisscross(4, 4, kovasznay_domain());
  for (int p : {4, 7}) {
    const DofMap dofmap(mesh, p);
    PenaltyConfig config;
    config.div_tol = 1e-13;
    const DiscreteSolution sol = scip_solve(dofmap, prob, config);
    const double plateau = sol.history.back().rel_h1_err;
    for (size_t n = 0; n + 1 < sol.history.size(); ++n) {
      if (sol.history[n].rel_h1_err <= 2.0 * plateau) break;  // reached the plateau
      CHECK(sol.history[n + 1].rel_h1_err <= 1.05 * sol.history[n].rel_h1_err);
    }
  }
}

TEST_CASE("manufactured half-Neumann Stokes problem is reproduced exactly") {
  const FlowProblem prob = manufactured_problem();
  const Mesh mesh = crisscross_with_neumann_bottom(2);
  CHECK(!mesh.full_dirichlet());
  const DofMap dofmap(mesh, 4);
  PenaltyConfig config;
  config.div_tol = 1e-12;
  config.track_errors = false;
  for (Method m : {Method::SCIP, Method::IP}) {
    config.method = m;
    const DiscreteSolution sol = m == Method::IP ? ip_solve(dofmap, prob, config)
                                                 : scip_solve(dofmap, prob, config);
    const SolutionField field = reconstruct(dofmap, sol);
    const ErrorPair err = error_norms(field, *prob.exact, 2 * dofmap.p() + 6);
    CHECK(err.rel_h1_velocity < 1e-9);
    CHECK(err.rel_l2_pressure < 1e-8);
  }
}

TEST_CASE("perturbed form solves a manufactured problem exactly") {
  // a(u,v) = (u,v) + delta * 2 nu (eps(u),eps(v)); with the polynomial pair
  // u = curl(x^3 y^2), q = x^2 + y the data is f = u - delta lap u + grad q
  const double delta = 0.25;
  auto velocity = [](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(2.0 * std::pow(x.x(), 3) * x.y(),
                           -3.0 * x.x() * x.x() * x.y() * x.y());
  };
  auto gradient = [](const Eigen::Vector2d& x) {
    Eigen::Matrix2d g;
    g(0, 0) = 6.0 * x.x() * x.x() * x.y();
    g(0, 1) = 2.0 * std::pow(x.x(), 3);
    g(1, 0) = -6.0 * x.x() * x.y() * x.y();
    g(1, 1) = -6.0 * x.x() * x.x() * x.y();
    return g;
  };
  auto pressure = [](const Eigen::Vector2d& x) { return x.x() * x.x() + x.y(); };

  FlowProblem prob;
  prob.form.kind = FormKind::Perturbed;
  prob.form.nu = 1.0;
  prob.form.delta = delta;
  prob.form.convection = [](const Eigen::Vector2d&) { return Eigen::Vector2d::Zero().eval(); };
  prob.form.convection_degree = 0;
  prob.body_force = [=](const Eigen::Vector2d& x) {
    const Eigen::Vector2d lap(12.0 * x.x() * x.y(),
                              -6.0 * x.y() * x.y() - 6.0 * x.x() * x.x());
    const Eigen::Vector2d grad_q(2.0 * x.x(), 1.0);
    return (velocity(x) - delta * lap + grad_q).eval();
  };
  prob.dirichlet_data = velocity;
  prob.exact = ExactSolution{velocity, gradient, pressure};

  const Mesh mesh = gen_crisscross(2, 2);
  const DofMap dofmap(mesh, 4);
  PenaltyConfig config;
  config.div_tol = 1e-12;
  config.track_errors = false;
  const DiscreteSolution sol = scip_solve(dofmap, prob, config);
  const ErrorPair err =
      error_norms(reconstruct(dofmap, sol), *prob.exact, 2 * dofmap.p() + 6);
  CHECK(err.rel_h1_velocity < 1e-9);
  CHECK(err.rel_l2_pressure < 1e-8);
}

TEST_CASE("oseen convection part is nonnegative on the homogeneous subspace") {
  // assembled N = E_oseen - E_stokes over free dofs; for div-free w and
  // homogeneous Dirichlet the convection form is skew, so the H1-normalized
  // Rayleigh quotient of its symmetric part stays above -1e-10
  const FlowProblem oseen = kovasznay_problem(0.1);
  FlowProblem stokes = oseen;
  stokes.form.kind = FormKind::Stokes;
  const Mesh mesh = gen_crisscross(4, 4, kovasznay_domain());
  const DofMap dofmap(mesh, 4);

  auto assemble_e = [&](const FlowProblem& prob) {
    std::vector<ElementBlocks> blocks;
    for (int t = 0; t < mesh.n_triangles(); ++t)
      blocks.push_back(element_blocks(ElementGeometry(mesh, t), 4, prob));
    return assemble_full_system(dofmap, blocks);
  };
  const Eigen::MatrixXd n_conv =
      Eigen::MatrixXd(assemble_e(oseen).E_ff) - Eigen::MatrixXd(assemble_e(stokes).E_ff);
  const Eigen::MatrixXd sym = 0.5 * (n_conv + n_conv.transpose());

  Eigen::MatrixXd h1 = Eigen::MatrixXd::Zero(sym.rows(), sym.cols());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const Eigen::MatrixXd gram = element_h1_gram(ElementGeometry(mesh, t), 4);
    const auto& gather = dofmap.boundary_gather(t);
    std::vector<long> fidx(dofmap.n_b() + dofmap.n_i(), -1);
    for (int r = 0; r < dofmap.n_b(); ++r) fidx[r] = dofmap.free_boundary_index(gather[r]);
    for (int r = 0; r < dofmap.n_i(); ++r)
      fidx[dofmap.n_b() + r] = dofmap.n_free_boundary() +
                               (dofmap.interior_base(t) - dofmap.n_boundary_dofs()) + r;
    for (size_t r = 0; r < fidx.size(); ++r)
      for (size_t c = 0; c < fidx.size(); ++c)
        if (fidx[r] >= 0 && fidx[c] >= 0) h1(fidx[r], fidx[c]) += gram(r, c);
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, h1);
  CHECK(eig.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("incompatible dirichlet data is rejected") {
  FlowProblem prob = zero_problem();
  prob.dirichlet_data = [](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(x.x(), x.y());  // net outflow
  };
  const Mesh mesh = gen_crisscross(1, 1);
  const DofMap dofmap(mesh, 4);
  PenaltyConfig config;
  CHECK_THROWS_AS(scip_solve(dofmap, prob, config), SolverError);
}

TEST_CASE("divergence watch") {
  SUBCASE("three non-decreasing values well above the floor trigger") {
    DivergenceWatch watch;
    CHECK(!watch.update(1e-3, 1e-10));
    CHECK(!watch.update(1e-4, 1e-10));  // best so far
    CHECK(!watch.update(2e-3, 1e-10));
    CHECK(!watch.update(3e-3, 1e-10));
    CHECK(watch.update(4e-3, 1e-10));
  }
  SUBCASE("round-off plateau wobble does not trigger") {
    DivergenceWatch watch;
    bool fired = false;
    for (double d : {1e-3, 1e-6, 2.1e-10, 2.0e-10, 2.05e-10, 2.06e-10, 2.04e-10})
      fired = fired || watch.update(d, 1e-12);
    CHECK(!fired);
  }
  SUBCASE("slow monotone decrease does not trigger") {
    DivergenceWatch watch;
    double d = 1.0;
    bool fired = false;
    for (int i = 0; i < 10; ++i) {
      fired = fired || watch.update(d, 1e-10);
      d *= 0.98;
    }
    CHECK(!fired);
  }
}

TEST_CASE("decay ratio helper") {
  std::vector<IterationRecord> hist;
  for (double d : {1e-2, 1e-4, 1e-6, 1e-8, 3e-12, 2.9e-12}) {
    IterationRecord r;
    r.div_norm = d;
    hist.push_back(r);
  }
  // plateau pairs near 3e-12 are excluded by the floor
  CHECK(decay_ratio(hist, 1e-10) == doctest::Approx(1e-2).epsilon(1e-6));
}
