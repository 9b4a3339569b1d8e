// Benchmark for the element-parallel kernels: times the serial reference
// against the OpenMP path (assembly + condensation, local interior solves)
// and compares a full IP solve with a full SCIP solve on the same fixture.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>

#include "svflow/parallel.hpp"
#include "svflow/solver.hpp"

using namespace svflow;
using Clock = std::chrono::steady_clock;

namespace {

double time_of(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"svflow kernel benchmark (serial reference vs OpenMP)"};
  int nx = 6, ny = 6, p = 8, reps = 3;
  app.add_option("--nx", nx);
  app.add_option("--ny", ny);
  app.add_option("--p", p)->check(CLI::Range(4, 20));
  app.add_option("--reps", reps)->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const Mesh mesh = gen_crisscross(nx, ny, kovasznay_domain());
  const FlowProblem prob = kovasznay_problem(0.1);
  const int nt = mesh.n_triangles();
  std::printf("fixture: %dx%d criss-cross (%d elements), p = %d, %d thread(s)\n", nx, ny,
              nt, p, hardware_threads());

  std::vector<CondensedElement> elems(nt);
  auto condense_all = [&](ExecMode mode) {
    for_each_element(mode, nt, [&](int t) {
      const ElementGeometry geom(mesh, t);
      const ElementBlocks blocks = element_blocks(geom, p, prob);
      InteriorSaddle saddle = interior_saddle(blocks, t);
      const STMaps st = compute_st(blocks, saddle);
      elems[t] = condense_element(blocks, saddle, st, 1e3);
    });
  };
  const double t_serial = time_of([&] { condense_all(ExecMode::Serial); }, reps);
  const Eigen::MatrixXd reference = elems[0].Atilde;
  const double t_omp = time_of([&] { condense_all(ExecMode::OpenMP); }, reps);
  const bool identical = (reference == elems[0].Atilde);
  std::printf("assemble+condense: serial %.3fs  openmp %.3fs  speedup %.2fx  %s\n",
              t_serial, t_omp, t_serial / t_omp,
              identical ? "(identical bits)" : "(MISMATCH)");

  Eigen::VectorXd ub = Eigen::VectorXd::Constant(elems[0].n_b, 0.1);
  std::vector<LocalInteriorSolution> locals(nt);
  auto solve_all = [&](ExecMode mode) {
    for_each_element(mode, nt, [&](int t) { locals[t] = local_interior_solve(elems[t], ub); });
  };
  const double s_serial = time_of([&] { solve_all(ExecMode::Serial); }, reps);
  const double s_omp = time_of([&] { solve_all(ExecMode::OpenMP); }, reps);
  std::printf("local solves:      serial %.3fs  openmp %.3fs  speedup %.2fx\n", s_serial,
              s_omp, s_serial / s_omp);

  const DofMap dofmap(mesh, p);
  PenaltyConfig pc;
  pc.track_errors = false;
  const double scip_time = time_of(
      [&] {
        pc.method = Method::SCIP;
        scip_solve(dofmap, prob, pc);
      },
      1);
  const double ip_time = time_of(
      [&] {
        pc.method = Method::IP;
        ip_solve(dofmap, prob, pc);
      },
      1);
  std::printf("full solve:        scip %.3fs (dim %ld)  ip %.3fs (dim %ld)\n", scip_time,
              dofmap.n_free_boundary(), ip_time,
              dofmap.n_free_boundary() + dofmap.n_interior_dofs());
  return identical ? 0 : 1;
}
