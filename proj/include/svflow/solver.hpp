#ifndef SVFLOW_SOLVER_HPP
#define SVFLOW_SOLVER_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "svflow/condense.hpp"
#include "svflow/dofmap.hpp"
#include "svflow/field.hpp"
#include "svflow/parallel.hpp"
#include "svflow/problems.hpp"

namespace svflow {

enum class Method { IP, SCIP };

struct PenaltyConfig {
  double lambda = 1e3;
  double div_tol = 1e-10;
  int max_iters = 8;
  Method method = Method::SCIP;
  ExecMode exec = ExecMode::OpenMP;
  /// Record per-iteration error columns when an exact solution is configured.
  bool track_errors = true;
};

struct IterationRecord {
  int iter = 0;
  double div_norm = 0.0;
  double rel_h1_err = std::numeric_limits<double>::quiet_NaN();
  double rel_press_err = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
};

struct SolveStats {
  long system_dim = 0;          // dimension of the per-iteration factorized system
  int factorization_count = 0;  // global factorizations performed
  int iterations = 0;
  bool converged = false;
  bool aborted = false;
  std::string abort_reason;
};

/// Watches the divergence history for an undersized penalty parameter: three
/// consecutive non-decreasing values trigger the abort, but only once the
/// norm sits well above both the best value seen (ruling out the round-off
/// plateau) and the stopping tolerance.
class DivergenceWatch {
 public:
  /// Returns true when the solve should abort with "lambda too small".
  bool update(double div_norm, double div_tol);

 private:
  double min_div_ = std::numeric_limits<double>::infinity();
  double prev_ = std::numeric_limits<double>::infinity();
  int non_decreasing_ = 0;
};

struct DiscreteSolution {
  int p = 0;
  Method method = Method::SCIP;
  Eigen::VectorXd u_boundary;                // all boundary dofs (with BC values)
  std::vector<Eigen::VectorXd> u_interior;   // per element, local interior order
  std::vector<Eigen::VectorXd> q_interior;   // per element (SCIP)
  Eigen::VectorXd w_boundary;                // penalty accumulator, boundary dofs
  std::vector<Eigen::VectorXd> w_interior;   // accumulator interiors (IP)
  std::vector<IterationRecord> history;
  SolveStats stats;
};

/// Standard iterated penalty method: iterates over the full velocity space,
/// one sparse factorization reused across iterations.
DiscreteSolution ip_solve(const DofMap& dofmap, const FlowProblem& problem,
                          const PenaltyConfig& config);

/// Statically condensed iterated penalty method: iterates boundary dofs only;
/// element interiors are recovered once afterwards from the retained local
/// factorizations.
DiscreteSolution scip_solve(const DofMap& dofmap, const FlowProblem& problem,
                            const PenaltyConfig& config);

/// Bernstein-coefficient representation (velocity and pressure) of a solve
/// result. Pressure is div of the accumulator plus, for SCIP, the local
/// interior pressures; shifted to zero mean on full-Dirichlet problems.
SolutionField reconstruct(const DofMap& dofmap, const DiscreteSolution& solution);

/// Exact L2 norm of div u for the solution's velocity.
double divergence_norm(const DofMap& dofmap, const DiscreteSolution& solution);

/// Geometric-mean per-iteration decay ratio of the div norms before the
/// round-off plateau; 0 when fewer than two qualifying iterations exist.
double decay_ratio(const std::vector<IterationRecord>& history, double div_tol);

}  // namespace svflow

#endif
