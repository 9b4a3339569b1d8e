#ifndef SVFLOW_ANALYSIS_HPP
#define SVFLOW_ANALYSIS_HPP

#include <Eigen/Dense>
#include <optional>
#include <random>
#include <string>

#include "svflow/condense.hpp"
#include "svflow/dofmap.hpp"
#include "svflow/field.hpp"
#include "svflow/mesh.hpp"

namespace svflow {

/// Corner-eddy signature along the wedge bisector (x = 0): horizontal
/// velocity is sampled on a log-spaced grid from the lid toward the apex;
/// each sign alternation marks the next eddy, and peak speeds are recorded
/// per band between alternations.
struct EddyScan {
  int sign_alternations = 0;
  std::vector<double> peak_speeds;       // per band, lid side first
  std::vector<double> alternation_y;     // y coordinates of the sign changes
  /// peak_speeds[i] / peak_speeds[i+1] for successive bands
  std::vector<double> intensity_ratios() const;
};
EddyScan moffatt_eddy_scan(const SolutionField& field, int n_samples = 4000);

/// Numerical rank (at 1e-9 * sigma_max) of the pairing (div v, m) over the
/// velocity space (Dirichlet dofs removed) and the elementwise degree-(p-1)
/// test space. Equals dim div X_D; the independent check of the topological
/// dimension count. Dense computation, size-guarded.
int global_div_rank(const DofMap& dofmap);

enum class H1Variant { Norm, Seminorm };

/// Discrete inf-sup constant of the divergence pairing:
///   beta^2 = smallest nonzero eigenvalue of B K^{-1} B^T relative to the
/// pressure mass, with K the H1 Gram on the velocity space and the pressure
/// space realized as the range of B.
double infsup_estimate(const DofMap& dofmap, H1Variant variant = H1Variant::Norm);

struct ExtensionResiduals {
  double idempotence = 0.0;   // S applied twice vs once
  double divergence = 0.0;    // div(Su) vs complement part of div u
  double aform = 0.0;         // a(Su,Sv) = a(Su,Tv) = a(Tu,Tv)
  double decoupling = 0.0;    // (div Su, psi) and a(Su, z) for z in N_I
  double adjoint = 0.0;       // adjoint conditions for the T extension
  double st_identity = 0.0;   // defining saddle identities of S and T
};

/// Residuals of the discrete extension-operator identities on one element,
/// maximized over random trial vectors.
ExtensionResiduals extension_identity_check(const ElementGeometry& geom,
                                            const ElementBlocks& blocks,
                                            const CondensedElement& ce, int trials,
                                            std::mt19937& rng);

/// Numerical basis of the divergence-free interior velocity functions N_I(K):
/// nullspace of G restricted to interior columns (SVD, 1e-9 * sigma_max).
Eigen::MatrixXd interior_nullspace(const ElementBlocks& blocks);

struct DiagnosticsReport {
  int n_vertices = 0, n_triangles = 0, n_edges = 0;
  int p = 0;
  int n_singular_interior = 0, n_singular_dirichlet = 0;
  std::vector<int> singular_vertices;
  bool corner_split = false;
  std::vector<int> offending_corners;
  int dim_qd_predicted = 0;
  std::optional<int> div_rank;  // empty when the size guard was hit
  std::optional<double> infsup_beta;
  std::optional<ExtensionResiduals> extension;
};

DiagnosticsReport build_diagnostics(const Mesh& mesh, int p, bool with_rank = true,
                                    bool with_infsup = true);
std::string format_diagnostics(const DiagnosticsReport& report);
std::string format_diagnostics_kv(const DiagnosticsReport& report);

/// Size guard for the dense computations.
bool dense_guard_ok(const DofMap& dofmap);

}  // namespace svflow

#endif
