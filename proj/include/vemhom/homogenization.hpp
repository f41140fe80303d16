#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "vemhom/assembly.hpp"

namespace vemhom {

/// Boundary data of the affine field with generalized gradient Pbar
/// (reduced, mode-sized): u = ε̄·x, φ = -Ē·x, φ_mag = -H̄·x. Values are
/// ordered as dofs.boundary().
Eigen::VectorXd boundary_values(const Discretization& disc, const DofMap& dofs, const Eigen::VectorXd& Pbar);

/// Load case k (0-based, reduced) imposes Pbar = e_k. Label is the 1-based
/// index into the full 12-component P.
int load_case_label(FieldMode mode, int k);

struct HomogenizationOptions {
  unsigned workers = 1;
  double residualTol = 1e-10;
  /// 0-based reduced case indices; empty runs all of them.
  std::vector<int> cases;
  /// Keep the full nodal solution of every case.
  bool keepSolutions = false;
};

/// Per-case averages are in working units (see working_unit_factors).
struct LoadCaseResult {
  int index = 0;  ///< reduced, 0-based
  int label = 0;  ///< 1..12
  Eigen::VectorXd avgP;           ///< volume average
  Eigen::VectorXd avgL;           ///< volume average
  Eigen::VectorXd avgPSurface;    ///< from the boundary trace
  Eigen::VectorXd avgLReaction;   ///< from boundary reactions
  double hillResidual = 0.0;      ///< |⟨P·L⟩ − ⟨P⟩·⟨L⟩| / (|⟨P⟩·⟨L⟩| + tiny)
  double averageDefect = 0.0;     ///< max |⟨P⟩ − e_k|
  double solveResidual = 0.0;
  double solveSeconds = 0.0;
};

struct HomogenizationResult {
  std::string method;
  FieldMode mode = FieldMode::FullyCoupled;
  /// Reduced effective modulus in library units; column k holds ⟨L⟩ of
  /// case k converted back (zero for cases not run).
  Eigen::MatrixXd Gbar;
  std::vector<LoadCaseResult> cases;
  std::vector<Eigen::VectorXd> solutions;

  std::size_t nodes = 0, elements = 0, dofs = 0, interiorDofs = 0;
  double volume = 0.0;
  double assemblySeconds = 0.0, factorSeconds = 0.0;
  int factorizations = 0;
  FactorizationReport factor;
  double globalAsymmetry = 0.0;      ///< of the assembled K
  double maxElementAsymmetry = 0.0;
  double gbarAsymmetry = 0.0;        ///< max |Ḡ − Ḡᵀ| / max |Ḡ|
  double maxHillResidual = 0.0;
  double maxAverageDefect = 0.0;
  double maxSurfaceMismatch = 0.0;   ///< volume vs reaction/surface forms, relative

  /// Ḡ embedded in the full 12×12 layout (inactive rows/columns zero).
  Eigen::MatrixXd full_gbar() const;
};

/// Assembles, factorizes once and solves every requested load case. A
/// rank-deficient factorization is reported as NumericalError naming the
/// grains whose element kernel exceeds the physical one.
HomogenizationResult homogenize(const Discretization& disc, const HomogenizationOptions& options = {});

/// Free-form provenance entries (config hash, mesh hash, versions, ...).
using Provenance = std::map<std::string, std::string>;

void write_result_json(std::ostream& out, const HomogenizationResult& r, const Provenance& provenance);
/// One row per Ḡ entry: row,col,label_row,label_col,block,value.
void write_result_csv(std::ostream& out, const HomogenizationResult& r, const Provenance& provenance);

/// Symbol of component i (0..11) of P: eps11..eps12, E1..E3, H1..H3.
std::string component_name(int i);
/// Block name and unit of entry (i, j) of the full 12×12 modulus.
std::string block_name(int i, int j);
std::string block_unit(int i, int j);

}  // namespace vemhom
