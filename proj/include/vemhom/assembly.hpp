#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <atomic>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "vemhom/element.hpp"

namespace vemhom {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, Eigen::Index>;

/// A discretized RVE: nodes with boundary flags and element systems that
/// are computed on demand (large meshes never hold all element matrices).
class Discretization {
 public:
  virtual ~Discretization() = default;

  virtual std::string method() const = 0;
  virtual FieldMode mode() const = 0;
  virtual std::size_t num_nodes() const = 0;
  virtual const Point3& node(Index id) const = 0;
  virtual bool is_boundary(Index id) const = 0;
  virtual std::size_t num_elements() const = 0;
  virtual ElementSystem element(std::size_t e) const = 0;
  /// ∫_∂Ω R n dA = Σ_a weights.col(a)·R_a over boundaryNodes, for the
  /// discrete boundary trace.
  virtual void surface_weights(std::vector<Index>& boundaryNodes, Eigen::Matrix3Xd& weights) const = 0;
  virtual double domain_volume() const = 0;

  /// Dof scales (u, φ, φ_mag) applied as a diagonal congruence before
  /// factorization.
  Eigen::Vector3d fieldScales = Eigen::Vector3d::Ones();
};

/// (node, field) ↦ global dof. Global numbering is rank(node)·nf + field
/// where rank is the identity or a caller-supplied node permutation.
class DofMap {
 public:
  DofMap(const Discretization& disc, std::vector<Index> nodePermutation = {});

  FieldMode mode() const { return mode_; }
  int fields() const { return nf_; }
  std::size_t num_dofs() const { return nDofs_; }
  Index dof(Index node, int field) const { return rank_[static_cast<std::size_t>(node)] * nf_ + field; }
  bool is_boundary_dof(Index dof) const { return slot_[static_cast<std::size_t>(dof)] < 0; }
  /// Interior dofs map to 0..nI-1, boundary dofs to -1..-nB.
  Index slot(Index dof) const { return slot_[static_cast<std::size_t>(dof)]; }
  const std::vector<Index>& interior() const { return interior_; }
  const std::vector<Index>& boundary() const { return boundary_; }
  /// Field index (0..2: u, 3: first potential, 4: second) of a global dof.
  int field_of(Index dof) const { return static_cast<int>(dof % nf_); }

 private:
  FieldMode mode_;
  int nf_ = 0;
  std::size_t nDofs_ = 0;
  std::vector<Index> rank_;
  std::vector<Index> slot_;
  std::vector<Index> interior_, boundary_;
};

struct AssemblyStats {
  std::size_t elements = 0;
  std::size_t triplets = 0;
  double maxElementAsymmetry = 0.0;
};

/// Global matrices: K (all dofs) and the averaging operators AP, AL with
/// ∫P dV = AP·p and ∫L dV = AL·p.
struct SparseSystem {
  SparseMatrix K;
  SparseMatrix AP;
  SparseMatrix AL;
  AssemblyStats stats;
};

/// Sums element contributions. Triplets are generated per element chunk
/// (parallel over elements) and merged in element order, so the result does
/// not depend on the worker count. An element matrix that is not symmetric
/// within 1e-12 relative raises NumericalError.
SparseSystem assemble(const Discretization& disc, const DofMap& dofs, unsigned workers = 1);

/// max |K - Kᵀ| / max |K|.
double symmetry_defect(const SparseMatrix& K);

/// Coordinate-format text dump (Matrix Market, general real).
void write_matrix_market(std::ostream& out, const SparseMatrix& K);

struct FactorizationReport {
  std::size_t interiorDofs = 0;
  double minPivot = 0.0;   ///< min |D_ii| of the scaled factorization
  double maxPivot = 0.0;
  double pivotRatio = 0.0; ///< max/min, a cheap conditioning indicator
};

/// Dirichlet elimination plus a symmetric-indefinite LDLᵀ factorization of
/// the scaled interior block, computed once and reused for every right-hand
/// side.
class DirichletSolver {
 public:
  DirichletSolver(const SparseMatrix& K, const DofMap& dofs, const Eigen::Vector3d& fieldScales);

  /// Throws NumericalError when the factorization fails or a pivot falls
  /// below 1e-12 of the largest one (rank deficiency).
  void factorize();
  /// Full nodal solution for the given boundary values (ordered as
  /// dofs.boundary()). Verifies the interior residual against `residualTol`.
  Eigen::VectorXd solve(const Eigen::VectorXd& boundaryValues, double residualTol = 1e-10,
                        double* residualOut = nullptr) const;

  int factorizations() const { return factorizations_; }
  const FactorizationReport& report() const { return report_; }
  /// Process-wide factorization count, for instrumentation.
  static long total_factorizations() { return global_.load(); }

 private:
  const DofMap& dofs_;
  SparseMatrix Kii_, Kib_;
  Eigen::VectorXd scaleI_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<Eigen::Index>> ldlt_;
  int factorizations_ = 0;
  FactorizationReport report_;
  static std::atomic<long> global_;
};

/// Dense per-dof scale vector from per-field scales.
Eigen::VectorXd dof_scales(const DofMap& dofs, const Eigen::Vector3d& fieldScales);

}  // namespace vemhom
