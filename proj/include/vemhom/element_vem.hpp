#pragma once

#include <Eigen/Core>

#include <vector>

#include "vemhom/element.hpp"
#include "vemhom/tetmesh.hpp"

namespace vemhom {

/// Constant gradients of the projected fields on one cell.
struct ProjectedGradients {
  Eigen::Matrix3d gradU = Eigen::Matrix3d::Zero();  ///< (i, j) = ∂u_i/∂x_j
  Eigen::Vector3d gradPhi = Eigen::Vector3d::Zero();
  Eigen::Vector3d gradPhiMag = Eigen::Vector3d::Zero();
};

/// First-order virtual element on one polyhedral cell. Local node a is
/// mesh vertex nodes[a] (the sorted cell vertex ids).
struct VemElement {
  Index cell = 0;
  std::vector<Index> nodes;
  double volume = 0.0;
  /// ∇ΠR = Σ_a projection.col(a)·R_a for any scalar nodal field R.
  Eigen::Matrix3Xd projection;
  /// Stabilization submesh: per tet the volume and scalar gradient weights
  /// over the cell nodes (an added apex is tied to the vertex mean).
  std::vector<double> tetVolumes;
  std::vector<Eigen::Matrix3Xd> tetGradients;
  bool nonConvexFallback = false;
};

/// Per-vertex weights w_a with ∫_F Π_F R dA = Σ_a w_a R_a, where Π_F is the
/// first-order face projection (edge-trapezoid tangential gradient plus the
/// vertex-average constant). Exact for face-linear traces.
std::vector<double> face_integral_weights(const std::vector<Point3>& loop);

VemElement build_vem_element(const PolyMesh& mesh, Index cell, const Tolerances& tol = {});

/// nodal: one row per element node, columns u_x, u_y, u_z, φ, φ_mag.
ProjectedGradients projected_gradient(const VemElement& el, const Eigen::MatrixXd& nodal);

/// Element matrices for U = (1-β)·V·ψ(∇ΠR) + β·Σ_t V_t·ψ(∇R|_t) with the
/// reduced grain modulus G (mode-sized). avgP uses V·∇ΠR; avgL is the
/// β-weighted flux consistent with U.
ElementSystem vem_element_system(const VemElement& el, const Eigen::MatrixXd& G, double beta, FieldMode mode);

/// U for nodal dofs p (node-major).
double vem_element_energy(const VemElement& el, const Eigen::MatrixXd& G, double beta, FieldMode mode,
                          const Eigen::VectorXd& p);

/// Kernel dimension beyond the 8 physical zero-energy modes (fully coupled;
/// 7 otherwise). Positive values flag a rank-deficient element.
int vem_rank_deficiency(const ElementSystem& sys, FieldMode mode);

}  // namespace vemhom
