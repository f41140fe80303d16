#pragma once

#include <Eigen/Core>

#include <vector>

#include "vemhom/materials.hpp"
#include "vemhom/mesh.hpp"

namespace vemhom {

/// Dense element contribution ready for scatter. Nodal dofs are node-major:
/// (u_x, u_y, u_z, then φ and/or φ_mag as the mode requires).
struct ElementSystem {
  Index owner = 0;
  std::vector<Index> nodes;
  Eigen::MatrixXd K;     ///< ∂²U/∂p²
  Eigen::MatrixXd avgP;  ///< p ↦ ∫_e P dV
  Eigen::MatrixXd avgL;  ///< p ↦ ∫_e L dV
};

/// Generalized-gradient operator from scalar gradient weights W (3 × n):
/// ∇f = Σ_a W.col(a)·f_a for any nodal scalar f. Rows follow P = (ε in
/// engineering Voigt order, E = -∇φ, H = -∇φ_mag) restricted to the mode.
Eigen::MatrixXd gradient_operator(const Eigen::Matrix3Xd& W, FieldMode mode);

/// Number of zero eigenvalues of a symmetric element matrix, counted with
/// |λ| <= relTol·max|λ|.
int kernel_dimension(const Eigen::MatrixXd& K, double relTol = 1e-10);

/// Nodal dof vector of the affine field u = A·x + b, φ = g·x + c,
/// φ_mag = h·x + d at the given points.
Eigen::VectorXd affine_nodal_values(const std::vector<Point3>& points, FieldMode mode, const Eigen::Matrix3d& A,
                                    const Eigen::Vector3d& b, const Eigen::Vector3d& g, double c,
                                    const Eigen::Vector3d& h, double d);

}  // namespace vemhom
