#pragma once

#include <array>

#include "vemhom/element.hpp"

namespace vemhom {

/// Barycentric gradients ∇L_0..∇L_3 of a straight-sided tet (columns).
/// Throws GeometryError for a non-positive Jacobian.
Eigen::Matrix<double, 3, 4> barycentric_gradients(const std::array<Point3, 4>& x);

/// 10-node shape functions at barycentric point L (corners, then edges 01,
/// 12, 02, 03, 13, 23) and their gradients (3 × 10).
Eigen::Matrix<double, 10, 1> tet10_shape(const Eigen::Vector4d& L);
Eigen::Matrix<double, 3, 10> tet10_gradients(const Eigen::Vector4d& L, const Eigen::Matrix<double, 3, 4>& gradL);

/// 4-point Gauss rule on the reference tet: barycentric points, weights
/// summing to 1 (multiply by the volume).
const std::array<Eigen::Vector4d, 4>& tet_gauss4_points();

/// Linear tet: constant gradients, one-point integration (exact).
ElementSystem tet4_system(const std::array<Point3, 4>& x, const std::array<Index, 4>& nodes,
                          const Eigen::MatrixXd& G, FieldMode mode, Index owner = 0);
/// Quadratic 10-node tet with the 4-point rule; geometry from the corners.
ElementSystem tet10_system(const std::array<Point3, 4>& corners, const std::array<Index, 10>& nodes,
                           const Eigen::MatrixXd& G, FieldMode mode, Index owner = 0);

}  // namespace vemhom
