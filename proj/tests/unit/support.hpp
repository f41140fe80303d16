#pragma once

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <random>
#include <string>

#include "vemhom/grains.hpp"
#include "vemhom/materials.hpp"
#include "vemhom/mesh.hpp"

namespace vemhom::testing {

inline std::string library_path() { return std::string(VEMHOM_SOURCE_DIR) + "/data/materials.txt"; }

inline const MaterialLibrary& library() {
  static const MaterialLibrary lib = load_material_library(library_path());
  return lib;
}

inline PolyMesh voronoi_mesh(std::size_t cells, std::uint64_t seed, double L = 1.0) {
  return generate_voronoi(random_seeds(cells, L, seed), L);
}

inline EulerAngles random_angles(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 6.283185307179586);
  return {U(rng), U(rng), U(rng)};
}

inline Eigen::Matrix3d random_symmetric(std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  Eigen::Matrix3d A;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = N(rng);
  return 0.5 * (A + A.transpose());
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> N;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = N(rng);
  return v;
}

/// Isotropic stiffness from Lamé constants.
inline Matrix6 isotropic_C(double lambda, double mu) {
  Matrix6 C = Matrix6::Zero();
  C.topLeftCorner<3, 3>().setConstant(lambda);
  for (int i = 0; i < 3; ++i) C(i, i) += 2 * mu;
  for (int i = 3; i < 6; ++i) C(i, i) = mu;
  return C;
}

inline GeneralizedModulus uncoupled_modulus(double lambda, double mu, double eps, double mag) {
  return GeneralizedModulus::from_blocks(isotropic_C(lambda, mu), Matrix36::Zero(), Matrix36::Zero(),
                                         eps * Eigen::Matrix3d::Identity(), Eigen::Matrix3d::Zero(),
                                         mag * Eigen::Matrix3d::Identity());
}

inline double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double n = b.norm();
  return (a - b).norm() / (n > 0 ? n : 1.0);
}

}  // namespace vemhom::testing
