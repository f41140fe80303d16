#include "vemhom/element_fem.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "vemhom/error.hpp"
#include "vemhom/tetmesh.hpp"

namespace vemhom {

Eigen::Matrix<double, 3, 4> barycentric_gradients(const std::array<Point3, 4>& x) {
  Eigen::Matrix3d J;
  J.col(0) = x[1] - x[0];
  J.col(1) = x[2] - x[0];
  J.col(2) = x[3] - x[0];
  const double det = J.determinant();
  const double scale = std::max({J.col(0).norm(), J.col(1).norm(), J.col(2).norm()});
  if (!(det > 1e-14 * scale * scale * scale)) throw GeometryError("inverted or degenerate tetrahedron");
  const Eigen::Matrix3d Jinv = J.inverse();
  Eigen::Matrix<double, 3, 4> W;
  for (int i = 0; i < 3; ++i) W.col(i + 1) = Jinv.row(i).transpose();
  W.col(0) = -(W.col(1) + W.col(2) + W.col(3));
  return W;
}

namespace {
constexpr int kEdge[6][2] = {{0, 1}, {1, 2}, {0, 2}, {0, 3}, {1, 3}, {2, 3}};
}

Eigen::Matrix<double, 10, 1> tet10_shape(const Eigen::Vector4d& L) {
  Eigen::Matrix<double, 10, 1> N;
  for (int i = 0; i < 4; ++i) N[i] = L[i] * (2 * L[i] - 1);
  for (int k = 0; k < 6; ++k) N[4 + k] = 4 * L[kEdge[k][0]] * L[kEdge[k][1]];
  return N;
}

Eigen::Matrix<double, 3, 10> tet10_gradients(const Eigen::Vector4d& L, const Eigen::Matrix<double, 3, 4>& gL) {
  Eigen::Matrix<double, 3, 10> dN;
  for (int i = 0; i < 4; ++i) dN.col(i) = (4 * L[i] - 1) * gL.col(i);
  for (int k = 0; k < 6; ++k) {
    const int a = kEdge[k][0], b = kEdge[k][1];
    dN.col(4 + k) = 4 * (L[a] * gL.col(b) + L[b] * gL.col(a));
  }
  return dN;
}

const std::array<Eigen::Vector4d, 4>& tet_gauss4_points() {
  static const std::array<Eigen::Vector4d, 4> pts = [] {
    const double a = 0.5854101966249685, b = 0.1381966011250105;
    std::array<Eigen::Vector4d, 4> p;
    for (int i = 0; i < 4; ++i) {
      p[i].setConstant(b);
      p[i][i] = a;
    }
    return p;
  }();
  return pts;
}

ElementSystem tet4_system(const std::array<Point3, 4>& x, const std::array<Index, 4>& nodes, const Eigen::MatrixXd& G,
                          FieldMode mode, Index owner) {
  const double V = tet_volume(x[0], x[1], x[2], x[3]);
  const Eigen::MatrixXd B = gradient_operator(barycentric_gradients(x), mode);
  ElementSystem s;
  s.owner = owner;
  s.nodes.assign(nodes.begin(), nodes.end());
  s.avgP = V * B;
  s.avgL = G * s.avgP;
  s.K = B.transpose() * s.avgL;
  return s;
}

ElementSystem tet10_system(const std::array<Point3, 4>& x, const std::array<Index, 10>& nodes,
                           const Eigen::MatrixXd& G, FieldMode mode, Index owner) {
  const double V = tet_volume(x[0], x[1], x[2], x[3]);
  const auto gL = barycentric_gradients(x);
  ElementSystem s;
  s.owner = owner;
  s.nodes.assign(nodes.begin(), nodes.end());
  const Eigen::Index nd = 10 * dofs_per_node(mode);
  s.K = Eigen::MatrixXd::Zero(nd, nd);
  s.avgP = Eigen::MatrixXd::Zero(gradient_size(mode), nd);
  for (const auto& L : tet_gauss4_points()) {
    const Eigen::MatrixXd B = gradient_operator(tet10_gradients(L, gL), mode);
    const double w = 0.25 * V;
    const Eigen::MatrixXd GB = G * B;
    s.K.noalias() += w * (B.transpose() * GB);
    s.avgP.noalias() += w * B;
  }
  s.avgL = G * s.avgP;
  return s;
}

}  // namespace vemhom
