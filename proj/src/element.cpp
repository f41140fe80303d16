#include "vemhom/element.hpp"

#include <Eigen/Eigenvalues>

#include "vemhom/error.hpp"

namespace vemhom {

Eigen::MatrixXd gradient_operator(const Eigen::Matrix3Xd& W, FieldMode mode) {
  const int nf = dofs_per_node(mode);
  const Eigen::Index n = W.cols();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(gradient_size(mode), nf * n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const double gx = W(0, a), gy = W(1, a), gz = W(2, a);
    const Eigen::Index c = nf * a;
    B(0, c) = gx;
    B(1, c + 1) = gy;
    B(2, c + 2) = gz;
    B(3, c + 1) = gz;
    B(3, c + 2) = gy;
    B(4, c) = gz;
    B(4, c + 2) = gx;
    B(5, c) = gy;
    B(5, c + 1) = gx;
    // Scalar potentials: the field is minus the gradient.
    for (int k = 3; k < nf; ++k) {
      const int row = 6 + 3 * (k - 3);
      B(row, c + k) = -gx;
      B(row + 1, c + k) = -gy;
      B(row + 2, c + k) = -gz;
    }
  }
  return B;
}

int kernel_dimension(const Eigen::MatrixXd& K, double relTol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (K + K.transpose()), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd lam = es.eigenvalues().cwiseAbs();
  const double top = lam.maxCoeff();
  int zeros = 0;
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (lam[i] <= relTol * top) ++zeros;
  return zeros;
}

Eigen::VectorXd affine_nodal_values(const std::vector<Point3>& points, FieldMode mode, const Eigen::Matrix3d& A,
                                    const Eigen::Vector3d& b, const Eigen::Vector3d& g, double c,
                                    const Eigen::Vector3d& h, double d) {
  const int nf = dofs_per_node(mode);
  Eigen::VectorXd p(nf * static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::Index o = nf * static_cast<Eigen::Index>(i);
    p.segment<3>(o) = A * points[i] + b;
    int k = 3;
    if (mode != FieldMode::MagnetoMech) p[o + k++] = g.dot(points[i]) + c;
    if (mode != FieldMode::ElectroMech) p[o + k] = h.dot(points[i]) + d;
  }
  return p;
}

}  // namespace vemhom
