#include "vemhom/element_vem.hpp"

#include <Eigen/Dense>

#include <algorithm>

#include "vemhom/error.hpp"

namespace vemhom {

std::vector<double> face_integral_weights(const std::vector<Point3>& loop) {
  const FaceGeometry g = face_geometry(loop);
  const std::size_t n = loop.size();
  Point3 mean = Point3::Zero();
  for (const auto& p : loop) mean += p;
  mean /= static_cast<double>(n);
  const Eigen::Vector3d shift = g.centroid - mean;
  std::vector<double> w(n);
  for (std::size_t a = 0; a < n; ++a) {
    const Point3& next = loop[(a + 1) % n];
    const Point3& prev = loop[(a + n - 1) % n];
    // Tangential gradient weight of vertex a is (next - prev) × n / (2A).
    w[a] = g.area / static_cast<double>(n) + 0.5 * shift.dot((next - prev).cross(g.normal));
  }
  return w;
}

namespace {

Eigen::Matrix<double, 3, 4> tet_gradients(const Point3& x0, const Point3& x1, const Point3& x2, const Point3& x3) {
  Eigen::Matrix3d J;
  J.col(0) = x1 - x0;
  J.col(1) = x2 - x0;
  J.col(2) = x3 - x0;
  const Eigen::Matrix3d Jinv = J.inverse();
  Eigen::Matrix<double, 3, 4> W;
  for (int i = 0; i < 3; ++i) W.col(i + 1) = Jinv.row(i).transpose();
  W.col(0) = -(W.col(1) + W.col(2) + W.col(3));
  return W;
}

}  // namespace

VemElement build_vem_element(const PolyMesh& mesh, Index cell, const Tolerances& tol) {
  const PolyCell& c = mesh.cells.at(static_cast<std::size_t>(cell));
  if (!(c.volume > 0)) throw GeometryError("VEM element on cell " + std::to_string(cell) + " with zero volume");
  VemElement el;
  el.cell = cell;
  el.nodes = c.vertexIds;
  el.volume = c.volume;
  const Eigen::Index nv = static_cast<Eigen::Index>(el.nodes.size());
  auto local = [&](Index id) {
    auto it = std::lower_bound(el.nodes.begin(), el.nodes.end(), id);
    return static_cast<Eigen::Index>(it - el.nodes.begin());
  };

  el.projection = Eigen::Matrix3Xd::Zero(3, nv);
  for (const auto& face : c.faces) {
    std::vector<Point3> loop;
    for (Index v : face.vertices) loop.push_back(mesh.vertices[static_cast<std::size_t>(v)]);
    const auto w = face_integral_weights(loop);
    const Eigen::Vector3d n = face_geometry(loop).normal;
    for (std::size_t k = 0; k < loop.size(); ++k) el.projection.col(local(face.vertices[k])) += w[k] * n;
  }
  el.projection /= el.volume;

  const TetSubmesh sub = triangulate_cell(mesh, cell, tol);
  el.nonConvexFallback = sub.nonConvexFallback;
  for (std::size_t t = 0; t < sub.tets.size(); ++t) {
    const Tet& tet = sub.tets[t];
    const auto W = tet_gradients(sub.point(mesh, tet[0]), sub.point(mesh, tet[1]), sub.point(mesh, tet[2]),
                                 sub.point(mesh, tet[3]));
    Eigen::Matrix3Xd dense = Eigen::Matrix3Xd::Zero(3, nv);
    for (int k = 0; k < 4; ++k) {
      if (static_cast<std::size_t>(tet[k]) < sub.numMeshVertices) {
        dense.col(local(tet[k])) += W.col(k);
      } else {
        // Added apex sits at the vertex mean; its value is the vertex mean.
        dense.colwise() += W.col(k) / static_cast<double>(nv);
      }
    }
    el.tetVolumes.push_back(sub.volumes[t]);
    el.tetGradients.push_back(std::move(dense));
  }
  return el;
}

ProjectedGradients projected_gradient(const VemElement& el, const Eigen::MatrixXd& nodal) {
  if (nodal.rows() != static_cast<Eigen::Index>(el.nodes.size()) || nodal.cols() < 3)
    throw ConfigError("projected_gradient: nodal value table does not match the element");
  ProjectedGradients g;
  g.gradU = nodal.leftCols<3>().transpose() * el.projection.transpose();
  if (nodal.cols() > 3) g.gradPhi = el.projection * nodal.col(3);
  if (nodal.cols() > 4) g.gradPhiMag = el.projection * nodal.col(4);
  return g;
}

ElementSystem vem_element_system(const VemElement& el, const Eigen::MatrixXd& G, double beta, FieldMode mode) {
  if (beta < 0 || beta > 1) throw ConfigError("stabilization weight beta must lie in [0, 1]");
  if (beta > 0 && el.tetVolumes.empty())
    throw GeometryError("cell " + std::to_string(el.cell) + " has no stabilization submesh");
  ElementSystem s;
  s.owner = el.cell;
  s.nodes = el.nodes;
  const Eigen::MatrixXd Bp = gradient_operator(el.projection, mode);
  const Eigen::MatrixXd GBp = G * Bp;
  s.K = ((1.0 - beta) * el.volume) * (Bp.transpose() * GBp);
  s.avgP = el.volume * Bp;
  Eigen::MatrixXd flux = ((1.0 - beta) * el.volume) * GBp;
  if (beta > 0) {
    for (std::size_t t = 0; t < el.tetVolumes.size(); ++t) {
      const Eigen::MatrixXd Bt = gradient_operator(el.tetGradients[t], mode);
      const Eigen::MatrixXd GBt = G * Bt;
      const double w = beta * el.tetVolumes[t];
      s.K.noalias() += w * (Bt.transpose() * GBt);
      flux.noalias() += w * GBt;
    }
  }
  s.avgL = std::move(flux);
  return s;
}

double vem_element_energy(const VemElement& el, const Eigen::MatrixXd& G, double beta, FieldMode mode,
                          const Eigen::VectorXd& p) {
  const Eigen::VectorXd Pp = gradient_operator(el.projection, mode) * p;
  double U = (1.0 - beta) * el.volume * energy_quadratic(G, Pp);
  if (beta > 0) {
    if (el.tetVolumes.empty()) throw GeometryError("cell " + std::to_string(el.cell) + " has no stabilization submesh");
    for (std::size_t t = 0; t < el.tetVolumes.size(); ++t)
      U += beta * el.tetVolumes[t] * energy_quadratic(G, gradient_operator(el.tetGradients[t], mode) * p);
  }
  return U;
}

int vem_rank_deficiency(const ElementSystem& sys, FieldMode mode) {
  const int physical = mode == FieldMode::FullyCoupled ? 8 : 7;
  return std::max(0, kernel_dimension(sys.K) - physical);
}

}  // namespace vemhom
