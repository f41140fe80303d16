#include "vemhom/discretization.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "vemhom/element_fem.hpp"
#include "vemhom/error.hpp"
#include "vemhom/parallel.hpp"

namespace vemhom {

namespace {

std::vector<Eigen::MatrixXd> reduce_all(const GrainModuli& moduli, FieldMode mode) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(moduli.size());
  for (const auto& g : moduli) out.push_back(to_working_units(g).reduced(mode));
  return out;
}

Eigen::Vector3d working_scales(const GrainModuli& moduli) {
  GrainModuli w;
  w.reserve(moduli.size());
  for (const auto& g : moduli) w.push_back(to_working_units(g));
  return field_scales(w);
}

void check_owner(Index owner, std::size_t count) {
  if (owner < 0 || static_cast<std::size_t>(owner) >= count)
    throw ConfigError("no modulus assigned to grain " + std::to_string(owner));
}

struct BoundaryTriangle {
  std::array<Index, 3> v;  // corner node ids, outward winding
  std::array<int, 3> local;  // local corner indices inside the owning tet
  std::size_t tet;
};

// Triangles that belong to exactly one tet, wound so that the normal points
// away from the opposite corner.
std::vector<BoundaryTriangle> boundary_triangles(const std::vector<Tet>& tets, const std::vector<Point3>& nodes) {
  static constexpr int kFaces[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
  std::map<std::array<Index, 3>, std::pair<int, BoundaryTriangle>> seen;
  for (std::size_t t = 0; t < tets.size(); ++t) {
    for (int f = 0; f < 4; ++f) {
      BoundaryTriangle tri;
      tri.tet = t;
      for (int k = 0; k < 3; ++k) {
        tri.local[k] = kFaces[f][k];
        tri.v[k] = tets[t][kFaces[f][k]];
      }
      std::array<Index, 3> key = tri.v;
      std::sort(key.begin(), key.end());
      auto [it, inserted] = seen.try_emplace(key, 0, tri);
      ++it->second.first;
      (void)inserted;
    }
  }
  std::vector<BoundaryTriangle> out;
  for (auto& [key, entry] : seen) {
    if (entry.first != 1) continue;
    BoundaryTriangle tri = entry.second;
    const Tet& tet = tets[tri.tet];
    const int opposite = 6 - tri.local[0] - tri.local[1] - tri.local[2];
    const Point3& a = nodes[static_cast<std::size_t>(tri.v[0])];
    const Point3& b = nodes[static_cast<std::size_t>(tri.v[1])];
    const Point3& c = nodes[static_cast<std::size_t>(tri.v[2])];
    const Point3& d = nodes[static_cast<std::size_t>(tet[opposite])];
    if ((b - a).cross(c - a).dot(a - d) < 0) {
      std::swap(tri.v[1], tri.v[2]);
      std::swap(tri.local[1], tri.local[2]);
    }
    out.push_back(tri);
  }
  return out;
}

void collect_weights(const std::map<Index, Eigen::Vector3d>& acc, std::vector<Index>& ids, Eigen::Matrix3Xd& w) {
  ids.clear();
  w.resize(3, static_cast<Eigen::Index>(acc.size()));
  Eigen::Index k = 0;
  for (const auto& [id, v] : acc) {
    ids.push_back(id);
    w.col(k++) = v;
  }
}

}  // namespace

VemDiscretization::VemDiscretization(PolyMesh mesh, const GrainModuli& moduli, FieldMode mode, double beta,
                                     unsigned workers, const Tolerances& tol)
    : mesh_(std::move(mesh)), mode_(mode), beta_(beta), moduli_(reduce_all(moduli, mode)) {
  if (beta < 0 || beta > 1) throw ConfigError("stabilization weight beta must lie in [0, 1]");
  if (moduli_.size() < mesh_.num_cells())
    throw ConfigError("modulus list covers " + std::to_string(moduli_.size()) + " of " +
                      std::to_string(mesh_.num_cells()) + " cells");
  fieldScales = working_scales(moduli);
  elements_.resize(mesh_.num_cells());
  parallel_for(mesh_.num_cells(), workers,
               [&](std::size_t c) { elements_[c] = build_vem_element(mesh_, static_cast<Index>(c), tol); });
  boundary_.assign(mesh_.num_vertices(), false);
  for (Index id : mesh_.boundaryNodeIds) boundary_[static_cast<std::size_t>(id)] = true;
}

ElementSystem VemDiscretization::element(std::size_t e) const {
  return vem_element_system(elements_[e], moduli_[e], beta_, mode_);
}

void VemDiscretization::surface_weights(std::vector<Index>& ids, Eigen::Matrix3Xd& weights) const {
  std::map<Index, Eigen::Vector3d> acc;
  for (const auto& cell : mesh_.cells) {
    for (const auto& face : cell.faces) {
      if (face.neighbor >= 0 || face.neighbor == Face::kUnknownNeighbor) continue;
      std::vector<Point3> loop;
      for (Index v : face.vertices) loop.push_back(mesh_.vertices[static_cast<std::size_t>(v)]);
      const auto w = face_integral_weights(loop);
      const Eigen::Vector3d n = face_geometry(loop).normal;
      for (std::size_t k = 0; k < loop.size(); ++k) {
        auto [it, fresh] = acc.try_emplace(face.vertices[k], Eigen::Vector3d::Zero());
        it->second += w[k] * n;
        (void)fresh;
      }
    }
  }
  collect_weights(acc, ids, weights);
}

Tet4Discretization::Tet4Discretization(TetMesh mesh, const GrainModuli& moduli, FieldMode mode, std::string label,
                                       const Tolerances& tol)
    : mesh_(std::move(mesh)), mode_(mode), label_(std::move(label)), moduli_(reduce_all(moduli, mode)) {
  for (Index o : mesh_.owner) check_owner(o, moduli_.size());
  fieldScales = working_scales(moduli);
  boundary_.assign(mesh_.num_nodes(), false);
  for (Index id : mesh_.boundary_nodes(tol)) boundary_[static_cast<std::size_t>(id)] = true;
}

ElementSystem Tet4Discretization::element(std::size_t e) const {
  const Tet& t = mesh_.tets[e];
  std::array<Point3, 4> x;
  for (int k = 0; k < 4; ++k) x[k] = mesh_.nodes[static_cast<std::size_t>(t[k])];
  const Index owner = mesh_.owner[e];
  return tet4_system(x, t, moduli_[static_cast<std::size_t>(owner)], mode_, owner);
}

void Tet4Discretization::surface_weights(std::vector<Index>& ids, Eigen::Matrix3Xd& weights) const {
  std::map<Index, Eigen::Vector3d> acc;
  for (const auto& tri : boundary_triangles(mesh_.tets, mesh_.nodes)) {
    const Point3& a = mesh_.nodes[static_cast<std::size_t>(tri.v[0])];
    const Point3& b = mesh_.nodes[static_cast<std::size_t>(tri.v[1])];
    const Point3& c = mesh_.nodes[static_cast<std::size_t>(tri.v[2])];
    // A·n / 3 per corner, with A·n = ½ (b - a) × (c - a).
    const Eigen::Vector3d an3 = (b - a).cross(c - a) / 6.0;
    for (Index v : tri.v) {
      auto [it, fresh] = acc.try_emplace(v, Eigen::Vector3d::Zero());
      it->second += an3;
      (void)fresh;
    }
  }
  collect_weights(acc, ids, weights);
}

Tet10Discretization::Tet10Discretization(QuadraticTetMesh mesh, const GrainModuli& moduli, FieldMode mode)
    : mesh_(std::move(mesh)), mode_(mode), moduli_(reduce_all(moduli, mode)) {
  for (Index o : mesh_.owner) check_owner(o, moduli_.size());
  fieldScales = working_scales(moduli);
}

ElementSystem Tet10Discretization::element(std::size_t e) const {
  const auto& t = mesh_.tets[e];
  std::array<Point3, 4> x;
  for (int k = 0; k < 4; ++k) x[k] = mesh_.nodes[static_cast<std::size_t>(t[k])];
  const Index owner = mesh_.owner[e];
  return tet10_system(x, t, moduli_[static_cast<std::size_t>(owner)], mode_, owner);
}

double Tet10Discretization::domain_volume() const {
  double v = 0.0;
  for (const auto& t : mesh_.tets)
    v += tet_volume(mesh_.nodes[static_cast<std::size_t>(t[0])], mesh_.nodes[static_cast<std::size_t>(t[1])],
                    mesh_.nodes[static_cast<std::size_t>(t[2])], mesh_.nodes[static_cast<std::size_t>(t[3])]);
  return v;
}

void Tet10Discretization::surface_weights(std::vector<Index>& ids, Eigen::Matrix3Xd& weights) const {
  // Edge slot of the local corner pair (a, b) in the 10-node ordering.
  auto edge_slot = [](int a, int b) {
    if (a > b) std::swap(a, b);
    static constexpr int kSlot[4][4] = {{-1, 4, 6, 7}, {4, -1, 5, 8}, {6, 5, -1, 9}, {7, 8, 9, -1}};
    return kSlot[a][b];
  };
  std::vector<Tet> corners(mesh_.tets.size());
  for (std::size_t e = 0; e < mesh_.tets.size(); ++e)
    for (int k = 0; k < 4; ++k) corners[e][k] = mesh_.tets[e][k];
  std::map<Index, Eigen::Vector3d> acc;
  for (const auto& tri : boundary_triangles(corners, mesh_.nodes)) {
    const Point3& a = mesh_.nodes[static_cast<std::size_t>(tri.v[0])];
    const Point3& b = mesh_.nodes[static_cast<std::size_t>(tri.v[1])];
    const Point3& c = mesh_.nodes[static_cast<std::size_t>(tri.v[2])];
    // Quadratic triangle: corner shape functions integrate to 0, mid-edge
    // ones to A/3.
    const Eigen::Vector3d an3 = (b - a).cross(c - a) / 6.0;
    const auto& t = mesh_.tets[tri.tet];
    for (int k = 0; k < 3; ++k) {
      const Index mid = t[static_cast<std::size_t>(edge_slot(tri.local[k], tri.local[(k + 1) % 3]))];
      auto [it, fresh] = acc.try_emplace(mid, Eigen::Vector3d::Zero());
      it->second += an3;
      (void)fresh;
    }
  }
  collect_weights(acc, ids, weights);
}

}  // namespace vemhom
