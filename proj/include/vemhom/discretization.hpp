#pragma once

#include <string>
#include <vector>

#include "vemhom/assembly.hpp"
#include "vemhom/element_vem.hpp"
#include "vemhom/tetmesh.hpp"

namespace vemhom {

/// Per-cell moduli in the global frame, indexed by grain (cell) id.
using GrainModuli = std::vector<GeneralizedModulus>;

/// One virtual element per polyhedral cell.
class VemDiscretization : public Discretization {
 public:
  VemDiscretization(PolyMesh mesh, const GrainModuli& moduli, FieldMode mode, double beta, unsigned workers = 1,
                    const Tolerances& tol = {});

  std::string method() const override { return "VEM-VO"; }
  FieldMode mode() const override { return mode_; }
  std::size_t num_nodes() const override { return mesh_.num_vertices(); }
  const Point3& node(Index id) const override { return mesh_.vertices[static_cast<std::size_t>(id)]; }
  bool is_boundary(Index id) const override { return boundary_[static_cast<std::size_t>(id)]; }
  std::size_t num_elements() const override { return elements_.size(); }
  ElementSystem element(std::size_t e) const override;
  void surface_weights(std::vector<Index>& boundaryNodes, Eigen::Matrix3Xd& weights) const override;
  double domain_volume() const override { return mesh_.total_volume(); }

  double beta() const { return beta_; }
  const PolyMesh& mesh() const { return mesh_; }
  const VemElement& vem_element(std::size_t e) const { return elements_[e]; }

 private:
  PolyMesh mesh_;
  FieldMode mode_;
  double beta_;
  std::vector<Eigen::MatrixXd> moduli_;
  std::vector<VemElement> elements_;
  std::vector<bool> boundary_;
};

/// Linear tetrahedra; element e is owned by grain mesh.owner[e].
class Tet4Discretization : public Discretization {
 public:
  Tet4Discretization(TetMesh mesh, const GrainModuli& moduli, FieldMode mode, std::string label = "FEM-O1",
                     const Tolerances& tol = {});

  std::string method() const override { return label_; }
  FieldMode mode() const override { return mode_; }
  std::size_t num_nodes() const override { return mesh_.num_nodes(); }
  const Point3& node(Index id) const override { return mesh_.nodes[static_cast<std::size_t>(id)]; }
  bool is_boundary(Index id) const override { return boundary_[static_cast<std::size_t>(id)]; }
  std::size_t num_elements() const override { return mesh_.tets.size(); }
  ElementSystem element(std::size_t e) const override;
  void surface_weights(std::vector<Index>& boundaryNodes, Eigen::Matrix3Xd& weights) const override;
  double domain_volume() const override { return mesh_.total_volume(); }

  const TetMesh& mesh() const { return mesh_; }

 private:
  TetMesh mesh_;
  FieldMode mode_;
  std::string label_;
  std::vector<Eigen::MatrixXd> moduli_;
  std::vector<bool> boundary_;
};

/// Quadratic 10-node tetrahedra.
class Tet10Discretization : public Discretization {
 public:
  Tet10Discretization(QuadraticTetMesh mesh, const GrainModuli& moduli, FieldMode mode);

  std::string method() const override { return "FEM-O2"; }
  FieldMode mode() const override { return mode_; }
  std::size_t num_nodes() const override { return mesh_.nodes.size(); }
  const Point3& node(Index id) const override { return mesh_.nodes[static_cast<std::size_t>(id)]; }
  bool is_boundary(Index id) const override { return mesh_.boundary[static_cast<std::size_t>(id)]; }
  std::size_t num_elements() const override { return mesh_.tets.size(); }
  ElementSystem element(std::size_t e) const override;
  void surface_weights(std::vector<Index>& boundaryNodes, Eigen::Matrix3Xd& weights) const override;
  double domain_volume() const override;

  const QuadraticTetMesh& mesh() const { return mesh_; }

 private:
  QuadraticTetMesh mesh_;
  FieldMode mode_;
  std::vector<Eigen::MatrixXd> moduli_;
};

}  // namespace vemhom
