#pragma once

#include <array>
#include <vector>

#include "vemhom/mesh.hpp"

namespace vemhom {

using Tet = std::array<Index, 4>;

double tet_volume(const Point3& a, const Point3& b, const Point3& c, const Point3& d);

/// Tetrahedral decomposition of one polyhedral cell. Node ids below
/// `numMeshVertices` refer to PolyMesh vertices; ids at or above it refer to
/// `extraPoints[id - numMeshVertices]`.
struct TetSubmesh {
  Index owner = 0;
  std::vector<Tet> tets;
  std::vector<double> volumes;
  std::vector<Point3> extraPoints;
  std::size_t numMeshVertices = 0;
  /// Set when the cell failed the convexity test and the vertex-mean apex
  /// fallback was used.
  bool nonConvexFallback = false;

  Point3 point(const PolyMesh& mesh, Index id) const {
    return static_cast<std::size_t>(id) < numMeshVertices ? mesh.vertices[static_cast<std::size_t>(id)]
                                                          : extraPoints[static_cast<std::size_t>(id) - numMeshVertices];
  }
  double total_volume() const;
};

/// Minimal fan tetrahedralization: apex = lowest-index cell vertex, every
/// face not containing the apex fanned from its lowest-index vertex. A
/// non-convex cell falls back to a single added apex at the vertex mean.
TetSubmesh triangulate_cell(const PolyMesh& mesh, Index cell, const Tolerances& tol = {});

/// Global conforming tetrahedral mesh, each tet tagged with its owning cell.
struct TetMesh {
  std::vector<Point3> nodes;
  std::vector<Tet> tets;
  std::vector<Index> owner;
  double edgeLength = 1.0;

  std::size_t num_nodes() const { return nodes.size(); }
  std::vector<Index> boundary_nodes(const Tolerances& tol = {}) const;
  double total_volume() const;
};

/// Stitches per-cell submeshes into one mesh. Mesh vertices keep their ids;
/// added interior points are appended in cell order.
TetMesh assemble_tet_mesh(const PolyMesh& mesh, const std::vector<TetSubmesh>& subs);
TetMesh triangulate(const PolyMesh& mesh, const Tolerances& tol = {});

/// Red refinement (8 children per tet via edge midpoints) applied `levels`
/// times. Midpoints are shared globally, so refinement stays conforming
/// across cell faces. Node ids of the input are preserved.
TetMesh refine(const TetMesh& mesh, int levels);
/// Single-submesh variant; returns the refined tets in a local node table.
TetSubmesh refine_submesh(const PolyMesh& mesh, const TetSubmesh& sub, int levels);

/// 10-node connectivity: corner nodes keep their ids; unique mid-edge nodes
/// are appended. Local ordering follows docs/fem.md (corners 0-3, then edges
/// 01, 12, 02, 03, 13, 23).
struct QuadraticTetMesh {
  std::vector<Point3> nodes;
  std::vector<std::array<Index, 10>> tets;
  std::vector<Index> owner;
  std::vector<bool> boundary;
  double edgeLength = 1.0;
};

QuadraticTetMesh promote_to_quadratic(const TetMesh& mesh, const Tolerances& tol = {});

}  // namespace vemhom
