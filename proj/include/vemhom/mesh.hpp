#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace vemhom {

using Point3 = Eigen::Vector3d;
using Index = std::int64_t;

/// Geometric tolerances, all relative to the cube edge length L.
struct Tolerances {
  double merge = 1e-9;   ///< vertex deduplication
  double plane = 1e-8;   ///< face planarity
  double box = 1e-9;     ///< boundary-node detection
};

/// Oriented vertex loop; the winding is counter-clockwise seen from outside
/// the owning cell.
struct Face {
  std::vector<Index> vertices;
  /// Neighbouring cell id, or -1 - k for cube side k (0:x=0, 1:x=L, 2:y=0,
  /// 3:y=L, 4:z=0, 5:z=L), or kUnknownNeighbor when read from a file.
  Index neighbor = kUnknownNeighbor;

  static constexpr Index kUnknownNeighbor = -100;
};

struct FaceGeometry {
  double area = 0.0;
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  Point3 centroid = Point3::Zero();
};

/// Area, unit normal and centroid of a planar polygon, from a fan
/// triangulation around the vertex mean. Throws GeometryError for a
/// (numerically) zero-area loop.
FaceGeometry face_geometry(const std::vector<Index>& loop, const std::vector<Point3>& vertices);
FaceGeometry face_geometry(const std::vector<Point3>& loop);

struct PolyCell {
  std::vector<Index> vertexIds;  // sorted, unique
  std::vector<Face> faces;
  Index materialId = 0;
  double volume = 0.0;
};

struct PolyMesh {
  std::vector<Point3> vertices;
  std::vector<PolyCell> cells;
  double edgeLength = 1.0;
  std::vector<Index> boundaryNodeIds;  // sorted

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_cells() const { return cells.size(); }

  /// Recomputes vertexIds, volume and boundaryNodeIds from faces/vertices.
  void finalize(const Tolerances& tol = {});
  /// Makes the face loops of every cell wind consistently (shared edges
  /// traversed in opposite directions) and outward. A cell whose faces
  /// cannot be oriented consistently raises GeometryError.
  void orient_faces();

  double total_volume() const;
  Point3 cell_centroid(Index cell) const;
  Point3 cell_vertex_mean(Index cell) const;
  bool is_boundary_point(const Point3& p, const Tolerances& tol = {}) const;

  /// True when every cell vertex lies on the inner side of every face plane.
  bool cell_is_convex(Index cell, const Tolerances& tol = {}) const;
  /// Point-in-convex-cell test against the face planes.
  bool cell_contains(Index cell, const Point3& p, double slack = 0.0) const;
};

struct MeshReport {
  double volumeClosureError = 0.0;  ///< |Σ V − L³| / L³
  double maxDivergenceDefect = 0.0; ///< max_cell |Σ_F a n| / max face area
  std::size_t unmatchedInteriorFaces = 0;
  std::size_t nonManifoldEdges = 0;
  double maxPlanarityDefect = 0.0;  ///< in units of L
  bool ok(double volumeTol = 1e-10, double divTol = 1e-10) const;
};

/// Audits the PolyMesh invariants (volume closure, divergence consistency,
/// face conformity, per-cell watertightness, planarity).
MeshReport check_mesh(const PolyMesh& mesh, const Tolerances& tol = {});

struct SeedSet {
  std::vector<Point3> seeds;
  std::uint64_t rngSeed = 0;
};

/// Uniformly distributed seeds strictly inside [0, L]^3.
SeedSet random_seeds(std::size_t count, double L, std::uint64_t rngSeed);

/// Voronoi tessellation of the cube [0, L]^3 by successive half-space
/// clipping. Cells inherit seed order. Coincident seeds or a cell with
/// volume below `minVolume`·L³ raise GeometryError.
PolyMesh generate_voronoi(const SeedSet& seeds, double L, const Tolerances& tol = {},
                          double minVolume = 1e-12);

/// Lloyd relaxation: moves each seed to its cell centroid `iterations` times.
SeedSet lloyd_relax(const SeedSet& seeds, double L, int iterations, const Tolerances& tol = {});

/// Native versioned text format (see docs/formats.md).
void write_mesh(std::ostream& out, const PolyMesh& mesh);
PolyMesh read_mesh(std::istream& in, const Tolerances& tol = {});
std::string mesh_hash(const PolyMesh& mesh);

}  // namespace vemhom
