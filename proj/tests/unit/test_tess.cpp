#include <sstream>

#include "support.hpp"
#include "vemhom/error.hpp"
#include "vemhom/tess.hpp"

using namespace vemhom;

namespace {

// Unit cube written by hand: 8 vertices, 12 edges, 6 faces, 1 polyhedron.
// Face loops are deliberately mixed in winding; import must normalise them.
const char* kCube = R"(***tess
 **format
   3.4
 **general
   3 standard
 **cell
   1
 **vertex
   8
   1 0 0 0 0
   2 1 0 0 0
   3 0 1 0 0
   4 1 1 0 0
   5 0 0 1 0
   6 1 0 1 0
   7 0 1 1 0
   8 1 1 1 0
 **edge
   12
   1 1 5 0
   2 5 7 0
   3 3 7 0
   4 1 3 0
   5 2 4 0
   6 4 8 0
   7 6 8 0
   8 2 6 0
   9 1 2 0
   10 5 6 0
   11 7 8 0
   12 3 4 0
 **face
   6
   1 4 1 3 7 5
      4 4 3 -2 -1
      0 -1 0 0
      0 0 0 0 0
   2 4 2 4 8 6
      4 5 6 -7 -8
      1 1 0 0
      0 0 0 0 0
   3 4 1 2 6 5
      4 9 8 -10 -1
      0 0 -1 0
      0 0 0 0 0
   4 4 3 7 8 4
      4 3 11 -6 -12
      1 0 1 0
      0 0 0 0 0
   5 4 1 3 4 2
      4 4 12 -5 -9
      0 0 0 -1
      0 0 0 0 0
   6 4 5 6 8 7
      4 10 7 -11 -2
      1 0 0 1
      0 0 0 0 0
 **polyhedron
   1
   1 6 1 2 3 4 5 6
***end
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  if (pos != std::string::npos) s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

TEST(Tess, HandWrittenCube) {
  const auto m = parse_tess_string(kCube);
  ASSERT_EQ(m.num_cells(), 1u);
  EXPECT_EQ(m.num_vertices(), 8u);
  EXPECT_NEAR(m.cells[0].volume, 1.0, 1e-14);
  EXPECT_NEAR(m.edgeLength, 1.0, 1e-14);
  const auto rep = check_mesh(m);
  EXPECT_LT(rep.maxDivergenceDefect, 1e-14);
  // Every loop winds outward after import.
  for (const auto& f : m.cells[0].faces) {
    const auto g = face_geometry(f.vertices, m.vertices);
    EXPECT_GT(g.normal.dot(g.centroid - Point3(0.5, 0.5, 0.5)), 0.0);
  }
}

TEST(Tess, VoronoiRoundTrip) {
  const auto m = vemhom::testing::voronoi_mesh(15, 6);
  std::stringstream ss;
  write_tess(ss, m);
  const auto r = parse_tess(ss);
  ASSERT_EQ(r.num_cells(), m.num_cells());
  ASSERT_EQ(r.num_vertices(), m.num_vertices());
  for (std::size_t v = 0; v < m.num_vertices(); ++v) EXPECT_LT((r.vertices[v] - m.vertices[v]).norm(), 1e-9);
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    EXPECT_EQ(r.cells[c].vertexIds, m.cells[c].vertexIds);
    EXPECT_EQ(r.cells[c].faces.size(), m.cells[c].faces.size());
    EXPECT_NEAR(r.cells[c].volume, m.cells[c].volume, 1e-12);
  }
  const auto rep = check_mesh(r);
  EXPECT_LT(rep.volumeClosureError, 1e-10);
  EXPECT_EQ(rep.unmatchedInteriorFaces, 0u);
}

TEST(Tess, TenSeedVolumeClosure) {
  std::stringstream ss;
  write_tess(ss, vemhom::testing::voronoi_mesh(10, 21));
  const auto r = parse_tess(ss);
  EXPECT_NEAR(r.total_volume(), 1.0, 1e-10);
}

TEST(Tess, UnsupportedSectionRejected) {
  EXPECT_THROW(parse_tess_string(replace(kCube, " **polyhedron", " **seed\n   0\n **polyhedron")), IoError);
}

TEST(Tess, MalformedHeaderRejected) {
  EXPECT_THROW(parse_tess_string(replace(kCube, "***tess", "***tes")), IoError);
  EXPECT_THROW(parse_tess_string(replace(kCube, "***end", "")), IoError);
}

TEST(Tess, DanglingVertexRejected) {
  EXPECT_THROW(parse_tess_string(replace(kCube, "   6 4 5 6 8 7", "   6 4 5 6 8 9")), GeometryError);
}

TEST(Tess, NonPlanarFaceRejected) {
  // Lifting vertex 8 bends the two faces through it out of plane.
  EXPECT_THROW(parse_tess_string(replace(kCube, "   8 1 1 1 0", "   8 1 1 1.01 0")), GeometryError);
}
