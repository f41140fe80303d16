#include "vemhom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "vemhom/error.hpp"
#include "vemhom/hash.hpp"

namespace vemhom {

FaceGeometry face_geometry(const std::vector<Point3>& loop) {
  if (loop.size() < 3) throw GeometryError("face has fewer than 3 vertices");
  Point3 mean = Point3::Zero();
  for (const auto& p : loop) mean += p;
  mean /= static_cast<double>(loop.size());

  Eigen::Vector3d areaVec = Eigen::Vector3d::Zero();
  Point3 weighted = Point3::Zero();
  double scale = 0.0;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point3& a = loop[i];
    const Point3& b = loop[(i + 1) % n];
    const Eigen::Vector3d t = 0.5 * (a - mean).cross(b - mean);
    areaVec += t;
    scale = std::max(scale, (a - mean).squaredNorm());
  }
  const double area = areaVec.norm();
  if (!(area > 1e-14 * scale) || area == 0.0) throw GeometryError("face has zero area (collinear loop)");
  const Eigen::Vector3d normal = areaVec / area;
  // Signed triangle areas along the normal keep the centroid exact for
  // slightly non-convex loops.
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point3& a = loop[i];
    const Point3& b = loop[(i + 1) % n];
    const double w = 0.5 * (a - mean).cross(b - mean).dot(normal);
    weighted += w * (mean + a + b) / 3.0;
    total += w;
  }
  return {area, normal, weighted / total};
}

FaceGeometry face_geometry(const std::vector<Index>& loop, const std::vector<Point3>& vertices) {
  std::vector<Point3> pts;
  pts.reserve(loop.size());
  for (Index v : loop) {
    if (v < 0 || static_cast<std::size_t>(v) >= vertices.size())
      throw GeometryError("face references vertex " + std::to_string(v) + " out of range");
    pts.push_back(vertices[static_cast<std::size_t>(v)]);
  }
  return face_geometry(pts);
}

namespace {

int boundary_side(const Point3& p, double L, double tol) {
  for (int axis = 0; axis < 3; ++axis) {
    if (std::abs(p[axis]) <= tol) return 2 * axis;
    if (std::abs(p[axis] - L) <= tol) return 2 * axis + 1;
  }
  return -1;
}

// Cube side shared by all vertices of the loop, or -1.
int face_side(const std::vector<Index>& loop, const std::vector<Point3>& verts, double L, double tol) {
  for (int side = 0; side < 6; ++side) {
    const int axis = side / 2;
    const double target = (side % 2 == 0) ? 0.0 : L;
    bool all = true;
    for (Index v : loop) {
      if (std::abs(verts[static_cast<std::size_t>(v)][axis] - target) > tol) {
        all = false;
        break;
      }
    }
    if (all) return side;
  }
  return -1;
}

std::vector<Index> sorted_key(const std::vector<Index>& loop) {
  std::vector<Index> key = loop;
  std::sort(key.begin(), key.end());
  return key;
}

}  // namespace

void PolyMesh::finalize(const Tolerances& tol) {
  const double L = edgeLength;
  std::map<std::vector<Index>, std::vector<std::pair<Index, std::size_t>>> faceOwners;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& cell = cells[c];
    cell.vertexIds.clear();
    double vol = 0.0;
    for (std::size_t f = 0; f < cell.faces.size(); ++f) {
      auto& face = cell.faces[f];
      for (Index v : face.vertices) cell.vertexIds.push_back(v);
      const FaceGeometry g = face_geometry(face.vertices, vertices);
      vol += g.area * g.normal.dot(g.centroid) / 3.0;
      faceOwners[sorted_key(face.vertices)].emplace_back(static_cast<Index>(c), f);
    }
    std::sort(cell.vertexIds.begin(), cell.vertexIds.end());
    cell.vertexIds.erase(std::unique(cell.vertexIds.begin(), cell.vertexIds.end()), cell.vertexIds.end());
    cell.volume = vol;
  }
  // Neighbour tags: matched interior faces first, then cube sides.
  for (auto& [key, owners] : faceOwners) {
    if (owners.size() == 2) {
      cells[owners[0].first].faces[owners[0].second].neighbor = owners[1].first;
      cells[owners[1].first].faces[owners[1].second].neighbor = owners[0].first;
    } else {
      for (auto [c, f] : owners) {
        auto& face = cells[c].faces[f];
        const int side = face_side(face.vertices, vertices, L, tol.box * L);
        face.neighbor = side >= 0 ? -1 - side : Face::kUnknownNeighbor;
      }
    }
  }
  boundaryNodeIds.clear();
  for (std::size_t v = 0; v < vertices.size(); ++v)
    if (is_boundary_point(vertices[v], tol)) boundaryNodeIds.push_back(static_cast<Index>(v));
}

void PolyMesh::orient_faces() {
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& faces = cells[c].faces;
    const std::size_t n = faces.size();
    // Undirected edge -> (face, traversed a->b with a < b).
    std::map<std::pair<Index, Index>, std::vector<std::pair<std::size_t, bool>>> edges;
    for (std::size_t f = 0; f < n; ++f) {
      const auto& loop = faces[f].vertices;
      for (std::size_t i = 0; i < loop.size(); ++i) {
        const Index a = loop[i], b = loop[(i + 1) % loop.size()];
        edges[std::minmax(a, b)].emplace_back(f, a < b);
      }
    }
    std::vector<int> state(n, 0);  // 0 unvisited, 1 kept, -1 flipped
    std::vector<std::size_t> stack;
    for (std::size_t seed = 0; seed < n; ++seed) {
      if (state[seed]) continue;
      state[seed] = 1;
      stack.push_back(seed);
      while (!stack.empty()) {
        const std::size_t f = stack.back();
        stack.pop_back();
        const auto& loop = faces[f].vertices;
        for (std::size_t i = 0; i < loop.size(); ++i) {
          const Index a = loop[i], b = loop[(i + 1) % loop.size()];
          const bool forward = (a < b) == (state[f] > 0);
          for (auto [g, fw] : edges[std::minmax(a, b)]) {
            if (g == f) continue;
            // The neighbour must traverse the shared edge the other way.
            const int want = (fw != forward) ? 1 : -1;
            if (!state[g]) {
              state[g] = want;
              stack.push_back(g);
            } else if (state[g] != want) {
              throw GeometryError("cell " + std::to_string(c) + " has faces that cannot be oriented consistently");
            }
          }
        }
      }
    }
    for (std::size_t f = 0; f < n; ++f)
      if (state[f] < 0) std::reverse(faces[f].vertices.begin(), faces[f].vertices.end());
    double vol = 0.0;
    for (const auto& face : faces) {
      const FaceGeometry g = face_geometry(face.vertices, vertices);
      vol += g.area * g.normal.dot(g.centroid);
    }
    if (vol < 0)
      for (auto& face : faces) std::reverse(face.vertices.begin(), face.vertices.end());
  }
}

bool PolyMesh::is_boundary_point(const Point3& p, const Tolerances& tol) const {
  return boundary_side(p, edgeLength, tol.box * edgeLength) >= 0;
}

double PolyMesh::total_volume() const {
  double v = 0.0;
  for (const auto& c : cells) v += c.volume;
  return v;
}

Point3 PolyMesh::cell_vertex_mean(Index cell) const {
  const auto& ids = cells[static_cast<std::size_t>(cell)].vertexIds;
  Point3 m = Point3::Zero();
  for (Index v : ids) m += vertices[static_cast<std::size_t>(v)];
  return m / static_cast<double>(ids.size());
}

Point3 PolyMesh::cell_centroid(Index cell) const {
  const auto& c = cells[static_cast<std::size_t>(cell)];
  const Point3 apex = cell_vertex_mean(cell);
  Point3 acc = Point3::Zero();
  double vol = 0.0;
  for (const auto& face : c.faces) {
    const FaceGeometry g = face_geometry(face.vertices, vertices);
    const std::size_t n = face.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point3& a = vertices[static_cast<std::size_t>(face.vertices[i])];
      const Point3& b = vertices[static_cast<std::size_t>(face.vertices[(i + 1) % n])];
      const double v = (a - apex).cross(b - apex).dot(g.centroid - apex) / 6.0;
      acc += v * (apex + a + b + g.centroid) / 4.0;
      vol += v;
    }
  }
  return acc / vol;
}

bool PolyMesh::cell_is_convex(Index cell, const Tolerances& tol) const {
  const auto& c = cells[static_cast<std::size_t>(cell)];
  const double eps = tol.plane * edgeLength;
  for (const auto& face : c.faces) {
    const FaceGeometry g = face_geometry(face.vertices, vertices);
    for (Index v : c.vertexIds)
      if (g.normal.dot(vertices[static_cast<std::size_t>(v)] - g.centroid) > eps) return false;
  }
  return true;
}

bool PolyMesh::cell_contains(Index cell, const Point3& p, double slack) const {
  const auto& c = cells[static_cast<std::size_t>(cell)];
  for (const auto& face : c.faces) {
    const FaceGeometry g = face_geometry(face.vertices, vertices);
    if (g.normal.dot(p - g.centroid) > slack) return false;
  }
  return true;
}

bool MeshReport::ok(double volumeTol, double divTol) const {
  return volumeClosureError <= volumeTol && maxDivergenceDefect <= divTol && unmatchedInteriorFaces == 0 &&
         nonManifoldEdges == 0;
}

MeshReport check_mesh(const PolyMesh& mesh, const Tolerances& tol) {
  MeshReport r;
  const double L = mesh.edgeLength;
  r.volumeClosureError = std::abs(mesh.total_volume() - L * L * L) / (L * L * L);

  std::map<std::vector<Index>, std::vector<Eigen::Vector3d>> faceNormals;
  for (const auto& cell : mesh.cells) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    double maxArea = 0.0;
    std::map<std::pair<Index, Index>, int> directed;
    for (const auto& face : cell.faces) {
      const FaceGeometry g = face_geometry(face.vertices, mesh.vertices);
      sum += g.area * g.normal;
      maxArea = std::max(maxArea, g.area);
      for (Index v : face.vertices)
        r.maxPlanarityDefect = std::max(
            r.maxPlanarityDefect,
            std::abs(g.normal.dot(mesh.vertices[static_cast<std::size_t>(v)] - g.centroid)) / L);
      const std::size_t n = face.vertices.size();
      for (std::size_t i = 0; i < n; ++i) ++directed[{face.vertices[i], face.vertices[(i + 1) % n]}];
      if (face_side(face.vertices, mesh.vertices, L, tol.box * L) < 0)
        faceNormals[sorted_key(face.vertices)].push_back(g.normal);
    }
    r.maxDivergenceDefect = std::max(r.maxDivergenceDefect, sum.norm() / maxArea);
    // Watertight and consistently oriented: every directed edge once, and
    // its reverse once.
    for (const auto& [edge, count] : directed) {
      auto rev = directed.find({edge.second, edge.first});
      if (count != 1 || rev == directed.end() || rev->second != 1) ++r.nonManifoldEdges;
    }
  }
  for (const auto& [key, normals] : faceNormals) {
    if (normals.size() != 2 || normals[0].dot(normals[1]) > -1.0 + 1e-8) ++r.unmatchedInteriorFaces;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Native text format

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

constexpr const char* kMeshMagic = "vemhom-mesh";
constexpr int kMeshVersion = 1;

std::string mesh_body(const PolyMesh& mesh) {
  std::ostringstream body;
  body << "VERTICES " << mesh.vertices.size() << '\n';
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const auto& p = mesh.vertices[i];
    body << i << ' ' << fmt_double(p.x()) << ' ' << fmt_double(p.y()) << ' ' << fmt_double(p.z()) << '\n';
  }
  std::size_t totalFaces = 0;
  body << "CELLS " << mesh.cells.size() << '\n';
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    body << c << ' ' << mesh.cells[c].materialId << ' ' << mesh.cells[c].faces.size() << '\n';
    totalFaces += mesh.cells[c].faces.size();
  }
  body << "FACES " << totalFaces << '\n';
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    for (const auto& face : mesh.cells[c].faces) {
      body << c;
      for (Index v : face.vertices) body << ' ' << v;
      body << '\n';
    }
  }
  return body.str();
}

}  // namespace

std::string mesh_hash(const PolyMesh& mesh) {
  return fnv1a_hex(fmt_double(mesh.edgeLength) + "\n" + mesh_body(mesh));
}

void write_mesh(std::ostream& out, const PolyMesh& mesh) {
  const std::string body = mesh_body(mesh);
  out << kMeshMagic << ' ' << kMeshVersion << '\n';
  out << "L " << fmt_double(mesh.edgeLength) << '\n';
  out << "checksum " << fnv1a_hex(body) << '\n';
  out << body;
  if (!out) throw IoError("failed writing mesh");
}

PolyMesh read_mesh(std::istream& in, const Tolerances& tol) {
  auto fail = [](const std::string& msg) -> PolyMesh { throw IoError("mesh file: " + msg); };
  std::string magic, word, checksum;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMeshMagic) return fail("missing 'vemhom-mesh' header");
  if (version != kMeshVersion) return fail("unsupported version " + std::to_string(version));
  PolyMesh mesh;
  if (!(in >> word >> mesh.edgeLength) || word != "L" || !(mesh.edgeLength > 0)) return fail("bad L line");
  if (!(in >> word >> checksum) || word != "checksum") return fail("bad checksum line");
  in >> std::ws;
  const std::string body{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (fnv1a_hex(body) != checksum) return fail("checksum mismatch");

  std::istringstream bs(body);
  std::size_t nv = 0, nc = 0, nf = 0;
  if (!(bs >> word >> nv) || word != "VERTICES") return fail("expected VERTICES section");
  mesh.vertices.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    std::size_t id;
    double x, y, z;
    if (!(bs >> id >> x >> y >> z) || id != i) return fail("bad vertex record " + std::to_string(i));
    mesh.vertices[i] = {x, y, z};
  }
  if (!(bs >> word >> nc) || word != "CELLS") return fail("expected CELLS section");
  mesh.cells.resize(nc);
  std::vector<std::size_t> faceCounts(nc);
  for (std::size_t i = 0; i < nc; ++i) {
    std::size_t id;
    if (!(bs >> id >> mesh.cells[i].materialId >> faceCounts[i]) || id != i)
      return fail("bad cell record " + std::to_string(i));
  }
  if (!(bs >> word >> nf) || word != "FACES") return fail("expected FACES section");
  std::string line;
  std::getline(bs, line);
  for (std::size_t i = 0; i < nf; ++i) {
    if (!std::getline(bs, line)) return fail("truncated FACES section");
    std::istringstream ls(line);
    std::size_t cell;
    if (!(ls >> cell) || cell >= nc) return fail("bad face owner on face " + std::to_string(i));
    Face face;
    Index v;
    while (ls >> v) {
      if (v < 0 || static_cast<std::size_t>(v) >= nv) return fail("dangling vertex reference " + std::to_string(v));
      face.vertices.push_back(v);
    }
    mesh.cells[cell].faces.push_back(std::move(face));
  }
  for (std::size_t i = 0; i < nc; ++i)
    if (mesh.cells[i].faces.size() != faceCounts[i]) return fail("face count mismatch for cell " + std::to_string(i));
  mesh.orient_faces();
  mesh.finalize(tol);
  return mesh;
}

}  // namespace vemhom
