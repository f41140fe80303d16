#include "vemhom/tetmesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_map>

#include "vemhom/error.hpp"

namespace vemhom {

double tet_volume(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

double TetSubmesh::total_volume() const {
  double v = 0.0;
  for (double t : volumes) v += t;
  return v;
}

namespace {

std::vector<Index> rotate_to_lowest(const std::vector<Index>& loop) {
  std::vector<Index> r = loop;
  std::rotate(r.begin(), std::min_element(r.begin(), r.end()), r.end());
  return r;
}

// Appends the fan tets of `loop` (rotated to its lowest id) towards `apex`,
// positively oriented. Zero-volume tets from collinear loop vertices are
// skipped.
void fan_face(const std::vector<Index>& loop, Index apex, const std::function<Point3(Index)>& pt,
              double volTol, TetSubmesh& sub) {
  const auto r = rotate_to_lowest(loop);
  for (std::size_t i = 1; i + 1 < r.size(); ++i) {
    Tet t{apex, r[0], r[i], r[i + 1]};
    double v = tet_volume(pt(t[0]), pt(t[1]), pt(t[2]), pt(t[3]));
    if (std::abs(v) <= volTol) continue;
    if (v < 0) {
      std::swap(t[2], t[3]);
      v = -v;
    }
    sub.tets.push_back(t);
    sub.volumes.push_back(v);
  }
}

std::uint64_t edge_key(Index a, Index b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

// Red refinement of one tet given a midpoint lookup; children positively
// oriented.
template <class Mid, class Pt>
void red_split(const Tet& t, Mid&& mid, Pt&& pt, std::vector<Tet>& out) {
  const Index m01 = mid(t[0], t[1]), m02 = mid(t[0], t[2]), m03 = mid(t[0], t[3]);
  const Index m12 = mid(t[1], t[2]), m13 = mid(t[1], t[3]), m23 = mid(t[2], t[3]);
  std::vector<Tet> kids = {{t[0], m01, m02, m03}, {m01, t[1], m12, m13}, {m02, m12, t[2], m23}, {m03, m13, m23, t[3]}};
  // Octahedron split along its shortest diagonal.
  const std::array<std::pair<Index, Index>, 3> diag = {{{m02, m13}, {m01, m23}, {m03, m12}}};
  const std::array<std::array<Index, 4>, 3> ring = {{{m01, m12, m23, m03}, {m02, m12, m13, m03}, {m01, m02, m23, m13}}};
  std::size_t best = 0;
  double bestLen = 1e300;
  for (std::size_t k = 0; k < 3; ++k) {
    const double len = (pt(diag[k].first) - pt(diag[k].second)).squaredNorm();
    if (len < bestLen * (1.0 - 1e-12)) {
      bestLen = len;
      best = k;
    }
  }
  for (std::size_t k = 0; k < 4; ++k)
    kids.push_back({diag[best].first, diag[best].second, ring[best][k], ring[best][(k + 1) % 4]});
  for (auto& c : kids) {
    if (tet_volume(pt(c[0]), pt(c[1]), pt(c[2]), pt(c[3])) < 0) std::swap(c[2], c[3]);
    out.push_back(c);
  }
}

}  // namespace

TetSubmesh triangulate_cell(const PolyMesh& mesh, Index cellId, const Tolerances& tol) {
  const auto& cell = mesh.cells.at(static_cast<std::size_t>(cellId));
  TetSubmesh sub;
  sub.owner = cellId;
  sub.numMeshVertices = mesh.vertices.size();
  const double volTol = 1e-13 * std::max(cell.volume, 0.0);

  if (mesh.cell_is_convex(cellId, tol)) {
    const Index apex = cell.vertexIds.front();
    auto pt = [&](Index id) { return mesh.vertices[static_cast<std::size_t>(id)]; };
    for (const auto& face : cell.faces) {
      if (std::find(face.vertices.begin(), face.vertices.end(), apex) != face.vertices.end()) continue;
      fan_face(face.vertices, apex, pt, volTol, sub);
    }
  } else {
    sub.nonConvexFallback = true;
    sub.extraPoints.push_back(mesh.cell_vertex_mean(cellId));
    const Index apex = static_cast<Index>(sub.numMeshVertices);
    auto pt = [&](Index id) { return sub.point(mesh, id); };
    for (const auto& face : cell.faces) fan_face(face.vertices, apex, pt, volTol, sub);
  }
  if (sub.tets.empty()) throw GeometryError("cell " + std::to_string(cellId) + " produced no tetrahedra");
  return sub;
}

TetMesh assemble_tet_mesh(const PolyMesh& mesh, const std::vector<TetSubmesh>& subs) {
  TetMesh out;
  out.edgeLength = mesh.edgeLength;
  out.nodes = mesh.vertices;
  const Index nv = static_cast<Index>(mesh.vertices.size());
  for (const auto& sub : subs) {
    const Index offset = static_cast<Index>(out.nodes.size());
    out.nodes.insert(out.nodes.end(), sub.extraPoints.begin(), sub.extraPoints.end());
    for (const auto& t : sub.tets) {
      Tet g;
      for (int k = 0; k < 4; ++k) g[k] = t[k] < nv ? t[k] : offset + (t[k] - nv);
      out.tets.push_back(g);
      out.owner.push_back(sub.owner);
    }
  }
  return out;
}

TetMesh triangulate(const PolyMesh& mesh, const Tolerances& tol) {
  std::vector<TetSubmesh> subs;
  subs.reserve(mesh.cells.size());
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) subs.push_back(triangulate_cell(mesh, static_cast<Index>(c), tol));
  return assemble_tet_mesh(mesh, subs);
}

std::vector<Index> TetMesh::boundary_nodes(const Tolerances& tol) const {
  std::vector<Index> ids;
  const double eps = tol.box * edgeLength;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& p = nodes[i];
    for (int a = 0; a < 3; ++a) {
      if (std::abs(p[a]) <= eps || std::abs(p[a] - edgeLength) <= eps) {
        ids.push_back(static_cast<Index>(i));
        break;
      }
    }
  }
  return ids;
}

double TetMesh::total_volume() const {
  double v = 0.0;
  for (const auto& t : tets)
    v += tet_volume(nodes[static_cast<std::size_t>(t[0])], nodes[static_cast<std::size_t>(t[1])],
                    nodes[static_cast<std::size_t>(t[2])], nodes[static_cast<std::size_t>(t[3])]);
  return v;
}

TetMesh refine(const TetMesh& input, int levels) {
  if (levels < 0) throw GeometryError("refinement levels must be non-negative");
  TetMesh cur = input;
  for (int level = 0; level < levels; ++level) {
    TetMesh next;
    next.edgeLength = cur.edgeLength;
    next.nodes = cur.nodes;
    next.tets.reserve(cur.tets.size() * 8);
    next.owner.reserve(cur.tets.size() * 8);
    std::unordered_map<std::uint64_t, Index> mids;
    mids.reserve(cur.tets.size() * 2);
    auto mid = [&](Index a, Index b) {
      const auto key = edge_key(a, b);
      auto it = mids.find(key);
      if (it != mids.end()) return it->second;
      const Index id = static_cast<Index>(next.nodes.size());
      next.nodes.push_back(0.5 * (cur.nodes[static_cast<std::size_t>(a)] + cur.nodes[static_cast<std::size_t>(b)]));
      mids.emplace(key, id);
      return id;
    };
    auto pt = [&](Index id) -> const Point3& { return next.nodes[static_cast<std::size_t>(id)]; };
    for (std::size_t t = 0; t < cur.tets.size(); ++t) {
      const std::size_t before = next.tets.size();
      red_split(cur.tets[t], mid, pt, next.tets);
      next.owner.insert(next.owner.end(), next.tets.size() - before, cur.owner[t]);
    }
    cur = std::move(next);
  }
  return cur;
}

TetSubmesh refine_submesh(const PolyMesh& mesh, const TetSubmesh& sub, int levels) {
  if (levels < 0) throw GeometryError("refinement levels must be non-negative");
  TetSubmesh cur = sub;
  for (int level = 0; level < levels; ++level) {
    TetSubmesh next;
    next.owner = cur.owner;
    next.numMeshVertices = cur.numMeshVertices;
    next.nonConvexFallback = cur.nonConvexFallback;
    next.extraPoints = cur.extraPoints;
    std::unordered_map<std::uint64_t, Index> mids;
    auto pt = [&](Index id) { return next.point(mesh, id); };
    auto mid = [&](Index a, Index b) {
      const auto key = edge_key(a, b);
      auto it = mids.find(key);
      if (it != mids.end()) return it->second;
      next.extraPoints.push_back(0.5 * (cur.point(mesh, a) + cur.point(mesh, b)));
      const Index id = static_cast<Index>(next.numMeshVertices + next.extraPoints.size() - 1);
      mids.emplace(key, id);
      return id;
    };
    for (const auto& t : cur.tets) red_split(t, mid, pt, next.tets);
    for (const auto& t : next.tets) next.volumes.push_back(tet_volume(pt(t[0]), pt(t[1]), pt(t[2]), pt(t[3])));
    cur = std::move(next);
  }
  return cur;
}

QuadraticTetMesh promote_to_quadratic(const TetMesh& mesh, const Tolerances& tol) {
  static constexpr int kEdges[6][2] = {{0, 1}, {1, 2}, {0, 2}, {0, 3}, {1, 3}, {2, 3}};
  QuadraticTetMesh q;
  q.edgeLength = mesh.edgeLength;
  q.nodes = mesh.nodes;
  q.owner = mesh.owner;
  std::unordered_map<std::uint64_t, Index> mids;
  for (const auto& t : mesh.tets) {
    std::array<Index, 10> e{};
    for (int k = 0; k < 4; ++k) e[k] = t[k];
    for (int k = 0; k < 6; ++k) {
      const Index a = t[kEdges[k][0]], b = t[kEdges[k][1]];
      const auto key = edge_key(a, b);
      auto it = mids.find(key);
      if (it == mids.end()) {
        q.nodes.push_back(0.5 * (mesh.nodes[static_cast<std::size_t>(a)] + mesh.nodes[static_cast<std::size_t>(b)]));
        it = mids.emplace(key, static_cast<Index>(q.nodes.size() - 1)).first;
      }
      e[4 + k] = it->second;
    }
    q.tets.push_back(e);
  }
  const double eps = tol.box * mesh.edgeLength;
  q.boundary.assign(q.nodes.size(), false);
  for (std::size_t i = 0; i < q.nodes.size(); ++i)
    for (int a = 0; a < 3; ++a)
      if (std::abs(q.nodes[i][a]) <= eps || std::abs(q.nodes[i][a] - mesh.edgeLength) <= eps) q.boundary[i] = true;
  return q;
}

}  // namespace vemhom
