#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>

#include "vemhom/error.hpp"
#include "vemhom/mesh.hpp"

namespace vemhom {
namespace {

// Convex polyhedron with local vertex storage, clipped in place.
struct ClipPolyhedron {
  std::vector<Point3> verts;
  std::vector<Face> faces;

  static ClipPolyhedron cube(double L) {
    ClipPolyhedron p;
    for (int k = 0; k < 8; ++k) p.verts.emplace_back((k & 1) ? L : 0.0, (k & 2) ? L : 0.0, (k & 4) ? L : 0.0);
    // Loops wound counter-clockwise seen from outside.
    p.faces = {{{0, 4, 6, 2}, -1}, {{1, 3, 7, 5}, -2}, {{0, 1, 5, 4}, -3},
               {{2, 6, 7, 3}, -4}, {{0, 2, 3, 1}, -5}, {{4, 5, 7, 6}, -6}};
    return p;
  }

  double max_distance_sq(const Point3& from) const {
    double r = 0.0;
    for (const auto& v : verts) r = std::max(r, (v - from).squaredNorm());
    return r;
  }

  // Keeps {x : n·x <= d}; the new cap face gets tag `neighbor`.
  void clip(const Eigen::Vector3d& n, double d, Index neighbor, double eps) {
    std::vector<double> s(verts.size());
    bool anyOut = false;
    for (std::size_t i = 0; i < verts.size(); ++i) {
      s[i] = n.dot(verts[i]) - d;
      anyOut = anyOut || s[i] > eps;
    }
    if (!anyOut) return;

    std::map<std::pair<Index, Index>, Index> cut;
    auto cut_vertex = [&](Index a, Index b) {
      const auto key = std::minmax(a, b);
      auto it = cut.find(key);
      if (it != cut.end()) return it->second;
      const double t = s[a] / (s[a] - s[b]);
      verts.push_back(verts[a] + t * (verts[b] - verts[a]));
      s.push_back(0.0);
      const Index id = static_cast<Index>(verts.size() - 1);
      cut.emplace(key, id);
      return id;
    };

    std::vector<Face> kept;
    for (const auto& face : faces) {
      Face out{{}, face.neighbor};
      const std::size_t m = face.vertices.size();
      for (std::size_t i = 0; i < m; ++i) {
        const Index a = face.vertices[i];
        const Index b = face.vertices[(i + 1) % m];
        if (s[a] <= eps) out.vertices.push_back(a);
        if ((s[a] < -eps && s[b] > eps) || (s[a] > eps && s[b] < -eps)) out.vertices.push_back(cut_vertex(a, b));
      }
      if (out.vertices.size() >= 3) kept.push_back(std::move(out));
    }

    // Cap: every surviving vertex on the plane, ordered by angle.
    std::vector<Index> onPlane;
    for (const auto& face : kept)
      for (Index v : face.vertices)
        if (std::abs(s[v]) <= eps) onPlane.push_back(v);
    std::sort(onPlane.begin(), onPlane.end());
    onPlane.erase(std::unique(onPlane.begin(), onPlane.end()), onPlane.end());
    if (onPlane.size() >= 3) {
      Point3 c = Point3::Zero();
      for (Index v : onPlane) c += verts[v];
      c /= static_cast<double>(onPlane.size());
      Eigen::Vector3d u = (std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY()).cross(n);
      u.normalize();
      const Eigen::Vector3d w = n.cross(u);
      std::vector<std::pair<double, Index>> ang;
      for (Index v : onPlane) {
        const Eigen::Vector3d r = verts[v] - c;
        ang.emplace_back(std::atan2(r.dot(w), r.dot(u)), v);
      }
      std::sort(ang.begin(), ang.end());
      Face cap{{}, neighbor};
      for (auto& [a, v] : ang) cap.vertices.push_back(v);
      kept.push_back(std::move(cap));
    }
    faces = std::move(kept);
    compact();
  }

  void compact() {
    std::vector<Index> remap(verts.size(), -1);
    std::vector<Point3> nv;
    for (auto& face : faces)
      for (Index& v : face.vertices) {
        if (remap[v] < 0) {
          remap[v] = static_cast<Index>(nv.size());
          nv.push_back(verts[v]);
        }
        v = remap[v];
      }
    verts = std::move(nv);
  }
};

// Tolerance-aware vertex deduplication via a uniform hash grid.
class VertexMerger {
 public:
  explicit VertexMerger(double tol) : tol_(tol), h_(std::max(tol * 4.0, 1e-300)) {}

  Index insert(const Point3& p, std::vector<Point3>& out) {
    const auto k = key(p);
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy)
        for (long dz = -1; dz <= 1; ++dz) {
          auto it = grid_.find(pack(k[0] + dx, k[1] + dy, k[2] + dz));
          if (it == grid_.end()) continue;
          for (Index id : it->second)
            if ((out[id] - p).norm() <= tol_) return id;
        }
    const Index id = static_cast<Index>(out.size());
    out.push_back(p);
    grid_[pack(k[0], k[1], k[2])].push_back(id);
    return id;
  }

 private:
  std::array<long, 3> key(const Point3& p) const {
    return {static_cast<long>(std::floor(p.x() / h_)), static_cast<long>(std::floor(p.y() / h_)),
            static_cast<long>(std::floor(p.z() / h_))};
  }
  static std::uint64_t pack(long x, long y, long z) {
    auto m = [](long v) { return static_cast<std::uint64_t>(v) & 0x1FFFFFull; };
    return (m(x) << 42) | (m(y) << 21) | m(z);
  }
  double tol_, h_;
  std::unordered_map<std::uint64_t, std::vector<Index>> grid_;
};

}  // namespace

SeedSet random_seeds(std::size_t count, double L, std::uint64_t rngSeed) {
  SeedSet set;
  set.rngSeed = rngSeed;
  std::mt19937_64 rng(rngSeed);
  // Margin keeps seeds strictly inside the cube.
  std::uniform_real_distribution<double> uni(1e-6 * L, L - 1e-6 * L);
  for (std::size_t i = 0; i < count; ++i) set.seeds.emplace_back(uni(rng), uni(rng), uni(rng));
  return set;
}

PolyMesh generate_voronoi(const SeedSet& seedSet, double L, const Tolerances& tol, double minVolume) {
  const auto& seeds = seedSet.seeds;
  if (seeds.empty()) throw GeometryError("Voronoi generation needs at least one seed");
  if (!(L > 0)) throw GeometryError("cube edge length must be positive");
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (int a = 0; a < 3; ++a)
      if (!(seeds[i][a] > 0.0 && seeds[i][a] < L))
        throw GeometryError("seed " + std::to_string(i) + " is not strictly inside the cube");
  }
  const double mergeTol = tol.merge * L;
  const double clipEps = 0.1 * mergeTol;

  PolyMesh mesh;
  mesh.edgeLength = L;
  VertexMerger merger(mergeTol);

  std::vector<std::size_t> order(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const Point3& si = seeds[i];
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return (seeds[a] - si).squaredNorm() < (seeds[b] - si).squaredNorm();
    });
    ClipPolyhedron poly = ClipPolyhedron::cube(L);
    for (std::size_t j : order) {
      if (j == i) continue;
      const Eigen::Vector3d diff = seeds[j] - si;
      const double dist = diff.norm();
      if (dist <= mergeTol)
        throw GeometryError("coincident seeds " + std::to_string(i) + " and " + std::to_string(j));
      // Bisector cannot reach the cell once half the seed distance exceeds
      // the cell radius around its seed.
      if (0.25 * dist * dist > poly.max_distance_sq(si)) break;
      const Eigen::Vector3d n = diff / dist;
      poly.clip(n, n.dot(0.5 * (si + seeds[j])), static_cast<Index>(j), clipEps);
      if (poly.faces.size() < 4) break;
    }

    PolyCell cell;
    std::vector<Index> global(poly.verts.size());
    for (std::size_t v = 0; v < poly.verts.size(); ++v) global[v] = merger.insert(poly.verts[v], mesh.vertices);
    for (auto& face : poly.faces) {
      Face f{{}, face.neighbor};
      for (Index v : face.vertices) {
        const Index g = global[v];
        if (f.vertices.empty() || f.vertices.back() != g) f.vertices.push_back(g);
      }
      while (f.vertices.size() > 1 && f.vertices.front() == f.vertices.back()) f.vertices.pop_back();
      if (f.vertices.size() < 3) continue;
      // Slivers collapsed by the merge are dropped on both sides of the face.
      Eigen::Vector3d areaVec = Eigen::Vector3d::Zero();
      const Point3& p0 = mesh.vertices[f.vertices[0]];
      for (std::size_t k = 1; k + 1 < f.vertices.size(); ++k)
        areaVec += (mesh.vertices[f.vertices[k]] - p0).cross(mesh.vertices[f.vertices[k + 1]] - p0);
      if (0.5 * areaVec.norm() <= mergeTol * L) continue;
      cell.faces.push_back(std::move(f));
    }
    if (cell.faces.size() < 4) throw GeometryError("degenerate Voronoi cell " + std::to_string(i));
    mesh.cells.push_back(std::move(cell));
  }
  mesh.finalize(tol);
  for (std::size_t c = 0; c < mesh.cells.size(); ++c)
    if (mesh.cells[c].volume < minVolume * L * L * L)
      throw GeometryError("degenerate Voronoi cell " + std::to_string(c) + " (volume " +
                          std::to_string(mesh.cells[c].volume) + ")");
  return mesh;
}

SeedSet lloyd_relax(const SeedSet& seeds, double L, int iterations, const Tolerances& tol) {
  SeedSet current = seeds;
  for (int it = 0; it < iterations; ++it) {
    const PolyMesh mesh = generate_voronoi(current, L, tol);
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) current.seeds[c] = mesh.cell_centroid(static_cast<Index>(c));
  }
  return current;
}

}  // namespace vemhom
