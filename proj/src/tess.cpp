#include "vemhom/tess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "vemhom/error.hpp"

namespace vemhom {
namespace {

class Tokens {
 public:
  explicit Tokens(std::istream& in) {
    std::string tok;
    while (in >> tok) toks_.push_back(tok);
  }
  bool done() const { return pos_ >= toks_.size(); }
  const std::string& peek() const {
    if (done()) throw IoError("tess: unexpected end of input");
    return toks_[pos_];
  }
  std::string next() {
    const std::string& t = peek();
    ++pos_;
    return t;
  }
  long integer(const char* what) {
    const std::string t = next();
    try {
      std::size_t used = 0;
      const long v = std::stol(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw IoError(std::string("tess: expected integer for ") + what + ", got '" + t + "'");
    }
  }
  double real(const char* what) {
    const std::string t = next();
    try {
      std::size_t used = 0;
      const double v = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw IoError(std::string("tess: expected number for ") + what + ", got '" + t + "'");
    }
  }

 private:
  std::vector<std::string> toks_;
  std::size_t pos_ = 0;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

PolyMesh parse_tess(std::istream& in, double planeTol) {
  Tokens tk(in);
  if (tk.next() != "***tess") throw IoError("tess: missing '***tess' header");

  std::vector<Point3> verts;
  std::vector<std::vector<Index>> faceLoops;
  std::vector<std::vector<long>> polyFaces;
  long declaredCells = -1;
  bool sawEnd = false;

  auto expect_id = [&](long got, std::size_t expected, const char* what) {
    if (got != static_cast<long>(expected))
      throw IoError(std::string("tess: ") + what + " ids must be consecutive from 1 (got " + std::to_string(got) + ")");
  };

  while (!tk.done()) {
    const std::string section = tk.next();
    if (section == "***end") {
      sawEnd = true;
      break;
    }
    if (section == "**format") {
      tk.next();
    } else if (section == "**general") {
      if (tk.integer("dimension") != 3) throw IoError("tess: only 3-D tessellations are supported");
      tk.next();
    } else if (section == "**cell") {
      declaredCells = tk.integer("cell count");
      if (!tk.done() && tk.peek().rfind("*", 0) == 0 && tk.peek().rfind("**", 0) != 0)
        throw IoError("tess: unsupported **cell subsection '" + tk.peek() + "'");
    } else if (section == "**vertex") {
      const long n = tk.integer("vertex count");
      for (long i = 0; i < n; ++i) {
        expect_id(tk.integer("vertex id"), verts.size() + 1, "vertex");
        const double x = tk.real("x"), y = tk.real("y"), z = tk.real("z");
        tk.integer("vertex state");
        verts.emplace_back(x, y, z);
      }
    } else if (section == "**edge") {
      const long n = tk.integer("edge count");
      for (long i = 0; i < n; ++i) {
        expect_id(tk.integer("edge id"), static_cast<std::size_t>(i) + 1, "edge");
        for (int k = 0; k < 2; ++k) {
          const long v = tk.integer("edge vertex");
          if (v < 1 || v > static_cast<long>(verts.size()))
            throw GeometryError("tess: dangling vertex reference " + std::to_string(v) + " in edge");
        }
        tk.integer("edge state");
      }
    } else if (section == "**face") {
      const long n = tk.integer("face count");
      for (long i = 0; i < n; ++i) {
        expect_id(tk.integer("face id"), faceLoops.size() + 1, "face");
        const long nv = tk.integer("face vertex count");
        if (nv < 3) throw GeometryError("tess: face with fewer than 3 vertices");
        std::vector<Index> loop;
        for (long k = 0; k < nv; ++k) {
          const long v = tk.integer("face vertex");
          if (v < 1 || v > static_cast<long>(verts.size()))
            throw GeometryError("tess: dangling vertex reference " + std::to_string(v) + " in face " +
                                std::to_string(i + 1));
          loop.push_back(v - 1);
        }
        const long ne = tk.integer("face edge count");
        for (long k = 0; k < ne; ++k) tk.integer("face edge");
        for (int k = 0; k < 4; ++k) tk.real("face equation");
        tk.integer("face state");
        tk.integer("face point");
        for (int k = 0; k < 3; ++k) tk.real("face point coordinate");
        faceLoops.push_back(std::move(loop));
      }
    } else if (section == "**polyhedron") {
      const long n = tk.integer("polyhedron count");
      for (long i = 0; i < n; ++i) {
        expect_id(tk.integer("polyhedron id"), polyFaces.size() + 1, "polyhedron");
        const long nf = tk.integer("polyhedron face count");
        std::vector<long> fl;
        for (long k = 0; k < nf; ++k) {
          const long f = tk.integer("polyhedron face");
          if (f == 0 || std::labs(f) > static_cast<long>(faceLoops.size()))
            throw GeometryError("tess: dangling face reference " + std::to_string(f));
          fl.push_back(f);
        }
        polyFaces.push_back(std::move(fl));
      }
    } else {
      throw IoError("tess: unsupported section '" + section + "'");
    }
  }
  if (!sawEnd) throw IoError("tess: missing '***end'");
  if (polyFaces.empty()) throw IoError("tess: no polyhedra");
  if (declaredCells >= 0 && declaredCells != static_cast<long>(polyFaces.size()))
    throw IoError("tess: **cell count does not match number of polyhedra");

  PolyMesh mesh;
  mesh.vertices = verts;
  Point3 lo = verts.front(), hi = verts.front();
  for (const auto& v : verts) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double L = (hi - lo).maxCoeff();
  if (!(L > 0) || lo.cwiseAbs().maxCoeff() > 1e-9 * L || (hi.array() - L).abs().maxCoeff() > 1e-9 * L)
    throw GeometryError("tess: domain must be the cube [0, L]^3");
  mesh.edgeLength = L;

  for (std::size_t f = 0; f < faceLoops.size(); ++f) {
    const FaceGeometry g = face_geometry(faceLoops[f], verts);
    for (Index v : faceLoops[f])
      if (std::abs(g.normal.dot(verts[static_cast<std::size_t>(v)] - g.centroid)) > planeTol * L)
        throw GeometryError("tess: face " + std::to_string(f + 1) + " is not planar");
  }

  for (const auto& fl : polyFaces) {
    PolyCell cell;
    for (long f : fl) {
      Face face;
      face.vertices = faceLoops[static_cast<std::size_t>(std::labs(f) - 1)];
      if (f < 0) std::reverse(face.vertices.begin(), face.vertices.end());
      cell.faces.push_back(std::move(face));
    }
    mesh.cells.push_back(std::move(cell));
  }
  // Signed face references are not trusted: loops are re-oriented from
  // shared edges, then outward.
  mesh.orient_faces();
  mesh.finalize();
  return mesh;
}

PolyMesh parse_tess_string(const std::string& text, double planeTol) {
  std::istringstream in(text);
  return parse_tess(in, planeTol);
}

void write_tess(std::ostream& out, const PolyMesh& mesh) {
  // Unique faces (first owner's orientation) and unique edges.
  std::map<std::vector<Index>, long> faceId;
  std::vector<std::vector<Index>> faces;
  std::vector<std::vector<long>> polys;
  for (const auto& cell : mesh.cells) {
    std::vector<long> refs;
    for (const auto& face : cell.faces) {
      auto key = face.vertices;
      std::sort(key.begin(), key.end());
      auto it = faceId.find(key);
      if (it == faceId.end()) {
        faces.push_back(face.vertices);
        faceId.emplace(key, static_cast<long>(faces.size()));
        refs.push_back(static_cast<long>(faces.size()));
      } else {
        refs.push_back(-it->second);
      }
    }
    polys.push_back(std::move(refs));
  }
  std::map<std::pair<Index, Index>, long> edgeId;
  std::vector<std::pair<Index, Index>> edges;
  std::vector<std::vector<long>> faceEdges;
  for (const auto& loop : faces) {
    std::vector<long> fe;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const Index a = loop[i], b = loop[(i + 1) % loop.size()];
      const auto key = std::minmax(a, b);
      auto it = edgeId.find(key);
      if (it == edgeId.end()) {
        edges.push_back(key);
        it = edgeId.emplace(key, static_cast<long>(edges.size())).first;
      }
      fe.push_back(a == key.first ? it->second : -it->second);
    }
    faceEdges.push_back(std::move(fe));
  }

  out << "***tess\n **format\n   3.4\n **general\n   3 standard\n **cell\n   " << mesh.cells.size() << '\n';
  out << " **vertex\n   " << mesh.vertices.size() << '\n';
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const auto& p = mesh.vertices[i];
    out << "   " << i + 1 << ' ' << fmt(p.x()) << ' ' << fmt(p.y()) << ' ' << fmt(p.z()) << " 0\n";
  }
  out << " **edge\n   " << edges.size() << '\n';
  for (std::size_t i = 0; i < edges.size(); ++i)
    out << "   " << i + 1 << ' ' << edges[i].first + 1 << ' ' << edges[i].second + 1 << " 0\n";
  out << " **face\n   " << faces.size() << '\n';
  for (std::size_t i = 0; i < faces.size(); ++i) {
    out << "   " << i + 1 << ' ' << faces[i].size();
    for (Index v : faces[i]) out << ' ' << v + 1;
    out << "\n      " << faceEdges[i].size();
    for (long e : faceEdges[i]) out << ' ' << e;
    const FaceGeometry g = face_geometry(faces[i], mesh.vertices);
    out << "\n      " << fmt(g.normal.dot(g.centroid)) << ' ' << fmt(g.normal.x()) << ' ' << fmt(g.normal.y()) << ' '
        << fmt(g.normal.z()) << "\n      0 0 0 0 0\n";
  }
  out << " **polyhedron\n   " << polys.size() << '\n';
  for (std::size_t i = 0; i < polys.size(); ++i) {
    out << "   " << i + 1 << ' ' << polys[i].size();
    for (long f : polys[i]) out << ' ' << f;
    out << '\n';
  }
  out << "***end\n";
  if (!out) throw IoError("failed writing tess file");
}

}  // namespace vemhom
