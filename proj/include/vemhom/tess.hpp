#pragma once

#include <iosfwd>
#include <string>

#include "vemhom/mesh.hpp"

namespace vemhom {

/// Reads the documented subset of the Neper tessellation format
/// (docs/formats.md): `**vertex`, `**edge`, `**face` and `**polyhedron`
/// blocks inside `***tess ... ***end`, plus the `**format`, `**general` and
/// `**cell` headers. Face orientation is normalised so every loop winds
/// outward from its polyhedron. Unsupported sections raise IoError;
/// non-planar faces and dangling references raise GeometryError.
PolyMesh parse_tess(std::istream& in, double planeTol = 1e-8);
PolyMesh parse_tess_string(const std::string& text, double planeTol = 1e-8);

/// Writes the same subset. Each interior face is emitted once and referenced
/// with opposite signs by the two polyhedra sharing it.
void write_tess(std::ostream& out, const PolyMesh& mesh);

}  // namespace vemhom
