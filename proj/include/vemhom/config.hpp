#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "vemhom/materials.hpp"
#include "vemhom/study.hpp"

namespace vemhom {

/// Sectioned key-value text: `[section]` headers, `key = value` lines, `#`
/// comments. Keys are addressed as "section.key".
struct IniFile {
  std::map<std::string, std::string> values;
  std::map<std::string, int> lines;  ///< source line per key, for messages
};

IniFile parse_ini(std::istream& in);

struct MeshSpec {
  std::string source = "voronoi";  ///< voronoi | file
  std::string path;                ///< native mesh or .tess (source = file)
  std::size_t cells = 20;
  std::uint64_t seed = 1;
  double edgeLength = 1.0;
  int lloydIterations = 0;
};

struct RunConfig {
  MeshSpec mesh;

  std::string library = "data/materials.txt";
  std::string material;             ///< single-phase runs
  std::string matrix = "BaTiO3";    ///< hybrid runs
  std::string inclusion = "CoFe2O4";
  double fraction = -1.0;           ///< < 0: single-phase
  std::uint64_t orientationSeed = 2;
  std::uint64_t assignmentSeed = 3;
  FieldMode mode = FieldMode::FullyCoupled;

  Method method = Method::VemVo;
  double beta = 0.1;
  int levels = 2;
  std::vector<int> cases;           ///< 1-based labels; empty = all

  std::vector<std::string> studies = {"comparison", "beta"};
  std::vector<Method> methods = {Method::VemVo, Method::FemO1, Method::FemO2};
  double betaMin = 0.05, betaMax = 1.0, betaStep = 0.05;
  double fractionMin = 0.05, fractionMax = 0.95, fractionStep = 0.1;
  std::vector<std::string> targets = {"G", "C"};
  int referenceLevels = 2;
  std::size_t maxReferenceTets = 400000;
  std::string cacheDir;

  std::string outDir = "out";
  bool matrixDump = false;
  unsigned workers = 1;
};

/// Validates every key (unknown keys and malformed values raise
/// ConfigError). Relative paths resolve against `baseDir`.
RunConfig parse_config(std::istream& in, const std::string& baseDir = ".");
RunConfig load_config(const std::string& path);

/// Canonical `section.key = value` listing of the effective configuration.
std::string canonical_config(const RunConfig& c);
/// FNV-1a of canonical_config, so formatting and comments do not matter.
std::string config_hash(const RunConfig& c);

/// Seeds derived from one base value: mesh s, orientations s+1, assignment s+2.
void apply_base_seed(RunConfig& c, std::uint64_t seed);

/// Mesh from the spec (generated Voronoi or read from file).
PolyMesh build_mesh(const MeshSpec& spec);

}  // namespace vemhom
