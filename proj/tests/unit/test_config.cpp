#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "vemhom/config.hpp"
#include "vemhom/error.hpp"

using namespace vemhom;
using namespace vemhom::testing;

namespace {

RunConfig parse(const std::string& text, const std::string& base = "/base") {
  std::istringstream in(text);
  return parse_config(in, base);
}

}  // namespace

TEST(Ini, SectionsCommentsAndLines) {
  std::istringstream in("# leading\n[mesh]\ncells = 4   # trailing\n\n[ run ]\n  workers=2\n");
  const auto ini = parse_ini(in);
  ASSERT_EQ(ini.values.size(), 2u);
  EXPECT_EQ(ini.values.at("mesh.cells"), "4");
  EXPECT_EQ(ini.values.at("run.workers"), "2");
  EXPECT_EQ(ini.lines.at("run.workers"), 6);
}

TEST(Ini, MalformedInputRaises) {
  for (const char* bad : {"cells = 3\n", "[mesh\ncells = 3\n", "[mesh]\ncells 3\n", "[mesh]\na = 1\na = 2\n", "[]\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(parse_ini(in), ConfigError) << bad;
  }
}

TEST(Config, DefaultsWhenEmpty) {
  const auto c = parse("");
  EXPECT_EQ(c.mesh.source, "voronoi");
  EXPECT_EQ(c.mesh.cells, 20u);
  EXPECT_EQ(c.method, Method::VemVo);
  EXPECT_DOUBLE_EQ(c.beta, 0.1);
  EXPECT_EQ(c.mode, FieldMode::FullyCoupled);
  EXPECT_EQ(c.workers, 1u);
  EXPECT_EQ(c.referenceLevels, 2);
  EXPECT_EQ(c.maxReferenceTets, 400000u);
}

TEST(Config, ValuesAndRelativePaths) {
  const auto c = parse(
      "[mesh]\nsource = file\npath = meshes/a.tess\n"
      "[materials]\nlibrary = ../data/m.txt\nmode = electroMech\nfraction = 0.25\n"
      "[homogenize]\nmethod = FEM-O2\ncases = 1, 7, 9\n"
      "[study]\nmethods = VEM-VO, FEM-O1\ntargets = G, e\ncache_dir = /abs/cache\n"
      "[output]\ndir = out\nmatrix_dump = yes\n");
  EXPECT_EQ(c.mesh.path, "/base/meshes/a.tess");
  EXPECT_EQ(c.library, "/data/m.txt");
  EXPECT_EQ(c.mode, FieldMode::ElectroMech);
  EXPECT_DOUBLE_EQ(c.fraction, 0.25);
  EXPECT_EQ(c.method, Method::FemO2);
  EXPECT_EQ(c.cases, (std::vector<int>{1, 7, 9}));
  EXPECT_EQ(c.methods, (std::vector<Method>{Method::VemVo, Method::FemO1}));
  EXPECT_EQ(c.cacheDir, "/abs/cache");
  EXPECT_EQ(c.outDir, "/base/out");
  EXPECT_TRUE(c.matrixDump);
}

TEST(Config, RejectsBadInput) {
  for (const char* bad : {
           "[mesh]\ncell = 3\n",                         // unknown key
           "[mesh]\ncells = three\n",                    // not a number
           "[mesh]\ncells = 0\n",                        // empty mesh
           "[mesh]\nsource = file\n",                    // no path
           "[homogenize]\nbeta = 1.5\n",                 // out of range
           "[homogenize]\nmethod = FEM-O3\n",            // unknown method
       }) {
    EXPECT_THROW(parse(bad), ConfigError) << bad;
  }
  // Magnetic load cases and targets do not exist in electroMech mode.
  EXPECT_THROW(parse("[materials]\nmode = electroMech\n[homogenize]\ncases = 10\n"), ConfigError);
  EXPECT_THROW(parse("[materials]\nmode = electroMech\n[study]\ntargets = q\n"), ConfigError);
  EXPECT_THROW(parse("[study]\nbeta_min = 0.5\nbeta_max = 0.2\n"), ConfigError);
  EXPECT_THROW(parse("[study]\nstudies = comparison, sweep\n"), ConfigError);
  EXPECT_THROW(parse("[run]\nworkers = 0\n"), ConfigError);
}

TEST(Config, HashIgnoresFormattingAndRunLocation) {
  const auto a = parse("[mesh]\ncells = 5\n[homogenize]\nbeta = 0.2\n");
  const auto b = parse("# comment\n[homogenize]\n  beta=0.20\n\n[mesh]\ncells=5\n[output]\ndir = elsewhere\n[run]\nworkers = 4\n");
  EXPECT_EQ(config_hash(a), config_hash(b));
  const auto c = parse("[mesh]\ncells = 6\n[homogenize]\nbeta = 0.2\n");
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(config_hash(a).size(), 16u);
  // Round trip: the canonical listing parses to the same configuration.
  // An absolute library path keeps path resolution out of the comparison.
  const auto d = parse("[mesh]\ncells = 5\n[materials]\nlibrary = /lib/m.txt\n");
  std::string canon = canonical_config(d), ini, section;
  std::istringstream lines(canon);
  for (std::string line; std::getline(lines, line);) {
    const auto dot = line.find('.');
    if (line.substr(0, dot) != section) {
      section = line.substr(0, dot);
      ini += "[" + section + "]\n";
    }
    if (line.back() != ' ') ini += line.substr(dot + 1) + "\n";
  }
  EXPECT_EQ(canonical_config(parse(ini)), canon);
}

TEST(Config, BaseSeedSpreadsToAllStreams) {
  RunConfig c;
  apply_base_seed(c, 41);
  EXPECT_EQ(c.mesh.seed, 41u);
  EXPECT_EQ(c.orientationSeed, 42u);
  EXPECT_EQ(c.assignmentSeed, 43u);
}

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"single-grain", "homogenize-vem", "study-anisotropic", "study-hybrid"}) {
    const auto c = load_config(std::string(VEMHOM_SOURCE_DIR) + "/configs/" + name + ".ini");
    EXPECT_TRUE(std::filesystem::exists(c.library)) << name;
  }
  EXPECT_THROW(load_config("/nonexistent/x.ini"), IoError);
}

TEST(BuildMesh, VoronoiAndFileSources) {
  MeshSpec spec;
  spec.cells = 6;
  spec.seed = 3;
  spec.edgeLength = 2.0;
  const auto m = build_mesh(spec);
  EXPECT_EQ(m.num_cells(), 6u);
  EXPECT_EQ(mesh_hash(m), mesh_hash(build_mesh(spec)));
  spec.lloydIterations = 2;
  EXPECT_NE(mesh_hash(build_mesh(spec)), mesh_hash(m));

  const auto path = std::filesystem::temp_directory_path() / "vemhom-test-mesh.txt";
  {
    std::ofstream out(path);
    write_mesh(out, m);
  }
  MeshSpec file;
  file.source = "file";
  file.path = path.string();
  EXPECT_EQ(mesh_hash(build_mesh(file)), mesh_hash(m));
  std::filesystem::remove(path);
  file.path = "/nonexistent/mesh.txt";
  EXPECT_THROW(build_mesh(file), IoError);
}
