// vemhom: batch front-end for mesh generation, homogenization runs and the
// comparison studies.

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vemhom/config.hpp"
#include "vemhom/error.hpp"
#include "vemhom/tess.hpp"

namespace fs = std::filesystem;
using namespace vemhom;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct Options {
  std::string config;
  std::string out;
  unsigned workers = 0;
  long long seed = -1;
  bool verbose = false;
};

void log(const Options& o, const std::string& msg) {
  if (o.verbose) std::cerr << "[vemhom] " << msg << '\n';
}

RunConfig effective_config(const Options& o) {
  RunConfig c;
  if (!o.config.empty()) {
    c = load_config(o.config);
  } else {
    std::istringstream empty;
    c = parse_config(empty, ".");
  }
  if (!o.out.empty()) c.outDir = o.out;
  if (o.workers > 0) c.workers = o.workers;
  if (o.seed >= 0) apply_base_seed(c, static_cast<std::uint64_t>(o.seed));
  return c;
}

Provenance provenance(const RunConfig& c, const std::string& meshHash) {
  char eigen[32];
  std::snprintf(eigen, sizeof(eigen), "%d.%d.%d", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
  return {{"tool", "vemhom"},
          {"version", VEMHOM_VERSION},
          {"eigen", eigen},
          {"config_hash", config_hash(c)},
          {"mesh_hash", meshHash},
          {"mode", to_string(c.mode)},
          {"tolerances", "merge=1e-9 plane=1e-8 box=1e-9 solve_residual=1e-10 pivot=1e-12 (relative)"}};
}

fs::path prepare_out(const RunConfig& c) {
  fs::path dir(c.outDir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw IoError("cannot write " + p.string());
  return f;
}

GrainModuli moduli_for(const RunConfig& c, const PolyMesh& mesh, const MaterialLibrary& lib, const Options& o,
                       nlohmann::ordered_json& info) {
  GrainAssignment grains;
  if (c.fraction >= 0) {
    const FractionAssignment fa =
        assign_volume_fraction(mesh, c.fraction, c.assignmentSeed, c.matrix, c.inclusion, c.orientationSeed);
    info["fraction_requested"] = fa.requested;
    info["fraction_achieved"] = fa.achieved;
    info["inclusion_grains"] = fa.inclusionGrains;
    info["materials"] = {c.matrix, c.inclusion};
    grains = fa.grains;
  } else {
    if (c.material.empty()) throw ConfigError("set materials.material (single phase) or materials.fraction (hybrid)");
    grains = uniform_assignment(mesh.num_cells(), c.material, c.orientationSeed);
    info["materials"] = {c.material};
  }
  std::vector<std::string> warnings;
  GrainModuli g = grain_moduli(grains, lib, c.mode, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  log(o, std::to_string(g.size()) + " grain moduli built");
  return g;
}

int cmd_mesh(const Options& o) {
  const RunConfig c = effective_config(o);
  const PolyMesh mesh = build_mesh(c.mesh);
  const MeshReport rep = check_mesh(mesh);
  const fs::path dir = prepare_out(c);
  {
    auto f = open_out(dir / "mesh.txt");
    write_mesh(f, mesh);
  }
  {
    auto f = open_out(dir / "mesh.tess");
    write_tess(f, mesh);
  }
  nlohmann::ordered_json j;
  j["provenance"] = provenance(c, mesh_hash(mesh));
  j["cells"] = mesh.num_cells();
  j["vertices"] = mesh.num_vertices();
  j["boundary_nodes"] = mesh.boundaryNodeIds.size();
  j["volume_closure_error"] = rep.volumeClosureError;
  j["max_divergence_defect"] = rep.maxDivergenceDefect;
  j["unmatched_interior_faces"] = rep.unmatchedInteriorFaces;
  j["non_manifold_edges"] = rep.nonManifoldEdges;
  j["max_planarity_defect"] = rep.maxPlanarityDefect;
  j["ok"] = rep.ok();
  auto f = open_out(dir / "mesh-report.json");
  f << j.dump(2) << '\n';
  std::cout << "mesh: " << mesh.num_cells() << " cells, " << mesh.num_vertices() << " vertices, hash "
            << mesh_hash(mesh) << (rep.ok() ? "" : " (audit FAILED)") << '\n';
  if (!rep.ok()) throw GeometryError("mesh audit failed, see mesh-report.json");
  return 0;
}

int cmd_homogenize(const Options& o) {
  const RunConfig c = effective_config(o);
  const MaterialLibrary lib = load_material_library(c.library);
  const PolyMesh mesh = build_mesh(c.mesh);
  log(o, "mesh with " + std::to_string(mesh.num_cells()) + " cells");
  nlohmann::ordered_json info;
  const GrainModuli moduli = moduli_for(c, mesh, lib, o, info);
  const auto disc = make_discretization(c.method, mesh, moduli, c.mode, c.beta, c.levels, c.workers);

  HomogenizationOptions ho;
  ho.workers = c.workers;
  for (int label : c.cases) {
    const int nP = gradient_size(c.mode);
    for (int k = 0; k < nP; ++k)
      if (load_case_label(c.mode, k) == label) ho.cases.push_back(k);
  }
  const HomogenizationResult r = homogenize(*disc, ho);
  log(o, "solved " + std::to_string(r.cases.size()) + " load cases, max Hill residual " +
             std::to_string(r.maxHillResidual));

  Provenance prov = provenance(c, mesh_hash(mesh));
  prov["method"] = r.method;
  if (c.method == Method::VemVo) prov["beta"] = std::to_string(c.beta);
  prov["material_set"] = info["materials"].dump();
  if (info.contains("fraction_achieved")) prov["fraction_achieved"] = info["fraction_achieved"].dump();

  const fs::path dir = prepare_out(c);
  {
    auto f = open_out(dir / "result.json");
    write_result_json(f, r, prov);
  }
  {
    auto f = open_out(dir / "result.csv");
    write_result_csv(f, r, prov);
  }
  if (c.matrixDump) {
    const DofMap dofs(*disc);
    const SparseSystem sys = assemble(*disc, dofs, c.workers);
    auto f = open_out(dir / "K.mtx");
    write_matrix_market(f, sys.K);
  }
  std::cout << r.method << ": " << r.nodes << " nodes, " << r.cases.size() << " cases, |Gbar|_F = " << frobenius(r.Gbar)
            << ", max Hill residual " << r.maxHillResidual << ", Gbar asymmetry " << r.gbarAsymmetry << '\n';
  return 0;
}

int cmd_study(const Options& o) {
  const RunConfig c = effective_config(o);
  const MaterialLibrary lib = load_material_library(c.library);
  const PolyMesh mesh = build_mesh(c.mesh);
  const std::string hash = config_hash(c);
  const fs::path dir = prepare_out(c);
  ReferenceOptions ref;
  ref.levels = c.referenceLevels;
  ref.maxTets = c.maxReferenceTets;
  ref.cacheDir = c.cacheDir;
  ref.workers = c.workers;
  const auto betas = make_grid(c.betaMin, c.betaMax, c.betaStep);

  nlohmann::ordered_json summary;
  summary["provenance"] = provenance(c, mesh_hash(mesh));
  const auto needs = [&](const char* s) { return std::find(c.studies.begin(), c.studies.end(), s) != c.studies.end(); };

  if (needs("comparison") || needs("beta")) {
    nlohmann::ordered_json info;
    const GrainModuli moduli = moduli_for(c, mesh, lib, o, info);
    summary["materials"] = info;
    const auto t0 = std::chrono::steady_clock::now();
    const HomogenizationResult reference = build_reference(mesh, moduli, c.mode, ref);
    summary["reference"] = {{"method", reference.method},
                            {"nodes", reference.nodes},
                            {"elements", reference.elements},
                            {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
    log(o, "reference ready: " + std::to_string(reference.elements) + " tets");
    if (needs("comparison")) {
      const ComparisonStudy s = run_comparison(mesh, moduli, c.mode, c.methods, c.beta, c.targets, reference, c.levels, c.workers);
      auto f = open_out(dir / "fig5-like.csv");
      write_comparison_csv(f, s, hash);
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (const auto& r : s.rows) rows.push_back({{"method", r.method}, {"nodes", r.nodes}, {"seconds", r.seconds}});
      summary["comparison"] = rows;
      log(o, "comparison written");
    }
    if (needs("beta")) {
      const BetaCurve curve = beta_sweep(mesh, moduli, c.mode, betas, c.targets, reference.full_gbar(), c.workers);
      auto f = open_out(dir / "fig10-like.csv");
      write_beta_csv(f, curve, hash);
      nlohmann::ordered_json b;
      for (std::size_t t = 0; t < curve.targets.size(); ++t)
        b[curve.targets[t]] = {{"beta_opt", curve.betaOpt[t]}, {"fem_o1_d_rel", curve.femO1Deviation[t]}};
      summary["beta"] = b;
      log(o, "beta sweep written");
    }
  }
  if (needs("fraction")) {
    FractionSettings fs_;
    fs_.fractions = make_grid(c.fractionMin, c.fractionMax, c.fractionStep);
    fs_.betas = betas;
    fs_.nominalBeta = c.beta;
    fs_.matrix = c.matrix;
    fs_.inclusion = c.inclusion;
    fs_.assignSeed = c.assignmentSeed;
    fs_.orientationSeed = c.orientationSeed;
    const auto t0 = std::chrono::steady_clock::now();
    const FractionStudy s = run_fraction_sweep(mesh, lib, c.mode, fs_, c.targets, ref);
    auto f = open_out(dir / "fig13-like.csv");
    write_fraction_csv(f, s, hash);
    summary["fraction"] = {{"points", s.rows.size()},
                           {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
    log(o, "fraction sweep written");
  }
  auto f = open_out(dir / "study.json");
  f << summary.dump(2) << '\n';
  std::cout << "study outputs in " << dir.string() << " (config " << hash << ")\n";
  return 0;
}

int cmd_materials(const Options& o) {
  const RunConfig c = effective_config(o);
  const MaterialLibrary lib = load_material_library(c.library);
  std::printf("%-22s %-10s %-14s %10s  %s\n", "name", "lattice", "mode", "A^U", "notes");
  for (const auto& rec : lib.records) {
    std::vector<std::string> warnings;
    const GeneralizedModulus g = build_modulus(rec, &warnings);
    std::string notes = warnings.empty() ? "" : warnings.front();
    std::printf("%-22s %-10s %-14s %10.4f  %s\n", rec.name.c_str(), to_string(rec.lattice).c_str(),
                to_string(rec.mode).c_str(), anisotropy_index(g.C()), notes.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Effective electro-magneto-mechanical moduli of polycrystalline RVEs"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Configuration file (sectioned key = value)")->check(CLI::ExistingFile);
    sub->add_option("--workers", o.workers, "Worker threads (overrides run.workers)");
    sub->add_option("--out", o.out, "Output directory (overrides output.dir)");
    sub->add_option("--seed", o.seed, "Base RNG seed: mesh s, orientations s+1, assignment s+2");
    sub->add_flag("--verbose", o.verbose, "Progress messages on stderr");
  };
  auto* mesh = app.add_subcommand("mesh", "Generate or import a mesh and audit it");
  auto* hom = app.add_subcommand("homogenize", "Effective modulus for one method");
  auto* study = app.add_subcommand("study", "Comparison, beta and volume-fraction studies");
  auto* mats = app.add_subcommand("materials", "List the material library with anisotropy indices");
  for (auto* s : {mesh, hom, study, mats}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  try {
    if (*mesh) return cmd_mesh(o);
    if (*hom) return cmd_homogenize(o);
    if (*study) return cmd_study(o);
    if (*mats) return cmd_materials(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
