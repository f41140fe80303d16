#include "vemhom/config.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

#include "vemhom/error.hpp"
#include "vemhom/hash.hpp"
#include "vemhom/tess.hpp"

namespace vemhom {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string where(const IniFile& ini, const std::string& key) {
  auto it = ini.lines.find(key);
  return it == ini.lines.end() ? key : key + " (line " + std::to_string(it->second) + ")";
}

double to_double(const IniFile& ini, const std::string& key, const std::string& v) {
  double x = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(where(ini, key) + ": expected a number, got '" + v + "'");
  return x;
}

long long to_int(const IniFile& ini, const std::string& key, const std::string& v) {
  long long x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(where(ini, key) + ": expected an integer, got '" + v + "'");
  return x;
}

long long to_nonneg(const IniFile& ini, const std::string& key, const std::string& v) {
  const long long x = to_int(ini, key, v);
  if (x < 0) throw ConfigError(where(ini, key) + ": must be non-negative");
  return x;
}

bool to_bool(const IniFile& ini, const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError(where(ini, key) + ": expected true or false, got '" + v + "'");
}

std::string resolve(const std::string& baseDir, const std::string& p) {
  if (p.empty()) return p;
  const std::filesystem::path path(p);
  return path.is_absolute() ? p : (std::filesystem::path(baseDir) / path).lexically_normal().string();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

IniFile parse_ini(std::istream& in) {
  IniFile ini;
  std::string line, section;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(lineNo) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError("config line " + std::to_string(lineNo) + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineNo) + ": expected key = value");
    if (section.empty()) throw ConfigError("config line " + std::to_string(lineNo) + ": key outside of any section");
    const std::string key = section + "." + trim(line.substr(0, eq));
    if (ini.values.count(key)) throw ConfigError("config line " + std::to_string(lineNo) + ": duplicate key " + key);
    ini.values[key] = trim(line.substr(eq + 1));
    ini.lines[key] = lineNo;
  }
  return ini;
}

RunConfig parse_config(std::istream& in, const std::string& baseDir) {
  const IniFile ini = parse_ini(in);
  RunConfig c;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> schema = {
      {"mesh.source",
       [&](const std::string& k, const std::string& v) {
         if (v != "voronoi" && v != "file") throw ConfigError(where(ini, k) + ": expected voronoi or file");
         c.mesh.source = v;
       }},
      {"mesh.path", [&](const std::string&, const std::string& v) { c.mesh.path = resolve(baseDir, v); }},
      {"mesh.cells",
       [&](const std::string& k, const std::string& v) {
         c.mesh.cells = static_cast<std::size_t>(to_nonneg(ini, k, v));
         if (c.mesh.cells == 0) throw ConfigError(where(ini, k) + ": need at least one cell");
       }},
      {"mesh.seed", [&](const std::string& k, const std::string& v) { c.mesh.seed = static_cast<std::uint64_t>(to_nonneg(ini, k, v)); }},
      {"mesh.edge_length",
       [&](const std::string& k, const std::string& v) {
         c.mesh.edgeLength = to_double(ini, k, v);
         if (!(c.mesh.edgeLength > 0)) throw ConfigError(where(ini, k) + ": must be positive");
       }},
      {"mesh.lloyd_iterations",
       [&](const std::string& k, const std::string& v) { c.mesh.lloydIterations = static_cast<int>(to_nonneg(ini, k, v)); }},
      {"materials.library", [&](const std::string&, const std::string& v) { c.library = resolve(baseDir, v); }},
      {"materials.material", [&](const std::string&, const std::string& v) { c.material = v; }},
      {"materials.matrix", [&](const std::string&, const std::string& v) { c.matrix = v; }},
      {"materials.inclusion", [&](const std::string&, const std::string& v) { c.inclusion = v; }},
      {"materials.fraction",
       [&](const std::string& k, const std::string& v) {
         c.fraction = to_double(ini, k, v);
         if (!(c.fraction >= 0 && c.fraction <= 1)) throw ConfigError(where(ini, k) + ": must lie in [0, 1]");
       }},
      {"materials.orientation_seed",
       [&](const std::string& k, const std::string& v) { c.orientationSeed = static_cast<std::uint64_t>(to_nonneg(ini, k, v)); }},
      {"materials.assignment_seed",
       [&](const std::string& k, const std::string& v) { c.assignmentSeed = static_cast<std::uint64_t>(to_nonneg(ini, k, v)); }},
      {"materials.mode", [&](const std::string&, const std::string& v) { c.mode = parse_mode(v); }},
      {"homogenize.method", [&](const std::string&, const std::string& v) { c.method = parse_method(v); }},
      {"homogenize.beta",
       [&](const std::string& k, const std::string& v) {
         c.beta = to_double(ini, k, v);
         if (!(c.beta >= 0 && c.beta <= 1)) throw ConfigError(where(ini, k) + ": must lie in [0, 1]");
       }},
      {"homogenize.levels", [&](const std::string& k, const std::string& v) { c.levels = static_cast<int>(to_nonneg(ini, k, v)); }},
      {"homogenize.cases",
       [&](const std::string& k, const std::string& v) {
         c.cases.clear();
         if (v == "all") return;
         for (const auto& s : split_list(v)) c.cases.push_back(static_cast<int>(to_int(ini, k, s)));
       }},
      {"study.studies",
       [&](const std::string& k, const std::string& v) {
         c.studies = split_list(v);
         for (const auto& s : c.studies)
           if (s != "comparison" && s != "beta" && s != "fraction")
             throw ConfigError(where(ini, k) + ": unknown study '" + s + "' (comparison, beta, fraction)");
       }},
      {"study.methods",
       [&](const std::string&, const std::string& v) {
         c.methods.clear();
         for (const auto& s : split_list(v)) c.methods.push_back(parse_method(s));
       }},
      {"study.beta_min", [&](const std::string& k, const std::string& v) { c.betaMin = to_double(ini, k, v); }},
      {"study.beta_max", [&](const std::string& k, const std::string& v) { c.betaMax = to_double(ini, k, v); }},
      {"study.beta_step", [&](const std::string& k, const std::string& v) { c.betaStep = to_double(ini, k, v); }},
      {"study.fraction_min", [&](const std::string& k, const std::string& v) { c.fractionMin = to_double(ini, k, v); }},
      {"study.fraction_max", [&](const std::string& k, const std::string& v) { c.fractionMax = to_double(ini, k, v); }},
      {"study.fraction_step", [&](const std::string& k, const std::string& v) { c.fractionStep = to_double(ini, k, v); }},
      {"study.targets", [&](const std::string&, const std::string& v) { c.targets = split_list(v); }},
      {"study.reference_levels",
       [&](const std::string& k, const std::string& v) { c.referenceLevels = static_cast<int>(to_nonneg(ini, k, v)); }},
      {"study.max_reference_tets",
       [&](const std::string& k, const std::string& v) { c.maxReferenceTets = static_cast<std::size_t>(to_nonneg(ini, k, v)); }},
      {"study.cache_dir", [&](const std::string&, const std::string& v) { c.cacheDir = resolve(baseDir, v); }},
      {"output.dir", [&](const std::string&, const std::string& v) { c.outDir = resolve(baseDir, v); }},
      {"output.matrix_dump", [&](const std::string& k, const std::string& v) { c.matrixDump = to_bool(ini, k, v); }},
      {"run.workers",
       [&](const std::string& k, const std::string& v) {
         c.workers = static_cast<unsigned>(to_nonneg(ini, k, v));
         if (c.workers == 0) throw ConfigError(where(ini, k) + ": need at least one worker");
       }},
  };
  for (const auto& [key, value] : ini.values) {
    auto it = schema.find(key);
    if (it == schema.end()) throw ConfigError("unknown config key " + where(ini, key));
    it->second(key, value);
  }

  // Cross-field checks.
  if (c.mesh.source == "file" && c.mesh.path.empty()) throw ConfigError("mesh.source = file needs mesh.path");
  if (!(c.betaStep > 0) || c.betaMin < 0 || c.betaMax > 1 || c.betaMin > c.betaMax)
    throw ConfigError("study beta grid must satisfy 0 <= beta_min <= beta_max <= 1 and beta_step > 0");
  if (!(c.fractionStep > 0) || c.fractionMin < 0 || c.fractionMax > 1 || c.fractionMin > c.fractionMax)
    throw ConfigError("study fraction grid must satisfy 0 <= fraction_min <= fraction_max <= 1 and fraction_step > 0");
  for (const auto& t : c.targets)
    if (!target_available(t, c.mode)) throw ConfigError("target '" + t + "' is not defined in " + to_string(c.mode) + " mode");
  const auto nP = static_cast<int>(active_components(c.mode).size());
  for (int label : c.cases) {
    bool ok = false;
    for (int i = 0; i < nP; ++i) ok = ok || load_case_label(c.mode, i) == label;
    if (!ok) throw ConfigError("load case " + std::to_string(label) + " is not defined in " + to_string(c.mode) + " mode");
  }
  if (c.method == Method::FemO1Refined && c.levels < 1) throw ConfigError("FEM-O1-refined needs homogenize.levels >= 1");
  if (c.referenceLevels < 1) throw ConfigError("study.reference_levels must be at least 1");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(in, dir.empty() ? "." : dir.string());
}

std::string canonical_config(const RunConfig& c) {
  auto join = [](const auto& items, auto&& str) {
    std::string s;
    for (const auto& x : items) s += (s.empty() ? "" : ", ") + str(x);
    return s;
  };
  std::ostringstream o;
  o << "mesh.source = " << c.mesh.source << '\n'
    << "mesh.path = " << c.mesh.path << '\n'
    << "mesh.cells = " << c.mesh.cells << '\n'
    << "mesh.seed = " << c.mesh.seed << '\n'
    << "mesh.edge_length = " << fmt(c.mesh.edgeLength) << '\n'
    << "mesh.lloyd_iterations = " << c.mesh.lloydIterations << '\n'
    << "materials.library = " << c.library << '\n'
    << "materials.material = " << c.material << '\n'
    << "materials.matrix = " << c.matrix << '\n'
    << "materials.inclusion = " << c.inclusion << '\n'
    << "materials.fraction = " << (c.fraction < 0 ? std::string() : fmt(c.fraction)) << '\n'
    << "materials.orientation_seed = " << c.orientationSeed << '\n'
    << "materials.assignment_seed = " << c.assignmentSeed << '\n'
    << "materials.mode = " << to_string(c.mode) << '\n'
    << "homogenize.method = " << to_string(c.method) << '\n'
    << "homogenize.beta = " << fmt(c.beta) << '\n'
    << "homogenize.levels = " << c.levels << '\n'
    << "homogenize.cases = " << (c.cases.empty() ? std::string("all") : join(c.cases, [](int x) { return std::to_string(x); }))
    << '\n'
    << "study.studies = " << join(c.studies, [](const std::string& s) { return s; }) << '\n'
    << "study.methods = " << join(c.methods, [](Method m) { return to_string(m); }) << '\n'
    << "study.beta_min = " << fmt(c.betaMin) << '\n'
    << "study.beta_max = " << fmt(c.betaMax) << '\n'
    << "study.beta_step = " << fmt(c.betaStep) << '\n'
    << "study.fraction_min = " << fmt(c.fractionMin) << '\n'
    << "study.fraction_max = " << fmt(c.fractionMax) << '\n'
    << "study.fraction_step = " << fmt(c.fractionStep) << '\n'
    << "study.targets = " << join(c.targets, [](const std::string& s) { return s; }) << '\n'
    << "study.reference_levels = " << c.referenceLevels << '\n'
    << "study.max_reference_tets = " << c.maxReferenceTets << '\n';
  // Output location, cache and worker count do not change results.
  return o.str();
}

std::string config_hash(const RunConfig& c) { return fnv1a_hex(canonical_config(c)); }

void apply_base_seed(RunConfig& c, std::uint64_t seed) {
  c.mesh.seed = seed;
  c.orientationSeed = seed + 1;
  c.assignmentSeed = seed + 2;
}

PolyMesh build_mesh(const MeshSpec& spec) {
  if (spec.source == "file") {
    std::ifstream in(spec.path);
    if (!in) throw IoError("cannot open mesh file " + spec.path);
    if (std::filesystem::path(spec.path).extension() == ".tess") return parse_tess(in);
    return read_mesh(in);
  }
  SeedSet seeds = random_seeds(spec.cells, spec.edgeLength, spec.seed);
  if (spec.lloydIterations > 0) seeds = lloyd_relax(seeds, spec.edgeLength, spec.lloydIterations);
  return generate_voronoi(seeds, spec.edgeLength);
}

}  // namespace vemhom
