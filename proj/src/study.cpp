#include "vemhom/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "vemhom/error.hpp"
#include "vemhom/hash.hpp"

namespace vemhom {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10e", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// D_rel, or NaN when the reference block vanishes (e.g. ē with no
// piezoelectric grain left).
double deviation_or_nan(const Eigen::MatrixXd& M, const Eigen::MatrixXd& ref) {
  return frobenius(ref) > 0 ? relative_deviation(M, ref) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::VemVo: return "VEM-VO";
    case Method::FemO1: return "FEM-O1";
    case Method::FemO2: return "FEM-O2";
    case Method::FemO1Refined: return "FEM-O1-refined";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::VemVo, Method::FemO1, Method::FemO2, Method::FemO1Refined})
    if (to_string(m) == name) return m;
  throw ConfigError("unknown method '" + name + "' (expected VEM-VO, FEM-O1, FEM-O2 or FEM-O1-refined)");
}

std::unique_ptr<Discretization> make_discretization(Method method, const PolyMesh& mesh, const GrainModuli& moduli,
                                                    FieldMode mode, double beta, int levels, unsigned workers) {
  switch (method) {
    case Method::VemVo: return std::make_unique<VemDiscretization>(mesh, moduli, mode, beta, workers);
    case Method::FemO1: return std::make_unique<Tet4Discretization>(triangulate(mesh), moduli, mode);
    case Method::FemO2:
      return std::make_unique<Tet10Discretization>(promote_to_quadratic(triangulate(mesh)), moduli, mode);
    case Method::FemO1Refined:
      return std::make_unique<Tet4Discretization>(refine(triangulate(mesh), levels), moduli, mode,
                                                  "FEM-O1-refined(" + std::to_string(levels) + ")");
  }
  throw ConfigError("unknown method");
}

double frobenius(const Eigen::MatrixXd& M) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    for (Eigen::Index i = 0; i < M.rows(); ++i) s += M(i, j) * M(i, j);
  return std::sqrt(s);
}

double relative_deviation(const Eigen::MatrixXd& M, const Eigen::MatrixXd& ref) {
  if (M.rows() != ref.rows() || M.cols() != ref.cols()) throw ConfigError("E_C/D_rel: matrix shapes differ");
  const double nr = frobenius(ref);
  if (!(nr > 0)) throw NumericalError("E_C/D_rel: reference has zero norm");
  return 100.0 * (frobenius(M) - nr) / nr;
}

double computational_error(const Eigen::MatrixXd& M, const Eigen::MatrixXd& ref) {
  if (M.rows() != ref.rows() || M.cols() != ref.cols()) throw ConfigError("E_C/D_rel: matrix shapes differ");
  const double nr = frobenius(ref);
  if (!(nr > 0)) throw NumericalError("E_C/D_rel: reference has zero norm");
  return std::abs(frobenius(M) / nr - 1.0) * 100.0;
}

Eigen::MatrixXd target_block(const Eigen::MatrixXd& full, const std::string& t) {
  if (full.rows() != 12 || full.cols() != 12) throw ConfigError("target_block expects the 12x12 layout");
  if (t == "G") return full;
  if (t == "C") return full.block(0, 0, 6, 6);
  if (t == "e") return full.block(6, 0, 3, 6);
  if (t == "q") return full.block(9, 0, 3, 6);
  if (t == "eps") return full.block(6, 6, 3, 3);
  if (t == "alpha") return full.block(9, 6, 3, 3);
  if (t == "mu") return full.block(9, 9, 3, 3);
  throw ConfigError("unknown target modulus '" + t + "' (expected G, C, e, eps, q, mu or alpha)");
}

bool target_available(const std::string& t, FieldMode mode) {
  target_block(Eigen::MatrixXd::Zero(12, 12), t);
  if (t == "e" || t == "eps") return mode != FieldMode::MagnetoMech;
  if (t == "q" || t == "mu") return mode != FieldMode::ElectroMech;
  if (t == "alpha") return mode == FieldMode::FullyCoupled;
  return true;
}

FractionAssignment assign_volume_fraction(const PolyMesh& mesh, double fraction, std::uint64_t rngSeed,
                                          const std::string& matrix, const std::string& inclusion,
                                          std::uint64_t orientationSeed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("volume fraction must lie in [0, 1]");
  const std::size_t n = mesh.num_cells();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Fisher-Yates with an explicit index draw keeps the permutation
  // independent of the standard library's shuffle implementation.
  std::mt19937_64 rng(rngSeed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

  FractionAssignment out;
  out.requested = fraction;
  out.grains.materials.assign(n, matrix);
  out.grains.angles = random_orientations(n, orientationSeed);
  const double L3 = std::pow(mesh.edgeLength, 3);
  const double target = fraction * L3;
  double vol = 0.0;
  for (std::size_t k = 0; k < n && vol < target * (1.0 - 1e-12); ++k) {
    out.grains.materials[order[k]] = inclusion;
    vol += mesh.cells[order[k]].volume;
    ++out.inclusionGrains;
  }
  out.achieved = vol / L3;
  return out;
}

std::string reference_key(const PolyMesh& mesh, const GrainModuli& moduli, FieldMode mode, int levels) {
  Fnv1a h;
  h.update(mesh_hash(mesh));
  h.update(to_string(mode));
  h.update(std::to_string(levels));
  for (const auto& g : moduli)
    h.update(std::string_view(reinterpret_cast<const char*>(g.G.data()), sizeof(double) * 144));
  return h.hex();
}

HomogenizationResult build_reference(const PolyMesh& mesh, const GrainModuli& moduli, FieldMode mode,
                                     const ReferenceOptions& opt) {
  if (opt.levels < 1) throw ConfigError("reference needs at least one refinement level");
  const TetMesh coarse = triangulate(mesh);
  const double estimate = static_cast<double>(coarse.tets.size()) * std::pow(8.0, opt.levels);
  if (estimate > static_cast<double>(opt.maxTets))
    throw ConfigError("reference at " + std::to_string(opt.levels) + " levels needs " +
                      std::to_string(static_cast<long long>(estimate)) + " tets, above the limit of " +
                      std::to_string(opt.maxTets) + "; lower reference_levels or raise max_reference_tets");

  const std::string key = reference_key(mesh, moduli, mode, opt.levels);
  std::filesystem::path cachePath;
  if (!opt.cacheDir.empty()) {
    cachePath = std::filesystem::path(opt.cacheDir) / ("ref-" + key + ".json");
    std::ifstream in(cachePath);
    if (in) {
      const auto j = nlohmann::json::parse(in, nullptr, false);
      if (!j.is_discarded() && j.value("key", "") == key) {
        HomogenizationResult r;
        r.method = j.at("method").get<std::string>();
        r.mode = mode;
        r.nodes = j.at("nodes").get<std::size_t>();
        r.elements = j.at("elements").get<std::size_t>();
        const auto rows = j.at("Gbar");
        const int nP = gradient_size(mode);
        r.Gbar.resize(nP, nP);
        for (int i = 0; i < nP; ++i)
          for (int k = 0; k < nP; ++k) r.Gbar(i, k) = rows.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k));
        return r;
      }
    }
  }

  Tet4Discretization disc(refine(coarse, opt.levels), moduli, mode,
                          "FEM-O1-refined(" + std::to_string(opt.levels) + ")");
  HomogenizationOptions ho;
  ho.workers = opt.workers;
  HomogenizationResult r = homogenize(disc, ho);

  if (!cachePath.empty()) {
    std::filesystem::create_directories(cachePath.parent_path());
    nlohmann::json j;
    j["key"] = key;
    j["method"] = r.method;
    j["nodes"] = r.nodes;
    j["elements"] = r.elements;
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < r.Gbar.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < r.Gbar.cols(); ++k) row.push_back(r.Gbar(i, k));
      rows.push_back(row);
    }
    j["Gbar"] = rows;
    std::ofstream out(cachePath);
    out << j.dump() << '\n';
    if (!out) throw IoError("cannot write reference cache " + cachePath.string());
  }
  return r;
}

std::vector<double> make_grid(double lo, double hi, double h) {
  if (!(h > 0) || hi < lo) throw ConfigError("grid needs step > 0 and max >= min");
  std::vector<double> g;
  const long n = std::lround(std::floor((hi - lo) / h + 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(std::min(hi, lo + static_cast<double>(i) * h));
  return g;
}

std::size_t argmin_first(const std::vector<double>& v) {
  if (v.empty()) throw ConfigError("argmin of an empty list");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[best] || (std::isnan(v[best]) && !std::isnan(v[i]))) best = i;
  return best;
}

ComparisonStudy run_comparison(const PolyMesh& mesh, const GrainModuli& moduli, FieldMode mode,
                               const std::vector<Method>& methods, double beta, const std::vector<std::string>& targets,
                               const HomogenizationResult& reference, int levels, unsigned workers) {
  ComparisonStudy s;
  s.targets = targets;
  s.reference = reference;
  const Eigen::MatrixXd Gref = s.reference.full_gbar();
  for (Method m : methods) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto disc = make_discretization(m, mesh, moduli, mode, beta, levels, workers);
    HomogenizationOptions ho;
    ho.workers = workers;
    const HomogenizationResult r = homogenize(*disc, ho);
    ComparisonRow row;
    row.method = disc->method();
    row.nodes = r.nodes;
    row.elements = r.elements;
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const Eigen::MatrixXd G = r.full_gbar();
    for (const auto& t : targets) {
      const double d = deviation_or_nan(target_block(G, t), target_block(Gref, t));
      row.errorC.push_back(std::abs(d));
      row.deviation.push_back(d);
    }
    s.rows.push_back(std::move(row));
  }
  return s;
}

BetaCurve beta_sweep(const PolyMesh& mesh, const GrainModuli& moduli, FieldMode mode, const std::vector<double>& betas,
                     const std::vector<std::string>& targets, const Eigen::MatrixXd& reference, unsigned workers) {
  BetaCurve c;
  c.targets = targets;
  c.betas = betas;
  c.deviation.assign(targets.size(), std::vector<double>(betas.size(), 0.0));
  HomogenizationOptions ho;
  ho.workers = workers;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    VemDiscretization disc(mesh, moduli, mode, betas[i], workers);
    const HomogenizationResult r = homogenize(disc, ho);
    c.nodes = r.nodes;
    const Eigen::MatrixXd G = r.full_gbar();
    for (std::size_t t = 0; t < targets.size(); ++t)
      c.deviation[t][i] = deviation_or_nan(target_block(G, targets[t]), target_block(reference, targets[t]));
  }
  Tet4Discretization fem(triangulate(mesh), moduli, mode);
  const Eigen::MatrixXd Gf = homogenize(fem, ho).full_gbar();
  for (std::size_t t = 0; t < targets.size(); ++t) {
    c.femO1Deviation.push_back(deviation_or_nan(target_block(Gf, targets[t]), target_block(reference, targets[t])));
    std::vector<double> ec(betas.size());
    for (std::size_t i = 0; i < betas.size(); ++i) ec[i] = std::abs(c.deviation[t][i]);
    const std::size_t k = argmin_first(ec);
    c.betaOpt.push_back(std::isnan(ec[k]) ? ec[k] : betas[k]);
  }
  return c;
}

FractionStudy run_fraction_sweep(const PolyMesh& mesh, const MaterialLibrary& lib, FieldMode mode,
                                 const FractionSettings& st, const std::vector<std::string>& targets,
                                 const ReferenceOptions& ref) {
  FractionStudy s;
  s.targets = targets;
  s.nominalBeta = st.nominalBeta;
  for (double P : st.fractions) {
    const FractionAssignment fa =
        assign_volume_fraction(mesh, P, st.assignSeed, st.matrix, st.inclusion, st.orientationSeed);
    const GrainModuli moduli = grain_moduli(fa.grains, lib, mode);
    const Eigen::MatrixXd Gref = build_reference(mesh, moduli, mode, ref).full_gbar();
    std::vector<double> betas = st.betas;
    auto near = [&](double b) { return std::abs(b - st.nominalBeta) < 1e-12; };
    if (std::none_of(betas.begin(), betas.end(), near)) betas.push_back(st.nominalBeta);
    const BetaCurve c = beta_sweep(mesh, moduli, mode, betas, targets, Gref, ref.workers);
    FractionRow row;
    row.requested = P;
    row.achieved = fa.achieved;
    row.inclusionGrains = fa.inclusionGrains;
    const std::size_t nominal = static_cast<std::size_t>(std::find_if(betas.begin(), betas.end(), near) - betas.begin());
    for (std::size_t t = 0; t < targets.size(); ++t) {
      // β_opt over the configured grid only.
      std::vector<double> ec(st.betas.size());
      for (std::size_t i = 0; i < st.betas.size(); ++i) ec[i] = std::abs(c.deviation[t][i]);
      const std::size_t k = argmin_first(ec);
      row.betaOpt.push_back(std::isnan(ec[k]) ? ec[k] : st.betas[k]);
      row.errorAtOpt.push_back(ec[k]);
      row.errorAtBeta.push_back(std::abs(c.deviation[t][nominal]));
    }
    s.rows.push_back(std::move(row));
  }
  return s;
}

void write_comparison_csv(std::ostream& out, const ComparisonStudy& s, const std::string& configHash) {
  out << "# config_hash: " << configHash << '\n';
  out << "# reference: " << s.reference.method << ", " << s.reference.nodes << " nodes, " << s.reference.elements
      << " elements\n";
  out << "method,nodes,elements,target,e_c,d_rel\n";
  for (const auto& r : s.rows)
    for (std::size_t t = 0; t < s.targets.size(); ++t)
      out << r.method << ',' << r.nodes << ',' << r.elements << ',' << s.targets[t] << ',' << num(r.errorC[t]) << ','
          << num(r.deviation[t]) << '\n';
  if (!out) throw IoError("failed writing comparison CSV");
}

void write_beta_csv(std::ostream& out, const BetaCurve& c, const std::string& configHash) {
  out << "# config_hash: " << configHash << '\n';
  for (std::size_t t = 0; t < c.targets.size(); ++t)
    out << "# " << c.targets[t] << ": beta_opt=" << short_num(c.betaOpt[t])
        << " fem_o1_d_rel=" << num(c.femO1Deviation[t]) << '\n';
  out << "method,nodes,target,beta,d_rel,e_c\n";
  for (std::size_t t = 0; t < c.targets.size(); ++t)
    for (std::size_t i = 0; i < c.betas.size(); ++i)
      out << "VEM-VO," << c.nodes << ',' << c.targets[t] << ',' << short_num(c.betas[i]) << ','
          << num(c.deviation[t][i]) << ',' << num(std::abs(c.deviation[t][i])) << '\n';
  if (!out) throw IoError("failed writing beta CSV");
}

void write_fraction_csv(std::ostream& out, const FractionStudy& s, const std::string& configHash) {
  out << "# config_hash: " << configHash << '\n';
  out << "fraction,achieved,inclusion_grains,target,beta_opt,e_c_at_opt,e_c_at_beta_" << short_num(s.nominalBeta)
      << '\n';
  for (const auto& r : s.rows)
    for (std::size_t t = 0; t < s.targets.size(); ++t)
      out << short_num(r.requested) << ',' << num(r.achieved) << ',' << r.inclusionGrains << ',' << s.targets[t] << ','
          << short_num(r.betaOpt[t]) << ',' << num(r.errorAtOpt[t]) << ',' << num(r.errorAtBeta[t]) << '\n';
  if (!out) throw IoError("failed writing fraction CSV");
}

}  // namespace vemhom
