#include "vemhom/homogenization.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include <json.hpp>

#include "vemhom/error.hpp"
#include "vemhom/parallel.hpp"

namespace vemhom {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Eigen::VectorXd expand(FieldMode mode, const Eigen::VectorXd& reduced) {
  const auto idx = active_components(mode);
  if (reduced.size() != static_cast<Eigen::Index>(idx.size()))
    throw ConfigError("generalized gradient has " + std::to_string(reduced.size()) + " components, mode " +
                      to_string(mode) + " needs " + std::to_string(idx.size()));
  Eigen::VectorXd full = Eigen::VectorXd::Zero(12);
  for (std::size_t k = 0; k < idx.size(); ++k) full[idx[k]] = reduced[static_cast<Eigen::Index>(k)];
  return full;
}

// Grains whose element matrices carry spurious zero-energy modes.
std::set<Index> deficient_grains(const Discretization& disc, unsigned workers) {
  const int physical = disc.mode() == FieldMode::FullyCoupled ? 8 : 7;
  std::vector<Index> flag(disc.num_elements(), -1);
  parallel_for(disc.num_elements(), workers, [&](std::size_t e) {
    const ElementSystem s = disc.element(e);
    if (kernel_dimension(s.K) > physical) flag[e] = s.owner;
  });
  std::set<Index> out;
  for (Index o : flag)
    if (o >= 0) out.insert(o);
  return out;
}

}  // namespace

int load_case_label(FieldMode mode, int k) {
  const auto idx = active_components(mode);
  if (k < 0 || static_cast<std::size_t>(k) >= idx.size())
    throw ConfigError("load case " + std::to_string(k + 1) + " is not defined in " + to_string(mode) + " mode");
  return idx[static_cast<std::size_t>(k)] + 1;
}

Eigen::VectorXd boundary_values(const Discretization& disc, const DofMap& dofs, const Eigen::VectorXd& Pbar) {
  const Eigen::VectorXd P = expand(disc.mode(), Pbar);
  const Eigen::Matrix3d eps = tensor_from_voigt_strain(P.head<6>());
  const Eigen::Vector3d E = P.segment<3>(6), H = P.segment<3>(9);
  const int nf = dofs.fields();
  Eigen::VectorXd out(static_cast<Eigen::Index>(dofs.boundary().size()));
  for (std::size_t n = 0; n < disc.num_nodes(); ++n) {
    const Index node = static_cast<Index>(n);
    if (!disc.is_boundary(node)) continue;
    const Point3& x = disc.node(node);
    const Eigen::Vector3d u = eps * x;
    for (int f = 0; f < nf; ++f) {
      double v;
      if (f < 3) v = u[f];
      else if (f == 3 && disc.mode() != FieldMode::MagnetoMech) v = -E.dot(x);
      else v = -H.dot(x);
      out[-dofs.slot(dofs.dof(node, f)) - 1] = v;
    }
  }
  return out;
}

Eigen::MatrixXd HomogenizationResult::full_gbar() const {
  const auto idx = active_components(mode);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(12, 12);
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j)
      G(idx[i], idx[j]) = Gbar(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return G;
}

HomogenizationResult homogenize(const Discretization& disc, const HomogenizationOptions& opt) {
  const FieldMode mode = disc.mode();
  const int nP = gradient_size(mode);
  std::vector<int> cases = opt.cases;
  if (cases.empty())
    for (int k = 0; k < nP; ++k) cases.push_back(k);
  for (int k : cases) load_case_label(mode, k);

  HomogenizationResult res;
  res.method = disc.method();
  res.mode = mode;
  res.nodes = disc.num_nodes();
  res.elements = disc.num_elements();
  res.volume = disc.domain_volume();
  const double V = res.volume;

  auto t0 = std::chrono::steady_clock::now();
  const DofMap dofs(disc);
  const SparseSystem sys = assemble(disc, dofs, opt.workers);
  res.assemblySeconds = seconds_since(t0);
  res.dofs = dofs.num_dofs();
  res.interiorDofs = dofs.interior().size();
  res.maxElementAsymmetry = sys.stats.maxElementAsymmetry;
  res.globalAsymmetry = symmetry_defect(sys.K);

  t0 = std::chrono::steady_clock::now();
  DirichletSolver solver(sys.K, dofs, disc.fieldScales);
  try {
    solver.factorize();
  } catch (const NumericalError& err) {
    const auto bad = deficient_grains(disc, opt.workers);
    std::string msg = err.what();
    if (bad.empty()) {
      msg += "; no element carries a spurious kernel";
    } else {
      msg += "; rank-deficient grains:";
      for (Index g : bad) msg += " " + std::to_string(g);
    }
    throw NumericalError(msg);
  }
  res.factorSeconds = seconds_since(t0);
  res.factorizations = solver.factorizations();
  res.factor = solver.report();

  // Unit boundary data for every reduced component, used for reactions.
  Eigen::MatrixXd UB(static_cast<Eigen::Index>(dofs.boundary().size()), nP);
  for (int k = 0; k < nP; ++k) UB.col(k) = boundary_values(disc, dofs, Eigen::VectorXd::Unit(nP, k));

  std::vector<Index> surfNodes;
  Eigen::Matrix3Xd surfW;
  disc.surface_weights(surfNodes, surfW);

  res.Gbar = Eigen::MatrixXd::Zero(nP, nP);
  res.cases.resize(cases.size());
  if (opt.keepSolutions) res.solutions.resize(cases.size());
  // Cases share the read-only factorization and write to their own slots.
  parallel_for(cases.size(), opt.workers, [&](std::size_t c) {
    const int k = cases[c];
    LoadCaseResult& lc = res.cases[c];
    lc.index = k;
    lc.label = load_case_label(mode, k);
    const auto ts = std::chrono::steady_clock::now();
    const Eigen::VectorXd p = solver.solve(UB.col(k), opt.residualTol, &lc.solveResidual);
    lc.solveSeconds = seconds_since(ts);

    lc.avgP = (sys.AP * p) / V;
    lc.avgL = (sys.AL * p) / V;
    const Eigen::VectorXd r = sys.K * p;
    Eigen::VectorXd rB(static_cast<Eigen::Index>(dofs.boundary().size()));
    for (std::size_t b = 0; b < dofs.boundary().size(); ++b) rB[static_cast<Eigen::Index>(b)] = r[dofs.boundary()[b]];
    lc.avgLReaction = UB.transpose() * rB / V;

    // Surface trace: ∫u⊗n, -∫φ n, -∫φ_mag n.
    Eigen::Matrix3d gu = Eigen::Matrix3d::Zero();
    Eigen::Vector3d ge = Eigen::Vector3d::Zero(), gm = Eigen::Vector3d::Zero();
    for (std::size_t a = 0; a < surfNodes.size(); ++a) {
      const Index node = surfNodes[a];
      const Eigen::Vector3d w = surfW.col(static_cast<Eigen::Index>(a));
      Eigen::Vector3d u;
      for (int f = 0; f < 3; ++f) u[f] = p[dofs.dof(node, f)];
      gu += u * w.transpose();
      if (mode == FieldMode::ElectroMech || mode == FieldMode::FullyCoupled) ge -= p[dofs.dof(node, 3)] * w;
      if (mode == FieldMode::MagnetoMech) gm -= p[dofs.dof(node, 3)] * w;
      if (mode == FieldMode::FullyCoupled) gm -= p[dofs.dof(node, 4)] * w;
    }
    Eigen::VectorXd full(12);
    full << voigt_strain(0.5 * (gu + gu.transpose()) / V), ge / V, gm / V;
    const auto idx = active_components(mode);
    lc.avgPSurface.resize(nP);
    for (int i = 0; i < nP; ++i) lc.avgPSurface[i] = full[idx[static_cast<std::size_t>(i)]];

    const double micro = p.dot(r) / V;
    const double macro = lc.avgP.dot(lc.avgL);
    lc.hillResidual = std::abs(micro - macro) / (std::abs(macro) + 1e-300);
    lc.averageDefect = (lc.avgP - Eigen::VectorXd::Unit(nP, k)).cwiseAbs().maxCoeff();
    if (opt.keepSolutions) res.solutions[c] = p;
  });

  double lscale = 0.0;
  for (const auto& lc : res.cases) {
    res.Gbar.col(lc.index) = lc.avgL;
    lscale = std::max(lscale, lc.avgL.cwiseAbs().maxCoeff());
  }
  for (const auto& lc : res.cases) {
    res.maxHillResidual = std::max(res.maxHillResidual, lc.hillResidual);
    res.maxAverageDefect = std::max(res.maxAverageDefect, lc.averageDefect);
    const double dl = (lc.avgL - lc.avgLReaction).cwiseAbs().maxCoeff() / (lscale > 0 ? lscale : 1.0);
    const double dp = (lc.avgP - lc.avgPSurface).cwiseAbs().maxCoeff();
    res.maxSurfaceMismatch = std::max({res.maxSurfaceMismatch, dl, dp});
  }
  res.Gbar = from_working_units(res.Gbar, mode);
  const double gmax = res.Gbar.cwiseAbs().maxCoeff();
  res.gbarAsymmetry = gmax > 0 ? (res.Gbar - res.Gbar.transpose()).cwiseAbs().maxCoeff() / gmax : 0.0;
  return res;
}

std::string component_name(int i) {
  static const char* kNames[12] = {"eps11", "eps22", "eps33", "eps23", "eps13", "eps12",
                                   "E1",    "E2",    "E3",    "H1",    "H2",    "H3"};
  if (i < 0 || i >= 12) throw ConfigError("component index out of range");
  return kNames[i];
}

std::string block_name(int i, int j) {
  const int bi = i < 6 ? 0 : (i < 9 ? 1 : 2);
  const int bj = j < 6 ? 0 : (j < 9 ? 1 : 2);
  static const char* kBlocks[3][3] = {{"C", "e", "q"}, {"e", "eps", "alpha"}, {"q", "alpha", "mu"}};
  return kBlocks[bi][bj];
}

std::string block_unit(int i, int j) {
  const std::string b = block_name(i, j);
  if (b == "C") return "GPa";
  if (b == "e") return "C/m2";
  if (b == "q") return "N/Am";
  if (b == "eps") return "mC/kVm";
  if (b == "alpha") return "s/m";
  return "N/kA2";
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

}  // namespace

void write_result_json(std::ostream& out, const HomogenizationResult& r, const Provenance& provenance) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["format"] = "vemhom-result 1";
  j["provenance"] = provenance;
  j["method"] = r.method;
  j["mode"] = to_string(r.mode);
  const auto idx = active_components(r.mode);
  ordered_json comps = ordered_json::array();
  for (int i : idx) comps.push_back(component_name(i));
  j["components"] = comps;
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < r.Gbar.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index k = 0; k < r.Gbar.cols(); ++k) row.push_back(r.Gbar(i, k));
    rows.push_back(row);
  }
  j["Gbar"] = rows;
  j["block_units"] = {{"C", "GPa"}, {"e", "C/m2"}, {"q", "N/Am"}, {"eps", "mC/kVm"}, {"alpha", "s/m"}, {"mu", "N/kA2"}};
  j["block_signs"] = "[C, -e^T, -q^T; -e, -eps, -alpha^T; -q, -alpha, -mu]";
  ordered_json cs = ordered_json::array();
  for (const auto& lc : r.cases) {
    ordered_json c;
    c["case"] = lc.label;
    c["avgP"] = std::vector<double>(lc.avgP.data(), lc.avgP.data() + lc.avgP.size());
    c["avgL"] = std::vector<double>(lc.avgL.data(), lc.avgL.data() + lc.avgL.size());
    c["hill_residual"] = lc.hillResidual;
    c["average_defect"] = lc.averageDefect;
    c["solve_residual"] = lc.solveResidual;
    c["solve_seconds"] = lc.solveSeconds;
    cs.push_back(c);
  }
  j["cases"] = cs;
  j["diagnostics"] = {{"nodes", r.nodes},
                      {"elements", r.elements},
                      {"dofs", r.dofs},
                      {"interior_dofs", r.interiorDofs},
                      {"volume", r.volume},
                      {"factorizations", r.factorizations},
                      {"pivot_ratio", r.factor.pivotRatio},
                      {"global_asymmetry", r.globalAsymmetry},
                      {"max_element_asymmetry", r.maxElementAsymmetry},
                      {"gbar_asymmetry", r.gbarAsymmetry},
                      {"max_hill_residual", r.maxHillResidual},
                      {"max_average_defect", r.maxAverageDefect},
                      {"max_surface_mismatch", r.maxSurfaceMismatch},
                      {"assembly_seconds", r.assemblySeconds},
                      {"factor_seconds", r.factorSeconds}};
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing result JSON");
}

void write_result_csv(std::ostream& out, const HomogenizationResult& r, const Provenance& provenance) {
  for (const auto& [k, v] : provenance) out << "# " << k << ": " << v << '\n';
  out << "row,col,component_row,component_col,block,unit,value\n";
  const auto idx = active_components(r.mode);
  for (Eigen::Index i = 0; i < r.Gbar.rows(); ++i)
    for (Eigen::Index k = 0; k < r.Gbar.cols(); ++k) {
      const int a = idx[static_cast<std::size_t>(i)], b = idx[static_cast<std::size_t>(k)];
      out << a + 1 << ',' << b + 1 << ',' << component_name(a) << ',' << component_name(b) << ',' << block_name(a, b)
          << ',' << block_unit(a, b) << ',' << fmt(r.Gbar(i, k)) << '\n';
    }
  if (!out) throw IoError("failed writing result CSV");
}

}  // namespace vemhom
