#include "vemhom/materials.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "vemhom/error.hpp"

namespace vemhom {

std::string to_string(FieldMode mode) {
  switch (mode) {
    case FieldMode::ElectroMech: return "electroMech";
    case FieldMode::MagnetoMech: return "magnetoMech";
    case FieldMode::FullyCoupled: return "fullyCoupled";
  }
  return "?";
}

FieldMode parse_mode(const std::string& name) {
  if (name == "electroMech") return FieldMode::ElectroMech;
  if (name == "magnetoMech") return FieldMode::MagnetoMech;
  if (name == "fullyCoupled") return FieldMode::FullyCoupled;
  throw ConfigError("unknown field mode '" + name + "' (expected electroMech, magnetoMech or fullyCoupled)");
}

int dofs_per_node(FieldMode mode) { return mode == FieldMode::FullyCoupled ? 5 : 4; }
int gradient_size(FieldMode mode) { return mode == FieldMode::FullyCoupled ? 12 : 9; }

std::vector<int> active_components(FieldMode mode) {
  std::vector<int> idx = {0, 1, 2, 3, 4, 5};
  if (mode != FieldMode::MagnetoMech)
    for (int i = 6; i < 9; ++i) idx.push_back(i);
  if (mode != FieldMode::ElectroMech)
    for (int i = 9; i < 12; ++i) idx.push_back(i);
  return idx;
}

bool mode_covers(FieldMode record, FieldMode run) {
  return record == FieldMode::FullyCoupled || record == run;
}

std::string to_string(Lattice lattice) {
  switch (lattice) {
    case Lattice::Hex6mm: return "hex6mm";
    case Lattice::HexBar6m2: return "hexBar6m2";
    case Lattice::Trigonal3m: return "trigonal3m";
    case Lattice::Orth222: return "orth222";
    case Lattice::TransIso: return "transIso";
    case Lattice::Isotropic: return "isotropic";
  }
  return "?";
}

Lattice parse_lattice(const std::string& name) {
  for (Lattice l : {Lattice::Hex6mm, Lattice::HexBar6m2, Lattice::Trigonal3m, Lattice::Orth222, Lattice::TransIso,
                    Lattice::Isotropic})
    if (to_string(l) == name) return l;
  throw ConfigError("unknown lattice class '" + name + "'");
}

Vector6 voigt_stress(const Eigen::Matrix3d& s) {
  Vector6 v;
  v << s(0, 0), s(1, 1), s(2, 2), s(1, 2), s(0, 2), s(0, 1);
  return v;
}

Vector6 voigt_strain(const Eigen::Matrix3d& e) {
  Vector6 v;
  v << e(0, 0), e(1, 1), e(2, 2), 2 * e(1, 2), 2 * e(0, 2), 2 * e(0, 1);
  return v;
}

Eigen::Matrix3d tensor_from_voigt_stress(const Vector6& v) {
  Eigen::Matrix3d s;
  s << v[0], v[5], v[4], v[5], v[1], v[3], v[4], v[3], v[2];
  return s;
}

Eigen::Matrix3d tensor_from_voigt_strain(const Vector6& v) {
  Eigen::Matrix3d e;
  e << v[0], 0.5 * v[5], 0.5 * v[4], 0.5 * v[5], v[1], 0.5 * v[3], 0.5 * v[4], 0.5 * v[3], v[2];
  return e;
}

GeneralizedModulus GeneralizedModulus::from_blocks(const Matrix6& C, const Matrix36& e, const Matrix36& q,
                                                   const Eigen::Matrix3d& eps, const Eigen::Matrix3d& alpha,
                                                   const Eigen::Matrix3d& mu) {
  GeneralizedModulus m;
  m.G.block<6, 6>(0, 0) = C;
  m.G.block<6, 3>(0, 6) = -e.transpose();
  m.G.block<6, 3>(0, 9) = -q.transpose();
  m.G.block<3, 6>(6, 0) = -e;
  m.G.block<3, 3>(6, 6) = -eps;
  m.G.block<3, 3>(6, 9) = -alpha.transpose();
  m.G.block<3, 6>(9, 0) = -q;
  m.G.block<3, 3>(9, 6) = -alpha;
  m.G.block<3, 3>(9, 9) = -mu;
  return m;
}

Eigen::MatrixXd GeneralizedModulus::reduced(FieldMode mode) const {
  const auto idx = active_components(mode);
  Eigen::MatrixXd r(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) r(i, j) = G(idx[i], idx[j]);
  return r;
}

double GeneralizedModulus::asymmetry() const {
  const double scale = G.cwiseAbs().maxCoeff();
  return scale > 0 ? (G - G.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
}

double MaterialRecord::param(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) throw ConfigError("material '" + name + "': missing parameter " + key);
  return it->second;
}

double MaterialRecord::param_or(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

namespace {

bool uses_electric(FieldMode m) { return m != FieldMode::MagnetoMech; }
bool uses_magnetic(FieldMode m) { return m != FieldMode::ElectroMech; }

// Coupling coefficient names for the piezo pattern of each class; `p` is
// "e" or "q".
std::vector<std::string> coupling_names(Lattice l, const std::string& p) {
  switch (l) {
    case Lattice::Hex6mm:
    case Lattice::TransIso: return {p + "31", p + "33", p + "15"};
    case Lattice::HexBar6m2: return {p + "22"};
    case Lattice::Trigonal3m: return {p + "15", p + "22", p + "31", p + "33"};
    case Lattice::Orth222: return {p + "14", p + "25", p + "36"};
    case Lattice::Isotropic: return {};
  }
  return {};
}

std::vector<std::string> diagonal_names(Lattice l, const std::string& p) {
  if (l == Lattice::Orth222) return {p + "11", p + "22", p + "33"};
  if (l == Lattice::Isotropic) return {};
  return {p + "11", p + "33"};
}

// Optional parameters with their defaults (isotropic dummy phases only).
std::map<std::string, double> optional_parameters(Lattice l) {
  if (l == Lattice::Isotropic) return {{"eps11", 1.0}, {"mu11", 1.0}};
  return {};
}

Matrix36 coupling_block(const MaterialRecord& r, const std::string& p) {
  Matrix36 m = Matrix36::Zero();
  auto v = [&](const std::string& k) { return r.param(p + k); };
  switch (r.lattice) {
    case Lattice::Hex6mm:
    case Lattice::TransIso:
      m(0, 4) = m(1, 3) = v("15");
      m(2, 0) = m(2, 1) = v("31");
      m(2, 2) = v("33");
      break;
    case Lattice::HexBar6m2:
      m(0, 5) = -v("22");
      m(1, 0) = -v("22");
      m(1, 1) = v("22");
      break;
    case Lattice::Trigonal3m:
      m(0, 4) = m(1, 3) = v("15");
      m(0, 5) = -v("22");
      m(1, 0) = -v("22");
      m(1, 1) = v("22");
      m(2, 0) = m(2, 1) = v("31");
      m(2, 2) = v("33");
      break;
    case Lattice::Orth222:
      m(0, 3) = v("14");
      m(1, 4) = v("25");
      m(2, 5) = v("36");
      break;
    case Lattice::Isotropic: break;
  }
  return m;
}

Eigen::Matrix3d diagonal_block(const MaterialRecord& r, const std::string& p) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  if (r.lattice == Lattice::Isotropic) {
    m.diagonal().setConstant(r.param_or(p + "11", optional_parameters(r.lattice)[p + "11"]));
  } else if (r.lattice == Lattice::Orth222) {
    m.diagonal() << r.param(p + "11"), r.param(p + "22"), r.param(p + "33");
  } else {
    m.diagonal() << r.param(p + "11"), r.param(p + "11"), r.param(p + "33");
  }
  return m;
}

Matrix6 stiffness_block(const MaterialRecord& r) {
  Matrix6 C = Matrix6::Zero();
  if (r.lattice == Lattice::Isotropic) {
    const double lam = r.param("lambda"), G = r.param("shear");
    C.topLeftCorner<3, 3>().setConstant(lam);
    for (int i = 0; i < 3; ++i) C(i, i) = lam + 2 * G;
    for (int i = 3; i < 6; ++i) C(i, i) = G;
  } else if (r.lattice == Lattice::Orth222) {
    C(0, 0) = r.param("C11");
    C(1, 1) = r.param("C22");
    C(2, 2) = r.param("C33");
    C(0, 1) = C(1, 0) = r.param("C12");
    C(0, 2) = C(2, 0) = r.param("C13");
    C(1, 2) = C(2, 1) = r.param("C23");
    C(3, 3) = r.param("C44");
    C(4, 4) = r.param("C55");
    C(5, 5) = r.param("C66");
  } else {
    const double c11 = r.param("C11"), c12 = r.param("C12");
    C(0, 0) = C(1, 1) = c11;
    C(2, 2) = r.param("C33");
    C(0, 1) = C(1, 0) = c12;
    C(0, 2) = C(2, 0) = C(1, 2) = C(2, 1) = r.param("C13");
    C(3, 3) = C(4, 4) = r.param("C44");
    C(5, 5) = 0.5 * (c11 - c12);
  }
  return C;
}

}  // namespace

std::vector<std::string> required_parameters(Lattice lattice, FieldMode mode) {
  std::vector<std::string> req;
  if (lattice == Lattice::Isotropic) {
    req = {"lambda", "shear"};
  } else if (lattice == Lattice::Orth222) {
    req = {"C11", "C12", "C13", "C22", "C23", "C33", "C44", "C55", "C66"};
  } else {
    req = {"C11", "C12", "C13", "C33", "C44"};
  }
  auto append = [&](const std::vector<std::string>& more) { req.insert(req.end(), more.begin(), more.end()); };
  if (uses_electric(mode)) {
    append(coupling_names(lattice, "e"));
    append(diagonal_names(lattice, "eps"));
  }
  if (uses_magnetic(mode)) {
    append(coupling_names(lattice, "q"));
    append(diagonal_names(lattice, "mu"));
  }
  if (mode == FieldMode::FullyCoupled) append(diagonal_names(lattice, "alpha"));
  return req;
}

std::string parameter_unit(const std::string& key) {
  if (key.rfind("alpha", 0) == 0) return "s/m";
  if (key.rfind("eps", 0) == 0) return "mC/kVm";
  if (key.rfind("mu", 0) == 0) return "N/kA2";
  if (key == "lambda" || key == "shear" || key.rfind("C", 0) == 0) return "GPa";
  if (key.rfind("e", 0) == 0) return "C/m2";
  if (key.rfind("q", 0) == 0) return "N/Am";
  return "";
}

GeneralizedModulus build_modulus(const MaterialRecord& r, std::vector<std::string>* warnings) {
  for (const auto& k : required_parameters(r.lattice, r.mode)) r.param(k);
  const Matrix6 C = stiffness_block(r);
  Matrix36 e = Matrix36::Zero(), q = Matrix36::Zero();
  Eigen::Matrix3d eps = Eigen::Matrix3d::Zero(), alpha = Eigen::Matrix3d::Zero(), mu = Eigen::Matrix3d::Zero();
  if (uses_electric(r.mode)) {
    e = coupling_block(r, "e");
    eps = diagonal_block(r, "eps");
  }
  if (uses_magnetic(r.mode)) {
    q = coupling_block(r, "q");
    mu = diagonal_block(r, "mu");
  }
  if (r.mode == FieldMode::FullyCoupled && r.lattice != Lattice::Isotropic) alpha = diagonal_block(r, "alpha");
  if (warnings) {
    Eigen::SelfAdjointEigenSolver<Matrix6> es(C);
    if (es.eigenvalues().minCoeff() <= 0)
      warnings->push_back("material '" + r.name + "': stiffness block is not positive definite (stability)");
  }
  return GeneralizedModulus::from_blocks(C, e, q, eps, alpha, mu);
}

Eigen::Matrix3d rotation_axis(int axis, double t) {
  const double c = std::cos(t), s = std::sin(t);
  Eigen::Matrix3d Q;
  switch (axis) {
    case 1: Q << 1, 0, 0, 0, c, -s, 0, s, c; break;
    case 2: Q << c, 0, s, 0, 1, 0, -s, 0, c; break;
    case 3: Q << c, -s, 0, s, c, 0, 0, 0, 1; break;
    default: throw ConfigError("rotation axis must be 1, 2 or 3");
  }
  return Q;
}

Eigen::Matrix3d rotation_Q(const EulerAngles& a) {
  return rotation_axis(1, a.theta1) * rotation_axis(2, a.theta2) * rotation_axis(3, a.theta3);
}

namespace {

// The tabulated σ and ε factors differ only in where the factor 2 sits:
// `k` multiplies the shear-column entries, `m` the shear-row entries.
Matrix6 axis_factor(int axis, double t, double k, double m) {
  const double c = std::cos(t), s = std::sin(t), cc = c * c, ss = s * s, cs = c * s;
  Matrix6 T;
  switch (axis) {
    case 1:
      T << 1, 0, 0, 0, 0, 0,
           0, cc, ss, k * cs, 0, 0,
           0, ss, cc, -k * cs, 0, 0,
           0, -m * cs, m * cs, cc - ss, 0, 0,
           0, 0, 0, 0, c, -s,
           0, 0, 0, 0, s, c;
      break;
    case 2:
      T << cc, 0, ss, 0, k * cs, 0,
           0, 1, 0, 0, 0, 0,
           ss, 0, cc, 0, -k * cs, 0,
           0, 0, 0, c, 0, -s,
           -m * cs, 0, m * cs, 0, cc - ss, 0,
           0, 0, 0, s, 0, c;
      break;
    case 3:
      T << cc, ss, 0, 0, 0, k * cs,
           ss, cc, 0, 0, 0, -k * cs,
           0, 0, 1, 0, 0, 0,
           0, 0, 0, c, -s, 0,
           0, 0, 0, s, c, 0,
           -m * cs, m * cs, 0, 0, 0, cc - ss;
      break;
    default: throw ConfigError("rotation axis must be 1, 2 or 3");
  }
  return T;
}

}  // namespace

Matrix6 T_sigma_axis(int axis, double theta) { return axis_factor(axis, theta, 2.0, 1.0); }
Matrix6 T_eps_axis(int axis, double theta) { return axis_factor(axis, theta, 1.0, 2.0); }

VoigtTransforms voigt_transforms(const EulerAngles& a) {
  // The tabulated axis-2 factors turn in the opposite sense to axes 1 and 3,
  // hence -θ2 (see docs/conventions.md).
  VoigtTransforms t;
  t.sigma = T_sigma_axis(3, a.theta3) * T_sigma_axis(2, -a.theta2) * T_sigma_axis(1, a.theta1);
  t.eps = T_eps_axis(3, a.theta3) * T_eps_axis(2, -a.theta2) * T_eps_axis(1, a.theta1);
  return t;
}

VoigtTransforms voigt_transforms(const Eigen::Matrix3d& Q) {
  VoigtTransforms t;
  for (int k = 0; k < 6; ++k) {
    const Vector6 unit = Vector6::Unit(k);
    t.sigma.col(k) = voigt_stress(Q.transpose() * tensor_from_voigt_stress(unit) * Q);
    t.eps.col(k) = voigt_strain(Q.transpose() * tensor_from_voigt_strain(unit) * Q);
  }
  return t;
}

namespace {

GeneralizedModulus rotate_with(const GeneralizedModulus& local, const VoigtTransforms& t, const Eigen::Matrix3d& Q) {
  // II_L⁻¹ = diag(T^σ⁻¹, Q, Q) with T^σ⁻¹ = (T^ε)ᵀ.
  Matrix12 Linv = Matrix12::Zero(), P = Matrix12::Zero();
  Linv.block<6, 6>(0, 0) = t.eps.transpose();
  Linv.block<3, 3>(6, 6) = Q;
  Linv.block<3, 3>(9, 9) = Q;
  P.block<6, 6>(0, 0) = t.eps;
  P.block<3, 3>(6, 6) = Q.transpose();
  P.block<3, 3>(9, 9) = Q.transpose();
  GeneralizedModulus out;
  out.G = Linv * local.G * P;
  return out;
}

}  // namespace

GeneralizedModulus rotate_modulus(const GeneralizedModulus& local, const EulerAngles& a) {
  return rotate_with(local, voigt_transforms(a), rotation_Q(a));
}

GeneralizedModulus rotate_modulus(const GeneralizedModulus& local, const Eigen::Matrix3d& Q) {
  return rotate_with(local, voigt_transforms(Q), Q);
}

GeneralizedModulus unrotate_modulus(const GeneralizedModulus& global, const EulerAngles& a) {
  const Eigen::Matrix3d Qt = rotation_Q(a).transpose();
  return rotate_with(global, voigt_transforms(Qt), Qt);
}

Eigen::Vector3d preferred_direction(const EulerAngles& a) { return rotation_Q(a).col(2); }

double anisotropy_index(const Matrix6& C) {
  Eigen::FullPivLU<Matrix6> lu(C);
  if (!lu.isInvertible()) throw NumericalError("anisotropy index: singular stiffness");
  const Matrix6 S = lu.inverse();
  const double KV = (C(0, 0) + C(1, 1) + C(2, 2) + 2 * (C(0, 1) + C(1, 2) + C(0, 2))) / 9.0;
  const double GV =
      (C(0, 0) + C(1, 1) + C(2, 2) - (C(0, 1) + C(1, 2) + C(0, 2)) + 3 * (C(3, 3) + C(4, 4) + C(5, 5))) / 15.0;
  const double KR = 1.0 / (S(0, 0) + S(1, 1) + S(2, 2) + 2 * (S(0, 1) + S(1, 2) + S(0, 2)));
  const double GR =
      15.0 / (4 * (S(0, 0) + S(1, 1) + S(2, 2)) - 4 * (S(0, 1) + S(1, 2) + S(0, 2)) + 3 * (S(3, 3) + S(4, 4) + S(5, 5)));
  return 5 * GV / GR + KV / KR - 6;
}

double energy_quadratic(const Eigen::MatrixXd& G, const Eigen::VectorXd& P) {
  if (G.rows() != P.size() || G.cols() != P.size()) throw ConfigError("energy_quadratic: dimension mismatch");
  return 0.5 * P.dot(G * P);
}

Eigen::VectorXd constitutive(const Eigen::MatrixXd& G, const Eigen::VectorXd& P) {
  if (G.cols() != P.size()) throw ConfigError("constitutive: dimension mismatch");
  return G * P;
}

TransverseIsoCoefficients coefficients(const MaterialRecord& r) {
  if (r.lattice != Lattice::TransIso && r.lattice != Lattice::Hex6mm)
    throw ConfigError("invariant coefficients need a transversely isotropic record, got " + to_string(r.lattice));
  auto p = [&](const std::string& k) { return r.param_or(k, 0.0); };
  const double C11 = r.param("C11"), C12 = r.param("C12"), C13 = r.param("C13"), C33 = r.param("C33"),
               C44 = r.param("C44");
  TransverseIsoCoefficients c;
  c.lambda = C12;
  c.mu = 0.5 * (C11 - C12);
  c.omega1 = 2 * C44 + C12 - C11;
  c.omega2 = 0.5 * (C11 + C33) - 2 * C44 - C13;
  c.omega3 = C13 - C12;
  c.beta1 = -p("e31");
  c.beta2 = p("e31") - p("e33") + 2 * p("e15");
  c.beta3 = -2 * p("e15");
  c.kappa1 = -p("q31");
  c.kappa2 = p("q31") - p("q33") + 2 * p("q15");
  c.kappa3 = -2 * p("q15");
  c.gamma1 = -0.5 * p("eps11");
  c.gamma2 = 0.5 * (p("eps11") - p("eps33"));
  c.xi1 = -0.5 * p("mu11");
  c.xi2 = 0.5 * (p("mu11") - p("mu33"));
  return c;
}

double energy_invariant(const TransverseIsoCoefficients& c, const Eigen::Vector3d& a, const Eigen::Matrix3d& eps,
                        const Eigen::Vector3d& E, const Eigen::Vector3d& H) {
  if (std::abs(a.norm() - 1.0) > 1e-12) throw ConfigError("energy_invariant: preferred direction must be a unit vector");
  const Eigen::Matrix3d m = a * a.transpose();
  const double I1 = eps.trace(), I2 = (eps * eps).trace(), I4 = (eps * m).trace(), I5 = (eps * eps * m).trace();
  const double J1e = E.dot(E), J2e = E.dot(a), J1m = H.dot(H), J2m = H.dot(a);
  const double K1e = (eps * (E * a.transpose())).trace(), K1m = (eps * (H * a.transpose())).trace();
  const double el = 0.5 * c.lambda * I1 * I1 + c.mu * I2 + c.omega1 * I5 + c.omega2 * I4 * I4 + c.omega3 * I1 * I4;
  const double em = c.beta1 * I1 * J2e + c.beta2 * I4 * J2e + c.beta3 * K1e;
  const double mm = c.kappa1 * I1 * J2m + c.kappa2 * I4 * J2m + c.kappa3 * K1m;
  const double diel = c.gamma1 * J1e + c.gamma2 * J2e * J2e;
  const double mag = c.xi1 * J1m + c.xi2 * J2m * J2m;
  return el + em + mm + diel + mag;
}

const Matrix12& working_unit_factors() {
  static const Matrix12 f = [] {
    Matrix12 m = Matrix12::Ones();
    m.block<3, 3>(6, 6).setConstant(1e3);   // mC/kVm -> nF/m
    m.block<3, 3>(9, 9).setConstant(1e3);   // N/kA² -> nN/A²
    m.block<3, 3>(9, 6).setConstant(1e9);   // s/m -> ns/m
    m.block<3, 3>(6, 9).setConstant(1e9);
    return m;
  }();
  return f;
}

GeneralizedModulus to_working_units(const GeneralizedModulus& g) {
  GeneralizedModulus out;
  out.G = g.G.cwiseProduct(working_unit_factors());
  return out;
}

Eigen::MatrixXd from_working_units(const Eigen::MatrixXd& reduced, FieldMode mode) {
  const auto idx = active_components(mode);
  Eigen::MatrixXd out = reduced;
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out(i, j) /= working_unit_factors()(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  return out;
}

Eigen::Vector3d field_scales(const std::vector<GeneralizedModulus>& moduli) {
  double c = 0, e = 0, m = 0;
  for (const auto& g : moduli) {
    c = std::max(c, g.G.diagonal().head<6>().cwiseAbs().maxCoeff());
    e = std::max(e, g.G.diagonal().segment<3>(6).cwiseAbs().maxCoeff());
    m = std::max(m, g.G.diagonal().tail<3>().cwiseAbs().maxCoeff());
  }
  Eigen::Vector3d s(1.0, 1.0, 1.0);
  if (c > 0 && e > 0) s[1] = std::sqrt(c / e);
  if (c > 0 && m > 0) s[2] = std::sqrt(c / m);
  return s;
}

const MaterialRecord& MaterialLibrary::get(const std::string& name) const {
  for (const auto& r : records)
    if (r.name == name) return r;
  throw ConfigError("material '" + name + "' not found in library");
}

bool MaterialLibrary::contains(const std::string& name) const {
  return std::any_of(records.begin(), records.end(), [&](const MaterialRecord& r) { return r.name == name; });
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void validate_record(const MaterialRecord& r, int line) {
  const auto req = required_parameters(r.lattice, r.mode);
  const auto opt = optional_parameters(r.lattice);
  for (const auto& [k, v] : r.params) {
    if (std::find(req.begin(), req.end(), k) == req.end() && !opt.count(k))
      throw ConfigError("material '" + r.name + "' (ending line " + std::to_string(line) + "): parameter " + k +
                        " does not belong to lattice " + to_string(r.lattice) + " in mode " + to_string(r.mode));
    if (!std::isfinite(v)) throw ConfigError("material '" + r.name + "': non-finite parameter " + k);
  }
  for (const auto& k : req)
    if (!r.params.count(k)) throw ConfigError("material '" + r.name + "': missing parameter " + k);
}

}  // namespace

MaterialLibrary parse_material_library(std::istream& in) {
  MaterialLibrary lib;
  std::string line;
  int lineNo = 0;
  bool header = false;
  MaterialRecord* cur = nullptr;
  bool haveMode = false, haveLattice = false;
  auto close = [&] {
    if (!cur) return;
    if (!haveMode || !haveLattice)
      throw ConfigError("material '" + cur->name + "': mode and lattice are required");
    validate_record(*cur, lineNo);
  };
  while (std::getline(in, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (!header) {
      if (line != "vemhom-materials 1") throw IoError("material library: expected header 'vemhom-materials 1'");
      header = true;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("material library line " + std::to_string(lineNo) + ": bad section");
      close();
      MaterialRecord r;
      r.name = trim(line.substr(1, line.size() - 2));
      if (r.name.empty()) throw ConfigError("material library line " + std::to_string(lineNo) + ": empty name");
      if (lib.contains(r.name)) throw ConfigError("material library: duplicate material '" + r.name + "'");
      lib.records.push_back(r);
      cur = &lib.records.back();
      haveMode = haveLattice = false;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || !cur)
      throw ConfigError("material library line " + std::to_string(lineNo) + ": expected 'key = value' inside a section");
    const std::string key = trim(line.substr(0, eq));
    std::istringstream rhs(line.substr(eq + 1));
    if (key == "mode") {
      std::string v;
      rhs >> v;
      cur->mode = parse_mode(v);
      haveMode = true;
    } else if (key == "lattice") {
      std::string v;
      rhs >> v;
      cur->lattice = parse_lattice(v);
      haveLattice = true;
    } else {
      double value = 0;
      std::string unit, extra;
      if (!(rhs >> value)) throw ConfigError("material library line " + std::to_string(lineNo) + ": bad number");
      rhs >> unit;
      if (rhs >> extra) throw ConfigError("material library line " + std::to_string(lineNo) + ": trailing text");
      if (!unit.empty() && unit != parameter_unit(key))
        throw ConfigError("material library line " + std::to_string(lineNo) + ": unit '" + unit + "' for " + key +
                          ", expected " + parameter_unit(key));
      if (cur->params.count(key)) throw ConfigError("material '" + cur->name + "': duplicate parameter " + key);
      cur->params[key] = value;
    }
  }
  if (!header) throw IoError("material library: empty input");
  close();
  return lib;
}

MaterialLibrary load_material_library(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open material library '" + path + "'");
  return parse_material_library(in);
}

void write_material_library(std::ostream& out, const MaterialLibrary& lib) {
  out << "vemhom-materials 1\n";
  for (const auto& r : lib.records) {
    out << "\n[" << r.name << "]\nmode = " << to_string(r.mode) << "\nlattice = " << to_string(r.lattice) << '\n';
    for (const auto& [k, v] : r.params) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << k << " = " << buf << ' ' << parameter_unit(k) << '\n';
    }
  }
  if (!out) throw IoError("failed writing material library");
}

}  // namespace vemhom
