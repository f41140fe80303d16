#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace vemhom {

using Matrix12 = Eigen::Matrix<double, 12, 12>;
using Vector12 = Eigen::Matrix<double, 12, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix36 = Eigen::Matrix<double, 3, 6>;

/// Active physical fields. Node dofs are u (3) plus φ and/or φ_mag.
enum class FieldMode { ElectroMech, MagnetoMech, FullyCoupled };

std::string to_string(FieldMode mode);
FieldMode parse_mode(const std::string& name);
/// Scalar fields per node: 4 or 5.
int dofs_per_node(FieldMode mode);
/// Length of the generalized gradient P: 9 or 12.
int gradient_size(FieldMode mode);
/// Positions of the active P components inside the full 12-vector.
std::vector<int> active_components(FieldMode mode);
/// True when a record declared for `record` can serve a run in `run`.
bool mode_covers(FieldMode record, FieldMode run);

enum class Lattice { Hex6mm, HexBar6m2, Trigonal3m, Orth222, TransIso, Isotropic };

std::string to_string(Lattice lattice);
Lattice parse_lattice(const std::string& name);

/// Voigt vectors use the order (11, 22, 33, 23, 13, 12); strains carry
/// engineering shears.
Vector6 voigt_stress(const Eigen::Matrix3d& s);
Vector6 voigt_strain(const Eigen::Matrix3d& e);
Eigen::Matrix3d tensor_from_voigt_stress(const Vector6& v);
Eigen::Matrix3d tensor_from_voigt_strain(const Vector6& v);

/// Generalized modulus in the block layout
///   [  C   -eᵀ  -qᵀ ]
///   [ -e   -ε   -αᵀ ]
///   [ -q   -α   -μ  ]
/// acting on P = (ε, E, H) and returning L = (σ, -D, -B). The H–H block
/// carries -μ so that ½ P·G·P matches the invariant energy.
struct GeneralizedModulus {
  Matrix12 G = Matrix12::Zero();

  static GeneralizedModulus from_blocks(const Matrix6& C, const Matrix36& e, const Matrix36& q,
                                        const Eigen::Matrix3d& eps, const Eigen::Matrix3d& alpha,
                                        const Eigen::Matrix3d& mu);
  Matrix6 C() const { return G.block<6, 6>(0, 0); }
  Matrix36 e() const { return -G.block<3, 6>(6, 0); }
  Matrix36 q() const { return -G.block<3, 6>(9, 0); }
  Eigen::Matrix3d eps() const { return -G.block<3, 3>(6, 6); }
  Eigen::Matrix3d alpha() const { return -G.block<3, 3>(9, 6); }
  Eigen::Matrix3d mu() const { return -G.block<3, 3>(9, 9); }

  /// Rows/columns of the active components only (9×9 or 12×12).
  Eigen::MatrixXd reduced(FieldMode mode) const;
  double asymmetry() const;  ///< max |G - Gᵀ| / max |G|
};

struct MaterialRecord {
  std::string name;
  FieldMode mode = FieldMode::FullyCoupled;
  Lattice lattice = Lattice::TransIso;
  std::map<std::string, double> params;

  double param(const std::string& key) const;
  double param_or(const std::string& key, double fallback) const;
};

/// Parameter names a record must define for its lattice class and mode.
std::vector<std::string> required_parameters(Lattice lattice, FieldMode mode);
/// Unit string expected for a parameter name (by prefix).
std::string parameter_unit(const std::string& key);

/// Grain-local modulus from the lattice template. Missing parameters raise
/// ConfigError; a C block that is not positive definite appends a stability
/// warning to `warnings` (when given) instead of failing.
GeneralizedModulus build_modulus(const MaterialRecord& record, std::vector<std::string>* warnings = nullptr);

struct EulerAngles {
  double theta1 = 0.0, theta2 = 0.0, theta3 = 0.0;
};

/// Q = Q1(θ1)·Q2(θ2)·Q3(θ3).
Eigen::Matrix3d rotation_Q(const EulerAngles& a);
Eigen::Matrix3d rotation_axis(int axis, double theta);

/// Per-axis Voigt factors exactly as tabulated (axis 1..3).
Matrix6 T_sigma_axis(int axis, double theta);
Matrix6 T_eps_axis(int axis, double theta);

struct VoigtTransforms {
  Matrix6 sigma;
  Matrix6 eps;
};

/// Voigt transforms for the grain frame: sigma·v(S) = v(QᵀSQ) for stresses,
/// eps·v(S) likewise for strains, so (sigma)ᵀ·eps = I.
VoigtTransforms voigt_transforms(const EulerAngles& a);
/// Same transforms built directly from an arbitrary rotation.
VoigtTransforms voigt_transforms(const Eigen::Matrix3d& Q);

/// Local → global: II_L⁻¹·G_l·II_P with II_L = diag(T^σ, Qᵀ, Qᵀ) and
/// II_P = diag(T^ε, Qᵀ, Qᵀ).
GeneralizedModulus rotate_modulus(const GeneralizedModulus& local, const EulerAngles& a);
GeneralizedModulus rotate_modulus(const GeneralizedModulus& local, const Eigen::Matrix3d& Q);
/// Global → local (inverse of rotate_modulus for the same angles).
GeneralizedModulus unrotate_modulus(const GeneralizedModulus& global, const EulerAngles& a);

/// Grain preferred direction a_g = Q·e3.
Eigen::Vector3d preferred_direction(const EulerAngles& a);

/// Universal anisotropy index 5·G_V/G_R + K_V/K_R − 6.
double anisotropy_index(const Matrix6& C);

double energy_quadratic(const Eigen::MatrixXd& G, const Eigen::VectorXd& P);
Eigen::VectorXd constitutive(const Eigen::MatrixXd& G, const Eigen::VectorXd& P);

/// Coefficients of the transversely isotropic invariant energy.
struct TransverseIsoCoefficients {
  double lambda = 0, mu = 0;
  double omega1 = 0, omega2 = 0, omega3 = 0;
  double beta1 = 0, beta2 = 0, beta3 = 0;
  double kappa1 = 0, kappa2 = 0, kappa3 = 0;
  double gamma1 = 0, gamma2 = 0;
  double xi1 = 0, xi2 = 0;
};

/// Only defined for TransIso and Hex6mm records; absent coupling or
/// magnetic parameters count as zero.
TransverseIsoCoefficients coefficients(const MaterialRecord& record);

/// ψ_el + ψ_em + ψ_mm + ψ_diel + ψ_mag in terms of the invariants of
/// (ε, E, H) and the structural tensor a_g ⊗ a_g.
double energy_invariant(const TransverseIsoCoefficients& c, const Eigen::Vector3d& a_g, const Eigen::Matrix3d& strain,
                        const Eigen::Vector3d& E, const Eigen::Vector3d& H);

/// Library units (GPa, C/m², N/Am, mC/kVm, N/kA², s/m) do not form a
/// coherent set. Assembly works in GPa, C/m² and T for L against strain,
/// GV/m and GA/m for P, which puts ε and μ in nF/m and nN/A² and α in ns/m.
/// Entry (i, j) of the result multiplies G(i, j) on the way in.
const Matrix12& working_unit_factors();
GeneralizedModulus to_working_units(const GeneralizedModulus& g);
/// Reduced Ḡ in working units back to library units.
Eigen::MatrixXd from_working_units(const Eigen::MatrixXd& reduced, FieldMode mode);

/// Per-field dof scales (u, φ, φ_mag) so that the scaled diagonal blocks of
/// the assembled matrix have comparable magnitude.
Eigen::Vector3d field_scales(const std::vector<GeneralizedModulus>& moduli);

/// Material library: versioned key-value text, see docs/formats.md.
struct MaterialLibrary {
  std::vector<MaterialRecord> records;

  const MaterialRecord& get(const std::string& name) const;
  bool contains(const std::string& name) const;
};

MaterialLibrary parse_material_library(std::istream& in);
MaterialLibrary load_material_library(const std::string& path);
void write_material_library(std::ostream& out, const MaterialLibrary& lib);

}  // namespace vemhom
