#include <sstream>

#include "support.hpp"
#include "vemhom/error.hpp"

using namespace vemhom;
using namespace vemhom::testing;

namespace {

Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  Eigen::Vector3d v = random_vector(rng, 3);
  return v.normalized();
}

/// Zero pattern of a matrix as a boolean mask.
Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(const Eigen::MatrixXd& M) {
  return (M.array().abs() > 0).matrix();
}

}  // namespace

TEST(Library, ShipsTableTwoMaterials) {
  const auto& lib = library();
  EXPECT_TRUE(lib.contains("BaTiO3"));
  EXPECT_TRUE(lib.contains("CoFe2O4"));
  EXPECT_THROW(lib.get("unobtainium"), ConfigError);
}

TEST(BuildModulus, BaTiO3TableTwo) {
  const auto G = build_modulus(library().get("BaTiO3"));
  EXPECT_DOUBLE_EQ(G.C()(0, 0), 166.0);
  EXPECT_DOUBLE_EQ(G.C()(0, 1), 76.6);
  EXPECT_DOUBLE_EQ(G.C()(0, 2), 77.5);
  EXPECT_DOUBLE_EQ(G.C()(2, 2), 162.0);
  EXPECT_DOUBLE_EQ(G.C()(3, 3), 42.9);
  EXPECT_DOUBLE_EQ(G.C()(5, 5), 0.5 * (166.0 - 76.6));
  EXPECT_DOUBLE_EQ(G.e()(2, 2), 18.6);
  EXPECT_DOUBLE_EQ(G.e()(2, 0), -4.4);
  EXPECT_DOUBLE_EQ(G.e()(0, 4), 11.6);
  EXPECT_DOUBLE_EQ(G.eps()(0, 0), 0.0112);
  EXPECT_DOUBLE_EQ(G.eps()(2, 2), 0.0126);
  EXPECT_DOUBLE_EQ(G.mu()(0, 0), 1.26);
  EXPECT_EQ(G.q().norm(), 0.0);
  EXPECT_EQ(G.alpha().norm(), 0.0);
}

TEST(BuildModulus, CoFe2O4TableTwo) {
  const auto G = build_modulus(library().get("CoFe2O4"));
  EXPECT_DOUBLE_EQ(G.C()(0, 0), 212.1);
  EXPECT_DOUBLE_EQ(G.C()(3, 3), 68.8);
  EXPECT_DOUBLE_EQ(G.q()(2, 2), -699.7);
  EXPECT_DOUBLE_EQ(G.q()(2, 0), 580.3);
  EXPECT_DOUBLE_EQ(G.q()(1, 3), 550.0);
  EXPECT_DOUBLE_EQ(G.eps()(0, 0), 8e-5);
  EXPECT_DOUBLE_EQ(G.mu()(2, 2), 157.0);
  EXPECT_EQ(G.e().norm(), 0.0);
  EXPECT_EQ(G.alpha().norm(), 0.0);
}

TEST(BuildModulus, BlockSignLayout) {
  const auto G = build_modulus(library().get("BaTiO3"));
  // [C, -eᵀ, -qᵀ; -e, -ε, -αᵀ; -q, -α, -μ]
  EXPECT_DOUBLE_EQ(G.G(8, 2), -18.6);
  EXPECT_DOUBLE_EQ(G.G(2, 8), -18.6);
  EXPECT_DOUBLE_EQ(G.G(6, 6), -0.0112);
  EXPECT_DOUBLE_EQ(G.G(9, 9), -1.26);
  EXPECT_EQ(G.asymmetry(), 0.0);
}

TEST(BuildModulus, IsotropicDummyFromLame) {
  const auto G = build_modulus(library().get("iso-soft"));
  const double lambda = library().get("iso-soft").param("lambda");
  const double mu = library().get("iso-soft").param("shear");
  EXPECT_LT((G.C() - isotropic_C(lambda, mu)).norm(), 1e-14);
  EXPECT_EQ(G.e().norm(), 0.0);
  EXPECT_EQ(G.q().norm(), 0.0);
  EXPECT_EQ(G.alpha().norm(), 0.0);
}

TEST(BuildModulus, LatticeZeroPatterns) {
  const auto pattern = [](const char* name) { return build_modulus(library().get(name)); };
  // Hexagonal 6mm: e15 = e24, e31 = e32, e33; C66 tied.
  {
    const auto G = pattern("synthetic-hex-aniso");
    Matrix36 expected = Matrix36::Zero();
    expected(0, 4) = expected(1, 3) = expected(2, 0) = expected(2, 1) = expected(2, 2) = 1;
    EXPECT_EQ(mask(G.e()), mask(expected));
    EXPECT_DOUBLE_EQ(G.C()(5, 5), 0.5 * (G.C()(0, 0) - G.C()(0, 1)));
    EXPECT_EQ(G.C()(0, 3), 0.0);
  }
  // Orthorhombic 222: only e14, e25, e36.
  {
    const auto G = pattern("synthetic-orth");
    Matrix36 expected = Matrix36::Zero();
    expected(0, 3) = expected(1, 4) = expected(2, 5) = 1;
    EXPECT_EQ(mask(G.e()), mask(expected));
    EXPECT_NE(G.C()(0, 0), G.C()(1, 1));
    EXPECT_EQ(G.C()(3, 4), 0.0);
  }
  // Hexagonal -6m2: e22 pattern (e21 = -e22, e16 = -e22).
  {
    const auto G = pattern("synthetic-hexbar");
    const double e22 = library().get("synthetic-hexbar").param("e22");
    Matrix36 expected = Matrix36::Zero();
    expected(1, 1) = e22;
    expected(1, 0) = -e22;
    expected(0, 5) = -e22;
    EXPECT_LT((G.e() - expected).norm(), 1e-15);
  }
  // Trigonal 3m with e31 = 0: e15, e22 and e33 entries only.
  {
    const auto G = pattern("synthetic-trig");
    Matrix36 expected = Matrix36::Zero();
    expected(0, 4) = expected(1, 3) = expected(0, 5) = expected(1, 0) = expected(1, 1) = expected(2, 2) = 1;
    EXPECT_EQ(mask(G.e()), mask(expected));
  }
}

TEST(BuildModulus, MissingParameterRaises) {
  auto r = library().get("BaTiO3");
  r.params.erase("C44");
  EXPECT_THROW(build_modulus(r), ConfigError);
}

TEST(BuildModulus, UnstableStiffnessWarns) {
  auto r = library().get("BaTiO3");
  r.params["C12"] = 300.0;
  std::vector<std::string> warnings;
  build_modulus(r, &warnings);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("positive definite"), std::string::npos);
}

TEST(Rotation, IdentityAndAxisThree) {
  EXPECT_LT((rotation_Q({0, 0, 0}) - Eigen::Matrix3d::Identity()).norm(), 1e-15);
  const Eigen::Vector3d e1 = rotation_Q({0, 0, M_PI / 2}) * Eigen::Vector3d::UnitX();
  EXPECT_LT((e1 - Eigen::Vector3d::UnitY()).norm(), 1e-15);
}

TEST(Rotation, OrthogonalForRandomAngles) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    const auto Q = rotation_Q(random_angles(rng));
    EXPECT_LT((Q.transpose() * Q - Eigen::Matrix3d::Identity()).norm(), 1e-14);
    EXPECT_NEAR(Q.determinant(), 1.0, 1e-14);
  }
}

TEST(VoigtTransforms, IdentityAtZero) {
  const auto T = voigt_transforms(EulerAngles{});
  EXPECT_LT((T.sigma - Matrix6::Identity()).norm(), 1e-15);
  EXPECT_LT((T.eps - Matrix6::Identity()).norm(), 1e-15);
}

TEST(VoigtTransforms, DualityAndTensorAgreement) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 100; ++k) {
    const auto a = random_angles(rng);
    const auto T = voigt_transforms(a);
    const auto Q = rotation_Q(a);
    EXPECT_LT((T.sigma.transpose() * T.eps - Matrix6::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::Matrix3d S = random_symmetric(rng);
    // Stress-like and strain-like rotation against the direct 3×3 rotation.
    const Vector6 s = T.sigma.inverse() * voigt_stress(S);
    EXPECT_LT((s - voigt_stress(Q * S * Q.transpose())).cwiseAbs().maxCoeff(), 1e-12);
    const Vector6 e = T.eps.inverse() * voigt_strain(S);
    EXPECT_LT((e - voigt_strain(Q * S * Q.transpose())).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(VoigtTransforms, WorkConjugacyPreserved) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    const auto T = voigt_transforms(random_angles(rng));
    const Vector6 sig = random_vector(rng, 6), eps = random_vector(rng, 6);
    EXPECT_NEAR((T.sigma * sig).dot(T.eps * eps), sig.dot(eps), 1e-12 * (1 + std::abs(sig.dot(eps))));
  }
}

TEST(VoigtTransforms, PerAxisFactorsCompose) {
  // A single-axis rotation is the printed factor itself.
  const double t = 0.37;
  const Matrix6 Ts = voigt_transforms(EulerAngles{t, 0, 0}).sigma;
  EXPECT_LT((Ts - T_sigma_axis(1, t)).norm(), 1e-14);
  const Matrix6 Te = voigt_transforms(EulerAngles{0, 0, t}).eps;
  EXPECT_LT((Te - T_eps_axis(3, t)).norm(), 1e-14);
}

TEST(RotateModulus, IdentityAndRoundTrip) {
  const auto Gl = build_modulus(library().get("BaTiO3"));
  EXPECT_LT(rel_diff(rotate_modulus(Gl, EulerAngles{}).G, Gl.G), 1e-15);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 100; ++k) {
    const auto a = random_angles(rng);
    const auto G = rotate_modulus(Gl, a);
    EXPECT_LT(G.asymmetry(), 1e-11);
    EXPECT_LT(rel_diff(unrotate_modulus(G, a).G, Gl.G), 1e-11);
    // Rotating by Qᵀ undoes rotating by Q.
    EXPECT_LT(rel_diff(rotate_modulus(G, rotation_Q(a).transpose()).G, Gl.G), 1e-11);
  }
}

TEST(RotateModulus, IsotropicUnchanged) {
  const auto G = uncoupled_modulus(40, 20, 0.5, 2.0);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) EXPECT_LT(rel_diff(rotate_modulus(G, random_angles(rng)).G, G.G), 1e-11);
}

TEST(RotateModulus, PreservesEnergyOfRotatedFields) {
  // ψ(G, P) in the grain frame equals ψ(rotated G, rotated P).
  const auto Gl = build_modulus(library().get("CoFe2O4"));
  std::mt19937_64 rng(6);
  for (int k = 0; k < 50; ++k) {
    const auto a = random_angles(rng);
    const auto Q = rotation_Q(a);
    const Eigen::Matrix3d strain = random_symmetric(rng);
    const Eigen::Vector3d E = random_vector(rng, 3), H = random_vector(rng, 3);
    Vector12 Pl, Pg;
    Pl << voigt_strain(strain), E, H;
    Pg << voigt_strain(Q * strain * Q.transpose()), Q * E, Q * H;
    const double psiL = energy_quadratic(Gl.G, Pl);
    EXPECT_NEAR(energy_quadratic(rotate_modulus(Gl, a).G, Pg), psiL, 1e-11 * std::abs(psiL));
  }
}

TEST(RotateModulus, StiffnessStaysPositiveDefinite) {
  const auto Gl = build_modulus(library().get("synthetic-hex-aniso"));
  std::mt19937_64 rng(7);
  for (int k = 0; k < 100; ++k) {
    const auto G = rotate_modulus(Gl, random_angles(rng));
    Eigen::SelfAdjointEigenSolver<Matrix6> es(G.C());
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Anisotropy, IsotropicIsZero) { EXPECT_NEAR(anisotropy_index(isotropic_C(50, 30)), 0.0, 1e-12); }

TEST(Anisotropy, CubicZenerThree) {
  Matrix6 C = Matrix6::Zero();
  C.topLeftCorner<3, 3>().setConstant(60);
  for (int i = 0; i < 3; ++i) C(i, i) = 100;
  for (int i = 3; i < 6; ++i) C(i, i) = 60;
  const double Z = 2 * 60.0 / (100 - 60);
  EXPECT_NEAR(Z, 3.0, 1e-15);
  // Brute-force Voigt/Reuss bounds from the full matrices.
  const double KV = (C(0, 0) + C(1, 1) + C(2, 2) + 2 * (C(0, 1) + C(1, 2) + C(0, 2))) / 9;
  const double GV = (C(0, 0) + C(1, 1) + C(2, 2) - C(0, 1) - C(1, 2) - C(0, 2) + 3 * (C(3, 3) + C(4, 4) + C(5, 5))) / 15;
  const Matrix6 S = C.inverse();
  const double KR = 1 / (S(0, 0) + S(1, 1) + S(2, 2) + 2 * (S(0, 1) + S(1, 2) + S(0, 2)));
  const double GR = 15 / (4 * (S(0, 0) + S(1, 1) + S(2, 2)) - 4 * (S(0, 1) + S(1, 2) + S(0, 2)) +
                          3 * (S(3, 3) + S(4, 4) + S(5, 5)));
  const double oracle = 5 * GV / GR + KV / KR - 6;
  EXPECT_NEAR(oracle, 1.2 * std::pow(std::sqrt(Z) - 1 / std::sqrt(Z), 2), 1e-12);
  EXPECT_NEAR(anisotropy_index(C), 1.6, 1e-12);
}

TEST(Anisotropy, NonNegativeForRandomSpd) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 100; ++k) {
    Matrix6 A;
    for (int i = 0; i < 6; ++i) A.col(i) = random_vector(rng, 6);
    const Matrix6 C = A * A.transpose() + 0.1 * Matrix6::Identity();
    EXPECT_GE(anisotropy_index(C), -1e-12);
  }
}

TEST(Anisotropy, SingularRaises) { EXPECT_THROW(anisotropy_index(Matrix6::Zero()), NumericalError); }

TEST(QuadraticEnergy, TrivialCases) {
  const Eigen::MatrixXd G = Matrix12::Identity();
  EXPECT_EQ(energy_quadratic(G, Vector12::Zero()), 0.0);
  EXPECT_EQ(constitutive(G, Vector12::Zero()).norm(), 0.0);
  const Vector12 e = Vector12::Unit(4);
  EXPECT_DOUBLE_EQ(energy_quadratic(G, e), 0.5);
  EXPECT_EQ(constitutive(G, e), Eigen::VectorXd(e));
}

TEST(QuadraticEnergy, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 20; ++k) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Random(12, 12);
    const Eigen::MatrixXd G = A + A.transpose();
    const Eigen::VectorXd P = random_vector(rng, 12);
    const Eigen::VectorXd L = constitutive(G, P);
    const double h = 1e-6;
    for (int i = 0; i < 12; ++i) {
      Eigen::VectorXd dp = Eigen::VectorXd::Zero(12);
      dp[i] = h;
      const double fd = (energy_quadratic(G, P + dp) - energy_quadratic(G, P - dp)) / (2 * h);
      EXPECT_NEAR(fd, L[i], 1e-6 * (1 + std::abs(L[i])));
    }
  }
}

TEST(QuadraticEnergy, FluxSignsRecoverDAndB) {
  // L = (σ, -D, -B) with D = eε + εE + αᵀH and B = qε + αE + μH.
  const auto G = build_modulus(library().get("BaTiO3"));
  std::mt19937_64 rng(10);
  const Vector12 P = random_vector(rng, 12);
  const Vector12 L = G.G * P;
  const Vector6 strain = P.head<6>();
  const Eigen::Vector3d E = P.segment<3>(6), H = P.tail<3>();
  const Eigen::Vector3d D = G.e() * strain + G.eps() * E + G.alpha().transpose() * H;
  const Eigen::Vector3d B = G.q() * strain + G.alpha() * E + G.mu() * H;
  EXPECT_LT((L.segment<3>(6) + D).norm(), 1e-12 * D.norm());
  EXPECT_LT((L.tail<3>() + B).norm(), 1e-12 * (1 + B.norm()));
  EXPECT_LT((L.head<6>() - (G.C() * strain - G.e().transpose() * E - G.q().transpose() * H)).norm(), 1e-11);
}

TEST(InvariantEnergy, ZeroFieldsGiveZero) {
  const auto c = coefficients(library().get("BaTiO3"));
  EXPECT_EQ(energy_invariant(c, Eigen::Vector3d::UnitZ(), Eigen::Matrix3d::Zero(), Eigen::Vector3d::Zero(),
                             Eigen::Vector3d::Zero()),
            0.0);
}

TEST(InvariantEnergy, CoefficientMap) {
  const auto& r = library().get("BaTiO3");
  const auto c = coefficients(r);
  EXPECT_DOUBLE_EQ(c.lambda, 76.6);
  EXPECT_DOUBLE_EQ(c.mu, 0.5 * (166 - 76.6));
  EXPECT_DOUBLE_EQ(c.xi2, 0.5 * (1.26 - 1.26));
}

TEST(InvariantEnergy, MatchesQuadraticFormForTableTwo) {
  for (const char* name : {"BaTiO3", "CoFe2O4"}) {
    const auto& r = library().get(name);
    const auto c = coefficients(r);
    const auto Gl = build_modulus(r);
    std::mt19937_64 rng(11);
    double worst = 0;
    for (int k = 0; k < 2000; ++k) {
      const Eigen::Vector3d a = random_unit(rng);
      const Eigen::Matrix3d strain = random_symmetric(rng);
      const Eigen::Vector3d E = random_vector(rng, 3), H = random_vector(rng, 3);
      // Rotate G so that its preferred axis is a: any Q with Q e3 = a.
      const Eigen::Matrix3d Q = Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitZ(), a).toRotationMatrix();
      const auto G = rotate_modulus(Gl, Q);
      Vector12 P;
      P << voigt_strain(strain), E, H;
      const double quad = energy_quadratic(G.G, P);
      const double inv = energy_invariant(c, a, strain, E, H);
      worst = std::max(worst, std::abs(inv - quad) / std::abs(quad));
    }
    EXPECT_LT(worst, 1e-10) << name;
  }
}

TEST(InvariantEnergy, FrameIndifference) {
  const auto c = coefficients(library().get("CoFe2O4"));
  std::mt19937_64 rng(12);
  for (int k = 0; k < 200; ++k) {
    const auto angles = random_angles(rng);
    const auto Q = rotation_Q(angles);
    const Eigen::Vector3d a = preferred_direction(angles);
    EXPECT_LT((a - Q.col(2)).norm(), 1e-15);
    const Eigen::Matrix3d strain = random_symmetric(rng);
    const Eigen::Vector3d E = random_vector(rng, 3), H = random_vector(rng, 3);
    const double global = energy_invariant(c, a, strain, E, H);
    const double local = energy_invariant(c, Eigen::Vector3d::UnitZ(), Q.transpose() * strain * Q, Q.transpose() * E,
                                          Q.transpose() * H);
    EXPECT_NEAR(global, local, 1e-10 * std::abs(local));
  }
}

TEST(InvariantEnergy, NonUnitDirectionRaises) {
  const auto c = coefficients(library().get("BaTiO3"));
  EXPECT_THROW(energy_invariant(c, Eigen::Vector3d(0, 0, 2), Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(),
                                Eigen::Vector3d::Zero()),
               ConfigError);
}

TEST(WorkingUnits, CoherentCouplingScale) {
  // e²/ε must come out in GPa: 18.6² / 12.6 nF/m ≈ 27.5 GPa.
  const auto G = to_working_units(build_modulus(library().get("BaTiO3")));
  EXPECT_NEAR(G.e()(2, 2) * G.e()(2, 2) / G.eps()(2, 2), 18.6 * 18.6 / 12.6, 1e-12);
  EXPECT_DOUBLE_EQ(G.C()(0, 0), 166.0);
  EXPECT_DOUBLE_EQ(G.mu()(0, 0), 1260.0);
  const Matrix12& f = working_unit_factors();
  EXPECT_EQ(f(9, 6), 1e9);
  EXPECT_EQ(f, f.transpose());
}

TEST(WorkingUnits, RoundTripPerMode) {
  const auto G = build_modulus(library().get("BaTiO3"));
  for (FieldMode m : {FieldMode::ElectroMech, FieldMode::MagnetoMech, FieldMode::FullyCoupled}) {
    const Eigen::MatrixXd back = from_working_units(to_working_units(G).reduced(m), m);
    EXPECT_LT(rel_diff(back, G.reduced(m)), 1e-15);
  }
}

TEST(FieldModes, SizesAndComponents) {
  EXPECT_EQ(gradient_size(FieldMode::ElectroMech), 9);
  EXPECT_EQ(gradient_size(FieldMode::FullyCoupled), 12);
  EXPECT_EQ(dofs_per_node(FieldMode::MagnetoMech), 4);
  EXPECT_EQ(active_components(FieldMode::MagnetoMech), (std::vector<int>{0, 1, 2, 3, 4, 5, 9, 10, 11}));
  EXPECT_TRUE(mode_covers(FieldMode::FullyCoupled, FieldMode::ElectroMech));
  EXPECT_FALSE(mode_covers(FieldMode::ElectroMech, FieldMode::FullyCoupled));
  EXPECT_EQ(parse_mode(to_string(FieldMode::MagnetoMech)), FieldMode::MagnetoMech);
  EXPECT_THROW(parse_mode("thermal"), ConfigError);
}

TEST(LibraryFormat, RoundTrip) {
  std::stringstream ss;
  write_material_library(ss, library());
  const auto lib = parse_material_library(ss);
  ASSERT_EQ(lib.records.size(), library().records.size());
  for (const auto& r : library().records) {
    const auto& q = lib.get(r.name);
    EXPECT_EQ(q.lattice, r.lattice);
    EXPECT_EQ(q.mode, r.mode);
    EXPECT_EQ(q.params, r.params);
  }
}

TEST(LibraryFormat, Errors) {
  const auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_material_library(in);
  };
  EXPECT_THROW(parse("vemhom-materials 9\n"), IoError);
  EXPECT_THROW(parse("vemhom-materials 1\n[X]\nmode = electroMech\nlattice = hex6mm\nC11 = 1 MPa\n"), ConfigError);
  EXPECT_THROW(parse("vemhom-materials 1\n[X]\nmode = electroMech\nlattice = cubic\n"), ConfigError);
  EXPECT_THROW(parse("vemhom-materials 1\n[X]\nmode = electroMech\nlattice = isotropic\nlambda = 1 GPa\n"
                     "shear = 1 GPa\n[X]\nmode = electroMech\nlattice = isotropic\nlambda = 1 GPa\nshear = 1 GPa\n"),
               ConfigError);
}
