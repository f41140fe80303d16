#include <algorithm>
#include <numeric>
#include <sstream>

#include "support.hpp"
#include "vemhom/assembly.hpp"
#include "vemhom/discretization.hpp"
#include "vemhom/error.hpp"
#include "vemhom/homogenization.hpp"

using namespace vemhom;
using namespace vemhom::testing;

namespace {

/// Hand-built discretization over explicit dense element matrices.
class ToyDiscretization : public Discretization {
 public:
  ToyDiscretization(std::vector<Point3> nodes, std::vector<bool> boundary, std::vector<ElementSystem> elements)
      : nodes_(std::move(nodes)), boundary_(std::move(boundary)), elements_(std::move(elements)) {}
  std::string method() const override { return "toy"; }
  FieldMode mode() const override { return FieldMode::ElectroMech; }
  std::size_t num_nodes() const override { return nodes_.size(); }
  const Point3& node(Index id) const override { return nodes_[static_cast<std::size_t>(id)]; }
  bool is_boundary(Index id) const override { return boundary_[static_cast<std::size_t>(id)]; }
  std::size_t num_elements() const override { return elements_.size(); }
  ElementSystem element(std::size_t e) const override { return elements_[e]; }
  void surface_weights(std::vector<Index>& nodes, Eigen::Matrix3Xd& w) const override {
    nodes.clear();
    w.resize(3, 0);
  }
  double domain_volume() const override { return 1.0; }

 private:
  std::vector<Point3> nodes_;
  std::vector<bool> boundary_;
  std::vector<ElementSystem> elements_;
};

ElementSystem random_element(std::mt19937_64& rng, std::vector<Index> nodes, bool symmetric = true) {
  ElementSystem s;
  s.nodes = std::move(nodes);
  const Eigen::Index n = static_cast<Eigen::Index>(s.nodes.size()) * 4;
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index j = 0; j < n; ++j) A.col(j) = random_vector(rng, n);
  s.K = symmetric ? Eigen::MatrixXd(A + A.transpose()) : A;
  s.avgP = Eigen::MatrixXd::Zero(9, n);
  s.avgL = Eigen::MatrixXd::Zero(9, n);
  return s;
}

GrainModuli batio3_grains(std::size_t cells, std::uint64_t seed, FieldMode mode) {
  return grain_moduli(uniform_assignment(cells, "BaTiO3", seed), library(), mode);
}

Eigen::MatrixXd dense(const SparseMatrix& K) { return Eigen::MatrixXd(K); }

}  // namespace

TEST(Assembly, SingleElementEqualsElementMatrix) {
  const auto mesh = voronoi_mesh(1, 1);
  const auto mode = FieldMode::FullyCoupled;
  VemDiscretization disc(mesh, batio3_grains(1, 2, mode), mode, 0.1);
  DofMap dofs(disc);
  const auto sys = assemble(disc, dofs);
  const auto el = disc.element(0);
  // Single cell: local node a is mesh vertex a, so global and local dofs coincide.
  EXPECT_LT((dense(sys.K) - el.K).cwiseAbs().maxCoeff(), 1e-15 * el.K.cwiseAbs().maxCoeff());
  EXPECT_EQ(sys.stats.elements, 1u);
}

TEST(Assembly, DisconnectedElementsAreBlockDiagonal) {
  std::mt19937_64 rng(1);
  std::vector<Point3> nodes(6, Point3::Zero());
  ToyDiscretization disc(nodes, std::vector<bool>(6, false),
                         {random_element(rng, {0, 1, 2}), random_element(rng, {3, 4, 5})});
  DofMap dofs(disc);
  const Eigen::MatrixXd K = dense(assemble(disc, dofs).K);
  EXPECT_EQ(K.topRightCorner(12, 12).norm(), 0.0);
  EXPECT_EQ(K.bottomLeftCorner(12, 12).norm(), 0.0);
  EXPECT_EQ(K.topLeftCorner(12, 12), disc.element(0).K);
  EXPECT_EQ(K.bottomRightCorner(12, 12), disc.element(1).K);
}

TEST(Assembly, DuplicateContributionsAreSummed) {
  std::mt19937_64 rng(2);
  std::vector<Point3> nodes(2, Point3::Zero());
  ToyDiscretization disc(nodes, std::vector<bool>(2, false),
                         {random_element(rng, {0, 1}), random_element(rng, {1, 0})});
  DofMap dofs(disc);
  const Eigen::MatrixXd K = dense(assemble(disc, dofs).K);
  Eigen::MatrixXd expected = disc.element(0).K;
  // Element 1 lists the nodes in reverse order.
  const Eigen::MatrixXd& K1 = disc.element(1).K;
  Eigen::VectorXi perm(8);
  perm << 4, 5, 6, 7, 0, 1, 2, 3;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) expected(perm[i], perm[j]) += K1(i, j);
  EXPECT_LT((K - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Assembly, AsymmetricElementRaises) {
  std::mt19937_64 rng(3);
  ToyDiscretization disc(std::vector<Point3>(2, Point3::Zero()), {false, false},
                         {random_element(rng, {0, 1}, false)});
  DofMap dofs(disc);
  EXPECT_THROW(assemble(disc, dofs), NumericalError);
}

TEST(Assembly, GlobalKernelContainsRigidModes) {
  const auto mesh = voronoi_mesh(5, 3);
  const auto mode = FieldMode::FullyCoupled;
  VemDiscretization disc(mesh, batio3_grains(5, 4, mode), mode, 0.1);
  DofMap dofs(disc);
  const auto sys = assemble(disc, dofs);
  const double kn = dense(sys.K).norm();
  for (int f = 0; f < 5; ++f) {
    Eigen::VectorXd t = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs.num_dofs()));
    for (std::size_t n = 0; n < disc.num_nodes(); ++n) t[dofs.dof(static_cast<Index>(n), f)] = 1.0;
    EXPECT_LT((sys.K * t).norm(), 1e-9 * kn) << "field " << f;
  }
  EXPECT_LT(symmetry_defect(sys.K), 1e-12);
}

TEST(Assembly, IndependentOfWorkerCount) {
  const auto mesh = voronoi_mesh(12, 5);
  const auto mode = FieldMode::ElectroMech;
  const auto moduli = batio3_grains(12, 6, mode);
  Tet4Discretization disc(triangulate(mesh), moduli, mode);
  DofMap dofs(disc);
  const auto a = assemble(disc, dofs, 1), b = assemble(disc, dofs, 3);
  EXPECT_EQ((dense(a.K) - dense(b.K)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((dense(a.AL) - dense(b.AL)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(DofMapTest, BijectionAndBoundaryPartition) {
  const auto mesh = voronoi_mesh(6, 7);
  const auto mode = FieldMode::FullyCoupled;
  VemDiscretization disc(mesh, batio3_grains(6, 8, mode), mode, 0.1);
  std::vector<Index> perm(disc.num_nodes());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<Index>(perm.size() - 1 - i);
  DofMap dofs(disc, perm);
  std::vector<bool> hit(dofs.num_dofs(), false);
  for (std::size_t n = 0; n < disc.num_nodes(); ++n)
    for (int f = 0; f < dofs.fields(); ++f) {
      const Index d = dofs.dof(static_cast<Index>(n), f);
      ASSERT_FALSE(hit[static_cast<std::size_t>(d)]);
      hit[static_cast<std::size_t>(d)] = true;
      EXPECT_EQ(dofs.field_of(d), f);
      EXPECT_EQ(dofs.is_boundary_dof(d), disc.is_boundary(static_cast<Index>(n)));
    }
  EXPECT_EQ(dofs.boundary().size(), mesh.boundaryNodeIds.size() * 5);
  EXPECT_EQ(dofs.interior().size() + dofs.boundary().size(), dofs.num_dofs());
  EXPECT_THROW(DofMap(disc, std::vector<Index>(disc.num_nodes(), 0)), ConfigError);
}

TEST(Solver, ZeroBoundaryValuesGiveZero) {
  const auto mesh = voronoi_mesh(8, 9);
  const auto mode = FieldMode::FullyCoupled;
  VemDiscretization disc(mesh, batio3_grains(8, 10, mode), mode, 0.1);
  DofMap dofs(disc);
  const auto sys = assemble(disc, dofs);
  DirichletSolver solver(sys.K, dofs, disc.fieldScales);
  solver.factorize();
  const auto p = solver.solve(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs.boundary().size())));
  EXPECT_EQ(p.norm(), 0.0);
}

TEST(Solver, HomogeneousCubeReproducesLinearField) {
  // One material, one orientation: the affine field is the exact solution.
  const auto mesh = voronoi_mesh(10, 11);
  const auto mode = FieldMode::FullyCoupled;
  const auto G = build_modulus(library().get("BaTiO3"));
  VemDiscretization disc(mesh, GrainModuli(10, G), mode, 0.1);
  DofMap dofs(disc);
  const auto sys = assemble(disc, dofs);
  DirichletSolver solver(sys.K, dofs, disc.fieldScales);
  solver.factorize();
  const auto p = solver.solve(boundary_values(disc, dofs, Eigen::VectorXd::Unit(12, 0)));
  for (std::size_t n = 0; n < disc.num_nodes(); ++n) {
    const Point3& x = disc.node(static_cast<Index>(n));
    EXPECT_NEAR(p[dofs.dof(static_cast<Index>(n), 0)], x.x(), 1e-10);
    for (int f = 1; f < 5; ++f) EXPECT_NEAR(p[dofs.dof(static_cast<Index>(n), f)], 0.0, 1e-10);
  }
}

TEST(Solver, MatchesDenseOracle) {
  const auto mesh = voronoi_mesh(6, 12);
  const auto mode = FieldMode::ElectroMech;
  Tet4Discretization disc(triangulate(mesh), batio3_grains(6, 13, mode), mode);
  DofMap dofs(disc);
  const auto sys = assemble(disc, dofs);
  DirichletSolver solver(sys.K, dofs, disc.fieldScales);
  solver.factorize();
  std::mt19937_64 rng(14);
  const Eigen::VectorXd ub = random_vector(rng, static_cast<Eigen::Index>(dofs.boundary().size()));
  const auto p = solver.solve(ub);
  // Dense oracle: LU on the interior block of the working-unit matrix.
  const Eigen::MatrixXd K = dense(sys.K);
  const auto& I = dofs.interior();
  const auto& B = dofs.boundary();
  Eigen::MatrixXd Kii(I.size(), I.size()), Kib(I.size(), B.size());
  for (std::size_t i = 0; i < I.size(); ++i) {
    for (std::size_t j = 0; j < I.size(); ++j) Kii(i, j) = K(I[i], I[j]);
    for (std::size_t j = 0; j < B.size(); ++j) Kib(i, j) = K(I[i], B[j]);
  }
  const Eigen::VectorXd ui = Kii.fullPivLu().solve(-Kib * ub);
  for (std::size_t i = 0; i < I.size(); ++i)
    EXPECT_NEAR(p[I[i]], ui[static_cast<Eigen::Index>(i)], 1e-10 * (1 + ui.cwiseAbs().maxCoeff()));
  for (std::size_t j = 0; j < B.size(); ++j) EXPECT_EQ(p[B[j]], ub[static_cast<Eigen::Index>(j)]);
}

TEST(Solver, InvariantUnderDofReordering) {
  const auto mesh = voronoi_mesh(5, 15);
  const auto mode = FieldMode::FullyCoupled;
  VemDiscretization disc(mesh, batio3_grains(5, 16, mode), mode, 0.1);
  std::vector<Index> perm(disc.num_nodes());
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(17);
  std::shuffle(perm.begin(), perm.end(), rng);
  DofMap plain(disc), shuffled(disc, perm);
  const auto solve = [&](const DofMap& dofs, int k) {
    const auto sys = assemble(disc, dofs);
    DirichletSolver solver(sys.K, dofs, disc.fieldScales);
    solver.factorize();
    return solver.solve(boundary_values(disc, dofs, Eigen::VectorXd::Unit(12, k)));
  };
  for (int k : {0, 4, 7, 11}) {
    const auto a = solve(plain, k), b = solve(shuffled, k);
    double worst = 0;
    for (std::size_t n = 0; n < disc.num_nodes(); ++n)
      for (int f = 0; f < 5; ++f)
        worst = std::max(worst, std::abs(a[plain.dof(static_cast<Index>(n), f)] -
                                         b[shuffled.dof(static_cast<Index>(n), f)]));
    EXPECT_LT(worst, 1e-11 * (1 + a.cwiseAbs().maxCoeff())) << "case " << k;
  }
}

TEST(Solver, OneFactorizationServesAllCases) {
  const auto mesh = voronoi_mesh(6, 18);
  const auto mode = FieldMode::FullyCoupled;
  VemDiscretization disc(mesh, batio3_grains(6, 19, mode), mode, 0.1);
  DofMap dofs(disc);
  const auto sys = assemble(disc, dofs);
  DirichletSolver shared(sys.K, dofs, disc.fieldScales);
  shared.factorize();
  for (int k = 0; k < 12; ++k) {
    const auto bv = boundary_values(disc, dofs, Eigen::VectorXd::Unit(12, k));
    DirichletSolver fresh(sys.K, dofs, disc.fieldScales);
    fresh.factorize();
    EXPECT_EQ((shared.solve(bv) - fresh.solve(bv)).cwiseAbs().maxCoeff(), 0.0);
  }
  EXPECT_EQ(shared.factorizations(), 1);

  const long before = DirichletSolver::total_factorizations();
  const auto res = homogenize(disc);
  EXPECT_EQ(DirichletSolver::total_factorizations() - before, 1);
  EXPECT_EQ(res.factorizations, 1);
  EXPECT_EQ(res.cases.size(), 12u);
}

TEST(Solver, SingularInteriorBlockRaises) {
  // Interior node with an all-zero element matrix.
  ToyDiscretization disc({Point3::Zero(), Point3::Zero()}, {false, true}, {[] {
                           ElementSystem s;
                           s.nodes = {0, 1};
                           s.K = Eigen::MatrixXd::Zero(8, 8);
                           s.avgP = s.avgL = Eigen::MatrixXd::Zero(9, 8);
                           return s;
                         }()});
  DofMap dofs(disc);
  const auto sys = assemble(disc, dofs);
  DirichletSolver solver(sys.K, dofs, disc.fieldScales);
  EXPECT_THROW(solver.factorize(), NumericalError);
}

TEST(MatrixDump, CoordinateFormat) {
  SparseMatrix K(2, 2);
  K.insert(0, 0) = 1.5;
  K.insert(1, 0) = -2.0;
  K.makeCompressed();
  std::ostringstream out;
  write_matrix_market(out, K);
  EXPECT_EQ(out.str(), "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.5\n2 1 -2\n");
}

TEST(FieldScaling, ScalesFollowModuli) {
  const auto mode = FieldMode::FullyCoupled;
  VemDiscretization disc(voronoi_mesh(3, 1), batio3_grains(3, 2, mode), mode, 0.1);
  // Working-unit diagonals: C ~ 1e2, ε ~ 1e1, μ ~ 1e3.
  EXPECT_EQ(disc.fieldScales[0], 1.0);
  EXPECT_GT(disc.fieldScales[1], 1.0);
  EXPECT_LT(disc.fieldScales[2], 1.0);
  DofMap dofs(disc);
  const auto s = dof_scales(dofs, disc.fieldScales);
  EXPECT_EQ(s[dofs.dof(0, 3)], disc.fieldScales[1]);
  EXPECT_EQ(s[dofs.dof(0, 4)], disc.fieldScales[2]);
}
