#include "vemhom/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "vemhom/error.hpp"
#include "vemhom/parallel.hpp"

namespace vemhom {

std::atomic<long> DirichletSolver::global_{0};

DofMap::DofMap(const Discretization& disc, std::vector<Index> perm) : mode_(disc.mode()), nf_(dofs_per_node(disc.mode())) {
  const std::size_t n = disc.num_nodes();
  if (perm.empty()) {
    perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<Index>(i);
  }
  if (perm.size() != n) throw ConfigError("node permutation size does not match the mesh");
  std::vector<bool> seen(n, false);
  for (Index r : perm) {
    if (r < 0 || static_cast<std::size_t>(r) >= n || seen[static_cast<std::size_t>(r)])
      throw ConfigError("node permutation is not a bijection");
    seen[static_cast<std::size_t>(r)] = true;
  }
  rank_ = std::move(perm);
  nDofs_ = n * static_cast<std::size_t>(nf_);
  slot_.assign(nDofs_, 0);
  // Interior/boundary slots follow global dof order.
  std::vector<Index> nodeOfRank(n);
  for (std::size_t i = 0; i < n; ++i) nodeOfRank[static_cast<std::size_t>(rank_[i])] = static_cast<Index>(i);
  for (std::size_t r = 0; r < n; ++r) {
    const Index node = nodeOfRank[r];
    const bool bnd = disc.is_boundary(node);
    for (int f = 0; f < nf_; ++f) {
      const Index d = static_cast<Index>(r) * nf_ + f;
      if (bnd) {
        boundary_.push_back(d);
        slot_[static_cast<std::size_t>(d)] = -static_cast<Index>(boundary_.size());
      } else {
        slot_[static_cast<std::size_t>(d)] = static_cast<Index>(interior_.size());
        interior_.push_back(d);
      }
    }
  }
}

namespace {

double element_asymmetry(const Eigen::MatrixXd& K) {
  const double scale = K.cwiseAbs().maxCoeff();
  return scale > 0 ? (K - K.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
}

}  // namespace

SparseSystem assemble(const Discretization& disc, const DofMap& dofs, unsigned workers) {
  const std::size_t ne = disc.num_elements();
  const int nf = dofs.fields();
  const Eigen::Index nd = static_cast<Eigen::Index>(dofs.num_dofs());
  const Eigen::Index nP = gradient_size(disc.mode());
  SparseSystem sys;
  sys.K.resize(nd, nd);
  sys.AP.resize(nP, nd);
  sys.AL.resize(nP, nd);

  constexpr std::size_t kChunk = 4096;
  std::vector<ElementSystem> buf;
  std::vector<Eigen::Triplet<double, Eigen::Index>> tk, tp, tl;
  for (std::size_t start = 0; start < ne; start += kChunk) {
    const std::size_t count = std::min(kChunk, ne - start);
    buf.assign(count, ElementSystem{});
    parallel_for(count, workers, [&](std::size_t i) { buf[i] = disc.element(start + i); });
    tk.clear();
    tp.clear();
    tl.clear();
    for (std::size_t i = 0; i < count; ++i) {
      const ElementSystem& es = buf[i];
      const double asym = element_asymmetry(es.K);
      sys.stats.maxElementAsymmetry = std::max(sys.stats.maxElementAsymmetry, asym);
      if (asym > 1e-12)
        throw NumericalError("element " + std::to_string(start + i) + " (owner " + std::to_string(es.owner) +
                             ") is not symmetric: defect " + std::to_string(asym));
      std::vector<Index> map;
      map.reserve(es.nodes.size() * static_cast<std::size_t>(nf));
      for (Index node : es.nodes) {
        if (node < 0 || static_cast<std::size_t>(node) >= disc.num_nodes())
          throw NumericalError("element " + std::to_string(start + i) + " references an unnumbered node");
        for (int f = 0; f < nf; ++f) map.push_back(dofs.dof(node, f));
      }
      const Eigen::Index m = static_cast<Eigen::Index>(map.size());
      if (es.K.rows() != m || es.avgP.cols() != m || es.avgL.cols() != m)
        throw NumericalError("element " + std::to_string(start + i) + " has inconsistent matrix sizes");
      for (Eigen::Index c = 0; c < m; ++c) {
        for (Eigen::Index r = 0; r < m; ++r)
          if (es.K(r, c) != 0.0) tk.emplace_back(map[static_cast<std::size_t>(r)], map[static_cast<std::size_t>(c)], es.K(r, c));
        for (Eigen::Index r = 0; r < nP; ++r) {
          if (es.avgP(r, c) != 0.0) tp.emplace_back(r, map[static_cast<std::size_t>(c)], es.avgP(r, c));
          if (es.avgL(r, c) != 0.0) tl.emplace_back(r, map[static_cast<std::size_t>(c)], es.avgL(r, c));
        }
      }
    }
    sys.stats.triplets += tk.size();
    SparseMatrix part(nd, nd), partP(nP, nd), partL(nP, nd);
    part.setFromTriplets(tk.begin(), tk.end());
    partP.setFromTriplets(tp.begin(), tp.end());
    partL.setFromTriplets(tl.begin(), tl.end());
    if (start == 0) {
      sys.K = std::move(part);
      sys.AP = std::move(partP);
      sys.AL = std::move(partL);
    } else {
      sys.K += part;
      sys.AP += partP;
      sys.AL += partL;
    }
  }
  sys.stats.elements = ne;
  sys.K.makeCompressed();
  return sys;
}

double symmetry_defect(const SparseMatrix& K) {
  const SparseMatrix Kt = K.transpose();
  const SparseMatrix D = K - Kt;
  double top = 0.0, diff = 0.0;
  for (Eigen::Index k = 0; k < K.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(K, k); it; ++it) top = std::max(top, std::abs(it.value()));
  for (Eigen::Index k = 0; k < D.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(D, k); it; ++it) diff = std::max(diff, std::abs(it.value()));
  return top > 0 ? diff / top : 0.0;
}

void write_matrix_market(std::ostream& out, const SparseMatrix& K) {
  out << "%%MatrixMarket matrix coordinate real general\n" << K.rows() << ' ' << K.cols() << ' ' << K.nonZeros() << '\n';
  char buf[96];
  for (Eigen::Index k = 0; k < K.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(K, k); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%lld %lld %.17g\n", static_cast<long long>(it.row() + 1),
                    static_cast<long long>(it.col() + 1), it.value());
      out << buf;
    }
  if (!out) throw IoError("failed writing matrix dump");
}

Eigen::VectorXd dof_scales(const DofMap& dofs, const Eigen::Vector3d& fs) {
  const FieldMode mode = dofs.mode();
  Eigen::VectorXd s(static_cast<Eigen::Index>(dofs.num_dofs()));
  for (Eigen::Index d = 0; d < s.size(); ++d) {
    const int f = dofs.field_of(d);
    if (f < 3) s[d] = fs[0];
    else if (f == 3) s[d] = mode == FieldMode::MagnetoMech ? fs[2] : fs[1];
    else s[d] = fs[2];
  }
  return s;
}

DirichletSolver::DirichletSolver(const SparseMatrix& K, const DofMap& dofs, const Eigen::Vector3d& fieldScales)
    : dofs_(dofs) {
  const Eigen::Index nI = static_cast<Eigen::Index>(dofs.interior().size());
  const Eigen::Index nB = static_cast<Eigen::Index>(dofs.boundary().size());
  const Eigen::VectorXd s = dof_scales(dofs, fieldScales);
  scaleI_.resize(nI);
  for (Eigen::Index i = 0; i < nI; ++i) scaleI_[i] = s[dofs.interior()[static_cast<std::size_t>(i)]];

  std::vector<Eigen::Triplet<double, Eigen::Index>> ti, tb;
  for (Eigen::Index c = 0; c < K.outerSize(); ++c) {
    const Index sc = dofs.slot(c);
    if (sc < 0) {
      for (SparseMatrix::InnerIterator it(K, c); it; ++it) {
        const Index sr = dofs.slot(it.row());
        if (sr >= 0) tb.emplace_back(sr, -sc - 1, it.value());
      }
    } else {
      for (SparseMatrix::InnerIterator it(K, c); it; ++it) {
        const Index sr = dofs.slot(it.row());
        if (sr >= 0) ti.emplace_back(sr, sc, it.value());
      }
    }
  }
  Kii_.resize(nI, nI);
  Kii_.setFromTriplets(ti.begin(), ti.end());
  Kib_.resize(nI, nB);
  Kib_.setFromTriplets(tb.begin(), tb.end());
  report_.interiorDofs = static_cast<std::size_t>(nI);
}

void DirichletSolver::factorize() {
  ++factorizations_;
  ++global_;
  if (Kii_.rows() == 0) return;
  const SparseMatrix scaled = scaleI_.asDiagonal() * Kii_ * scaleI_.asDiagonal();
  ldlt_.compute(scaled);
  if (ldlt_.info() != Eigen::Success) throw NumericalError("sparse LDLT factorization failed (zero pivot)");
  const Eigen::VectorXd d = ldlt_.vectorD().cwiseAbs();
  report_.minPivot = d.minCoeff();
  report_.maxPivot = d.maxCoeff();
  report_.pivotRatio = report_.minPivot > 0 ? report_.maxPivot / report_.minPivot : INFINITY;
  if (!(report_.minPivot > 1e-12 * report_.maxPivot))
    throw NumericalError("sparse LDLT factorization is rank deficient (pivot ratio " +
                         std::to_string(report_.pivotRatio) + ")");
}

Eigen::VectorXd DirichletSolver::solve(const Eigen::VectorXd& ub, double residualTol, double* residualOut) const {
  const Eigen::Index nB = static_cast<Eigen::Index>(dofs_.boundary().size());
  if (ub.size() != nB) throw ConfigError("boundary value vector does not cover all boundary dofs");
  if (factorizations_ == 0) throw NumericalError("solve called before factorize");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs_.num_dofs()));
  for (Eigen::Index b = 0; b < nB; ++b) full[dofs_.boundary()[static_cast<std::size_t>(b)]] = ub[b];
  if (Kii_.rows() == 0) {
    if (residualOut) *residualOut = 0.0;
    return full;
  }
  const Eigen::VectorXd rhs = -(Kib_ * ub);
  const Eigen::VectorXd y = ldlt_.solve(scaleI_.asDiagonal() * rhs);
  const Eigen::VectorXd ui = scaleI_.asDiagonal() * y;
  const double rn = rhs.norm();
  const double res = (Kii_ * ui - rhs).norm() / (rn > 0 ? rn : 1.0);
  if (residualOut) *residualOut = res;
  if (!(res < residualTol))
    throw NumericalError("Dirichlet solve residual " + std::to_string(res) + " exceeds tolerance");
  for (Eigen::Index i = 0; i < ui.size(); ++i) full[dofs_.interior()[static_cast<std::size_t>(i)]] = ui[i];
  return full;
}

}  // namespace vemhom
