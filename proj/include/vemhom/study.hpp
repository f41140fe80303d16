#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "vemhom/discretization.hpp"
#include "vemhom/grains.hpp"
#include "vemhom/homogenization.hpp"

namespace vemhom {

enum class Method { VemVo, FemO1, FemO2, FemO1Refined };

std::string to_string(Method m);
Method parse_method(const std::string& name);

/// Builds the discretization of `mesh` for one method. `levels` only applies
/// to FemO1Refined, `beta` only to VemVo.
std::unique_ptr<Discretization> make_discretization(Method method, const PolyMesh& mesh, const GrainModuli& moduli,
                                                    FieldMode mode, double beta, int levels = 0,
                                                    unsigned workers = 1);

double frobenius(const Eigen::MatrixXd& M);
/// |‖M‖/‖Mref‖ − 1|·100.
double computational_error(const Eigen::MatrixXd& M, const Eigen::MatrixXd& ref);
/// 100·(‖M‖ − ‖Mref‖)/‖Mref‖.
double relative_deviation(const Eigen::MatrixXd& M, const Eigen::MatrixXd& ref);

/// Target sub-blocks of the full 12×12 modulus: G (all), C, e, eps, q, mu,
/// alpha. Blocks are taken as stored in G (coupling and permittivity
/// blocks carry their layout sign; norms are unaffected).
Eigen::MatrixXd target_block(const Eigen::MatrixXd& full, const std::string& target);
/// True when the target has nonzero extent in the mode.
bool target_available(const std::string& target, FieldMode mode);

struct FractionAssignment {
  GrainAssignment grains;
  double requested = 0.0;
  double achieved = 0.0;          ///< volume of inclusion grains / L³
  std::size_t inclusionGrains = 0;
};

/// Grains are shuffled with a seeded mt19937_64 and assigned to
/// `inclusion` until their cumulative volume reaches fraction·L³; the rest
/// get `matrix`. Orientations come from random_orientations(orientationSeed).
FractionAssignment assign_volume_fraction(const PolyMesh& mesh, double fraction, std::uint64_t rngSeed,
                                          const std::string& matrix, const std::string& inclusion,
                                          std::uint64_t orientationSeed);

struct ReferenceOptions {
  int levels = 2;
  std::size_t maxTets = 400000;   ///< memory guard
  std::string cacheDir;           ///< empty disables caching
  unsigned workers = 1;
};

/// Key identifying a reference: mesh, per-grain moduli, mode and levels.
std::string reference_key(const PolyMesh& mesh, const GrainModuli& moduli, FieldMode mode, int levels);

/// Refined FEM-O1 reference. With a cache directory the result (Ḡ and
/// counts) is stored as ref-<key>.json and reused on the next call.
HomogenizationResult build_reference(const PolyMesh& mesh, const GrainModuli& moduli, FieldMode mode,
                                     const ReferenceOptions& options);

/// Evenly spaced grid from lo to hi (inclusive) with step h, computed as
/// lo + i·h to avoid accumulation drift.
std::vector<double> make_grid(double lo, double hi, double h);

/// Index of the minimum; ties go to the smaller index (smaller β). NaN
/// entries are skipped unless all entries are NaN.
std::size_t argmin_first(const std::vector<double>& values);

struct ComparisonRow {
  std::string method;
  std::size_t nodes = 0;
  std::size_t elements = 0;
  std::vector<double> errorC;   ///< E_C per target
  std::vector<double> deviation;  ///< D_rel per target
  double seconds = 0.0;
};

struct ComparisonStudy {
  std::vector<std::string> targets;
  HomogenizationResult reference;
  std::vector<ComparisonRow> rows;
};

/// Every method against `reference` (typically from build_reference).
ComparisonStudy run_comparison(const PolyMesh& mesh, const GrainModuli& moduli, FieldMode mode,
                               const std::vector<Method>& methods, double beta, const std::vector<std::string>& targets,
                               const HomogenizationResult& reference, int levels = 2, unsigned workers = 1);

struct BetaCurve {
  std::vector<std::string> targets;
  std::vector<double> betas;
  /// deviation[t][i]: D_rel of target t at betas[i].
  std::vector<std::vector<double>> deviation;
  std::vector<double> femO1Deviation;  ///< per target
  std::vector<double> betaOpt;         ///< per target
  std::size_t nodes = 0;
};

/// D_rel(β) of VEM-VO on `mesh` against `reference` (full 12×12 layout),
/// plus the coarse FEM-O1 deviation for the β = 1 comparison.
BetaCurve beta_sweep(const PolyMesh& mesh, const GrainModuli& moduli, FieldMode mode, const std::vector<double>& betas,
                     const std::vector<std::string>& targets, const Eigen::MatrixXd& reference, unsigned workers = 1);

struct FractionRow {
  double requested = 0.0, achieved = 0.0;
  std::size_t inclusionGrains = 0;
  std::vector<double> betaOpt;      ///< per target
  std::vector<double> errorAtOpt;   ///< E_C at β_opt per target
  std::vector<double> errorAtBeta;  ///< E_C at the nominal β per target
};

struct FractionStudy {
  std::vector<std::string> targets;
  double nominalBeta = 0.1;
  std::vector<FractionRow> rows;
};

struct FractionSettings {
  std::vector<double> fractions;
  std::vector<double> betas;
  double nominalBeta = 0.1;
  std::string matrix = "BaTiO3";
  std::string inclusion = "CoFe2O4";
  std::uint64_t assignSeed = 1;
  std::uint64_t orientationSeed = 2;
};

FractionStudy run_fraction_sweep(const PolyMesh& mesh, const MaterialLibrary& lib, FieldMode mode,
                                 const FractionSettings& settings, const std::vector<std::string>& targets,
                                 const ReferenceOptions& ref);

/// Plot-ready tables. No timings, so reruns are byte-identical.
void write_comparison_csv(std::ostream& out, const ComparisonStudy& s, const std::string& configHash);
void write_beta_csv(std::ostream& out, const BetaCurve& c, const std::string& configHash);
void write_fraction_csv(std::ostream& out, const FractionStudy& s, const std::string& configHash);

}  // namespace vemhom
