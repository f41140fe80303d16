#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vemhom/materials.hpp"

namespace vemhom {

/// Material name and orientation per grain (cell id order).
struct GrainAssignment {
  std::vector<std::string> materials;
  std::vector<EulerAngles> angles;

  std::size_t size() const { return materials.size(); }
};

/// Independent angles θ_i ~ U[0, 2π) per grain from a seeded mt19937_64.
std::vector<EulerAngles> random_orientations(std::size_t count, std::uint64_t seed);

/// Every grain gets `material` and an orientation from random_orientations.
GrainAssignment uniform_assignment(std::size_t cells, const std::string& material, std::uint64_t orientationSeed);

/// Global-frame moduli per grain. Records whose declared mode does not cover
/// `mode` raise ConfigError.
std::vector<GeneralizedModulus> grain_moduli(const GrainAssignment& grains, const MaterialLibrary& lib, FieldMode mode,
                                             std::vector<std::string>* warnings = nullptr);

}  // namespace vemhom
