#include "vemhom/grains.hpp"

#include <cmath>
#include <map>
#include <random>

#include "vemhom/error.hpp"

namespace vemhom {

std::vector<EulerAngles> random_orientations(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::vector<EulerAngles> out(count);
  for (auto& a : out) {
    a.theta1 = angle(rng);
    a.theta2 = angle(rng);
    a.theta3 = angle(rng);
  }
  return out;
}

GrainAssignment uniform_assignment(std::size_t cells, const std::string& material, std::uint64_t orientationSeed) {
  GrainAssignment g;
  g.materials.assign(cells, material);
  g.angles = random_orientations(cells, orientationSeed);
  return g;
}

std::vector<GeneralizedModulus> grain_moduli(const GrainAssignment& grains, const MaterialLibrary& lib, FieldMode mode,
                                             std::vector<std::string>* warnings) {
  if (grains.angles.size() != grains.materials.size())
    throw ConfigError("grain assignment: angle and material lists differ in length");
  std::map<std::string, GeneralizedModulus> local;
  std::vector<GeneralizedModulus> out;
  out.reserve(grains.size());
  for (std::size_t g = 0; g < grains.size(); ++g) {
    const std::string& name = grains.materials[g];
    auto it = local.find(name);
    if (it == local.end()) {
      const MaterialRecord& rec = lib.get(name);
      if (!mode_covers(rec.mode, mode))
        throw ConfigError("material '" + name + "' is declared " + to_string(rec.mode) + " and cannot run in " +
                          to_string(mode) + " mode");
      it = local.emplace(name, build_modulus(rec, warnings)).first;
    }
    out.push_back(rotate_modulus(it->second, grains.angles[g]));
  }
  return out;
}

}  // namespace vemhom
