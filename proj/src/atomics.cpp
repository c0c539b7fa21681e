#include "rabi/atomics.hpp"

#include <cmath>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "rabi/error.hpp"
#include "rabi/units.hpp"

namespace rabi {

LevelSystem::LevelSystem(std::string name, std::vector<Level> levels,
                         std::vector<Transition> transitions)
    : name_(std::move(name)), levels_(std::move(levels)), transitions_(std::move(transitions)) {
  if (levels_.empty()) throw ConfigError("level system '" + name_ + "' has no levels");
  if (levels_.front().angular_frequency != 0.0) {
    throw ConfigError("level system '" + name_ + "': ground level frequency must be exactly 0");
  }
  for (std::size_t k = 1; k < levels_.size(); ++k) {
    if (!(levels_[k].angular_frequency > levels_[k - 1].angular_frequency)) {
      throw ConfigError(fmt::format(
          "level system '{}': level {} ('{}') must lie strictly above level {}", name_, k,
          levels_[k].label, k - 1));
    }
  }

  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<bool> reachable(levels_.size(), false);
  reachable[0] = true;
  for (const auto& t : transitions_) {
    if (t.lower >= levels_.size() || t.upper >= levels_.size()) {
      throw ConfigError(fmt::format("level system '{}': transition {}->{} references a missing level",
                                    name_, t.lower, t.upper));
    }
    if (t.lower >= t.upper) {
      throw ConfigError(fmt::format("level system '{}': transition {}->{} must go upward", name_,
                                    t.lower, t.upper));
    }
    if (!(t.dipole > 0.0)) {
      throw ConfigError(fmt::format("level system '{}': transition {}->{} needs a positive dipole",
                                    name_, t.lower, t.upper));
    }
    if (!seen.emplace(t.lower, t.upper).second) {
      throw ConfigError(fmt::format("level system '{}': duplicate transition {}->{}", name_,
                                    t.lower, t.upper));
    }
    if (t.lower == 0) reachable[t.upper] = true;
  }
  for (std::size_t k = 1; k < levels_.size(); ++k) {
    if (!reachable[k]) {
      throw ConfigError(fmt::format("level system '{}': level '{}' is not coupled to the ground state",
                                    name_, levels_[k].label));
    }
  }
}

double LevelSystem::frequency(std::size_t level) const {
  if (level >= levels_.size()) {
    throw ConfigError(fmt::format("level index {} out of range for '{}'", level, name_));
  }
  return levels_[level].angular_frequency;
}

double LevelSystem::ground_dipole(std::size_t level) const {
  for (const auto& t : transitions_) {
    if (t.lower == 0 && t.upper == level) return t.dipole;
  }
  return 0.0;
}

std::vector<std::string> preset_names() { return {"Rb-D1", "K-D"}; }

LevelSystem make_preset(std::string_view name, const PresetOptions& options) {
  using units::angular_frequency;
  if (name == "Rb-D1") {
    return LevelSystem("Rb-D1",
                       {{"5s1/2", 0.0},
                        {"5p1/2", angular_frequency(presets::rb_d1_wavelength_nm)}},
                       {{0, 1, presets::rb_d1_dipole}});
  }
  if (name == "K-D") {
    const double d1 = options.k_d1_dipole.value_or(presets::k_d1_dipole);
    if (!(d1 > 0.0)) throw ConfigError("K-D preset: D1 dipole must be positive");
    return LevelSystem("K-D",
                       {{"4s1/2", 0.0},
                        {"4p1/2", angular_frequency(presets::k_d1_wavelength_nm)},
                        {"4p3/2", angular_frequency(presets::k_d2_wavelength_nm)}},
                       {{0, 1, d1}, {0, 2, d1 * std::sqrt(2.0)}});
  }
  throw ConfigError(fmt::format("unknown preset '{}'; valid presets are: {}", name,
                                fmt::join(preset_names(), ", ")));
}

double splitting(const LevelSystem& system, std::size_t i, std::size_t j) {
  if (i == 0 || j == 0 || i >= system.size() || j >= system.size()) {
    throw ConfigError(fmt::format("splitting({}, {}): '{}' has excited levels 1..{}", i, j,
                                  system.name(), system.excited_count()));
  }
  return units::to_THz(std::abs(system.frequency(i) - system.frequency(j)));
}

}  // namespace rabi
