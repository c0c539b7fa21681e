#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rabi {

struct Level {
  std::string label;
  double angular_frequency = 0.0;  // rad/fs above the ground state
};

struct Transition {
  std::size_t lower = 0;
  std::size_t upper = 0;
  double dipole = 0.0;  // C*m
};

/// Ordered set of atomic levels with their dipole couplings.
///
/// Level 0 is the ground state (frequency exactly 0); excited levels have
/// strictly increasing positive frequencies. Every excited level must be
/// reachable from the ground state. Immutable after construction.
class LevelSystem {
 public:
  LevelSystem(std::string name, std::vector<Level> levels,
              std::vector<Transition> transitions);

  const std::string& name() const { return name_; }
  const std::vector<Level>& levels() const { return levels_; }
  const std::vector<Transition>& transitions() const { return transitions_; }

  std::size_t size() const { return levels_.size(); }
  std::size_t excited_count() const { return levels_.size() - 1; }
  double frequency(std::size_t level) const;

  /// Dipole of the ground <-> level coupling, 0 when the pair is not coupled.
  double ground_dipole(std::size_t level) const;

 private:
  std::string name_;
  std::vector<Level> levels_;
  std::vector<Transition> transitions_;
};

struct PresetOptions {
  /// Overrides the K D1 (4s1/2 - 4p1/2) dipole; D2 follows with a sqrt(2) ratio.
  std::optional<double> k_d1_dipole;
};

/// Names accepted by make_preset.
std::vector<std::string> preset_names();

/// "Rb-D1": 5s1/2, 5p1/2 at 794.75 nm, dipole 2.53e-29 C*m.
/// "K-D":   4s1/2, 4p1/2 at 769.9 nm, 4p3/2 at 766.5 nm, mu(D2)/mu(D1) = sqrt(2).
/// Throws ConfigError for unknown names.
LevelSystem make_preset(std::string_view name, const PresetOptions& options = {});

/// |omega_i - omega_j| / 2pi in THz. Both indices must be excited levels.
double splitting(const LevelSystem& system, std::size_t i, std::size_t j);

namespace presets {
inline constexpr double rb_d1_wavelength_nm = 794.75;
inline constexpr double rb_d1_dipole = 2.53e-29;
inline constexpr double k_d1_wavelength_nm = 769.9;
inline constexpr double k_d2_wavelength_nm = 766.5;
inline constexpr double k_d1_dipole = 2.5e-29;
}  // namespace presets

}  // namespace rabi
