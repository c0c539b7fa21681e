#pragma once

// Unit system used across the library:
//   time               fs
//   angular frequency  rad/fs
//   wavelength         nm
//   dipole moment      C*m
//   electric field     V/m
//   energy             J
//   intensity          W/cm^2 at the public surface

#include <numbers>

namespace rabi::units {

inline constexpr double pi = std::numbers::pi;

inline constexpr double speed_of_light_m_per_s = 299792458.0;
inline constexpr double speed_of_light_nm_per_fs = 299.792458;
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m
inline constexpr double hbar_J_s = 1.054571817e-34;
inline constexpr double hbar_J_fs = hbar_J_s * 1e15;
inline constexpr double fs_per_s = 1e15;
inline constexpr double m2_per_cm2 = 1e-4;

/// 2*pi*c/lambda, lambda in nm, result in rad/fs.
constexpr double angular_frequency(double wavelength_nm) {
  return 2.0 * pi * speed_of_light_nm_per_fs / wavelength_nm;
}

/// Inverse of angular_frequency.
constexpr double wavelength(double angular_frequency_rad_per_fs) {
  return 2.0 * pi * speed_of_light_nm_per_fs / angular_frequency_rad_per_fs;
}

/// rad/fs -> ordinary frequency in THz.
constexpr double to_THz(double angular_frequency_rad_per_fs) {
  return angular_frequency_rad_per_fs / (2.0 * pi) * 1e3;
}

}  // namespace rabi::units
