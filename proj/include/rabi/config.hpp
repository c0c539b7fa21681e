#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rabi/observables.hpp"
#include "rabi/pulse.hpp"

namespace rabi {

inline constexpr int config_schema_version = 1;

enum class ScanKind { area_delay, area, rb_energy };

struct Axis {
  double min = 0.0;
  double max = 0.0;
  std::size_t points = 2;

  std::vector<double> values() const;
};

struct SpectrumConfig {
  double center_nm = 768.2;
  double fwhm_nm = 10.3;
  double energy_J = 1e-6;  // reference energy; scans rescale it
};

struct AveragingConfig {
  double diameter_ratio = 0.3;
  int probe_order = 2;
};

struct PrepulseConfig {
  double energy_fraction = 0.01;
  /// Unset: average over 16 phases.
  std::optional<double> phase_rad;
};

struct NumericsConfig {
  std::size_t grid_points = std::size_t{1} << 14;
  std::optional<double> half_span_nm;
  std::size_t oversample = 16;
  std::optional<double> rk4_step_fs;
  int supergauss_order = 1;
  bool include_772nm_leak = false;
  double beam_area_cm2 = 1e-3;
};

/// The 772 nm leak window of the pulse shaper (attributed to the D1 resonance).
Window leak_window();

/// One experiment = one figure. See README for the YAML dialect.
struct ExperimentConfig {
  int schema_version = config_schema_version;
  std::string preset = "K-D";
  std::optional<double> k_d1_dipole;
  SpectrumConfig spectrum;
  std::optional<double> carrier_nm;
  Mask mask;
  /// Indices of windows whose relative amplitude is solved for A1 = A2.
  std::vector<std::size_t> auto_windows;
  ScanKind kind = ScanKind::area_delay;
  Axis area_pi{0.0, 4.0, 41};
  Axis delay_fs{-2000.0, 6000.0, 160};
  Axis energy_J{0.0, 1e-6, 60};
  /// Area scans: window widths to run, each replacing every window's fwhm. Empty: as configured.
  std::vector<double> bandwidths_nm;
  ProbeModel probe;
  std::optional<AveragingConfig> averaging;
  std::optional<PrepulseConfig> prepulse;
  NumericsConfig numerics;
};

/// Parses YAML text. Errors are ConfigError with "source:line:column: message".
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");

/// Reads and parses a file; errors name the path.
ExperimentConfig load_config(const std::string& path);

const char* to_string(ScanKind kind);

}  // namespace rabi
