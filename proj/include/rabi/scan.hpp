#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rabi/atomics.hpp"
#include "rabi/config.hpp"
#include "rabi/observables.hpp"
#include "rabi/oracle.hpp"
#include "rabi/propagator.hpp"
#include "rabi/pulse.hpp"

namespace rabi {

enum class Observable { ion_signal, population, relative_phase, ground_population };

const char* to_string(Observable kind);

/// z is row-major with dims (y.size(), x.size()); 1D grids have an empty y.
struct ScanGrid {
  Observable kind = Observable::ion_signal;
  std::size_t level = 0;  // for Observable::population
  std::string x_label = "area_pi";
  std::string y_label;
  std::string z_label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> z;
  /// Optional per-point flag (indeterminate phase).
  std::vector<bool> flagged;

  double at(std::size_t ix, std::size_t iy = 0) const { return z[iy * x.size() + ix]; }
};

/// Shaped pulse of an experiment at its reference energy, with calibrated areas.
struct PulseSetup {
  LevelSystem system;
  Mask mask;                  // with auto amplitudes resolved and the leak window added
  SpectralField spectrum;     // at the reference energy
  TemporalField field;        // at the reference energy
  std::vector<double> areas;  // per transition at the reference energy
  double reference_area = 0;  // A_eff (two excited levels) or A (one)
  PropagationOptions propagation;

  /// Amplitude factor that brings the reference field to effective area `area`.
  double scale_for_area(double area) const { return area / reference_area; }
};

/// Builds the shaped pulse. bandwidth_nm, when set, replaces every configured window width.
PulseSetup build_pulse(const ExperimentConfig& config, std::optional<double> bandwidth_nm = {});

struct ScanOptions {
  std::size_t workers = 1;
};

/// Runs body(i) for i in [0, n) on a pool of workers. The first failing index (lowest i)
/// determines the rethrown exception, so failures are reproducible across worker counts.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body);

/// Ion signal over (area_pi, delay_fs), normalized to its maximum.
ScanGrid run_area_delay_scan(const ExperimentConfig& config, const ScanOptions& options = {});

struct AreaScanResult {
  double bandwidth_nm = 0.0;  // 0: windows as configured
  ScanGrid ground;
  std::vector<ScanGrid> excited;  // one per excited level
  ScanGrid phase;                 // unwrapped relative phase, flagged where indeterminate
  std::vector<PhaseJump> jumps;
};

/// One result per configured bandwidth (or one with the configured windows).
std::vector<AreaScanResult> run_area_scan(const ExperimentConfig& config, const ScanOptions& options = {});

/// Area scan with explicit bandwidth and jump options, used by run_area_scan.
AreaScanResult run_area_scan_at(const ExperimentConfig& config, std::optional<double> bandwidth_nm,
                                const ScanOptions& options = {}, const JumpOptions& jumps = {});

struct RbScanResult {
  ScanGrid population;  // x: energy_J
  oracle::AreaFit fit;
  double first_minimum_J = 0.0;
  /// Area of the synthesized field at the fitted first minimum, in units of pi.
  double simulated_area_pi = 0.0;
  /// Area from the peak intensity and TL duration of that field, in units of pi.
  double intensity_area_pi = 0.0;
};

RbScanResult run_rb_energy_scan(const ExperimentConfig& config, const ScanOptions& options = {});

}  // namespace rabi
