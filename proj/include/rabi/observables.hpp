#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rabi/atomics.hpp"
#include "rabi/propagator.hpp"
#include "rabi/pulse.hpp"

namespace rabi {

struct RelativePhase {
  double value = 0.0;  // rad, in (-pi, pi]
  bool indeterminate = false;
};

/// arg(a_2) - arg(a_1) of the two excited levels in the interaction picture,
/// a_k = c_k exp(i (omega_k - carrier) t). The interaction-picture amplitudes are the bare
/// amplitudes with their free phases exp(-i omega_k t) removed, so the value does not depend
/// on the carrier or on the time at which a freely evolving state is sampled.
/// indeterminate is set when either |c_k| <= threshold.
RelativePhase relative_phase(const WavepacketState& state, const LevelSystem& system, double carrier,
                             double threshold = 1e-6);

/// Removes 2 pi discontinuities between neighbours (jumps larger than pi in magnitude).
std::vector<double> unwrap(std::span<const double> phases);

struct PhaseJump {
  double area = 0.0;       // location on the scan axis (midpoint of the jump)
  double size = 0.0;       // rad, signed sum over the merged samples
  std::size_t first = 0;   // index of the sample before the jump
  std::size_t last = 0;    // index of the sample after the jump
  std::vector<std::size_t> levels;  // excited levels (1-based system indices) with a zero nearby

  bool double_zero() const { return levels.size() >= 2; }
  /// "none", "1", "2", ... or "both".
  std::string tag() const;
};

struct JumpOptions {
  double threshold = 0.5;              // rad between adjacent samples
  double population_threshold = 1e-3;  // minima below this count as zeros
  std::size_t window = 2;              // samples on each side searched for a zero
};

/// Finds discrete-derivative outliers of an unwrapped phase series, merging contiguous
/// ones. populations[j] is the series of excited level j + 1 on the same grid.
/// Throws ConfigError when the grids differ in length.
std::vector<PhaseJump> detect_phase_jumps(std::span<const double> grid, std::span<const double> phases,
                                          const std::vector<std::vector<double>>& populations,
                                          const JumpOptions& options = {});

struct BeatTrace {
  std::vector<double> delays;  // fs
  std::vector<double> signal;
};

struct ProbeModel {
  /// One weight per excited level; empty means all equal to 1.
  std::vector<cplx> path_weights;
  /// Excited-state photons consumed by the probe step; enters spatial averaging only.
  int nonlinearity_order = 2;
  /// Probe intensity FWHM; 0 disables the temporal average.
  double duration_fwhm_fs = 120.0;
};

/// Throws ConfigError when the model has no nonzero weight or invalid values.
void validate(const ProbeModel& probe, const LevelSystem& system);

/// S(tau) = |sum_k w_k c_k(tau)|^2 with c_k freely evolved from the final state.
BeatTrace beat_signal(const WavepacketState& final_state, const LevelSystem& system, double carrier,
                      const ProbeModel& probe, std::span<const double> delays);

/// Same, but delays inside the propagated window use the instantaneous state.
BeatTrace beat_signal(const Trajectory& trajectory, const LevelSystem& system, const ProbeModel& probe,
                      std::span<const double> delays);

struct BeatSpectrum {
  std::vector<double> frequencies;  // THz
  std::vector<double> power;
  std::optional<std::size_t> peak;  // index of the strongest non-DC bin, if above the noise floor

  double bin_width() const { return frequencies.size() > 1 ? frequencies[1] - frequencies[0] : 0.0; }
};

/// Mean-subtracted, Hann-windowed |DFT|^2. Throws ConfigError for non-uniform or too small
/// grids and NumericsError when the peak corresponds to fewer than 4 periods in the window.
BeatSpectrum beat_spectrum(const BeatTrace& trace);

/// Average of signal(A(r)) over a Gaussian pump profile weighted by the probe's
/// ionization profile. areas must be increasing; signal is interpolated linearly.
/// Throws ConfigError for diameter_ratio <= 0 or probe_order < 1, and when the area grid
/// does not reach down to the smallest area with a non-negligible weight.
std::vector<double> beam_average(std::span<const double> areas, std::span<const double> signal,
                                 double diameter_ratio, int probe_order);

inline constexpr double prepulse_lead_fs = 2.8e6;
inline constexpr std::size_t prepulse_average_phases = 16;

/// Propagates a weak copy of main (energy fraction, relative optical phase) 2.8 ns ahead of
/// main; main keeps its own time origin. main_scale multiplies both pulses' amplitudes.
/// Throws ConfigError for fraction outside [0, 0.05].
Trajectory prepulse_trajectory(const TemporalField& main, double fraction, double optical_phase,
                               const LevelSystem& system, const WavepacketState& initial,
                               const PropagationOptions& options = {}, double main_scale = 1.0);

struct PrepulseResult {
  std::vector<double> populations;
  /// Final state; set only for a fixed optical phase.
  std::optional<WavepacketState> state;
};

/// phase unset: populations averaged over 16 uniformly spaced optical phases.
PrepulseResult prepulse_contaminate(const TemporalField& main, double fraction,
                                    std::optional<double> optical_phase, const LevelSystem& system,
                                    const WavepacketState& initial,
                                    const PropagationOptions& options = {}, double main_scale = 1.0);

/// Rabi-oscillation contrast of period n (1-based) of a signal sampled against area:
/// peak = max over [(2n - 1.5) pi, (2n - 0.5) pi], trough = min over [(2n - 0.5) pi, (2n + 0.5) pi],
/// contrast = (peak - trough) / (peak + trough). Throws ConfigError when a range has no samples.
double rabi_contrast(std::span<const double> areas, std::span<const double> signal, int period);

std::string beat_trace_csv(const BeatTrace& trace);
std::string beat_spectrum_csv(const BeatSpectrum& spectrum);
std::string phase_jumps_text(std::span<const PhaseJump> jumps);

}  // namespace rabi
