#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rabi/atomics.hpp"
#include "rabi/pulse.hpp"

namespace rabi {

/// Level amplitudes in the frame rotating at the field carrier (excited levels carry
/// exp(-i carrier t) relative to the bare basis).
struct WavepacketState {
  std::vector<cplx> amplitudes;
  /// Time at which the amplitudes hold. -infinity means "before any field".
  double time = -std::numeric_limits<double>::infinity();

  static WavepacketState ground(std::size_t levels);

  std::size_t size() const { return amplitudes.size(); }
  double norm() const;
  double population(std::size_t level) const { return std::norm(amplitudes.at(level)); }
  std::vector<double> populations() const;
};

/// Field-free evolution in the rotating frame, exp(-i (omega_k - carrier) dt) per level.
WavepacketState free_evolve(const WavepacketState& state, const LevelSystem& system, double carrier,
                            double to_time);

struct Trajectory {
  double carrier = 0.0;
  std::vector<double> times;
  std::vector<WavepacketState> states;
  /// Index into times/states where each pulse of a sequence begins; the gap between
  /// two segments is field-free.
  std::vector<std::size_t> segment_starts;
  double max_norm_drift = 0.0;
  bool rwa_warning = false;

  const WavepacketState& final() const { return states.back(); }
  /// Amplitudes at time t: linear interpolation inside a segment, exact free
  /// evolution outside or between segments.
  WavepacketState state_at(double t, const LevelSystem& system) const;
};

struct PropagationOptions {
  /// RK4 step; unset means min(0.25 fs, dt/4). The step is shrunk to divide dt evenly.
  std::optional<double> step_fs;
  /// Record every n-th field sample.
  std::size_t record_stride = 1;
  /// Samples with |eps| below this fraction of the peak are treated as field-free tails.
  double support_threshold = 1e-12;
  /// Ratio |omega_k - carrier| / carrier above which the RWA warning is raised.
  double rwa_limit = 0.05;
  /// Norm drift above this throws NumericsError.
  double norm_tolerance = 1e-6;
};

/// One pulse of a sequence. delay is the time between this pulse's origin and the
/// previous pulse's origin; for the first pulse it is the absolute origin offset.
struct SequencePulse {
  std::reference_wrapper<const TemporalField> field;
  double delay = 0.0;          // fs
  double optical_phase = 0.0;  // rad, relative to the carrier clock
  double amplitude_scale = 1.0;
};

/// Integrates i hbar dc/dt = H(t) c in the rotating-wave approximation with fixed-step RK4.
/// H has diagonal hbar(omega_k - carrier) for excited levels and couplings -mu_k eps(t)/2
/// between the ground state and each excited level.
Trajectory propagate(const LevelSystem& system, const TemporalField& field,
                     const WavepacketState& initial, const PropagationOptions& options = {});

/// Propagates pulses one after another; field-free gaps are bridged analytically.
/// Throws ConfigError when inter-pulse delays are negative or pulses overlap.
Trajectory propagate_sequence(const LevelSystem& system, std::span<const SequencePulse> pulses,
                              const WavepacketState& initial, const PropagationOptions& options = {});

/// CSV rows "t_fs,re_c0,im_c0,...,norm" with a header line.
std::string trajectory_csv(const Trajectory& trajectory);

}  // namespace rabi
