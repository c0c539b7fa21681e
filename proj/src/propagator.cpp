#include "rabi/propagator.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rabi/error.hpp"
#include "rabi/units.hpp"

namespace rabi {

WavepacketState WavepacketState::ground(std::size_t levels) {
  WavepacketState s;
  s.amplitudes.assign(levels, 0.0);
  if (levels > 0) s.amplitudes[0] = 1.0;
  return s;
}

double WavepacketState::norm() const {
  double n = 0.0;
  for (const auto& c : amplitudes) n += std::norm(c);
  return n;
}

std::vector<double> WavepacketState::populations() const {
  std::vector<double> p;
  p.reserve(amplitudes.size());
  for (const auto& c : amplitudes) p.push_back(std::norm(c));
  return p;
}

WavepacketState free_evolve(const WavepacketState& state, const LevelSystem& system, double carrier,
                            double to_time) {
  WavepacketState out = state;
  out.time = to_time;
  if (!std::isfinite(state.time)) return out;
  const double elapsed = to_time - state.time;
  for (std::size_t k = 1; k < out.size(); ++k) {
    out.amplitudes[k] *= std::polar(1.0, -(system.frequency(k) - carrier) * elapsed);
  }
  return out;
}

WavepacketState Trajectory::state_at(double t, const LevelSystem& system) const {
  if (states.empty()) throw NumericsError("empty trajectory");
  if (t <= times.front()) return free_evolve(states.front(), system, carrier, t);
  if (t >= times.back()) return free_evolve(states.back(), system, carrier, t);

  const auto hi = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) -
                                           times.begin());
  const std::size_t lo = hi - 1;
  // Crossing into a new segment means the interval [lo, hi] is a field-free gap.
  if (std::binary_search(segment_starts.begin(), segment_starts.end(), hi)) {
    return free_evolve(states[lo], system, carrier, t);
  }
  // Interpolate interaction-picture amplitudes, then rotate back.
  const double f = (t - times[lo]) / (times[hi] - times[lo]);
  WavepacketState out;
  out.time = t;
  out.amplitudes.resize(states[lo].size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double detuning = k == 0 ? 0.0 : system.frequency(k) - carrier;
    const cplx a = states[lo].amplitudes[k] * std::polar(1.0, detuning * times[lo]);
    const cplx b = states[hi].amplitudes[k] * std::polar(1.0, detuning * times[hi]);
    out.amplitudes[k] = ((1.0 - f) * a + f * b) * std::polar(1.0, -detuning * t);
  }
  return out;
}

namespace {

struct Couplings {
  std::vector<double> detuning;  // rad/fs, 0 for the ground state
  std::vector<double> coupling;  // mu_k / (2 hbar), rad/fs per V/m
};

Couplings couplings_for(const LevelSystem& system, double carrier) {
  for (const auto& t : system.transitions()) {
    if (t.lower != 0) {
      throw ConfigError(fmt::format(
          "propagator: transition {}->{} of '{}' does not involve the ground state; only "
          "ground <-> excited couplings are supported",
          t.lower, t.upper, system.name()));
    }
  }
  Couplings c;
  c.detuning.assign(system.size(), 0.0);
  c.coupling.assign(system.size(), 0.0);
  for (std::size_t k = 1; k < system.size(); ++k) {
    c.detuning[k] = system.frequency(k) - carrier;
    c.coupling[k] = system.ground_dipole(k) / (2.0 * units::hbar_J_fs);
  }
  return c;
}

// dc/dt for the RWA Hamiltonian.
void derivative(const Couplings& h, cplx field, const std::vector<cplx>& c, std::vector<cplx>& out) {
  const std::size_t n = c.size();
  const cplx field_conj = std::conj(field);
  cplx ground = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    ground += h.coupling[k] * c[k];
    out[k] = cplx(0.0, -h.detuning[k]) * c[k] + cplx(0.0, h.coupling[k]) * field * c[0];
  }
  out[0] = cplx(0.0, 1.0) * field_conj * ground;
}

class Rk4Stepper {
 public:
  Rk4Stepper(const Couplings& h, std::size_t n) : h_(h), k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n) {}

  // Advances c by step given the field at the start, midpoint and end of the step.
  void step(std::vector<cplx>& c, double dt, cplx e0, cplx em, cplx e1) {
    const std::size_t n = c.size();
    derivative(h_, e0, c, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = c[i] + 0.5 * dt * k1_[i];
    derivative(h_, em, tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = c[i] + 0.5 * dt * k2_[i];
    derivative(h_, em, tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = c[i] + dt * k3_[i];
    derivative(h_, e1, tmp_, k4_);
    for (std::size_t i = 0; i < n; ++i) {
      c[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
  }

 private:
  const Couplings& h_;
  std::vector<cplx> k1_, k2_, k3_, k4_, tmp_;
};

struct Support {
  std::size_t first = 0;
  std::size_t last = 0;
  bool empty = true;
};

Support field_support(const TemporalField& field, double scale, double threshold) {
  Support s;
  const double peak = field.peak() * std::abs(scale);
  if (!(peak > 0.0)) return s;
  const double cut = threshold * field.peak();
  std::size_t i = 0;
  while (i < field.size() && std::abs(field.envelope[i]) <= cut) ++i;
  std::size_t j = field.size() - 1;
  while (j > i && std::abs(field.envelope[j]) <= cut) --j;
  s.empty = (i >= field.size());
  // The interpolant between the outermost sample above the cut and its neighbour is
  // still nonzero, so keep one more sample on each side.
  s.first = i > 0 ? i - 1 : i;
  s.last = j + 1 < field.size() ? j + 1 : j;
  return s;
}

void record(Trajectory& traj, double t, const std::vector<cplx>& c) {
  WavepacketState s;
  s.amplitudes = c;
  s.time = t;
  traj.max_norm_drift = std::max(traj.max_norm_drift, std::abs(s.norm() - 1.0));
  traj.times.push_back(t);
  traj.states.push_back(std::move(s));
}

}  // namespace

Trajectory propagate(const LevelSystem& system, const TemporalField& field,
                     const WavepacketState& initial, const PropagationOptions& options) {
  const SequencePulse pulse{std::cref(field)};
  return propagate_sequence(system, std::span(&pulse, 1), initial, options);
}

Trajectory propagate_sequence(const LevelSystem& system, std::span<const SequencePulse> pulses,
                              const WavepacketState& initial, const PropagationOptions& options) {
  if (initial.size() != system.size()) {
    throw ConfigError(fmt::format("initial state has {} amplitudes, '{}' has {} levels",
                                  initial.size(), system.name(), system.size()));
  }
  if (std::abs(initial.norm() - 1.0) > 1e-10) {
    throw ConfigError(fmt::format("initial state is not normalized (norm {})", initial.norm()));
  }
  if (options.record_stride == 0) throw ConfigError("record stride must be >= 1");
  if (pulses.empty()) throw ConfigError("propagate_sequence: no pulses");

  Trajectory traj;
  traj.carrier = pulses.front().field.get().carrier;
  for (const auto& p : pulses) {
    if (p.field.get().carrier != traj.carrier) {
      throw ConfigError("propagate_sequence: all pulses must share one carrier frequency");
    }
  }
  const Couplings h = couplings_for(system, traj.carrier);
  for (std::size_t k = 1; k < system.size(); ++k) {
    if (std::abs(h.detuning[k]) > options.rwa_limit * traj.carrier) traj.rwa_warning = true;
  }

  std::vector<cplx> c = initial.amplitudes;
  double state_time = initial.time;
  double origin = 0.0;
  double previous_end = -std::numeric_limits<double>::infinity();
  Rk4Stepper stepper(h, system.size());

  for (std::size_t p = 0; p < pulses.size(); ++p) {
    const auto& pulse = pulses[p];
    const TemporalField& f = pulse.field.get();
    if (p > 0 && pulse.delay < 0.0) {
      throw ConfigError(fmt::format("pulse {}: inter-pulse delay must be >= 0 (got {})", p,
                                    pulse.delay));
    }
    origin += pulse.delay;
    const Support support = field_support(f, pulse.amplitude_scale, options.support_threshold);
    if (support.empty) continue;

    const double t_start = origin + f.time(support.first);
    const double t_end = origin + f.time(support.last);
    if (t_start < previous_end) {
      throw ConfigError(fmt::format(
          "pulse {} starts at {:.6g} fs before the previous pulse ends at {:.6g} fs; overlapping "
          "pulses must be combined into one field",
          p, t_start, previous_end));
    }
    if (std::isfinite(state_time)) {
      if (state_time > t_start) {
        throw ConfigError(fmt::format("initial state time {:.6g} fs is after the pulse start {:.6g} fs",
                                      state_time, t_start));
      }
      for (std::size_t k = 1; k < c.size(); ++k) {
        c[k] *= std::polar(1.0, -h.detuning[k] * (t_start - state_time));
      }
    }

    const cplx factor = pulse.amplitude_scale * std::polar(1.0, pulse.optical_phase);
    const double max_step = options.step_fs.value_or(std::min(0.25, f.dt / 4.0));
    if (!(max_step > 0.0)) throw ConfigError("RK4 step must be positive");
    const auto substeps = static_cast<std::size_t>(std::max(1.0, std::ceil(f.dt / max_step - 1e-9)));
    const double step = f.dt / static_cast<double>(substeps);
    const bool hermite = f.has_derivative();

    traj.segment_starts.push_back(traj.times.size());
    record(traj, t_start, c);

    std::vector<cplx> e(2 * substeps + 1);
    for (std::size_t n = support.first; n < support.last; ++n) {
      const cplx f0 = f.envelope[n] * factor;
      const cplx f1 = f.envelope[n + 1] * factor;
      if (hermite) {
        const cplx d0 = f.derivative[n] * factor * f.dt;
        const cplx d1 = f.derivative[n + 1] * factor * f.dt;
        for (std::size_t j = 0; j < e.size(); ++j) {
          const double s = static_cast<double>(j) / static_cast<double>(e.size() - 1);
          const double s2 = s * s;
          const double s3 = s2 * s;
          e[j] = (2 * s3 - 3 * s2 + 1) * f0 + (s3 - 2 * s2 + s) * d0 + (-2 * s3 + 3 * s2) * f1 +
                 (s3 - s2) * d1;
        }
      } else {
        for (std::size_t j = 0; j < e.size(); ++j) {
          const double s = static_cast<double>(j) / static_cast<double>(e.size() - 1);
          e[j] = (1.0 - s) * f0 + s * f1;
        }
      }
      for (std::size_t j = 0; j < substeps; ++j) {
        stepper.step(c, step, e[2 * j], e[2 * j + 1], e[2 * j + 2]);
      }
      const std::size_t done = n + 1 - support.first;
      if (done % options.record_stride == 0 || n + 1 == support.last) {
        record(traj, origin + f.time(n + 1), c);
      }
    }
    state_time = t_end;
    previous_end = t_end;
  }

  if (traj.states.empty()) {
    // No field at all: the state is left untouched.
    traj.segment_starts.push_back(0);
    record(traj, std::isfinite(initial.time) ? initial.time : 0.0, c);
  }
  if (traj.max_norm_drift > options.norm_tolerance) {
    throw NumericsError(fmt::format(
        "norm drift {:.3g} exceeds {:.1g}; reduce the RK4 step", traj.max_norm_drift,
        options.norm_tolerance));
  }
  return traj;
}

std::string trajectory_csv(const Trajectory& trajectory) {
  std::string out = "t_fs";
  const std::size_t levels = trajectory.states.empty() ? 0 : trajectory.states.front().size();
  for (std::size_t k = 0; k < levels; ++k) out += fmt::format(",re_c{0},im_c{0}", k);
  out += ",norm\n";
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    out += fmt::format("{:.17g}", trajectory.times[i]);
    for (const auto& c : trajectory.states[i].amplitudes) {
      out += fmt::format(",{:.17g},{:.17g}", c.real(), c.imag());
    }
    out += fmt::format(",{:.17g}\n", trajectory.states[i].norm());
  }
  return out;
}

}  // namespace rabi
