#include "rabi/observables.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>

#include "rabi/error.hpp"
#include "rabi/fft.hpp"
#include "rabi/units.hpp"

namespace rabi {

namespace {
constexpr double pi = std::numbers::pi;

double wrap(double phase) {
  double w = std::remainder(phase, 2.0 * pi);
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

cplx interaction_amplitude(const WavepacketState& state, const LevelSystem& system, double carrier,
                           std::size_t k) {
  const double t = std::isfinite(state.time) ? state.time : 0.0;
  return state.amplitudes[k] * std::polar(1.0, (system.frequency(k) - carrier) * t);
}
}  // namespace

RelativePhase relative_phase(const WavepacketState& state, const LevelSystem& system, double carrier,
                             double threshold) {
  if (system.excited_count() != 2 || state.size() != 3) {
    throw ConfigError(fmt::format("relative_phase needs exactly two excited levels ('{}' has {})",
                                  system.name(), system.excited_count()));
  }
  const cplx a1 = interaction_amplitude(state, system, carrier, 1);
  const cplx a2 = interaction_amplitude(state, system, carrier, 2);
  RelativePhase r;
  r.indeterminate = std::abs(a1) <= threshold || std::abs(a2) <= threshold;
  r.value = wrap(std::arg(a2) - std::arg(a1));
  return r;
}

std::vector<double> unwrap(std::span<const double> phases) {
  std::vector<double> out(phases.begin(), phases.end());
  double shift = 0.0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double d = phases[i] - phases[i - 1];
    shift += wrap(d) - d;
    out[i] = phases[i] + shift;
  }
  return out;
}

std::string PhaseJump::tag() const {
  if (levels.empty()) return "none";
  if (levels.size() >= 2) return "both";
  return std::to_string(levels.front());
}

std::vector<PhaseJump> detect_phase_jumps(std::span<const double> grid, std::span<const double> phases,
                                          const std::vector<std::vector<double>>& populations,
                                          const JumpOptions& options) {
  if (grid.size() != phases.size()) {
    throw ConfigError(fmt::format("detect_phase_jumps: grid has {} points, phases {}", grid.size(),
                                  phases.size()));
  }
  for (std::size_t j = 0; j < populations.size(); ++j) {
    if (populations[j].size() != grid.size()) {
      throw ConfigError(fmt::format("detect_phase_jumps: population series {} has {} points, grid {}",
                                    j + 1, populations[j].size(), grid.size()));
    }
  }
  std::vector<PhaseJump> jumps;
  const std::size_t n = grid.size();
  std::size_t i = 0;
  while (i + 1 < n) {
    if (std::abs(phases[i + 1] - phases[i]) <= options.threshold) {
      ++i;
      continue;
    }
    PhaseJump jump;
    jump.first = i;
    while (i + 1 < n && std::abs(phases[i + 1] - phases[i]) > options.threshold) {
      jump.size += phases[i + 1] - phases[i];
      ++i;
    }
    jump.last = i;
    jump.area = 0.5 * (grid[jump.first] + grid[jump.last]);

    const std::size_t lo = jump.first >= options.window ? jump.first - options.window : 0;
    const std::size_t hi = std::min(n - 1, jump.last + options.window);
    for (std::size_t level = 0; level < populations.size(); ++level) {
      const auto& p = populations[level];
      for (std::size_t m = lo; m <= hi; ++m) {
        const bool left = m == 0 || p[m] <= p[m - 1];
        const bool right = m + 1 == n || p[m] <= p[m + 1];
        if (left && right && p[m] < options.population_threshold) {
          jump.levels.push_back(level + 1);
          break;
        }
      }
    }
    jumps.push_back(std::move(jump));
  }
  return jumps;
}

void validate(const ProbeModel& probe, const LevelSystem& system) {
  if (!probe.path_weights.empty()) {
    if (probe.path_weights.size() != system.excited_count()) {
      throw ConfigError(fmt::format("probe: {} path weights for {} excited levels",
                                    probe.path_weights.size(), system.excited_count()));
    }
    if (std::none_of(probe.path_weights.begin(), probe.path_weights.end(),
                     [](cplx w) { return std::abs(w) > 0.0; })) {
      throw ConfigError("probe: at least one path weight must be nonzero");
    }
  }
  if (probe.nonlinearity_order < 1) {
    throw ConfigError(fmt::format("probe: nonlinearity order must be >= 1 (got {})",
                                  probe.nonlinearity_order));
  }
  if (!(probe.duration_fwhm_fs >= 0.0) || !std::isfinite(probe.duration_fwhm_fs)) {
    throw ConfigError(fmt::format("probe: duration must be >= 0 fs (got {})", probe.duration_fwhm_fs));
  }
}

namespace {

using StateAt = std::function<WavepacketState(double)>;

double instantaneous_signal(const WavepacketState& s, const ProbeModel& probe) {
  cplx sum = 0.0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    const cplx w = probe.path_weights.empty() ? cplx(1.0) : probe.path_weights[k - 1];
    sum += w * s.amplitudes[k];
  }
  return std::norm(sum);
}

BeatTrace beat_trace(const StateAt& state_at, const ProbeModel& probe, std::span<const double> delays) {
  BeatTrace trace;
  trace.delays.assign(delays.begin(), delays.end());
  trace.signal.reserve(delays.size());
  const double sigma = probe.duration_fwhm_fs / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  using quadrature = boost::math::quadrature::gauss<double, 30>;
  const auto gaussian = [sigma](double s) { return std::exp(-0.5 * s * s / (sigma * sigma)); };
  const double norm = sigma > 0.0 ? quadrature::integrate(gaussian, -4.0 * sigma, 4.0 * sigma) : 1.0;
  for (double tau : delays) {
    if (sigma > 0.0) {
      const auto integrand = [&](double s) {
        return gaussian(s) * instantaneous_signal(state_at(tau + s), probe);
      };
      trace.signal.push_back(quadrature::integrate(integrand, -4.0 * sigma, 4.0 * sigma) / norm);
    } else {
      trace.signal.push_back(instantaneous_signal(state_at(tau), probe));
    }
  }
  return trace;
}

}  // namespace

BeatTrace beat_signal(const WavepacketState& final_state, const LevelSystem& system, double carrier,
                      const ProbeModel& probe, std::span<const double> delays) {
  validate(probe, system);
  if (final_state.size() != system.size()) throw ConfigError("beat_signal: state/system size mismatch");
  WavepacketState origin = final_state;
  if (!std::isfinite(origin.time)) origin.time = 0.0;
  return beat_trace([&](double t) { return free_evolve(origin, system, carrier, t); }, probe, delays);
}

BeatTrace beat_signal(const Trajectory& trajectory, const LevelSystem& system, const ProbeModel& probe,
                      std::span<const double> delays) {
  validate(probe, system);
  return beat_trace([&](double t) { return trajectory.state_at(t, system); }, probe, delays);
}

BeatSpectrum beat_spectrum(const BeatTrace& trace) {
  const std::size_t n = trace.delays.size();
  if (n < 8 || trace.signal.size() != n) {
    throw ConfigError(fmt::format("beat_spectrum: need at least 8 matching samples (got {} delays, {} "
                                  "values)",
                                  n, trace.signal.size()));
  }
  const double dt = (trace.delays.back() - trace.delays.front()) / static_cast<double>(n - 1);
  if (!(dt > 0.0)) throw ConfigError("beat_spectrum: delays must increase");
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(trace.delays[i] - trace.delays[i - 1] - dt) > 1e-6 * dt) {
      throw ConfigError("beat_spectrum: delay grid is not uniform");
    }
  }
  double mean = 0.0;
  double scale = 0.0;
  for (double s : trace.signal) {
    mean += s;
    scale += s * s;
  }
  mean /= static_cast<double>(n);

  std::vector<cplx> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * pi * static_cast<double>(i) / static_cast<double>(n - 1));
    data[i] = (trace.signal[i] - mean) * hann;
  }
  fft::forward(data);

  BeatSpectrum spectrum;
  const std::size_t bins = n / 2 + 1;
  const double df = 1e3 / (static_cast<double>(n) * dt);  // THz
  spectrum.frequencies.resize(bins);
  spectrum.power.resize(bins);
  for (std::size_t j = 0; j < bins; ++j) {
    spectrum.frequencies[j] = df * static_cast<double>(j);
    spectrum.power[j] = std::norm(data[j]);
  }
  std::size_t best = 1;
  for (std::size_t j = 2; j < bins; ++j) {
    if (spectrum.power[j] > spectrum.power[best]) best = j;
  }
  // Relative floor: rounding noise of a constant trace stays many orders below this.
  const double floor = 1e-20 * scale * static_cast<double>(n);
  if (bins > 1 && spectrum.power[best] > floor) {
    if (best < 4) {
      throw NumericsError(fmt::format(
          "beat_spectrum: peak at {:.4g} THz spans fewer than 4 periods of the {:.4g} fs window",
          spectrum.frequencies[best], dt * static_cast<double>(n)));
    }
    spectrum.peak = best;
  }
  return spectrum;
}

std::vector<double> beam_average(std::span<const double> areas, std::span<const double> signal,
                                 double diameter_ratio, int probe_order) {
  if (areas.size() != signal.size() || areas.size() < 2) {
    throw ConfigError("beam_average: need at least 2 matching area/signal samples");
  }
  if (!(diameter_ratio > 0.0) || !std::isfinite(diameter_ratio)) {
    throw ConfigError(fmt::format("beam_average: diameter ratio must be > 0 (got {})", diameter_ratio));
  }
  if (probe_order < 1) {
    throw ConfigError(fmt::format("beam_average: probe order must be >= 1 (got {})", probe_order));
  }
  for (std::size_t i = 1; i < areas.size(); ++i) {
    if (!(areas[i] > areas[i - 1])) throw ConfigError("beam_average: areas must increase");
  }

  // With u = r^2 / w^2 the pump area is A0 exp(-u) and the probe weight exp(-a u),
  // a = 2 n / ratio^2. Substituting s = a u gives avg = int_0^inf exp(-s) f(A0 exp(-s/a)) ds.
  const double a = 2.0 * probe_order / (diameter_ratio * diameter_ratio);
  constexpr double s_max = 40.0;
  constexpr double s_cut = 27.6;  // exp(-s_cut) ~ 1e-12
  const auto intervals = static_cast<std::size_t>(
      std::min(1e6, std::max(2000.0, std::ceil(s_max / std::min(1.0, a / 50.0)))));
  const std::size_t even = intervals + (intervals % 2);
  const double h = s_max / static_cast<double>(even);

  const auto interpolate = [&](double x) {
    if (x <= areas.front()) return signal.front();
    if (x >= areas.back()) return signal.back();
    const auto it = std::upper_bound(areas.begin(), areas.end(), x);
    const auto i = static_cast<std::size_t>(it - areas.begin());
    const double f = (x - areas[i - 1]) / (areas[i] - areas[i - 1]);
    return (1.0 - f) * signal[i - 1] + f * signal[i];
  };

  std::vector<double> out(areas.size());
  const double total = 1.0 - std::exp(-s_max);
  for (std::size_t i = 0; i < areas.size(); ++i) {
    const double a0 = areas[i];
    const double needed = a0 * std::exp(-s_cut / a);
    if (a0 > 0.0 && needed < areas.front() - 1e-12 * std::abs(areas.front())) {
      throw ConfigError(fmt::format("beam_average: area {:.6g} needs samples down to {:.3g}, but the "
                                    "grid starts at {:.6g}",
                                    a0, needed, areas.front()));
    }
    double sum = 0.0;
    for (std::size_t j = 0; j <= even; ++j) {
      const double s = h * static_cast<double>(j);
      const double w = (j == 0 || j == even) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
      sum += w * std::exp(-s) * interpolate(a0 * std::exp(-s / a));
    }
    double value = sum * h / 3.0 / total;
    // Keep the result inside the sample range against quadrature rounding.
    const auto [lo, hi] = std::minmax_element(signal.begin(), signal.end());
    out[i] = std::clamp(value, *lo, *hi);
  }
  return out;
}

Trajectory prepulse_trajectory(const TemporalField& main, double fraction, double optical_phase,
                               const LevelSystem& system, const WavepacketState& initial,
                               const PropagationOptions& options, double main_scale) {
  if (!(fraction >= 0.0 && fraction <= 0.05)) {
    throw ConfigError(fmt::format("pre-pulse energy fraction must be in [0, 0.05] (got {})", fraction));
  }
  if (fraction == 0.0) {
    const SequencePulse only{std::cref(main), 0.0, 0.0, main_scale};
    return propagate_sequence(system, std::span(&only, 1), initial, options);
  }
  const SequencePulse pulses[] = {
      {std::cref(main), -prepulse_lead_fs, optical_phase, main_scale * std::sqrt(fraction)},
      {std::cref(main), prepulse_lead_fs, 0.0, main_scale},
  };
  return propagate_sequence(system, pulses, initial, options);
}

PrepulseResult prepulse_contaminate(const TemporalField& main, double fraction,
                                    std::optional<double> optical_phase, const LevelSystem& system,
                                    const WavepacketState& initial, const PropagationOptions& options,
                                    double main_scale) {
  PrepulseResult result;
  if (optical_phase) {
    const Trajectory traj = prepulse_trajectory(main, fraction, *optical_phase, system, initial, options,
                                                 main_scale);
    result.state = traj.final();
    result.populations = traj.final().populations();
    return result;
  }
  result.populations.assign(system.size(), 0.0);
  const std::size_t phases = fraction == 0.0 ? 1 : prepulse_average_phases;
  for (std::size_t m = 0; m < phases; ++m) {
    const double phase = 2.0 * pi * static_cast<double>(m) / static_cast<double>(phases);
    const Trajectory traj = prepulse_trajectory(main, fraction, phase, system, initial, options, main_scale);
    const auto p = traj.final().populations();
    for (std::size_t k = 0; k < p.size(); ++k) result.populations[k] += p[k] / static_cast<double>(phases);
  }
  return result;
}

double rabi_contrast(std::span<const double> areas, std::span<const double> signal, int period) {
  if (areas.size() != signal.size()) throw ConfigError("rabi_contrast: size mismatch");
  if (period < 1) throw ConfigError("rabi_contrast: period index starts at 1");
  const double n = period;
  const auto extreme = [&](double lo, double hi, bool maximum) {
    std::optional<double> best;
    for (std::size_t i = 0; i < areas.size(); ++i) {
      if (areas[i] < lo || areas[i] > hi) continue;
      if (!best || (maximum ? signal[i] > *best : signal[i] < *best)) best = signal[i];
    }
    if (!best) {
      throw ConfigError(fmt::format("rabi_contrast: no samples in [{:.3g} pi, {:.3g} pi]", lo / pi, hi / pi));
    }
    return *best;
  };
  const double peak = extreme((2 * n - 1.5) * pi, (2 * n - 0.5) * pi, true);
  const double trough = extreme((2 * n - 0.5) * pi, (2 * n + 0.5) * pi, false);
  if (peak + trough == 0.0) return 0.0;
  return (peak - trough) / (peak + trough);
}

std::string beat_trace_csv(const BeatTrace& trace) {
  std::string out = "delay_fs,signal\n";
  for (std::size_t i = 0; i < trace.delays.size(); ++i) {
    out += fmt::format("{:.17g},{:.17g}\n", trace.delays[i], trace.signal[i]);
  }
  return out;
}

std::string beat_spectrum_csv(const BeatSpectrum& spectrum) {
  std::string out = "frequency_THz,power\n";
  for (std::size_t i = 0; i < spectrum.frequencies.size(); ++i) {
    out += fmt::format("{:.17g},{:.17g}\n", spectrum.frequencies[i], spectrum.power[i]);
  }
  return out;
}

std::string phase_jumps_text(std::span<const PhaseJump> jumps) {
  std::string out = "# area_pi size_rad tag\n";
  for (const auto& j : jumps) {
    out += fmt::format("{:.6f} {:.6f} {}\n", j.area / pi, j.size, j.tag());
  }
  return out;
}

}  // namespace rabi
