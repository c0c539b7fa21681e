#include "rabi/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include <fmt/format.h>

#include "rabi/error.hpp"
#include "rabi/units.hpp"

namespace rabi {

namespace {
constexpr double pi = std::numbers::pi;
}

const char* to_string(Observable kind) {
  switch (kind) {
    case Observable::ion_signal: return "ion_signal";
    case Observable::population: return "population";
    case Observable::relative_phase: return "relative_phase";
    case Observable::ground_population: return "ground_population";
  }
  return "?";
}

namespace {

std::size_t nearest_level(const LevelSystem& system, double center_nm) {
  const double omega = units::angular_frequency(center_nm);
  std::size_t nearest = 1;
  for (std::size_t k = 2; k <= system.excited_count(); ++k) {
    if (std::abs(system.frequency(k) - omega) < std::abs(system.frequency(nearest) - omega)) nearest = k;
  }
  return nearest;
}

std::vector<double> areas_of(const SpectralField& source, const Mask& mask, const LevelSystem& system,
                             const SynthesisOptions& synthesis) {
  if (system.excited_count() == 1) {
    const TemporalField field = to_temporal(apply_mask(source, mask), synthesis);
    return {pulse_area(field, system.ground_dipole(1))};
  }
  const auto parts = split_by_windows(source, mask, system);
  return transition_areas(parts, system, synthesis);
}

// Solves the auto window amplitudes so that A1 = A2. The auto windows must be the only
// windows attributed to their resonance, which makes that area linear in their amplitude.
void resolve_auto_windows(Mask& mask, const std::vector<std::size_t>& auto_windows,
                          const SpectralField& source, const LevelSystem& system,
                          const SynthesisOptions& synthesis) {
  if (auto_windows.empty()) return;
  if (system.excited_count() != 2) {
    throw ConfigError("relative_amplitude 'auto' needs a preset with two excited levels");
  }
  const std::size_t level = nearest_level(system, mask.windows.at(auto_windows.front()).center_nm);
  for (std::size_t i = 0; i < mask.windows.size(); ++i) {
    const bool is_auto = std::find(auto_windows.begin(), auto_windows.end(), i) != auto_windows.end();
    const bool same_level = nearest_level(system, mask.windows[i].center_nm) == level;
    if (is_auto != same_level) {
      throw ConfigError(fmt::format(
          "relative_amplitude 'auto' must be set on exactly the windows driving level {} (window {})",
          level, i));
    }
  }
  for (std::size_t i : auto_windows) mask.windows[i].relative_amplitude = 1.0;
  const auto areas = areas_of(source, mask, system, synthesis);
  const double other = areas[2 - level];
  const double own = areas[level - 1];
  if (!(own > 0.0) || !(other > 0.0)) {
    throw ConfigError("relative_amplitude 'auto': a resonance receives no field");
  }
  const double r = other / own;
  for (std::size_t i : auto_windows) mask.windows[i].relative_amplitude = r;
  if (r > 1.0) {
    for (auto& w : mask.windows) w.relative_amplitude /= r;
  }
}

PropagationOptions propagation_options(const ExperimentConfig& config) {
  PropagationOptions p;
  p.step_fs = config.numerics.rk4_step_fs;
  return p;
}

// Points below the first grid value, down to 0, with the grid spacing; beam averaging
// needs the signal at the small areas reached in the beam wings.
std::vector<double> leading_points(const std::vector<double>& grid) {
  std::vector<double> lead;
  if (grid.size() < 2 || grid.front() <= 0.0) return lead;
  const double step = grid[1] - grid[0];
  const auto count = static_cast<std::size_t>(std::ceil(grid.front() / step - 1e-9));
  for (std::size_t i = 0; i < count; ++i) {
    lead.push_back(std::max(0.0, grid.front() - step * static_cast<double>(count - i)));
  }
  return lead;
}

}  // namespace

PulseSetup build_pulse(const ExperimentConfig& config, std::optional<double> bandwidth_nm) {
  LevelSystem system = make_preset(config.preset, PresetOptions{config.k_d1_dipole});
  GridSpec grid;
  grid.points = config.numerics.grid_points;
  grid.half_span_nm = config.numerics.half_span_nm;
  grid.carrier_nm = config.carrier_nm;
  grid.beam_area_cm2 = config.numerics.beam_area_cm2;
  const SpectralField source =
      gaussian_spectrum(config.spectrum.center_nm, config.spectrum.fwhm_nm, config.spectrum.energy_J, grid);

  SynthesisOptions synthesis;
  synthesis.oversample = config.numerics.oversample;

  Mask mask = config.mask;
  mask.order = config.numerics.supergauss_order;
  if (bandwidth_nm) {
    for (auto& w : mask.windows) w.fwhm_nm = *bandwidth_nm;
  }
  if (config.numerics.include_772nm_leak) {
    if (system.excited_count() != 2) throw ConfigError("include_772nm_leak needs the K-D preset");
    mask.windows.push_back(leak_window());
  }
  validate(mask);
  resolve_auto_windows(mask, config.auto_windows, source, system, synthesis);

  const std::vector<double> areas = areas_of(source, mask, system, synthesis);
  SpectralField spectrum = apply_mask(source, mask);
  TemporalField field = to_temporal(spectrum, synthesis);
  const double reference = areas.size() == 2 ? std::hypot(areas[0], areas[1]) : areas.front();
  if (!(reference > 0.0)) throw ConfigError("the shaped pulse has zero area; check the mask windows");
  return PulseSetup{std::move(system), std::move(mask), std::move(spectrum), std::move(field),
                    areas, reference, propagation_options(config)};
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::size_t failed_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;
  const auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

ScanGrid run_area_delay_scan(const ExperimentConfig& config, const ScanOptions& options) {
  const PulseSetup setup = build_pulse(config);
  const auto& system = setup.system;
  const std::vector<double> areas_pi = config.area_pi.values();
  const std::vector<double> delays = config.delay_fs.values();

  std::vector<double> compute_pi = config.averaging ? leading_points(areas_pi) : std::vector<double>{};
  const std::size_t lead = compute_pi.size();
  compute_pi.insert(compute_pi.end(), areas_pi.begin(), areas_pi.end());

  const WavepacketState ground = WavepacketState::ground(system.size());
  std::vector<std::vector<double>> traces(compute_pi.size());
  parallel_for(compute_pi.size(), options.workers, [&](std::size_t i) {
    const double scale = setup.scale_for_area(compute_pi[i] * pi);
    if (!config.prepulse) {
      const Trajectory traj = prepulse_trajectory(setup.field, 0.0, 0.0, system, ground, setup.propagation, scale);
      traces[i] = beat_signal(traj, system, config.probe, delays).signal;
      return;
    }
    const auto& pre = *config.prepulse;
    std::vector<double> phases;
    if (pre.phase_rad) {
      phases.push_back(*pre.phase_rad);
    } else {
      for (std::size_t m = 0; m < prepulse_average_phases; ++m) {
        phases.push_back(2.0 * pi * static_cast<double>(m) / static_cast<double>(prepulse_average_phases));
      }
    }
    std::vector<double> sum(delays.size(), 0.0);
    for (double phase : phases) {
      const Trajectory traj =
          prepulse_trajectory(setup.field, pre.energy_fraction, phase, system, ground, setup.propagation, scale);
      const auto s = beat_signal(traj, system, config.probe, delays).signal;
      for (std::size_t d = 0; d < s.size(); ++d) sum[d] += s[d] / static_cast<double>(phases.size());
    }
    traces[i] = std::move(sum);
  });

  ScanGrid grid;
  grid.kind = Observable::ion_signal;
  grid.x_label = "area_pi";
  grid.y_label = "delay_fs";
  grid.z_label = "ion_signal";
  grid.x = areas_pi;
  grid.y = delays;
  grid.z.assign(areas_pi.size() * delays.size(), 0.0);

  std::vector<double> column(compute_pi.size());
  std::vector<double> compute_rad(compute_pi.size());
  for (std::size_t i = 0; i < compute_pi.size(); ++i) compute_rad[i] = compute_pi[i] * pi;
  for (std::size_t d = 0; d < delays.size(); ++d) {
    for (std::size_t i = 0; i < compute_pi.size(); ++i) column[i] = traces[i][d];
    if (config.averaging) {
      column = beam_average(compute_rad, column, config.averaging->diameter_ratio, config.averaging->probe_order);
    }
    for (std::size_t i = 0; i < areas_pi.size(); ++i) grid.z[d * areas_pi.size() + i] = column[lead + i];
  }
  const double peak = *std::max_element(grid.z.begin(), grid.z.end());
  if (peak > 0.0) {
    for (auto& v : grid.z) v /= peak;
  }
  return grid;
}

AreaScanResult run_area_scan_at(const ExperimentConfig& config, std::optional<double> bandwidth_nm,
                                const ScanOptions& options, const JumpOptions& jump_options) {
  const PulseSetup setup = build_pulse(config, bandwidth_nm);
  const auto& system = setup.system;
  const std::vector<double> areas_pi = config.area_pi.values();
  const std::size_t n = areas_pi.size();

  PropagationOptions prop = setup.propagation;
  prop.record_stride = std::numeric_limits<std::size_t>::max();
  const WavepacketState ground = WavepacketState::ground(system.size());
  std::vector<WavepacketState> finals(n);
  parallel_for(n, options.workers, [&](std::size_t i) {
    const SequencePulse pulse{std::cref(setup.field), 0.0, 0.0, setup.scale_for_area(areas_pi[i] * pi)};
    finals[i] = propagate_sequence(system, std::span(&pulse, 1), ground, prop).final();
  });

  AreaScanResult result;
  result.bandwidth_nm = bandwidth_nm.value_or(0.0);
  const auto make = [&](Observable kind, std::size_t level, std::string label) {
    ScanGrid g;
    g.kind = kind;
    g.level = level;
    g.x_label = "area_pi";
    g.z_label = std::move(label);
    g.x = areas_pi;
    g.z.resize(n);
    return g;
  };
  result.ground = make(Observable::ground_population, 0, "ground_population");
  for (std::size_t k = 1; k < system.size(); ++k) {
    result.excited.push_back(make(Observable::population, k, fmt::format("population_{}", k)));
  }
  result.phase = make(Observable::relative_phase, 0, "relative_phase_rad");
  result.phase.flagged.assign(n, false);

  std::vector<double> wrapped(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.ground.z[i] = finals[i].population(0);
    for (std::size_t k = 1; k < system.size(); ++k) result.excited[k - 1].z[i] = finals[i].population(k);
    const RelativePhase phase = relative_phase(finals[i], system, setup.field.carrier);
    wrapped[i] = phase.value;
    result.phase.flagged[i] = phase.indeterminate;
  }
  result.phase.z = unwrap(wrapped);

  std::vector<double> grid_rad(n);
  for (std::size_t i = 0; i < n; ++i) grid_rad[i] = areas_pi[i] * pi;
  std::vector<std::vector<double>> populations;
  for (const auto& e : result.excited) populations.push_back(e.z);
  result.jumps = detect_phase_jumps(grid_rad, result.phase.z, populations, jump_options);
  return result;
}

std::vector<AreaScanResult> run_area_scan(const ExperimentConfig& config, const ScanOptions& options) {
  std::vector<AreaScanResult> results;
  if (config.bandwidths_nm.empty()) {
    results.push_back(run_area_scan_at(config, std::nullopt, options));
  } else {
    for (double bw : config.bandwidths_nm) results.push_back(run_area_scan_at(config, bw, options));
  }
  return results;
}

RbScanResult run_rb_energy_scan(const ExperimentConfig& config, const ScanOptions& options) {
  const PulseSetup setup = build_pulse(config);
  const auto& system = setup.system;
  if (system.excited_count() != 1) throw ConfigError("rb_energy scans need a single excited level");
  const std::vector<double> energies = config.energy_J.values();
  const double e_ref = config.spectrum.energy_J;

  std::vector<double> compute = config.averaging ? leading_points(energies) : std::vector<double>{};
  const std::size_t lead = compute.size();
  compute.insert(compute.end(), energies.begin(), energies.end());

  const WavepacketState ground = WavepacketState::ground(system.size());
  PropagationOptions prop = setup.propagation;
  prop.record_stride = std::numeric_limits<std::size_t>::max();
  std::vector<double> population(compute.size());
  parallel_for(compute.size(), options.workers, [&](std::size_t i) {
    const double scale = std::sqrt(compute[i] / e_ref);
    if (config.prepulse) {
      population[i] = prepulse_contaminate(setup.field, config.prepulse->energy_fraction,
                                           config.prepulse->phase_rad, system, ground, prop, scale)
                          .populations[1];
    } else {
      const SequencePulse pulse{std::cref(setup.field), 0.0, 0.0, scale};
      population[i] = propagate_sequence(system, std::span(&pulse, 1), ground, prop).final().population(1);
    }
  });
  if (config.averaging) {
    std::vector<double> areas(compute.size());
    for (std::size_t i = 0; i < compute.size(); ++i) areas[i] = setup.reference_area * std::sqrt(compute[i] / e_ref);
    population = beam_average(areas, population, config.averaging->diameter_ratio, config.averaging->probe_order);
  }

  RbScanResult result;
  result.population.kind = Observable::population;
  result.population.level = 1;
  result.population.x_label = "energy_J";
  result.population.z_label = "population_1";
  result.population.x = energies;
  result.population.z.assign(population.begin() + static_cast<std::ptrdiff_t>(lead), population.end());

  result.fit = oracle::fit_area_scale(result.population.x, result.population.z);
  result.first_minimum_J = result.fit.minimum_energy(1);
  const double scale = std::sqrt(result.first_minimum_J / e_ref);
  result.simulated_area_pi = setup.reference_area * scale / pi;
  const double peak = setup.field.peak() * scale;
  const double intensity_W_cm2 =
      0.5 * units::speed_of_light_m_per_s * units::vacuum_permittivity * peak * peak * units::m2_per_cm2;
  result.intensity_area_pi =
      area_from_intensity(intensity_W_cm2, intensity_fwhm(setup.field), system.ground_dipole(1)) / pi;
  return result;
}

}  // namespace rabi
