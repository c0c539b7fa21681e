#include "rabi/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "rabi/error.hpp"
#include "rabi/fft.hpp"
#include "rabi/units.hpp"

namespace rabi {
namespace {

using units::pi;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Converts an energy-normalized spectral amplitude (sqrt(J fs)) to the field spectrum
// S(omega) in V/m*fs, such that eps(t) = (1/2pi) int S exp(-i omega t) d omega.
double spectral_field_factor(double beam_area_cm2) {
  const double area_m2 = beam_area_cm2 * units::m2_per_cm2;
  const double flux_per_field2 =
      area_m2 * units::speed_of_light_m_per_s * units::vacuum_permittivity / 2.0 / units::fs_per_s;
  return std::sqrt(2.0 * pi / flux_per_field2);
}

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(fmt::format("{} must be positive and finite (got {})", what, value));
  }
}

}  // namespace

double SpectralField::offset(std::size_t k) const {
  return (static_cast<double>(k) - static_cast<double>(amplitude.size() / 2)) * spacing;
}

double SpectralField::wavelength(std::size_t k) const {
  return units::wavelength(carrier + offset(k));
}

double SpectralField::energy() const {
  double sum = 0.0;
  for (const auto& a : amplitude) sum += std::norm(a);
  return sum * spacing;
}

double TemporalField::peak() const {
  double p = 0.0;
  for (const auto& e : envelope) p = std::max(p, std::abs(e));
  return p;
}

double TemporalField::energy() const {
  double sum = 0.0;
  for (const auto& e : envelope) sum += std::norm(e);
  const double area_m2 = beam_area_cm2 * units::m2_per_cm2;
  return area_m2 * units::speed_of_light_m_per_s * units::vacuum_permittivity / 2.0 * sum * dt /
         units::fs_per_s;
}

void validate(const Mask& mask) {
  if (mask.order < 1) throw ConfigError(fmt::format("mask order must be >= 1 (got {})", mask.order));
  for (std::size_t i = 0; i < mask.windows.size(); ++i) {
    const auto& w = mask.windows[i];
    if (!(w.fwhm_nm > 0.0)) {
      throw ConfigError(fmt::format("mask window {} at {} nm: fwhm must be > 0", i, w.center_nm));
    }
    if (!(w.relative_amplitude >= 0.0 && w.relative_amplitude <= 1.0)) {
      throw ConfigError(fmt::format("mask window {} at {} nm: relative amplitude {} outside [0, 1]",
                                    i, w.center_nm, w.relative_amplitude));
    }
    if (!(w.center_nm > 0.0)) {
      throw ConfigError(fmt::format("mask window {}: center must be a positive wavelength", i));
    }
  }
}

cplx window_transmission(const Mask& mask, double wavelength_nm) {
  if (mask.windows.empty()) return 1.0;
  cplx t = 0.0;
  for (const auto& w : mask.windows) {
    const double x = std::abs(2.0 * (wavelength_nm - w.center_nm) / w.fwhm_nm);
    const double amplitude = std::exp(-0.5 * std::log(2.0) * std::pow(x, 2.0 * mask.order));
    t += w.relative_amplitude * amplitude * std::polar(1.0, w.phase);
  }
  return t;
}

namespace {

cplx phase_polynomial(const Mask& mask, double offset) {
  if (mask.phase_poly.empty()) return 1.0;
  double phase = 0.0;
  for (std::size_t n = mask.phase_poly.size(); n-- > 0;) phase = phase * offset + mask.phase_poly[n];
  return std::polar(1.0, phase);
}

}  // namespace

SpectralField gaussian_spectrum(double center_nm, double fwhm_nm, double energy_J,
                                const GridSpec& grid) {
  require_positive(center_nm, "spectrum center");
  require_positive(fwhm_nm, "spectrum fwhm");
  require_positive(energy_J, "pulse energy");
  require_positive(grid.beam_area_cm2, "beam area");
  if (!is_power_of_two(grid.points) || grid.points < 16) {
    throw ConfigError(fmt::format("grid points must be a power of two >= 16 (got {})", grid.points));
  }

  const double carrier_nm = grid.carrier_nm.value_or(center_nm);
  require_positive(carrier_nm, "carrier wavelength");
  const double half_span_nm = grid.half_span_nm.value_or(std::max(40.0, 4.25 * fwhm_nm));
  require_positive(half_span_nm, "grid half span");

  SpectralField field;
  field.carrier = units::angular_frequency(carrier_nm);
  const double half_span = units::angular_frequency(carrier_nm) * half_span_nm / carrier_nm;
  if (!(half_span < 0.5 * field.carrier)) {
    throw ConfigError(fmt::format("grid half span {} nm is too wide for a {} nm carrier",
                                  half_span_nm, carrier_nm));
  }
  field.spacing = 2.0 * half_span / static_cast<double>(grid.points);
  field.beam_area_cm2 = grid.beam_area_cm2;
  field.amplitude.resize(grid.points);

  const double span_nm = units::wavelength(field.carrier - half_span) -
                         units::wavelength(field.carrier + half_span);
  if (span_nm < 8.0 * fwhm_nm) {
    throw NumericsError(fmt::format(
        "window adequacy: spectral grid spans {:.2f} nm, needs at least 8 x {:.3g} nm FWHM",
        span_nm, fwhm_nm));
  }

  const double c = 2.0 * std::log(2.0) / (fwhm_nm * fwhm_nm);
  for (std::size_t k = 0; k < field.size(); ++k) {
    const double d = field.wavelength(k) - center_nm;
    field.amplitude[k] = std::exp(-c * d * d);
  }
  return with_energy(field, energy_J);
}

SpectralField apply_mask(const SpectralField& field, const Mask& mask) {
  validate(mask);
  SpectralField out = field;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out.amplitude[k] *= window_transmission(mask, out.wavelength(k)) *
                        phase_polynomial(mask, out.offset(k));
  }
  return out;
}

SpectralField with_energy(const SpectralField& field, double energy_J) {
  if (!(energy_J >= 0.0)) throw ConfigError(fmt::format("energy must be >= 0 (got {})", energy_J));
  const double current = field.energy();
  if (current == 0.0) return field;
  return scaled(field, std::sqrt(energy_J / current));
}

SpectralField scaled(const SpectralField& field, cplx factor) {
  SpectralField out = field;
  for (auto& a : out.amplitude) a *= factor;
  return out;
}

TemporalField to_temporal(const SpectralField& field, const SynthesisOptions& options) {
  const std::size_t n = field.size();
  if (!is_power_of_two(n)) throw ConfigError("spectral grid size must be a power of two");
  if (options.oversample == 0 || !is_power_of_two(options.oversample)) {
    throw ConfigError("oversample factor must be a power of two");
  }
  require_positive(field.spacing, "spectral spacing");

  const std::size_t m = n * options.oversample;
  const double factor = spectral_field_factor(field.beam_area_cm2) * field.spacing / (2.0 * pi);

  // Index j = k - n/2 is placed at j mod m; the (-1)^j factor centers t = 0 at sample m/2.
  std::vector<cplx> envelope(m, 0.0);
  std::vector<cplx> derivative(m, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto j = static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(n / 2);
    const std::size_t slot = static_cast<std::size_t>((j + static_cast<std::ptrdiff_t>(m)) %
                                                      static_cast<std::ptrdiff_t>(m));
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    const cplx s = field.amplitude[k] * (sign * factor);
    envelope[slot] = s;
    derivative[slot] = s * cplx(0.0, -field.offset(k));
  }
  fft::forward(envelope);
  fft::forward(derivative);

  TemporalField out;
  out.carrier = field.carrier;
  out.dt = 2.0 * pi / (static_cast<double>(m) * field.spacing);
  out.t0 = -static_cast<double>(m / 2) * out.dt;
  out.beam_area_cm2 = field.beam_area_cm2;
  out.envelope = std::move(envelope);
  out.derivative = std::move(derivative);

  const double peak = out.peak();
  if (peak > 0.0 && std::isfinite(options.edge_tolerance)) {
    const double edge = std::max(std::abs(out.envelope.front()), std::abs(out.envelope.back()));
    if (edge >= options.edge_tolerance * peak) {
      throw NumericsError(fmt::format(
          "window adequacy: envelope at the time-window edge is {:.3g} of peak (limit {:.1g}); "
          "refine the spectral grid",
          edge / peak, options.edge_tolerance));
    }
  }
  return out;
}

double pulse_area(const TemporalField& field, double dipole) {
  if (field.size() < 2) return 0.0;
  double sum = 0.5 * (std::abs(field.envelope.front()) + std::abs(field.envelope.back()));
  for (std::size_t i = 1; i + 1 < field.size(); ++i) sum += std::abs(field.envelope[i]);
  return sum * field.dt * dipole / units::hbar_J_fs;
}

double intensity_fwhm(const TemporalField& field) {
  if (field.size() < 3) throw NumericsError("intensity_fwhm: field has too few samples");
  std::vector<double> intensity(field.size());
  std::transform(field.envelope.begin(), field.envelope.end(), intensity.begin(),
                 [](cplx e) { return std::norm(e); });
  const auto peak_it = std::max_element(intensity.begin(), intensity.end());
  const double half = 0.5 * *peak_it;
  if (half <= 0.0) throw NumericsError("intensity_fwhm: zero field");
  const auto peak = static_cast<std::size_t>(peak_it - intensity.begin());

  std::size_t left = peak;
  while (left > 0 && intensity[left] >= half) --left;
  std::size_t right = peak;
  while (right + 1 < intensity.size() && intensity[right] >= half) ++right;
  if (intensity[left] >= half || intensity[right] >= half) {
    throw NumericsError("intensity_fwhm: half maximum not reached inside the time window");
  }
  const auto crossing = [&](std::size_t below, std::size_t above) {
    const double f = (half - intensity[below]) / (intensity[above] - intensity[below]);
    return field.time(below) + f * (field.time(above) - field.time(below));
  };
  return crossing(right, right - 1) - crossing(left, left + 1);
}

std::vector<SpectralField> split_at_midpoint(const SpectralField& field, const LevelSystem& system) {
  if (system.excited_count() < 1) throw ConfigError("split_at_midpoint: no excited levels");
  std::vector<double> bounds;
  for (std::size_t k = 1; k < system.excited_count(); ++k) {
    bounds.push_back(0.5 * (system.frequency(k) + system.frequency(k + 1)));
  }
  std::vector<SpectralField> parts(system.excited_count(), field);
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double omega = field.carrier + field.offset(i);
    const auto owner = static_cast<std::size_t>(
        std::upper_bound(bounds.begin(), bounds.end(), omega) - bounds.begin());
    for (std::size_t p = 0; p < parts.size(); ++p) {
      if (p != owner) parts[p].amplitude[i] = 0.0;
    }
  }
  return parts;
}

std::vector<SpectralField> split_by_windows(const SpectralField& source, const Mask& mask,
                                            const LevelSystem& system) {
  validate(mask);
  if (mask.windows.empty()) return split_at_midpoint(apply_mask(source, mask), system);

  std::vector<Mask> per_level(system.excited_count());
  for (auto& m : per_level) {
    m.order = mask.order;
    m.phase_poly = mask.phase_poly;
  }
  for (const auto& w : mask.windows) {
    const double omega = units::angular_frequency(w.center_nm);
    std::size_t nearest = 1;
    for (std::size_t k = 2; k <= system.excited_count(); ++k) {
      if (std::abs(system.frequency(k) - omega) < std::abs(system.frequency(nearest) - omega)) {
        nearest = k;
      }
    }
    per_level[nearest - 1].windows.push_back(w);
  }

  std::vector<SpectralField> parts;
  parts.reserve(per_level.size());
  for (const auto& m : per_level) {
    if (m.windows.empty()) {
      parts.push_back(scaled(source, 0.0));
    } else {
      parts.push_back(apply_mask(source, m));
    }
  }
  return parts;
}

std::vector<double> transition_areas(std::span<const SpectralField> parts, const LevelSystem& system,
                                     const SynthesisOptions& options) {
  if (parts.size() != system.excited_count()) {
    throw ConfigError(fmt::format("transition_areas: {} spectral parts for {} excited levels",
                                  parts.size(), system.excited_count()));
  }
  SynthesisOptions relaxed = options;
  relaxed.edge_tolerance = std::numeric_limits<double>::infinity();
  std::vector<double> areas;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    areas.push_back(pulse_area(to_temporal(parts[k], relaxed), system.ground_dipole(k + 1)));
  }
  return areas;
}

double effective_area(std::span<const SpectralField> parts, const LevelSystem& system,
                      const SynthesisOptions& options) {
  if (system.excited_count() != 2) {
    throw ConfigError(fmt::format("effective area needs exactly two excited levels ('{}' has {})",
                                  system.name(), system.excited_count()));
  }
  const auto areas = transition_areas(parts, system, options);
  return std::hypot(areas[0], areas[1]);
}

double effective_area(const SpectralField& field, const LevelSystem& system,
                      const SynthesisOptions& options) {
  if (system.excited_count() != 2) {
    throw ConfigError(fmt::format("effective area needs exactly two excited levels ('{}' has {})",
                                  system.name(), system.excited_count()));
  }
  const auto parts = split_at_midpoint(field, system);
  return effective_area(parts, system, options);
}

double peak_field(double intensity_W_cm2) {
  const double intensity_W_m2 = intensity_W_cm2 / units::m2_per_cm2;
  return std::sqrt(2.0 * intensity_W_m2 /
                   (units::speed_of_light_m_per_s * units::vacuum_permittivity));
}

double area_from_intensity(double peak_intensity_W_cm2, double tl_fwhm_fs, double dipole) {
  if (peak_intensity_W_cm2 < 0.0) throw ConfigError("peak intensity must be >= 0");
  require_positive(tl_fwhm_fs, "pulse duration");
  require_positive(dipole, "dipole");
  const double rabi_peak = dipole * peak_field(peak_intensity_W_cm2) / units::hbar_J_fs;
  const double field_fwhm = std::sqrt(2.0) * tl_fwhm_fs;
  return rabi_peak * field_fwhm * std::sqrt(pi / (4.0 * std::log(2.0)));
}

}  // namespace rabi
