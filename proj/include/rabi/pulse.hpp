#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rabi/atomics.hpp"

namespace rabi {

using cplx = std::complex<double>;

/// Spectral grid parameters. The grid is uniform in angular frequency around the carrier.
struct GridSpec {
  std::size_t points = std::size_t{1} << 14;  // power of two
  /// Half-width of the grid, in nm at the carrier. Unset: max(40 nm, 4.25 * fwhm).
  std::optional<double> half_span_nm;
  /// Carrier wavelength. Unset: the spectrum center.
  std::optional<double> carrier_nm;
  /// Beam cross-section that converts pulse energy to field strength.
  double beam_area_cm2 = 1e-3;
};

/// Complex spectral envelope on a uniform angular-frequency grid.
///
/// amplitude[k] sits at carrier + (k - N/2) * spacing and is energy-normalized:
/// energy() = sum |amplitude|^2 * spacing, in J.
struct SpectralField {
  double carrier = 0.0;  // rad/fs
  double spacing = 0.0;  // rad/fs
  double beam_area_cm2 = 1e-3;
  std::vector<cplx> amplitude;

  std::size_t size() const { return amplitude.size(); }
  double offset(std::size_t k) const;      // rad/fs from the carrier
  double wavelength(std::size_t k) const;  // nm
  double energy() const;                   // J
};

/// Complex field envelope eps(t) in V/m, physical field Re[eps(t) exp(-i carrier t)].
///
/// derivative holds d eps/dt (V/m/fs) when known exactly (spectral synthesis);
/// the propagator then interpolates with cubic Hermite polynomials, otherwise linearly.
struct TemporalField {
  double carrier = 0.0;  // rad/fs
  double t0 = 0.0;       // fs, time of sample 0
  double dt = 1.0;       // fs
  double beam_area_cm2 = 1e-3;
  std::vector<cplx> envelope;
  std::vector<cplx> derivative;

  std::size_t size() const { return envelope.size(); }
  double time(std::size_t n) const { return t0 + dt * static_cast<double>(n); }
  bool has_derivative() const { return derivative.size() == envelope.size(); }
  double peak() const;    // max |eps|
  double energy() const;  // J, through beam_area_cm2
};

struct Window {
  double center_nm = 0.0;
  double fwhm_nm = 1.0;  // intensity FWHM
  double relative_amplitude = 1.0;
  double phase = 0.0;  // rad
};

/// Pulse-shaper transmission: a coherent sum of super-Gaussian windows plus an optional
/// global spectral phase sum_n phase_poly[n] * (omega - carrier)^n (rad, omega in rad/fs).
struct Mask {
  std::vector<Window> windows;
  std::vector<double> phase_poly;
  int order = 1;  // super-Gaussian order; 1 is a plain Gaussian window
};

/// Throws ConfigError when a window has fwhm <= 0, amplitude outside [0, 1], or order < 1.
void validate(const Mask& mask);

/// Complex amplitude transmission of the windows at a wavelength (phase polynomial excluded).
cplx window_transmission(const Mask& mask, double wavelength_nm);

/// Flat-phase spectrum with a Gaussian intensity profile in wavelength.
/// Throws ConfigError for fwhm <= 0 or energy <= 0, NumericsError when the grid
/// spans less than 8 FWHM in wavelength.
SpectralField gaussian_spectrum(double center_nm, double fwhm_nm, double energy_J,
                                const GridSpec& grid = {});

SpectralField apply_mask(const SpectralField& field, const Mask& mask);

/// Rescales the amplitude to carry the given energy. A zero field stays zero.
SpectralField with_energy(const SpectralField& field, double energy_J);

SpectralField scaled(const SpectralField& field, cplx factor);

struct SynthesisOptions {
  /// Zero-padding factor in the spectral domain; the time window stays 2 pi / spacing
  /// while the sample spacing shrinks by this factor.
  std::size_t oversample = 16;
  /// Require |eps| < edge_tolerance * peak at both ends of the time window.
  double edge_tolerance = 1e-6;
};

/// Fourier synthesis of the temporal envelope; the spectral center maps to t = 0.
/// Throws NumericsError when the envelope has not decayed at the window edges.
TemporalField to_temporal(const SpectralField& field, const SynthesisOptions& options = {});

/// Integral of |eps(t)| mu / hbar dt (trapezoid rule), in rad.
double pulse_area(const TemporalField& field, double dipole);

/// Intensity FWHM of |eps|^2 (fs), located by linear interpolation of the half-maximum crossings.
double intensity_fwhm(const TemporalField& field);

/// How the spectrum is split between the two transitions for effective-area bookkeeping.
enum class PartitionMode {
  midpoint,  // hard cut at the midpoint between the two resonances
  windows,   // each mask window is attributed to its nearest resonance
};

/// Spectrum split at the midpoint frequency of the two excited resonances.
/// Returns one part per excited level, in level order.
std::vector<SpectralField> split_at_midpoint(const SpectralField& field, const LevelSystem& system);

/// Source spectrum times the windows nearest to each resonance (phase polynomial included).
/// Returns one part per excited level, in level order.
std::vector<SpectralField> split_by_windows(const SpectralField& source, const Mask& mask,
                                            const LevelSystem& system);

/// Areas of each part with the dipole of its transition, in level order.
std::vector<double> transition_areas(std::span<const SpectralField> parts, const LevelSystem& system,
                                     const SynthesisOptions& options = {});

/// sqrt(A1^2 + A2^2) for a system with exactly two excited levels.
double effective_area(std::span<const SpectralField> parts, const LevelSystem& system,
                      const SynthesisOptions& options = {});

/// effective_area with the midpoint partition.
double effective_area(const SpectralField& field, const LevelSystem& system,
                      const SynthesisOptions& options = {});

/// Peak field amplitude (V/m) of a cycle-averaged intensity in W/cm^2.
double peak_field(double intensity_W_cm2);

/// Pulse area of a transform-limited Gaussian pulse given its peak intensity and intensity FWHM.
double area_from_intensity(double peak_intensity_W_cm2, double tl_fwhm_fs, double dipole);

}  // namespace rabi
