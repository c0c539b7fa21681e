#pragma once

#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rabi/error.hpp"

namespace rabi::oracle {

/// Constant-field two-level parameters. detuning is omega_laser - omega_transition.
class TwoLevelParams {
 public:
  /// Throws ConfigError for negative or non-finite rabi, non-finite detuning.
  TwoLevelParams(double rabi, double detuning);

  double rabi() const { return rabi_; }
  double detuning() const { return detuning_; }
  double generalized() const { return generalized_; }

 private:
  double rabi_;
  double detuning_;
  double generalized_;
};

/// Excited population (rabi/Omega)^2 sin^2(Omega t / 2). Throws ConfigError for t < 0.
double cw_population(const TwoLevelParams& p, double t);

/// Relative phase delta(t) = arg(c_g) - arg(c_e) between ground and excited amplitudes
/// (interaction picture), on the branch that is continuous inside each open interval
/// (2 pi n, 2 pi (n + 1)) of Omega t and jumps by +pi at Omega t = 2 pi n.
/// Detuning 0 returns the detuning -> 0+ limit.
double cw_phase(const TwoLevelParams& p, double t);

/// Exact rotating-frame amplitudes (c_g, c_e) starting from the ground state, in the
/// propagator's frame and sign convention (field envelope real and positive).
std::pair<std::complex<double>, std::complex<double>> cw_amplitudes(const TwoLevelParams& p, double t);

/// sin^2(area / 2).
double area_population(double area);

struct AreaFit {
  double k = 0.0;  // rad / sqrt(J)
  double amplitude = 0.0;
  double offset = 0.0;
  double residual = 0.0;  // root of the summed squared residuals

  double model(double energy) const;
  /// Energy of the n-th minimum of the fitted model, k sqrt(E) = 2 pi n.
  double minimum_energy(int n = 1) const;
};

/// Carries the best iterate when the fit does not converge.
class FitError : public NumericsError {
 public:
  FitError(const std::string& what, AreaFit best) : NumericsError(what), best_(best) {}
  const AreaFit& best() const { return best_; }

 private:
  AreaFit best_;
};

/// Least-squares fit of signal = amplitude sin^2(k sqrt(E) / 2) + offset.
/// Coarse grid in k followed by Brent refinement; amplitude and offset are solved
/// linearly for every trial k. Throws ConfigError for fewer than 10 points or
/// mismatched lengths, FitError when no oscillation can be resolved.
AreaFit fit_area_scale(std::span<const double> energies, std::span<const double> signal);

/// Reads "energy,signal" rows; a non-numeric first row is skipped as a header.
std::pair<std::vector<double>, std::vector<double>> read_two_column_csv(const std::string& path);

}  // namespace rabi::oracle
