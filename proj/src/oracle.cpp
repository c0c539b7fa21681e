#include "rabi/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

namespace rabi::oracle {

namespace {
constexpr double pi = std::numbers::pi;
}

TwoLevelParams::TwoLevelParams(double rabi, double detuning)
    : rabi_(rabi), detuning_(detuning), generalized_(std::hypot(rabi, detuning)) {
  if (!std::isfinite(rabi) || rabi < 0.0) {
    throw ConfigError(fmt::format("rabi frequency must be finite and >= 0 (got {})", rabi));
  }
  if (!std::isfinite(detuning)) throw ConfigError("detuning must be finite");
}

double cw_population(const TwoLevelParams& p, double t) {
  if (t < 0.0) throw ConfigError(fmt::format("cw_population: t must be >= 0 (got {})", t));
  if (p.generalized() == 0.0) return 0.0;
  const double ratio = p.rabi() / p.generalized();
  const double s = std::sin(0.5 * p.generalized() * t);
  return ratio * ratio * s * s;
}

double cw_phase(const TwoLevelParams& p, double t) {
  if (t < 0.0) throw ConfigError(fmt::format("cw_phase: t must be >= 0 (got {})", t));
  const double omega = p.generalized();
  const double delta = p.detuning();
  const double x = 0.5 * omega * t;
  const double n = std::floor(x / pi);
  if (delta == 0.0) {
    // Limit delta -> 0+: pi/2 on the first half period, -pi/2 on the second.
    const double r = x - n * pi;
    return r < 0.5 * pi ? 0.5 * pi : (r == 0.5 * pi ? 0.0 : -0.5 * pi);
  }
  const double sgn = delta > 0.0 ? 1.0 : -1.0;
  const double k = std::round(x / pi);
  // Unwrapped arg of cos x + i (delta/Omega) sin x.
  const double theta = sgn * pi * k + std::atan((delta / omega) * std::tan(x - pi * k));
  return sgn * 0.5 * pi + delta * t - theta + n * pi;
}

std::pair<std::complex<double>, std::complex<double>> cw_amplitudes(const TwoLevelParams& p,
                                                                    double t) {
  using namespace std::complex_literals;
  const double omega = p.generalized();
  const double d = -p.detuning();  // omega_transition - omega_laser
  const auto rotation = std::polar(1.0, -0.5 * d * t);
  if (omega == 0.0) return {rotation, 0.0};
  const double x = 0.5 * omega * t;
  const std::complex<double> ground = rotation * (std::cos(x) + 1i * (d / omega) * std::sin(x));
  const std::complex<double> excited = rotation * 1i * (p.rabi() / omega) * std::sin(x);
  return {ground, excited};
}

double area_population(double area) {
  const double s = std::sin(0.5 * area);
  return s * s;
}

double AreaFit::model(double energy) const {
  return amplitude * area_population(k * std::sqrt(energy)) + offset;
}

double AreaFit::minimum_energy(int n) const {
  const double root = 2.0 * pi * n / k;
  return root * root;
}

namespace {

// Linear least squares for (amplitude, offset) at fixed k; returns the squared residual.
AreaFit solve_linear(std::span<const double> e, std::span<const double> y, double k) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(e.size());
  std::vector<double> basis(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    basis[i] = area_population(k * std::sqrt(e[i]));
    sx += basis[i];
    sy += y[i];
    sxx += basis[i] * basis[i];
    sxy += basis[i] * y[i];
  }
  AreaFit fit;
  fit.k = k;
  const double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-14 * n * n) {
    fit.amplitude = 0.0;
    fit.offset = sy / n;
  } else {
    fit.amplitude = (n * sxy - sx * sy) / det;
    fit.offset = (sy - fit.amplitude * sx) / n;
  }
  double r2 = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double r = y[i] - fit.amplitude * basis[i] - fit.offset;
    r2 += r * r;
  }
  fit.residual = r2;
  return fit;
}

}  // namespace

AreaFit fit_area_scale(std::span<const double> energies, std::span<const double> signal) {
  if (energies.size() != signal.size()) {
    throw ConfigError(fmt::format("fit_area_scale: {} energies but {} signal values", energies.size(),
                                  signal.size()));
  }
  if (energies.size() < 10) {
    throw ConfigError(fmt::format("fit_area_scale: need at least 10 points (got {})", energies.size()));
  }
  double e_max = 0.0;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (!(energies[i] >= 0.0) || !std::isfinite(energies[i]) || !std::isfinite(signal[i])) {
      throw ConfigError(fmt::format("fit_area_scale: invalid point {} ({}, {})", i, energies[i],
                                    signal[i]));
    }
    e_max = std::max(e_max, energies[i]);
  }
  if (e_max <= 0.0) throw ConfigError("fit_area_scale: all energies are zero");

  // Grid over the area reached at the largest energy, from half an oscillation up to
  // the sampling limit of one extremum per point.
  const double root = std::sqrt(e_max);
  const double area_lo = pi;
  const double area_hi = std::max(2.0 * pi, pi * static_cast<double>(energies.size()) / 2.0);
  const double area_step = 0.01;
  const auto grid = static_cast<std::size_t>(std::ceil((area_hi - area_lo) / area_step)) + 1;

  AreaFit best;
  best.residual = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < grid; ++i) {
    const double k = (area_lo + area_step * static_cast<double>(i)) / root;
    const AreaFit trial = solve_linear(energies, signal, k);
    if (trial.residual < best.residual) {
      best = trial;
      best_index = i;
    }
  }

  const double k_lo = (area_lo + area_step * (static_cast<double>(best_index) - 1.0)) / root;
  const double k_hi = (area_lo + area_step * (static_cast<double>(best_index) + 1.0)) / root;
  const auto objective = [&](double k) { return solve_linear(energies, signal, k).residual; };
  std::uintmax_t iterations = 200;
  const auto [k_opt, r_opt] = boost::math::tools::brent_find_minima(
      objective, std::max(k_lo, 0.5 * area_lo / root), k_hi, 52, iterations);
  AreaFit refined = solve_linear(energies, signal, k_opt);
  if (r_opt <= best.residual) best = refined;
  best.residual = std::sqrt(best.residual);

  if (iterations >= 200 || !std::isfinite(best.residual)) {
    throw FitError("fit_area_scale: Brent refinement did not converge", best);
  }
  if (best_index == 0 || best_index + 1 == grid) {
    throw FitError(fmt::format("fit_area_scale: best area at the grid edge ({:.3f} pi); the data do "
                               "not resolve an oscillation",
                               best.k * root / pi),
                   best);
  }
  if (!(best.amplitude > 0.0)) {
    throw FitError("fit_area_scale: fitted oscillation amplitude is not positive", best);
  }
  return best;
}

std::pair<std::vector<double>, std::vector<double>> read_two_column_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path));
  std::vector<double> a, b;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x = 0.0, y = 0.0;
    if (!(row >> x >> y)) {
      if (a.empty() && line_no == 1) continue;  // header
      throw ConfigError(fmt::format("{}:{}: expected two numeric columns", path, line_no));
    }
    a.push_back(x);
    b.push_back(y);
  }
  return {a, b};
}

}  // namespace rabi::oracle
