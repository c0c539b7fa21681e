#pragma once

#include <string>

#include "rabi/config.hpp"
#include "rabi/error.hpp"
#include "rabi/scan.hpp"

namespace rabi {

/// Output file could not be written (CLI exit code 2).
class IoError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

enum class EmitFormat { csv, gnuplot_matrix };

/// Throws ConfigError for names other than "csv" and "gnuplot-matrix".
EmitFormat parse_format(const std::string& name);

/// csv: header row with units, one row per point (x varies fastest for 2D grids).
/// gnuplot-matrix: first row "<n_x> x_0 x_1 ...", then one row "y z(x_0, y) z(x_1, y) ..." per y
/// (a single row with y = 0 for 1D grids), readable with `plot ... matrix nonuniform`.
std::string format_grid(const ScanGrid& grid, EmitFormat format);

/// Writes text to path; IoError names the path on failure.
void write_file(const std::string& path, const std::string& text);

void emit(const ScanGrid& grid, const std::string& path, EmitFormat format);

/// Two-column spectrum dump: wavelength_nm, intensity, phase_rad.
std::string spectrum_csv(const SpectralField& field);
/// time_fs, re, im, |eps| in V/m.
std::string envelope_csv(const TemporalField& field, double threshold = 1e-8);

}  // namespace rabi
