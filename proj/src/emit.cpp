#include "rabi/emit.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

namespace rabi {

EmitFormat parse_format(const std::string& name) {
  if (name == "csv") return EmitFormat::csv;
  if (name == "gnuplot-matrix") return EmitFormat::gnuplot_matrix;
  throw ConfigError(fmt::format("unknown output format '{}' (expected csv or gnuplot-matrix)", name));
}

std::string format_grid(const ScanGrid& grid, EmitFormat format) {
  const std::size_t nx = grid.x.size();
  const std::size_t ny = grid.y.empty() ? 1 : grid.y.size();
  if (grid.z.size() != nx * ny) {
    throw ConfigError(fmt::format("scan grid has {} values for {} x {} points", grid.z.size(), nx, ny));
  }
  std::string out;
  if (format == EmitFormat::csv) {
    const bool flags = !grid.flagged.empty();
    out += grid.x_label;
    if (!grid.y.empty()) out += "," + grid.y_label;
    out += "," + grid.z_label;
    if (flags) out += ",indeterminate";
    out += '\n';
    for (std::size_t iy = 0; iy < ny; ++iy) {
      for (std::size_t ix = 0; ix < nx; ++ix) {
        out += fmt::format("{:.17g}", grid.x[ix]);
        if (!grid.y.empty()) out += fmt::format(",{:.17g}", grid.y[iy]);
        out += fmt::format(",{:.17g}", grid.at(ix, iy));
        if (flags) out += grid.flagged[iy * nx + ix] ? ",1" : ",0";
        out += '\n';
      }
    }
    return out;
  }
  out += fmt::format("{}", nx);
  for (double x : grid.x) out += fmt::format(" {:.17g}", x);
  out += '\n';
  for (std::size_t iy = 0; iy < ny; ++iy) {
    out += fmt::format("{:.17g}", grid.y.empty() ? 0.0 : grid.y[iy]);
    for (std::size_t ix = 0; ix < nx; ++ix) out += fmt::format(" {:.17g}", grid.at(ix, iy));
    out += '\n';
  }
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing: {}", path, std::strerror(errno)));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError(fmt::format("failed writing '{}'", path));
}

void emit(const ScanGrid& grid, const std::string& path, EmitFormat format) {
  write_file(path, format_grid(grid, format));
}

std::string spectrum_csv(const SpectralField& field) {
  std::string out = "wavelength_nm,intensity_J_fs,phase_rad\n";
  for (std::size_t k = 0; k < field.size(); ++k) {
    out += fmt::format("{:.17g},{:.17g},{:.17g}\n", field.wavelength(k), std::norm(field.amplitude[k]),
                       std::arg(field.amplitude[k]));
  }
  return out;
}

std::string envelope_csv(const TemporalField& field, double threshold) {
  std::string out = "time_fs,re_V_m,im_V_m,abs_V_m\n";
  const double cut = threshold * field.peak();
  for (std::size_t n = 0; n < field.size(); ++n) {
    const cplx e = field.envelope[n];
    if (std::abs(e) < cut) continue;
    out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", field.time(n), e.real(), e.imag(), std::abs(e));
  }
  return out;
}

}  // namespace rabi
