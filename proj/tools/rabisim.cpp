// rabisim: command-line front end for the Rabi-oscillation scans.
//
//   rabisim run <config.yaml> [--out DIR] [--workers N] [--format csv|gnuplot-matrix]
//                             [--emit-spectrum] [--emit-envelope]
//   rabisim validate <config.yaml>
//   rabisim presets
//   rabisim oracle <rabi_rad_fs> <detuning_rad_fs> <t_fs>
//   rabisim fit <energy_signal.csv>
//
// Exit codes: 0 success, 2 configuration or I/O error, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rabi/atomics.hpp"
#include "rabi/config.hpp"
#include "rabi/emit.hpp"
#include "rabi/error.hpp"
#include "rabi/oracle.hpp"
#include "rabi/scan.hpp"
#include "rabi/units.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerics = 3;

struct RunArgs {
  std::string config;
  std::string out = ".";
  std::size_t workers = 0;
  std::string format = "csv";
  bool emit_spectrum = false;
  bool emit_envelope = false;
};

std::string output_path(const RunArgs& args, const std::string& suffix, rabi::EmitFormat format) {
  const std::string stem = std::filesystem::path(args.config).stem().string();
  const char* ext = format == rabi::EmitFormat::csv ? ".csv" : ".dat";
  return (std::filesystem::path(args.out) / (stem + suffix + ext)).string();
}

std::string text_path(const RunArgs& args, const std::string& suffix) {
  const std::string stem = std::filesystem::path(args.config).stem().string();
  return (std::filesystem::path(args.out) / (stem + suffix)).string();
}

int run(const RunArgs& args) {
  const rabi::ExperimentConfig config = rabi::load_config(args.config);
  const rabi::EmitFormat format = rabi::parse_format(args.format);
  std::error_code ec;
  std::filesystem::create_directories(args.out, ec);
  if (ec) throw rabi::IoError(fmt::format("cannot create output directory '{}': {}", args.out, ec.message()));

  rabi::ScanOptions options;
  options.workers = args.workers > 0 ? args.workers : std::max(1u, std::thread::hardware_concurrency());

  if (args.emit_spectrum || args.emit_envelope) {
    const rabi::PulseSetup setup = rabi::build_pulse(config);
    if (args.emit_spectrum) rabi::write_file(text_path(args, "_spectrum.csv"), rabi::spectrum_csv(setup.spectrum));
    if (args.emit_envelope) rabi::write_file(text_path(args, "_envelope.csv"), rabi::envelope_csv(setup.field));
  }

  switch (config.kind) {
    case rabi::ScanKind::area_delay: {
      const auto grid = rabi::run_area_delay_scan(config, options);
      const auto path = output_path(args, "_ion_signal", format);
      rabi::emit(grid, path, format);
      fmt::print("wrote {} ({} areas x {} delays)\n", path, grid.x.size(), grid.y.size());
      break;
    }
    case rabi::ScanKind::area: {
      for (const auto& r : rabi::run_area_scan(config, options)) {
        const std::string tag = r.bandwidth_nm > 0.0 ? fmt::format("_bw{}nm", r.bandwidth_nm) : "";
        rabi::emit(r.ground, output_path(args, tag + "_ground", format), format);
        for (const auto& e : r.excited) {
          rabi::emit(e, output_path(args, fmt::format("{}_population_{}", tag, e.level), format), format);
        }
        rabi::emit(r.phase, output_path(args, tag + "_phase", format), format);
        rabi::write_file(text_path(args, tag + "_jumps.txt"), rabi::phase_jumps_text(r.jumps));
        fmt::print("area scan{}: {} points, {} phase jumps\n", tag, r.ground.x.size(), r.jumps.size());
      }
      break;
    }
    case rabi::ScanKind::rb_energy: {
      const auto r = rabi::run_rb_energy_scan(config, options);
      rabi::emit(r.population, output_path(args, "_population", format), format);
      const std::string report = fmt::format(
          "k_rad_per_sqrtJ {:.10g}\namplitude {:.10g}\noffset {:.10g}\nresidual {:.10g}\n"
          "first_minimum_J {:.10g}\nsimulated_area_pi {:.6f}\nintensity_area_pi {:.6f}\n",
          r.fit.k, r.fit.amplitude, r.fit.offset, r.fit.residual, r.first_minimum_J, r.simulated_area_pi,
          r.intensity_area_pi);
      rabi::write_file(text_path(args, "_fit.txt"), report);
      fmt::print("{}", report);
      break;
    }
  }
  return 0;
}

int validate(const std::string& path) {
  const rabi::ExperimentConfig config = rabi::load_config(path);
  fmt::print("{}: ok (schema_version {}, preset {}, scan {})\n", path, config.schema_version, config.preset,
             rabi::to_string(config.kind));
  return 0;
}

int presets() {
  for (const auto& name : rabi::preset_names()) {
    const rabi::LevelSystem system = rabi::make_preset(name);
    fmt::print("{}\n", name);
    for (std::size_t k = 1; k < system.size(); ++k) {
      fmt::print("  {:<8} {:9.3f} nm  dipole {:.4g} C*m\n", system.levels()[k].label,
                 rabi::units::wavelength(system.frequency(k)), system.ground_dipole(k));
    }
  }
  return 0;
}

int oracle(double rabi_frequency, double detuning, double t) {
  const rabi::oracle::TwoLevelParams p(rabi_frequency, detuning);
  fmt::print("generalized_rabi_rad_fs {:.10g}\n", p.generalized());
  fmt::print("population {:.12g}\n", rabi::oracle::cw_population(p, t));
  fmt::print("phase_rad {:.12g}\n", rabi::oracle::cw_phase(p, t));
  return 0;
}

int fit(const std::string& path) {
  const auto [energies, signal] = rabi::oracle::read_two_column_csv(path);
  const auto f = rabi::oracle::fit_area_scale(energies, signal);
  fmt::print("k_rad_per_sqrtJ {:.10g}\namplitude {:.10g}\noffset {:.10g}\nresidual {:.10g}\n", f.k,
             f.amplitude, f.offset, f.residual);
  fmt::print("first_minimum_J {:.10g}\n", f.minimum_energy(1));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rabi oscillations between a ground state and a fine-structure wavepacket"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "run the scan described by a config file");
  run_cmd->add_option("config", run_args.config, "YAML experiment file")->required();
  run_cmd->add_option("--out", run_args.out, "output directory");
  run_cmd->add_option("--workers", run_args.workers, "worker threads (0: all cores)");
  run_cmd->add_option("--format", run_args.format, "csv or gnuplot-matrix");
  run_cmd->add_flag("--emit-spectrum", run_args.emit_spectrum, "also write the shaped spectrum");
  run_cmd->add_flag("--emit-envelope", run_args.emit_envelope, "also write the temporal envelope");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "check a config file");
  validate_cmd->add_option("config", validate_path, "YAML experiment file")->required();

  auto* presets_cmd = app.add_subcommand("presets", "list the atomic presets");

  double rabi_frequency = 0.0, detuning = 0.0, time = 0.0;
  auto* oracle_cmd = app.add_subcommand("oracle", "evaluate the constant-field two-level solution");
  oracle_cmd->add_option("rabi", rabi_frequency, "resonant Rabi frequency, rad/fs")->required();
  oracle_cmd->add_option("detuning", detuning, "laser minus transition frequency, rad/fs")->required();
  oracle_cmd->add_option("t", time, "time, fs")->required();

  std::string fit_path;
  auto* fit_cmd = app.add_subcommand("fit", "fit sin^2(k sqrt(E)/2) to energy,signal CSV data");
  fit_cmd->add_option("csv", fit_path, "two-column CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    if (*run_cmd) return run(run_args);
    if (*validate_cmd) return validate(validate_path);
    if (*presets_cmd) return presets();
    if (*oracle_cmd) return oracle(rabi_frequency, detuning, time);
    if (*fit_cmd) return fit(fit_path);
  } catch (const rabi::ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_config;
  } catch (const rabi::NumericsError& e) {
    fmt::print(stderr, "numerics error: {}\n", e.what());
    return exit_numerics;
  }
  return 0;
}
