#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <stdexcept>
#include <string>

#include "rabi/config.hpp"
#include "rabi/emit.hpp"
#include "rabi/error.hpp"
#include "rabi/scan.hpp"

using namespace rabi;
constexpr double pi = std::numbers::pi;

namespace {

const char* k_yaml = R"(schema_version: 1
preset: K-D
spectrum: {center_nm: 768.2, fwhm_nm: 10.3, energy_J: 1.0e-6}
mask:
  windows:
    - {center_nm: 769.9, fwhm_nm: 1.8, relative_amplitude: 1.0}
    - {center_nm: 766.5, fwhm_nm: 1.8, relative_amplitude: auto}
scan:
  kind: area_delay
  area_pi: {min: 0.0, max: 2.0, points: 5}
  delay_fs: {min: 0, max: 1500, points: 6}
probe: {path_weights: [1, [0, 1]], duration_fwhm_fs: 0}
averaging: {diameter_ratio: 0.3, probe_order: 2}
numerics: {grid_points: 4096}
)";

std::string error_of(const std::string& yaml) {
  try {
    parse_config(yaml, "test.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(k_yaml);
  CHECK(c.kind == ScanKind::area_delay);
  CHECK(c.mask.windows.size() == 2);
  REQUIRE(c.auto_windows.size() == 1);
  CHECK(c.auto_windows[0] == 1);
  CHECK(c.area_pi.values().size() == 5);
  CHECK(c.area_pi.values().back() == 2.0);
  REQUIRE(c.probe.path_weights.size() == 2);
  CHECK(c.probe.path_weights[1] == cplx(0.0, 1.0));
  REQUIRE(c.averaging.has_value());
  CHECK(c.averaging->diameter_ratio == 0.3);
  CHECK_FALSE(c.prepulse.has_value());
  CHECK(c.numerics.grid_points == 4096);

  for (const char* path : {"configs/k_area_delay_map.yaml", "configs/k_beat_trace.yaml",
                           "configs/k_area_scan.yaml", "configs/rb_energy_scan.yaml"}) {
    const auto full = std::filesystem::path(RABI_SOURCE_DIR) / path;
    CHECK_NOTHROW(load_config(full.string()));
  }
}

TEST_CASE("config errors carry a location") {
  std::string bad = k_yaml;
  bad.replace(bad.find("probe:"), 6, "probes:");
  const std::string unknown = error_of(bad);
  CHECK(unknown.find("test.yaml:12:") != std::string::npos);
  CHECK(unknown.find("probes") != std::string::npos);

  std::string version = k_yaml;
  version.replace(0, 17, "schema_version: 2");
  CHECK(error_of(version).find("schema") != std::string::npos);

  std::string syntax = k_yaml;
  syntax.replace(syntax.find("{min: 0.0"), 1, "[");
  CHECK(error_of(syntax).find("test.yaml:") == 0);

  std::string mismatch = k_yaml;
  mismatch.replace(mismatch.find("area_delay"), 10, "rb_energy");
  CHECK_FALSE(error_of(mismatch).empty());

  std::string negative = k_yaml;
  negative.replace(negative.find("fwhm_nm: 1.8"), 12, "fwhm_nm: -1");
  CHECK(error_of(negative).find("test.yaml:6:") == 0);

  CHECK_FALSE(error_of("").empty());
  CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("pulse calibration") {
  const ExperimentConfig c = parse_config(k_yaml);
  const PulseSetup setup = build_pulse(c);
  REQUIRE(setup.areas.size() == 2);
  // The auto window equalizes the two transition areas.
  CHECK(setup.areas[1] == doctest::Approx(setup.areas[0]).epsilon(1e-6));
  CHECK(setup.mask.windows[0].relative_amplitude <= 1.0);
  CHECK(setup.mask.windows[1].relative_amplitude <= 1.0);

  GridSpec grid;
  grid.points = c.numerics.grid_points;
  const SpectralField source = gaussian_spectrum(768.2, 10.3, 1e-6, grid);
  for (double target : {0.5 * pi, 2.0 * pi, 3.7 * pi}) {
    const SpectralField s = scaled(source, setup.scale_for_area(target));
    const double area = effective_area(split_by_windows(s, setup.mask, setup.system), setup.system);
    CHECK(area == doctest::Approx(target).epsilon(1e-6));
  }

  const PulseSetup narrow = build_pulse(c, 0.36);
  for (const auto& w : narrow.mask.windows) CHECK(w.fwhm_nm == 0.36);
  CHECK(narrow.areas[1] == doctest::Approx(narrow.areas[0]).epsilon(1e-6));

  ExperimentConfig leak = c;
  leak.numerics.include_772nm_leak = true;
  CHECK(build_pulse(leak).mask.windows.size() == 3);
}

TEST_CASE("parallel_for covers every index and rethrows the lowest failure") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 3, [&](std::size_t i) { ++hits[i]; });
  for (int h : hits) CHECK(h == 1);
  for (std::size_t workers : {1, 2, 4}) {
    try {
      parallel_for(50, workers, [&](std::size_t i) {
        if (i == 7 || i == 31) throw std::runtime_error(std::to_string(i));
      });
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "7");
    }
  }
}

TEST_CASE("area-delay scan is deterministic across worker counts") {
  const ExperimentConfig c = parse_config(k_yaml);
  const ScanGrid one = run_area_delay_scan(c, ScanOptions{1});
  const ScanGrid three = run_area_delay_scan(c, ScanOptions{3});
  REQUIRE(one.z.size() == 30);
  CHECK(one.z == three.z);
  CHECK(format_grid(one, EmitFormat::csv) == format_grid(three, EmitFormat::csv));
  double peak = 0.0;
  for (double v : one.z) {
    CHECK(v >= 0.0);
    peak = std::max(peak, v);
  }
  CHECK(peak == doctest::Approx(1.0));
  // Zero area: no excitation at any delay.
  for (std::size_t iy = 0; iy < one.y.size(); ++iy) CHECK(one.at(0, iy) < 1e-12);
}

TEST_CASE("area scan at zero area") {
  std::string yaml = k_yaml;
  yaml.replace(yaml.find("kind: area_delay"), 16, "kind: area");
  const ExperimentConfig c = parse_config(yaml);
  const AreaScanResult r = run_area_scan_at(c, std::nullopt);
  CHECK(r.ground.at(0) == doctest::Approx(1.0));
  REQUIRE(r.phase.flagged.size() == 5);
  CHECK(r.phase.flagged[0]);
  CHECK_FALSE(r.phase.flagged[2]);
  REQUIRE(r.excited.size() == 2);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(r.ground.at(i) + r.excited[0].at(i) + r.excited[1].at(i) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("the 772 nm leak is a small perturbation") {
  std::string yaml = k_yaml;
  yaml.replace(yaml.find("kind: area_delay"), 16, "kind: area");
  ExperimentConfig c = parse_config(yaml);
  const AreaScanResult clean = run_area_scan_at(c, std::nullopt);
  c.numerics.include_772nm_leak = true;
  const AreaScanResult leak = run_area_scan_at(c, std::nullopt);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(std::abs(leak.ground.at(i) - clean.ground.at(i)) < 0.05);
    CHECK(std::abs(leak.excited[0].at(i) - clean.excited[0].at(i)) < 0.05);
  }
}

TEST_CASE("grid output") {
  ScanGrid g;
  g.x_label = "area_pi";
  g.y_label = "delay_fs";
  g.z_label = "ion_signal";
  g.x = {1.0, 2.0};
  g.y = {10.0, 20.0};
  g.z = {0.5, 0.25, 0.75, 1.5};

  const std::string matrix = format_grid(g, EmitFormat::gnuplot_matrix);
  CHECK(matrix == "2 1 2\n10 0.5 0.25\n20 0.75 1.5\n");
  const std::string csv = format_grid(g, EmitFormat::csv);
  CHECK(csv.rfind("area_pi,delay_fs,ion_signal\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(csv.find("2,10,0.25\n") != std::string::npos);

  CHECK(parse_format("csv") == EmitFormat::csv);
  CHECK(parse_format("gnuplot-matrix") == EmitFormat::gnuplot_matrix);
  CHECK_THROWS_AS(parse_format("xlsx"), ConfigError);

  const auto dir = std::filesystem::temp_directory_path() / "rabi_emit_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "grid.dat").string();
  emit(g, path, EmitFormat::gnuplot_matrix);
  emit(g, path, EmitFormat::gnuplot_matrix);
  std::ifstream in(path);
  const std::string back((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(back == matrix);
  std::filesystem::remove_all(dir);

  try {
    write_file("/nonexistent_dir/out.csv", "x");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("/nonexistent_dir/out.csv") != std::string::npos);
  }
}
