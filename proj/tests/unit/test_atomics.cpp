#include <doctest.h>

#include <cmath>
#include <string>

#include "rabi/atomics.hpp"
#include "rabi/error.hpp"
#include "rabi/units.hpp"

using namespace rabi;

TEST_CASE("Rb-D1 preset is a two-level system at 794.75 nm") {
  const LevelSystem rb = make_preset("Rb-D1");
  CHECK(rb.size() == 2);
  CHECK(rb.excited_count() == 1);
  CHECK(rb.frequency(0) == 0.0);
  CHECK(rb.frequency(1) == doctest::Approx(2.370).epsilon(1e-3));
  CHECK(rb.ground_dipole(1) == doctest::Approx(2.53e-29));
}

TEST_CASE("K-D preset has the fine-structure doublet") {
  const LevelSystem k = make_preset("K-D");
  REQUIRE(k.size() == 3);
  CHECK(units::wavelength(k.frequency(1)) == doctest::Approx(769.9).epsilon(1e-12));
  CHECK(units::wavelength(k.frequency(2)) == doctest::Approx(766.5).epsilon(1e-12));
  CHECK(k.ground_dipole(2) / k.ground_dipole(1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(k.ground_dipole(1) == doctest::Approx(2.5e-29));

  const LevelSystem custom = make_preset("K-D", PresetOptions{3.0e-29});
  CHECK(custom.ground_dipole(1) == doctest::Approx(3.0e-29));
  CHECK(custom.ground_dipole(2) == doctest::Approx(3.0e-29 * std::sqrt(2.0)));
}

TEST_CASE("unknown preset names the valid ones") {
  try {
    make_preset("Cs");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("Rb-D1") != std::string::npos);
    CHECK(what.find("K-D") != std::string::npos);
  }
}

TEST_CASE("splitting") {
  const LevelSystem k = make_preset("K-D");
  CHECK(splitting(k, 1, 2) == doctest::Approx(1.727).epsilon(5e-4));
  CHECK(std::abs(splitting(k, 1, 2) - 1.73) / 1.73 < 5e-3);
  CHECK(splitting(k, 2, 1) == splitting(k, 1, 2));
  CHECK(splitting(k, 1, 1) == 0.0);
  CHECK_THROWS_AS(splitting(make_preset("Rb-D1"), 1, 2), ConfigError);
  CHECK_THROWS_AS(splitting(k, 0, 1), ConfigError);
}

TEST_CASE("wavelength round trip") {
  for (double nm : {794.75, 769.9, 766.5, 400.0, 1550.0}) {
    CHECK(std::abs(units::wavelength(units::angular_frequency(nm)) / nm - 1.0) < 1e-12);
  }
}

TEST_CASE("level system invariants are enforced") {
  const double w = units::angular_frequency(780.0);
  CHECK_THROWS_AS(LevelSystem("x", {}, {}), ConfigError);
  CHECK_THROWS_AS(LevelSystem("x", {{"g", 0.1}, {"e", w}}, {{0, 1, 1e-29}}), ConfigError);
  CHECK_THROWS_AS(LevelSystem("x", {{"g", 0.0}, {"e", w}, {"f", w * 0.99}}, {{0, 1, 1e-29}, {0, 2, 1e-29}}),
                  ConfigError);
  CHECK_THROWS_AS(LevelSystem("x", {{"g", 0.0}, {"e", w}}, {{0, 1, -1e-29}}), ConfigError);
  CHECK_THROWS_AS(LevelSystem("x", {{"g", 0.0}, {"e", w}}, {{0, 1, 1e-29}, {0, 1, 2e-29}}), ConfigError);
  CHECK_THROWS_AS(LevelSystem("x", {{"g", 0.0}, {"e", w}}, {{0, 2, 1e-29}}), ConfigError);
  CHECK_THROWS_AS(LevelSystem("x", {{"g", 0.0}, {"e", w}, {"f", w * 1.01}}, {{0, 1, 1e-29}}), ConfigError);
  CHECK_NOTHROW(LevelSystem("x", {{"g", 0.0}, {"e", w}}, {{0, 1, 1e-29}}));
}
