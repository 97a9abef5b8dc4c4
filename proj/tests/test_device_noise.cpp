/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "aimc/device_noise.hpp"
#include "aimc/hw_config.hpp"
#include "test_helpers.hpp"

using namespace aimc;
using aimc_test::sample_stats;

namespace {

Matrix constant_grid(std::size_t rows, std::size_t cols, double value) {
  Matrix m(rows, cols);
  std::fill(m.data.begin(), m.data.end(), value);
  return m;
}

} // namespace

TEST_CASE("hardware config defaults derive saturation and scale factors") {
  TileHardwareConfig hw;
  hw.validate();
  CHECK(hw.rows == 512);
  CHECK(hw.cols == 512);
  CHECK(hw.dac_bits == 8);
  CHECK(hw.adc_bits == 8);
  CHECK(hw.g_max == 25.0);
  CHECK(hw.wire_resistance == 0.35);
  CHECK(hw.v_read == 0.2);
  CHECK(hw.i_sat == 50.0);
  CHECK(hw.y_factor == doctest::Approx(2.54).epsilon(1e-12));
}

TEST_CASE("hardware config validation rejects out-of-range fields") {
  TileHardwareConfig hw;
  hw.rows = 0;
  CHECK_THROWS_AS(hw.validate(), ConfigError);
  hw = TileHardwareConfig{};
  hw.g_max = 0.0;
  CHECK_THROWS_AS(hw.validate(), ConfigError);
  hw = TileHardwareConfig{};
  hw.dac_bits = 0;
  CHECK_THROWS_AS(hw.validate(), ConfigError);
  hw = TileHardwareConfig{};
  hw.wire_resistance = -0.1;
  CHECK_THROWS_AS(hw.validate(), ConfigError);
  hw = TileHardwareConfig{};
  hw.i_sat = -1.0;
  CHECK_THROWS_AS(hw.validate(), ConfigError);
}

TEST_CASE("noise model validation checks std polynomials over the range") {
  NoiseModel nm;
  nm.validate(25.0);

  nm = NoiseModel{};
  nm.sigma_w = -0.1;
  CHECK_THROWS_AS(nm.validate(25.0), ConfigError);

  nm = NoiseModel{};
  nm.t0 = 0.0;
  CHECK_THROWS_AS(nm.validate(25.0), ConfigError);

  /* affine term drags the std negative at the top of the range */
  nm = NoiseModel{};
  nm.prog_coeffs = {0.26, -0.1, 0.0};
  CHECK_THROWS_AS(nm.validate(25.0), ConfigError);

  /* both endpoints are fine but the vertex at G=10 dips to -1 */
  nm = NoiseModel{};
  nm.prog_coeffs = {1.0, -0.4, 0.02};
  CHECK_THROWS_AS(nm.validate(25.0), ConfigError);

  nm = NoiseModel{};
  nm.read_coeffs = {-0.01, 0.0};
  CHECK_THROWS_AS(nm.validate(25.0), ConfigError);
}

TEST_CASE("programming with zero coefficients is exact") {
  NoiseModel nm;
  nm.prog_coeffs = {0.0, 0.0, 0.0};
  RngStream rng(7, 1);
  Matrix targets = constant_grid(16, 16, 12.5);
  targets(3, 4) = 0.0;
  targets(5, 6) = 25.0;
  Matrix written = program_conductances(targets, nm, 25.0, rng);
  for (std::size_t i = 0; i < targets.data.size(); ++i) {
    CHECK(written.data[i] == targets.data[i]);
  }
}

TEST_CASE("programming error matches the configured normal law") {
  NoiseModel nm;
  nm.prog_coeffs = {0.5, 0.0, 0.0};
  RngStream rng(11, 2);
  Matrix targets = constant_grid(1000, 1000, 10.0);
  Matrix written = program_conductances(targets, nm, 25.0, rng);

  std::vector<double> errors(written.data.size());
  for (std::size_t i = 0; i < errors.size(); ++i) {
    errors[i] = written.data[i] - 10.0;
  }
  auto [mean, stddev] = sample_stats(errors);
  const double se = 0.5 / std::sqrt(1e6);
  CHECK(std::abs(mean) < 3.0 * se);
  CHECK(stddev == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("programming error std follows the conductance polynomial") {
  NoiseModel nm;
  nm.prog_coeffs = {0.26, 0.0786, 0.0};
  RngStream rng(13, 3);
  const double target = 20.0;
  const double expected_std = 0.26 + 0.0786 * target;
  Matrix targets = constant_grid(500, 500, target);
  Matrix written = program_conductances(targets, nm, 25.0, rng);
  std::vector<double> errors(written.data.size());
  for (std::size_t i = 0; i < errors.size(); ++i) {
    errors[i] = written.data[i] - target;
  }
  auto [mean, stddev] = sample_stats(errors);
  const double se = expected_std / std::sqrt(250000.0);
  CHECK(std::abs(mean) < 4.0 * se);
  CHECK(stddev == doctest::Approx(expected_std).epsilon(0.02));
}

TEST_CASE("programming clips to the physical conductance window") {
  NoiseModel nm;
  nm.prog_coeffs = {5.0, 0.0, 0.0};
  RngStream rng(17, 4);
  Matrix top = constant_grid(100, 100, 25.0);
  Matrix written = program_conductances(top, nm, 25.0, rng);
  bool clipped_high = false;
  for (double g : written.data) {
    CHECK(g >= 0.0);
    CHECK(g <= 25.0);
    if (g == 25.0) {
      clipped_high = true;
    }
  }
  CHECK(clipped_high);

  Matrix bottom = constant_grid(100, 100, 0.0);
  written = program_conductances(bottom, nm, 25.0, rng);
  bool clipped_low = false;
  for (double g : written.data) {
    CHECK(g >= 0.0);
    if (g == 0.0) {
      clipped_low = true;
    }
  }
  CHECK(clipped_low);
}

TEST_CASE("programming rejects targets outside the conductance window") {
  NoiseModel nm;
  RngStream rng(19, 5);
  Matrix bad = constant_grid(2, 2, 10.0);
  bad(0, 1) = 25.5;
  CHECK_THROWS_AS(program_conductances(bad, nm, 25.0, rng), MappingError);
  bad(0, 1) = -0.5;
  CHECK_THROWS_AS(program_conductances(bad, nm, 25.0, rng), MappingError);
}

TEST_CASE("programming is deterministic for a fixed stream") {
  NoiseModel nm;
  Matrix targets = constant_grid(64, 64, 8.0);
  RngStream a(23, 6);
  RngStream b(23, 6);
  Matrix ga = program_conductances(targets, nm, 25.0, a);
  Matrix gb = program_conductances(targets, nm, 25.0, b);
  for (std::size_t i = 0; i < ga.data.size(); ++i) {
    CHECK(ga.data[i] == gb.data[i]);
  }
  RngStream c(23, 7);
  Matrix gc = program_conductances(targets, nm, 25.0, c);
  std::size_t same = 0;
  for (std::size_t i = 0; i < ga.data.size(); ++i) {
    if (ga.data[i] == gc.data[i]) {
      ++same;
    }
  }
  CHECK(same < ga.data.size() / 100);
}

TEST_CASE("drift at the reference time leaves the grid unchanged") {
  NoiseModel nm;
  RngStream rng(29, 8);
  Matrix g = constant_grid(32, 32, 10.0);
  Matrix out = apply_drift(g, 120.0, 100.0, nm, 25.0, rng);
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    CHECK(out.data[i] == g.data[i]);
  }
}

TEST_CASE("drift with a zero exponent distribution is the identity") {
  NoiseModel nm;
  nm.drift_nu_mean = 0.0;
  nm.drift_nu_std = 0.0;
  RngStream rng(31, 9);
  Matrix g = constant_grid(32, 32, 10.0);
  Matrix out = apply_drift(g, 1e9, 0.0, nm, 25.0, rng);
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    CHECK(out.data[i] == g.data[i]);
  }
}

TEST_CASE("deterministic exponent scales by the power law") {
  NoiseModel nm;
  nm.drift_nu_mean = 0.06;
  nm.drift_nu_std = 0.0;
  nm.t0 = 20.0;
  RngStream rng(37, 10);
  Matrix g = constant_grid(4, 4, 10.0);
  Matrix out = apply_drift(g, 200.0, 0.0, nm, 25.0, rng);
  const double factor = std::pow(10.0, -0.06);
  CHECK(factor == doctest::Approx(0.870963589956081).epsilon(1e-12));
  for (double v : out.data) {
    CHECK(v == doctest::Approx(10.0 * factor).epsilon(1e-12));
  }
}

TEST_CASE("drift exponents are fixed per programming event") {
  NoiseModel nm;
  nm.t0 = 20.0;
  RngStream rng(41, 11);
  Matrix g = constant_grid(100, 100, 10.0);
  Matrix at_10x = apply_drift(g, 200.0, 0.0, nm, 25.0, rng);
  Matrix at_100x = apply_drift(g, 2000.0, 0.0, nm, 25.0, rng);

  std::vector<double> nu_a(g.data.size()), nu_b(g.data.size());
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    nu_a[i] = -std::log(at_10x.data[i] / 10.0) / std::log(10.0);
    nu_b[i] = -std::log(at_100x.data[i] / 10.0) / std::log(100.0);
    CHECK(nu_a[i] == doctest::Approx(nu_b[i]).epsilon(1e-10));
  }

  auto [mean, stddev] = sample_stats(nu_a);
  const double se = 0.02 / std::sqrt(10000.0);
  CHECK(std::abs(mean - 0.06) < 4.0 * se);
  CHECK(stddev == doctest::Approx(0.02).epsilon(0.04));
}

TEST_CASE("drift before the reference window is a temporal error") {
  NoiseModel nm;
  nm.t0 = 20.0;
  RngStream rng(43, 12);
  Matrix g = constant_grid(2, 2, 10.0);
  CHECK_THROWS_AS(apply_drift(g, 119.9, 100.0, nm, 25.0, rng), TemporalError);
  CHECK_THROWS_AS(apply_drift(g, 99.0, 100.0, nm, 25.0, rng), TemporalError);
}

TEST_CASE("read noise with zero coefficients is the identity") {
  NoiseModel nm;
  nm.read_coeffs = {0.0, 0.0};
  RngStream rng(47, 13);
  Matrix g = constant_grid(16, 16, 10.0);
  Matrix out = read_noise(g, nm, 25.0, rng);
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    CHECK(out.data[i] == g.data[i]);
  }

  /* proportional-only noise vanishes on an unprogrammed grid */
  nm.read_coeffs = {0.0, 0.1};
  Matrix zeros = constant_grid(16, 16, 0.0);
  out = read_noise(zeros, nm, 25.0, rng);
  for (double v : out.data) {
    CHECK(v == 0.0);
  }
}

TEST_CASE("read noise matches the configured law and redraws each call") {
  NoiseModel nm;
  nm.read_coeffs = {0.1, 0.0};
  RngStream rng(53, 14);
  Matrix g = constant_grid(1000, 1000, 10.0);
  Matrix out = read_noise(g, nm, 25.0, rng);
  std::vector<double> errors(g.data.size());
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    errors[i] = out.data[i] - 10.0;
  }
  auto [mean, stddev] = sample_stats(errors);
  const double se = 0.1 / std::sqrt(1e6);
  CHECK(std::abs(mean) < 3.0 * se);
  CHECK(stddev == doctest::Approx(0.1).epsilon(0.02));

  Matrix again = read_noise(g, nm, 25.0, rng);
  std::size_t same = 0;
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    if (again.data[i] == out.data[i]) {
      ++same;
    }
  }
  CHECK(same < g.data.size() / 100);
}

TEST_CASE("read noise std is affine in the conductance") {
  NoiseModel nm;
  nm.read_coeffs = {0.05, 0.01};
  RngStream rng(59, 15);
  const double g0 = 10.0;
  const double expected_std = 0.05 + 0.01 * g0;
  Matrix g = constant_grid(500, 500, g0);
  Matrix out = read_noise(g, nm, 25.0, rng);
  std::vector<double> errors(g.data.size());
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    errors[i] = out.data[i] - g0;
  }
  auto [mean, stddev] = sample_stats(errors);
  CHECK(std::abs(mean) < 4.0 * expected_std / std::sqrt(250000.0));
  CHECK(stddev == doctest::Approx(expected_std).epsilon(0.02));
}

TEST_CASE("read noise respects the physical conductance window") {
  NoiseModel nm;
  nm.read_coeffs = {10.0, 0.0};
  RngStream rng(61, 16);
  Matrix g = constant_grid(100, 100, 24.0);
  Matrix out = read_noise(g, nm, 25.0, rng);
  for (double v : out.data) {
    CHECK(v >= 0.0);
    CHECK(v <= 25.0);
  }
}
