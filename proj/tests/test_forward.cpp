/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "aimc/forward.hpp"
#include "aimc/mapping.hpp"
#include "test_helpers.hpp"

using namespace aimc;

namespace {

Matrix random_weights(std::size_t rows, std::size_t cols, RngStream &rng) {
  Matrix w(rows, cols);
  for (double &v : w.data) {
    v = rng.uniform(-1.0, 1.0);
  }
  return w;
}

Vector random_input(std::size_t n, RngStream &rng, double lo = -1.0,
                    double hi = 1.0) {
  Vector x(n);
  for (double &v : x) {
    v = rng.uniform(lo, hi);
  }
  return x;
}

NoiseModel zero_noise() {
  NoiseModel nm;
  nm.sigma_w = 0.0;
  nm.sigma_inp = 0.0;
  nm.sigma_out = 0.0;
  nm.prog_coeffs = {0.0, 0.0, 0.0};
  nm.read_coeffs = {0.0, 0.0};
  nm.drift_nu_mean = 0.0;
  nm.drift_nu_std = 0.0;
  return nm;
}

double rel_l2(const std::vector<Vector> &a, const std::vector<Vector> &b) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t j = 0; j < a[k].size(); ++j) {
      const double d = a[k][j] - b[k][j];
      num += d * d;
      den += b[k][j] * b[k][j];
    }
  }
  return std::sqrt(num / den);
}

} // namespace

TEST_CASE("tile construction carries the unit-function periphery") {
  TileHardwareConfig hw;
  RngStream rng(301, 0);
  Matrix w = random_weights(16, 8, rng);
  AnalogTile tile = make_tile(w, hw);
  tile.validate(hw);
  CHECK(tile.rows() == 16);
  CHECK(tile.cols() == 8);
  for (std::size_t c = 0; c < 8; ++c) {
    CHECK(tile.g_col_cap[c] == hw.g_max);
    CHECK(tile.out_scale[c] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(tile.out_offset[c] == 0.0);
  }
  for (std::size_t i = 0; i < w.data.size(); ++i) {
    CHECK((tile.g_plus.data[i] == 0.0 || tile.g_minus.data[i] == 0.0));
  }
}

TEST_CASE("ideal mode reproduces the plain matrix-vector product") {
  TileHardwareConfig hw;
  RngStream rng(307, 1);
  Matrix w = random_weights(32, 24, rng);
  AnalogTile tile = make_tile(w, hw);
  Vector x = random_input(32, rng);
  NoiseModel nm;
  RngStream fwd(307, 2);
  Vector y = tile_forward(tile, x, ForwardMode::ideal(), nm, hw, fwd);
  Vector ref = ideal_mvm(x, w);
  for (std::size_t j = 0; j < y.size(); ++j) {
    CHECK(y[j] == doctest::Approx(ref[j]).epsilon(1e-12));
  }

  for (std::size_t j = 0; j < tile.cols(); ++j) {
    tile.out_offset[j] = 0.5 + static_cast<double>(j);
  }
  y = tile_forward(tile, x, ForwardMode::ideal(), nm, hw, fwd);
  for (std::size_t j = 0; j < y.size(); ++j) {
    CHECK(y[j] == doctest::Approx(ref[j] + 0.5 + static_cast<double>(j))
                      .epsilon(1e-12));
  }
}

TEST_CASE("training mode with zero noise and no quantization collapses") {
  TileHardwareConfig hw;
  RngStream rng(311, 2);
  Matrix w = random_weights(20, 12, rng);
  AnalogTile tile = make_tile(w, hw, 2.5);
  Vector x = random_input(20, rng, -2.0, 2.0);
  NoiseModel nm = zero_noise();
  RngStream fwd(311, 3);
  Vector trained = tile_forward(tile, x, ForwardMode::training(false), nm,
                                hw, fwd);
  Vector ideal = tile_forward(tile, x, ForwardMode::ideal(), nm, hw, fwd);
  for (std::size_t j = 0; j < trained.size(); ++j) {
    CHECK(trained[j] == doctest::Approx(ideal[j]).epsilon(1e-12));
  }
}

TEST_CASE("inference with all stochastic terms disabled collapses") {
  TileHardwareConfig hw;
  RngStream rng(313, 3);
  Matrix w = random_weights(24, 16, rng);
  AnalogTile target = make_tile(w, hw);
  NoiseModel nm = zero_noise();
  RngStream prog_rng(313, 4);
  AnalogTile tile = program_tile(target, nm, hw, 0.0, prog_rng);
  Vector x = random_input(24, rng);
  RngStream fwd(313, 5);
  Vector y = tile_forward(tile, x, ForwardMode::inference(nm.t0, false, false),
                          nm, hw, fwd);
  Vector ideal = tile_forward(target, x, ForwardMode::ideal(), nm, hw, fwd);
  for (std::size_t j = 0; j < y.size(); ++j) {
    CHECK(y[j] == doctest::Approx(ideal[j]).epsilon(1e-12));
  }
}

TEST_CASE("quantized outputs are bounded by the saturation rails") {
  TileHardwareConfig hw;
  Matrix w(64, 4);
  for (double &v : w.data) {
    v = 1.0;
  }
  AnalogTile tile = make_tile(w, hw);
  Vector x(64, 1.0);
  NoiseModel nm = zero_noise();
  RngStream prog_rng(317, 6);
  AnalogTile programmed = program_tile(tile, nm, hw, 0.0, prog_rng);
  RngStream fwd(317, 7);
  Vector y = tile_forward(programmed, x,
                          ForwardMode::inference(nm.t0, false, true), nm, hw,
                          fwd);
  /* 64 cells at full scale push far past i_sat; the rail is exact */
  for (double v : y) {
    CHECK(v == doctest::Approx(0.2 * hw.i_sat).epsilon(1e-12));
  }

  Vector neg(64, -1.0);
  y = tile_forward(programmed, neg,
                   ForwardMode::inference(nm.t0, false, true), nm, hw, fwd);
  for (double v : y) {
    CHECK(v == doctest::Approx(-0.2 * hw.i_sat).epsilon(1e-12));
  }
}

TEST_CASE("batch inference is bit-identical to serial evaluation") {
  TileHardwareConfig hw;
  RngStream rng(331, 8);
  Matrix w = random_weights(48, 32, rng);
  AnalogTile target = make_tile(w, hw);
  NoiseModel nm;
  RngStream prog_rng(331, 9);
  AnalogTile tile = program_tile(target, nm, hw, 0.0, prog_rng);

  std::vector<Vector> xs;
  for (int k = 0; k < 20; ++k) {
    xs.push_back(random_input(48, rng));
  }
  ForwardMode mode = ForwardMode::inference(nm.t0, false, true);
  RngStream base(331, 10);

  auto batch = batch_inference_forward(tile, xs, mode, nm, hw, base);
  REQUIRE(batch.size() == xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    RngStream per = base.derive(k);
    Vector serial = tile_forward(tile, xs[k], mode, nm, hw, per);
    for (std::size_t j = 0; j < serial.size(); ++j) {
      CHECK(batch[k][j] == serial[j]);
    }
  }
}

TEST_CASE("batch identity holds with input noise and additive read floor") {
  TileHardwareConfig hw;
  RngStream rng(337, 11);
  Matrix w = random_weights(24, 12, rng);
  AnalogTile target = make_tile(w, hw);
  NoiseModel nm;
  nm.sigma_inp = 0.05;
  nm.read_coeffs = {0.02, 0.08};
  RngStream prog_rng(337, 12);
  AnalogTile tile = program_tile(target, nm, hw, 0.0, prog_rng);

  std::vector<Vector> xs;
  for (int k = 0; k < 12; ++k) {
    xs.push_back(random_input(24, rng));
  }
  ForwardMode mode = ForwardMode::inference(nm.t0, false, true);
  RngStream base(337, 13);
  auto batch = batch_inference_forward(tile, xs, mode, nm, hw, base);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    RngStream per = base.derive(k);
    Vector serial = tile_forward(tile, xs[k], mode, nm, hw, per);
    for (std::size_t j = 0; j < serial.size(); ++j) {
      CHECK(batch[k][j] == serial[j]);
    }
  }
}

TEST_CASE("batch identity holds with IR drop enabled") {
  TileHardwareConfig hw;
  hw.rows = 8;
  hw.cols = 8;
  RngStream rng(347, 14);
  Matrix w = random_weights(8, 8, rng);
  AnalogTile target = make_tile(w, hw);
  NoiseModel nm;
  RngStream prog_rng(347, 15);
  AnalogTile tile = program_tile(target, nm, hw, 0.0, prog_rng);

  std::vector<Vector> xs;
  for (int k = 0; k < 6; ++k) {
    xs.push_back(random_input(8, rng));
  }
  ForwardMode mode = ForwardMode::inference(nm.t0, true, true);
  RngStream base(347, 16);
  auto batch = batch_inference_forward(tile, xs, mode, nm, hw, base);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    RngStream per = base.derive(k);
    Vector serial = tile_forward(tile, xs[k], mode, nm, hw, per);
    for (std::size_t j = 0; j < serial.size(); ++j) {
      CHECK(batch[k][j] == serial[j]);
    }
  }
}

TEST_CASE("programming is reproducible and respects caps") {
  TileHardwareConfig hw;
  RngStream rng(349, 17);
  Matrix w = random_weights(32, 16, rng);
  AnalogTile target = make_tile(w, hw);
  NoiseModel nm;
  RngStream a(349, 18);
  RngStream b(349, 18);
  AnalogTile ta = program_tile(target, nm, hw, 5.0, a);
  AnalogTile tb = program_tile(target, nm, hw, 5.0, b);
  CHECK(ta.programmed_at == 5.0);
  for (std::size_t i = 0; i < ta.g_plus.data.size(); ++i) {
    CHECK(ta.g_plus.data[i] == tb.g_plus.data[i]);
    CHECK(ta.g_minus.data[i] == tb.g_minus.data[i]);
    CHECK(ta.g_plus.data[i] >= 0.0);
    CHECK(ta.g_plus.data[i] <= hw.g_max);
  }
  ta.validate(hw);

  /* same programming event replayed at the same time drifts identically */
  AnalogTile d1 = tile_at_time(ta, 2000.0, nm, hw);
  AnalogTile d2 = tile_at_time(ta, 2000.0, nm, hw);
  for (std::size_t i = 0; i < d1.g_plus.data.size(); ++i) {
    CHECK(d1.g_plus.data[i] == d2.g_plus.data[i]);
  }
}

TEST_CASE("inference error at the reference time sits in the plausible band") {
  TileHardwareConfig hw;
  hw.rows = 128;
  hw.cols = 128;
  RngStream rng(353, 19);
  Matrix w(128, 128);
  for (double &v : w.data) {
    v = clip(rng.normal(0.0, 0.25), -1.0, 1.0);
  }
  AnalogTile target = make_tile(w, hw);
  NoiseModel nm;
  RngStream prog_rng(353, 20);
  AnalogTile tile = program_tile(target, nm, hw, 0.0, prog_rng);

  std::vector<Vector> xs;
  for (int k = 0; k < 100; ++k) {
    xs.push_back(random_input(128, rng));
  }
  RngStream base(353, 21);
  auto noisy = batch_inference_forward(
      tile, xs, ForwardMode::inference(nm.t0, false, true), nm, hw, base);
  std::vector<Vector> ideal;
  NoiseModel quiet;
  RngStream dummy(353, 22);
  for (const Vector &x : xs) {
    ideal.push_back(
        tile_forward(target, x, ForwardMode::ideal(), quiet, hw, dummy));
  }
  const double err = rel_l2(noisy, ideal);
  CHECK(err > 0.08);
  CHECK(err < 0.25);
}

TEST_CASE("mode validation rejects contradictory combinations") {
  ForwardMode m = ForwardMode::ideal();
  m.enable_quantization = true;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m = ForwardMode::ideal();
  m.at_time = 20.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m = ForwardMode::training();
  m.at_time = 20.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m = ForwardMode::training();
  m.enable_ir_drop = true;
  CHECK_THROWS_AS(m.validate(), ConfigError);

  TileHardwareConfig hw;
  RngStream rng(359, 23);
  Matrix w = random_weights(4, 4, rng);
  AnalogTile tile = make_tile(w, hw);
  NoiseModel nm;
  RngStream fwd(359, 24);
  Vector x(3, 0.0);
  CHECK_THROWS_AS(
      tile_forward(tile, x, ForwardMode::ideal(), nm, hw, fwd), ShapeError);
  Vector x4(4, 0.0);
  CHECK_THROWS_AS(tile_forward(tile, x4, ForwardMode::inference(1.0), nm, hw,
                               fwd),
                  TemporalError);
  CHECK_THROWS_AS(batch_inference_forward(tile, {x4}, ForwardMode::training(),
                                          nm, hw, fwd),
                  ConfigError);
}
