/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include "aimc/common.hpp"
#include "aimc/hw_config.hpp"
#include "aimc/rng.hpp"

namespace aimc {

/* One crossbar tile: differential conductance pair plus the digital
 * periphery that restores the unit-weight function. For a tile built by
 * make_tile, out_scale absorbs the voltage and conductance scaling so
 * that y = x' * W + out_offset in the noise-free case. */
struct AnalogTile {
  Matrix g_plus;
  Matrix g_minus;
  /* DAC full-scale X_r in digital input units */
  double input_range = 1.0;
  /* per-column output scale and offset */
  Vector out_scale;
  Vector out_offset;
  /* per-column programming cap in µS, at most g_max */
  Vector g_col_cap;
  double programmed_at = 0.0;
  /* replayed to regenerate per-cell drift exponents for this event */
  RngStream drift_stream;

  std::size_t rows() const { return g_plus.rows; }
  std::size_t cols() const { return g_plus.cols; }

  /* Checks shapes and the conductance window invariants. */
  void validate(const TileHardwareConfig &hw) const;
};

/* Builds the noise-free tile for unit weights |w| <= 1: caps at g_max,
 * differential encoding, out_scale = input_range / (v_read * cap). */
AnalogTile make_tile(const Matrix &w_unit, const TileHardwareConfig &hw,
                     double input_range = 1.0);

/* Writes the tile's target conductances with programming noise, stamps
 * the programming time, and fixes the drift exponent stream. Pass a
 * per-tile rng; the drift stream is derived from it. */
AnalogTile program_tile(const AnalogTile &target, const NoiseModel &noise,
                        const TileHardwareConfig &hw, double time,
                        RngStream &rng);

/* Returns the tile with conductances decayed to time t (seconds). Apply
 * to a freshly programmed tile only; composing two calls would compound
 * the decay. */
AnalogTile tile_at_time(const AnalogTile &tile, double t,
                        const NoiseModel &noise,
                        const TileHardwareConfig &hw);

/* Moves the DAC full scale while rescaling out_scale by the same factor,
 * so the noise-free function is unchanged for in-range inputs. */
void set_input_range(AnalogTile &tile, double input_range);

} // namespace aimc
