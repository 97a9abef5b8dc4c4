/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "aimc/tile.hpp"

#include <cmath>
#include <string>

#include "aimc/device_noise.hpp"
#include "aimc/mapping.hpp"

namespace aimc {

namespace {

void clip_to_caps(Matrix &g, const Vector &caps) {
  for (std::size_t r = 0; r < g.rows; ++r) {
    double *row = g.row(r);
    for (std::size_t c = 0; c < g.cols; ++c) {
      row[c] = clip(row[c], 0.0, caps[c]);
    }
  }
}

} // namespace

void AnalogTile::validate(const TileHardwareConfig &hw) const {
  if (!g_plus.same_shape(g_minus)) {
    throw ShapeError("tile grids differ in shape");
  }
  if (out_scale.size() != cols() || out_offset.size() != cols() ||
      g_col_cap.size() != cols()) {
    throw ShapeError("tile periphery vectors do not match columns");
  }
  if (!(input_range > 0.0) || !std::isfinite(input_range)) {
    throw ConfigError("tile input_range must be positive");
  }
  for (std::size_t c = 0; c < cols(); ++c) {
    if (!(g_col_cap[c] > 0.0) || g_col_cap[c] > hw.g_max) {
      throw ConfigError("tile column cap outside (0, g_max]");
    }
  }
  for (std::size_t c = 0; c < cols(); ++c) {
    for (std::size_t r = 0; r < rows(); ++r) {
      if (g_plus(r, c) < 0.0 || g_plus(r, c) > g_col_cap[c] ||
          g_minus(r, c) < 0.0 || g_minus(r, c) > g_col_cap[c]) {
        throw MappingError("tile conductance outside its column cap");
      }
    }
  }
}

AnalogTile make_tile(const Matrix &w_unit, const TileHardwareConfig &hw,
                     double input_range) {
  hw.validate();
  if (!(input_range > 0.0) || !std::isfinite(input_range)) {
    throw ConfigError("input_range must be positive");
  }
  AnalogTile tile;
  tile.g_col_cap.assign(w_unit.cols, hw.g_max);
  auto grids = encode_differential(w_unit, tile.g_col_cap);
  tile.g_plus = std::move(grids.first);
  tile.g_minus = std::move(grids.second);
  tile.input_range = input_range;
  tile.out_scale.assign(w_unit.cols, 0.0);
  for (std::size_t c = 0; c < w_unit.cols; ++c) {
    tile.out_scale[c] = input_range / (hw.v_read * tile.g_col_cap[c]);
  }
  tile.out_offset.assign(w_unit.cols, 0.0);
  return tile;
}

AnalogTile program_tile(const AnalogTile &target, const NoiseModel &noise,
                        const TileHardwareConfig &hw, double time,
                        RngStream &rng) {
  hw.validate();
  noise.validate(hw.g_max);
  target.validate(hw);
  AnalogTile tile = target;
  tile.g_plus = program_conductances(target.g_plus, noise, hw.g_max, rng);
  tile.g_minus = program_conductances(target.g_minus, noise, hw.g_max, rng);
  clip_to_caps(tile.g_plus, tile.g_col_cap);
  clip_to_caps(tile.g_minus, tile.g_col_cap);
  tile.programmed_at = time;
  tile.drift_stream = rng.derive(rng_tag::kDrift);
  return tile;
}

void set_input_range(AnalogTile &tile, double input_range) {
  if (!(input_range > 0.0) || !std::isfinite(input_range)) {
    throw ConfigError("input_range must be positive");
  }
  const double factor = input_range / tile.input_range;
  for (double &scale : tile.out_scale) {
    scale *= factor;
  }
  tile.input_range = input_range;
}

AnalogTile tile_at_time(const AnalogTile &tile, double t,
                        const NoiseModel &noise,
                        const TileHardwareConfig &hw) {
  AnalogTile out = tile;
  out.g_plus = apply_drift(tile.g_plus, t, tile.programmed_at, noise,
                           hw.g_max, tile.drift_stream.derive(0));
  out.g_minus = apply_drift(tile.g_minus, t, tile.programmed_at, noise,
                            hw.g_max, tile.drift_stream.derive(1));
  clip_to_caps(out.g_plus, out.g_col_cap);
  clip_to_caps(out.g_minus, out.g_col_cap);
  return out;
}

} // namespace aimc
