/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "aimc/forward.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "aimc/device_noise.hpp"
#include "aimc/ir_drop.hpp"
#include "aimc/quantize.hpp"

namespace aimc {

ForwardMode ForwardMode::ideal() {
  ForwardMode m;
  m.variant = Variant::Ideal;
  return m;
}

ForwardMode ForwardMode::inference(double at_time, bool ir_drop,
                                   bool quantization) {
  ForwardMode m;
  m.variant = Variant::Inference;
  m.at_time = at_time;
  m.enable_ir_drop = ir_drop;
  m.enable_quantization = quantization;
  return m;
}

ForwardMode ForwardMode::training(bool quantization) {
  ForwardMode m;
  m.variant = Variant::Training;
  m.enable_quantization = quantization;
  return m;
}

void ForwardMode::validate() const {
  switch (variant) {
  case Variant::Ideal:
    if (enable_ir_drop || enable_quantization || at_time != 0.0) {
      throw ConfigError("ideal mode admits no quantization, IR drop, or "
                        "evaluation time");
    }
    break;
  case Variant::Training:
    if (at_time != 0.0) {
      throw ConfigError("training mode takes no evaluation time");
    }
    if (enable_ir_drop) {
      throw ConfigError("training mode does not model IR drop");
    }
    break;
  case Variant::Inference:
    break;
  }
}

namespace {

void check_tile_shapes(const AnalogTile &tile, const Vector &x) {
  if (!tile.g_plus.same_shape(tile.g_minus)) {
    throw ShapeError("tile grids differ in shape");
  }
  if (tile.out_scale.size() != tile.cols() ||
      tile.out_offset.size() != tile.cols() ||
      tile.g_col_cap.size() != tile.cols()) {
    throw ShapeError("tile periphery vectors do not match columns");
  }
  if (x.size() != tile.rows()) {
    throw ShapeError("input length " + std::to_string(x.size()) +
                     " does not match tile rows " +
                     std::to_string(tile.rows()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw DomainError("tile input contains a non-finite value");
    }
  }
}

Vector ideal_forward(const AnalogTile &tile, const Vector &x,
                     const TileHardwareConfig &hw) {
  const double vscale = hw.v_read / tile.input_range;
  Vector y(tile.cols(), 0.0);
  for (std::size_t i = 0; i < tile.rows(); ++i) {
    const double vi = x[i] * vscale;
    const double *gp = tile.g_plus.row(i);
    const double *gm = tile.g_minus.row(i);
    for (std::size_t j = 0; j < tile.cols(); ++j) {
      y[j] += vi * (gp[j] - gm[j]);
    }
  }
  for (std::size_t j = 0; j < tile.cols(); ++j) {
    y[j] = tile.out_scale[j] * y[j] + tile.out_offset[j];
  }
  return y;
}

Vector training_forward(const AnalogTile &tile, const Vector &x,
                        const ForwardMode &mode, const NoiseModel &noise,
                        const TileHardwareConfig &hw, RngStream &rng) {
  const double x_r = tile.input_range;
  Vector xq = mode.enable_quantization ? dac_quantize(x, x_r, hw.dac_bits)
                                       : x;
  if (noise.sigma_inp > 0.0) {
    for (double &v : xq) {
      v += noise.sigma_inp * rng.normal();
    }
  }

  Vector s(tile.cols(), 0.0);
  for (std::size_t i = 0; i < tile.rows(); ++i) {
    const double xi = xq[i];
    const double *gp = tile.g_plus.row(i);
    const double *gm = tile.g_minus.row(i);
    if (noise.sigma_w > 0.0) {
      for (std::size_t j = 0; j < tile.cols(); ++j) {
        const double w =
            (gp[j] - gm[j]) / tile.g_col_cap[j] + noise.sigma_w * rng.normal();
        s[j] += w * xi;
      }
    } else {
      for (std::size_t j = 0; j < tile.cols(); ++j) {
        s[j] += (gp[j] - gm[j]) / tile.g_col_cap[j] * xi;
      }
    }
  }
  if (noise.sigma_out > 0.0) {
    for (double &v : s) {
      v += noise.sigma_out * rng.normal();
    }
  }

  Vector y(tile.cols(), 0.0);
  for (std::size_t j = 0; j < tile.cols(); ++j) {
    double o = s[j];
    if (mode.enable_quantization) {
      const double bound =
          hw.i_sat * x_r / (hw.v_read * tile.g_col_cap[j]);
      o = adc_quantize(o, bound, hw.adc_bits);
    }
    const double unit_scale =
        tile.out_scale[j] * hw.v_read * tile.g_col_cap[j] / x_r;
    y[j] = unit_scale * o + tile.out_offset[j];
  }
  return y;
}

/* Reference inference path on an already drifted tile. The rng order is
 * the contract batch evaluation reproduces: sigma_inp draws, then plus
 * grid read noise row-major, then minus grid. */
Vector inference_reference(const AnalogTile &drifted, const Vector &x,
                           const ForwardMode &mode, const NoiseModel &noise,
                           const TileHardwareConfig &hw, RngStream &rng) {
  const double x_r = drifted.input_range;
  Vector xq = mode.enable_quantization ? dac_quantize(x, x_r, hw.dac_bits)
                                       : x;
  if (noise.sigma_inp > 0.0) {
    for (double &v : xq) {
      v += noise.sigma_inp * rng.normal();
    }
  }
  Vector v(drifted.rows(), 0.0);
  const double vscale = hw.v_read / x_r;
  for (std::size_t i = 0; i < drifted.rows(); ++i) {
    v[i] = xq[i] * vscale;
  }

  Matrix gp = read_noise(drifted.g_plus, noise, hw.g_max, rng);
  Matrix gm = read_noise(drifted.g_minus, noise, hw.g_max, rng);

  Vector i_plus(drifted.cols(), 0.0);
  Vector i_minus(drifted.cols(), 0.0);
  if (mode.enable_ir_drop && hw.wire_resistance > 0.0) {
    i_plus = ir_drop_currents(gp, v, hw.wire_resistance);
    i_minus = ir_drop_currents(gm, v, hw.wire_resistance);
  } else {
    for (std::size_t i = 0; i < drifted.rows(); ++i) {
      const double vi = v[i];
      const double *rp = gp.row(i);
      const double *rm = gm.row(i);
      for (std::size_t j = 0; j < drifted.cols(); ++j) {
        i_plus[j] += vi * rp[j];
        i_minus[j] += vi * rm[j];
      }
    }
  }

  if (mode.enable_quantization) {
    i_plus = adc_quantize(i_plus, hw.i_sat, hw.adc_bits);
    i_minus = adc_quantize(i_minus, hw.i_sat, hw.adc_bits);
  }

  Vector y(drifted.cols(), 0.0);
  for (std::size_t j = 0; j < drifted.cols(); ++j) {
    y[j] = drifted.out_scale[j] * (i_plus[j] - i_minus[j]) +
           drifted.out_offset[j];
  }
  return y;
}

struct PackedCell {
  std::uint32_t col;
  double g;
  double sd;
};

/* Cells that contribute current or consume a noise draw; everything else
 * is exactly zero in the reference accumulation. */
std::vector<std::vector<PackedCell>> pack_rows(const Matrix &g,
                                               const NoiseModel &noise) {
  std::vector<std::vector<PackedCell>> rows(g.rows);
  for (std::size_t i = 0; i < g.rows; ++i) {
    const double *row = g.row(i);
    for (std::size_t j = 0; j < g.cols; ++j) {
      const double sd = noise.read_std(row[j]);
      if (row[j] > 0.0 || sd > 0.0) {
        rows[i].push_back(
            PackedCell{static_cast<std::uint32_t>(j), row[j], sd});
      }
    }
  }
  return rows;
}

void fused_accumulate(const std::vector<std::vector<PackedCell>> &packed,
                      const Vector &v, double g_max, RngStream &rng,
                      Vector &out) {
  for (std::size_t i = 0; i < packed.size(); ++i) {
    const double vi = v[i];
    for (const PackedCell &cell : packed[i]) {
      double g = cell.g;
      if (cell.sd > 0.0) {
        g = clip(g + rng.normal(0.0, cell.sd), 0.0, g_max);
      }
      out[cell.col] += vi * g;
    }
  }
}

} // namespace

Vector tile_forward(const AnalogTile &tile, const Vector &x,
                    const ForwardMode &mode, const NoiseModel &noise,
                    const TileHardwareConfig &hw, RngStream &rng) {
  mode.validate();
  check_tile_shapes(tile, x);
  switch (mode.variant) {
  case ForwardMode::Variant::Ideal:
    return ideal_forward(tile, x, hw);
  case ForwardMode::Variant::Training:
    return training_forward(tile, x, mode, noise, hw, rng);
  case ForwardMode::Variant::Inference: {
    AnalogTile drifted = tile_at_time(tile, mode.at_time, noise, hw);
    return inference_reference(drifted, x, mode, noise, hw, rng);
  }
  }
  throw ConfigError("unknown forward mode");
}

std::vector<Vector> batch_inference_forward(
    const AnalogTile &tile, const std::vector<Vector> &xs,
    const ForwardMode &mode, const NoiseModel &noise,
    const TileHardwareConfig &hw, const RngStream &base_rng) {
  mode.validate();
  if (mode.variant != ForwardMode::Variant::Inference) {
    throw ConfigError("batch evaluation expects inference mode");
  }
  std::vector<Vector> out;
  out.reserve(xs.size());
  if (xs.empty()) {
    return out;
  }

  AnalogTile drifted = tile_at_time(tile, mode.at_time, noise, hw);

  if (mode.enable_ir_drop && hw.wire_resistance > 0.0) {
    for (std::size_t k = 0; k < xs.size(); ++k) {
      RngStream rng = base_rng.derive(k);
      check_tile_shapes(drifted, xs[k]);
      out.push_back(
          inference_reference(drifted, xs[k], mode, noise, hw, rng));
    }
    return out;
  }

  const auto packed_plus = pack_rows(drifted.g_plus, noise);
  const auto packed_minus = pack_rows(drifted.g_minus, noise);
  const double x_r = drifted.input_range;
  const double vscale = hw.v_read / x_r;

  for (std::size_t k = 0; k < xs.size(); ++k) {
    RngStream rng = base_rng.derive(k);
    check_tile_shapes(drifted, xs[k]);
    Vector xq = mode.enable_quantization
                    ? dac_quantize(xs[k], x_r, hw.dac_bits)
                    : xs[k];
    if (noise.sigma_inp > 0.0) {
      for (double &v : xq) {
        v += noise.sigma_inp * rng.normal();
      }
    }
    Vector v(drifted.rows(), 0.0);
    for (std::size_t i = 0; i < drifted.rows(); ++i) {
      v[i] = xq[i] * vscale;
    }

    Vector i_plus(drifted.cols(), 0.0);
    Vector i_minus(drifted.cols(), 0.0);
    fused_accumulate(packed_plus, v, hw.g_max, rng, i_plus);
    fused_accumulate(packed_minus, v, hw.g_max, rng, i_minus);

    if (mode.enable_quantization) {
      i_plus = adc_quantize(i_plus, hw.i_sat, hw.adc_bits);
      i_minus = adc_quantize(i_minus, hw.i_sat, hw.adc_bits);
    }
    Vector y(drifted.cols(), 0.0);
    for (std::size_t j = 0; j < drifted.cols(); ++j) {
      y[j] = drifted.out_scale[j] * (i_plus[j] - i_minus[j]) +
             drifted.out_offset[j];
    }
    out.push_back(std::move(y));
  }
  return out;
}

} // namespace aimc
