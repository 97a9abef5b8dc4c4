/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <vector>

#include "aimc/common.hpp"
#include "aimc/hw_config.hpp"
#include "aimc/rng.hpp"
#include "aimc/tile.hpp"

namespace aimc {

/* Selects which non-idealities the tile forward applies.
 *
 *   Ideal     pure affine map, nothing else; quantization and IR drop
 *             must stay disabled
 *   Training  unit-domain path: decoded weights + sigma_w perturbation,
 *             sigma_out before the output quantizer; no drift, no read
 *             noise, no IR drop
 *   Inference drifted + read-noised conductances, quantizers, optional
 *             IR drop
 *
 * With enable_quantization = false both converters become fully linear:
 * no level rounding and no range clipping. sigma_inp applies in Training
 * and Inference. */
struct ForwardMode {
  enum class Variant { Ideal, Inference, Training };

  Variant variant = Variant::Ideal;
  /* absolute evaluation time in seconds, Inference only */
  double at_time = 0.0;
  bool enable_ir_drop = false;
  bool enable_quantization = false;

  static ForwardMode ideal();
  static ForwardMode inference(double at_time, bool ir_drop = false,
                               bool quantization = true);
  static ForwardMode training(bool quantization = true);

  /* Throws ConfigError on contradictory combinations, e.g. Training with
   * an evaluation time or Ideal with quantization enabled. */
  void validate() const;
};

/* One analog matrix-vector product through the tile periphery. The rng
 * draw order is pinned: input noise (when sigma_inp > 0), then the plus
 * grid row-major, then the minus grid row-major; batch evaluation relies
 * on it. */
Vector tile_forward(const AnalogTile &tile, const Vector &x,
                    const ForwardMode &mode, const NoiseModel &noise,
                    const TileHardwareConfig &hw, RngStream &rng);

/* Inference over a batch, bit-identical to calling tile_forward with
 * stream base_rng.derive(k) for input k, but with the drifted state
 * prepared once and the read-noise draws fused into the accumulation. */
std::vector<Vector> batch_inference_forward(
    const AnalogTile &tile, const std::vector<Vector> &xs,
    const ForwardMode &mode, const NoiseModel &noise,
    const TileHardwareConfig &hw, const RngStream &base_rng);

} // namespace aimc
