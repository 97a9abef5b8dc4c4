/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstddef>
#include <vector>

#include "aimc/common.hpp"
#include "aimc/forward.hpp"
#include "aimc/hw_config.hpp"
#include "aimc/mapping.hpp"
#include "aimc/rng.hpp"
#include "aimc/tile.hpp"

namespace aimc {

/* One dense layer held in the digital master representation: unit-domain
 * weights, a digital bias, the tile grid it unfolds onto, and the
 * per-tile / per-channel analog parameters that training or calibration
 * may adjust. channel_scale is the per-output-column conductance scale
 * in (0, 1]; exported tiles use g_col_cap = channel_scale * g_max and
 * keep the scale as part of the layer function. */
struct MappedLayer {
  LayerShape shape;
  Matrix weight;
  Vector bias;
  std::vector<TileAssignment> tiles;
  /* DAC full scale per tile */
  Vector tile_input_range;
  /* per layer output column, applied to every tile covering the column */
  Vector channel_scale;
};

/* A multilayer perceptron with tanh between layers and raw logits after
 * the last one. */
struct MappedNetwork {
  TileHardwareConfig hw;
  std::vector<MappedLayer> layers;

  std::size_t tile_count() const;
  void validate() const;
};

/* Builds the network with small uniform random weights (scaled by
 * 1/sqrt(fan_in)), zero biases, unit input ranges, and unit channel
 * scales. Layer shapes chain: shapes[i].cols == shapes[i+1].rows. */
MappedNetwork build_network(const std::vector<LayerShape> &shapes,
                            const TileHardwareConfig &hw, RngStream &rng);

/* Exact floating-point forward of one layer, no analog effects. */
Vector layer_digital_forward(const MappedLayer &layer, const Vector &x);

/* Full digital forward; returns the output logits. */
Vector network_digital_forward(const MappedNetwork &net, const Vector &x);

/* The activation vector entering each layer during a digital forward:
 * element 0 is the raw input, element i the post-tanh output feeding
 * layer i. Used for input-sample capture. */
std::vector<Vector> network_layer_inputs(const MappedNetwork &net,
                                         const Vector &x);

/* The analog image of a network: one tile per assignment, grouped per
 * layer, plus the digital bias applied after the per-tile results are
 * accumulated. */
struct TiledLayer {
  std::vector<TileAssignment> assign;
  std::vector<AnalogTile> tiles;
  Vector bias;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
};

struct TiledNetwork {
  TileHardwareConfig hw;
  std::vector<TiledLayer> layers;

  std::size_t tile_count() const;
};

/* Exports target tiles from the digital master. Per tile: conductances
 * cap * |w| with cap = channel_scale * g_max, DAC scale from
 * tile_input_range, and out_scale = input_range / (v_read * g_max) so
 * the channel scale stays a multiplicative part of the layer output. */
TiledNetwork export_tiles(const MappedNetwork &net);

/* Programs every tile with device noise at the given time. Streams are
 * derived from rng by global tile index, so programming is independent
 * of evaluation order. */
TiledNetwork program_network(const TiledNetwork &target,
                             const NoiseModel &noise, double time,
                             const RngStream &rng);

/* Analog forward of one input. Per layer, each tile converts its input
 * slice, accumulates into the output span, and the bias plus tanh follow
 * digitally. Per-tile rng streams derive from rng by global tile index. */
Vector analog_forward(const TiledNetwork &net, const Vector &x,
                      const ForwardMode &mode, const NoiseModel &noise,
                      const RngStream &rng);

/* Batch analog forward. In Inference mode each tile drifts once and its
 * read noise comes from rng.derive(tile_index).derive(k) for input k; in
 * the other modes inputs evaluate serially via analog_forward with
 * rng.derive(k). Deterministic in rng either way. */
std::vector<Vector> analog_batch_forward(const TiledNetwork &net,
                                         const std::vector<Vector> &xs,
                                         const ForwardMode &mode,
                                         const NoiseModel &noise,
                                         const RngStream &rng);

} // namespace aimc
