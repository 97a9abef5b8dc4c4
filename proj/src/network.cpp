/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "aimc/network.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace aimc {

namespace {

Matrix slice_weights(const Matrix &w, const Span &rows, const Span &cols) {
  Matrix out(rows.length, cols.length);
  for (std::size_t r = 0; r < rows.length; ++r) {
    const double *src = w.row(rows.start + r);
    double *dst = out.row(r);
    for (std::size_t c = 0; c < cols.length; ++c) {
      dst[c] = src[cols.start + c];
    }
  }
  return out;
}

Vector slice_vector(const Vector &x, const Span &span) {
  return Vector(x.begin() + static_cast<std::ptrdiff_t>(span.start),
                x.begin() + static_cast<std::ptrdiff_t>(span.start +
                                                        span.length));
}

Vector tanh_vector(const Vector &x) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::tanh(x[i]);
  }
  return out;
}

} // namespace

std::size_t MappedNetwork::tile_count() const {
  std::size_t n = 0;
  for (const MappedLayer &layer : layers) {
    n += layer.tiles.size();
  }
  return n;
}

void MappedNetwork::validate() const {
  hw.validate();
  if (layers.empty()) {
    throw ConfigError("network has no layers");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const MappedLayer &layer = layers[i];
    if (layer.weight.rows != layer.shape.rows ||
        layer.weight.cols != layer.shape.cols) {
      throw ShapeError("layer weight does not match its declared shape");
    }
    if (layer.bias.size() != layer.shape.cols) {
      throw ShapeError("layer bias does not match its output width");
    }
    if (layer.tiles.empty() ||
        layer.tile_input_range.size() != layer.tiles.size()) {
      throw ShapeError("layer tile metadata is incomplete");
    }
    if (layer.channel_scale.size() != layer.shape.cols) {
      throw ShapeError("channel scales do not match the output width");
    }
    for (double range : layer.tile_input_range) {
      if (!(range > 0.0) || !std::isfinite(range)) {
        throw ConfigError("tile input range must be positive");
      }
    }
    for (double scale : layer.channel_scale) {
      if (!(scale > 0.0) || scale > 1.0) {
        throw ConfigError("channel scale outside (0, 1]");
      }
    }
    if (i + 1 < layers.size() &&
        layer.shape.cols != layers[i + 1].shape.rows) {
      throw ShapeError("layer widths do not chain");
    }
  }
}

MappedNetwork build_network(const std::vector<LayerShape> &shapes,
                            const TileHardwareConfig &hw, RngStream &rng) {
  auto mapped = map_network(shapes, hw);
  MappedNetwork net;
  net.hw = hw;
  net.layers.resize(shapes.size());
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    MappedLayer &layer = net.layers[i];
    layer.shape = shapes[i];
    layer.weight = Matrix(shapes[i].rows, shapes[i].cols);
    const double bound = 1.0 / std::sqrt(static_cast<double>(shapes[i].rows));
    for (double &w : layer.weight.data) {
      w = rng.uniform(-bound, bound);
    }
    layer.bias.assign(shapes[i].cols, 0.0);
    while (cursor < mapped.first.size() &&
           mapped.first[cursor].layer == shapes[i].name) {
      layer.tiles.push_back(mapped.first[cursor]);
      ++cursor;
    }
    layer.tile_input_range.assign(layer.tiles.size(), 1.0);
    layer.channel_scale.assign(shapes[i].cols, 1.0);
  }
  net.validate();
  return net;
}

Vector layer_digital_forward(const MappedLayer &layer, const Vector &x) {
  Vector y = ideal_mvm(x, layer.weight);
  for (std::size_t c = 0; c < y.size(); ++c) {
    y[c] += layer.bias[c];
  }
  return y;
}

Vector network_digital_forward(const MappedNetwork &net, const Vector &x) {
  Vector h = x;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    h = layer_digital_forward(net.layers[i], h);
    if (i + 1 < net.layers.size()) {
      h = tanh_vector(h);
    }
  }
  return h;
}

std::vector<Vector> network_layer_inputs(const MappedNetwork &net,
                                         const Vector &x) {
  std::vector<Vector> inputs;
  inputs.reserve(net.layers.size());
  Vector h = x;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    inputs.push_back(h);
    if (i + 1 < net.layers.size()) {
      h = tanh_vector(layer_digital_forward(net.layers[i], h));
    }
  }
  return inputs;
}

std::size_t TiledNetwork::tile_count() const {
  std::size_t n = 0;
  for (const TiledLayer &layer : layers) {
    n += layer.tiles.size();
  }
  return n;
}

TiledNetwork export_tiles(const MappedNetwork &net) {
  net.validate();
  TiledNetwork out;
  out.hw = net.hw;
  out.layers.resize(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const MappedLayer &layer = net.layers[i];
    TiledLayer &tiled = out.layers[i];
    tiled.assign = layer.tiles;
    tiled.bias = layer.bias;
    tiled.in_dim = layer.shape.rows;
    tiled.out_dim = layer.shape.cols;
    for (std::size_t t = 0; t < layer.tiles.size(); ++t) {
      const TileAssignment &a = layer.tiles[t];
      Matrix w = slice_weights(layer.weight, a.row_span, a.col_span);
      AnalogTile tile;
      tile.g_col_cap.assign(a.col_span.length, 0.0);
      for (std::size_t c = 0; c < a.col_span.length; ++c) {
        tile.g_col_cap[c] =
            layer.channel_scale[a.col_span.start + c] * net.hw.g_max;
      }
      auto grids = encode_differential(w, tile.g_col_cap);
      tile.g_plus = std::move(grids.first);
      tile.g_minus = std::move(grids.second);
      tile.input_range = layer.tile_input_range[t];
      tile.out_scale.assign(a.col_span.length,
                            tile.input_range /
                                (net.hw.v_read * net.hw.g_max));
      tile.out_offset.assign(a.col_span.length, 0.0);
      tile.validate(net.hw);
      tiled.tiles.push_back(std::move(tile));
    }
  }
  return out;
}

TiledNetwork program_network(const TiledNetwork &target,
                             const NoiseModel &noise, double time,
                             const RngStream &rng) {
  TiledNetwork out = target;
  for (TiledLayer &layer : out.layers) {
    for (std::size_t t = 0; t < layer.tiles.size(); ++t) {
      RngStream stream =
          rng.derive(layer.assign[t].tile_index).derive(rng_tag::kProgram);
      layer.tiles[t] =
          program_tile(layer.tiles[t], noise, target.hw, time, stream);
    }
  }
  return out;
}

Vector analog_forward(const TiledNetwork &net, const Vector &x,
                      const ForwardMode &mode, const NoiseModel &noise,
                      const RngStream &rng) {
  Vector h = x;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const TiledLayer &layer = net.layers[i];
    if (h.size() != layer.in_dim) {
      throw ShapeError("input width does not match layer " +
                       std::to_string(i));
    }
    Vector y(layer.out_dim, 0.0);
    for (std::size_t t = 0; t < layer.tiles.size(); ++t) {
      const TileAssignment &a = layer.assign[t];
      Vector xv = slice_vector(h, a.row_span);
      RngStream stream = rng.derive(a.tile_index);
      Vector yv =
          tile_forward(layer.tiles[t], xv, mode, noise, net.hw, stream);
      for (std::size_t c = 0; c < yv.size(); ++c) {
        y[a.col_span.start + c] += yv[c];
      }
    }
    for (std::size_t c = 0; c < y.size(); ++c) {
      y[c] += layer.bias[c];
    }
    h = (i + 1 < net.layers.size()) ? tanh_vector(y) : std::move(y);
  }
  return h;
}

std::vector<Vector> analog_batch_forward(const TiledNetwork &net,
                                         const std::vector<Vector> &xs,
                                         const ForwardMode &mode,
                                         const NoiseModel &noise,
                                         const RngStream &rng) {
  mode.validate();
  if (mode.variant != ForwardMode::Variant::Inference) {
    std::vector<Vector> out;
    out.reserve(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
      out.push_back(analog_forward(net, xs[k], mode, noise, rng.derive(k)));
    }
    return out;
  }
  std::vector<Vector> acts = xs;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const TiledLayer &layer = net.layers[i];
    std::vector<Vector> outs(acts.size(), Vector(layer.out_dim, 0.0));
    for (std::size_t t = 0; t < layer.tiles.size(); ++t) {
      const TileAssignment &a = layer.assign[t];
      std::vector<Vector> slices;
      slices.reserve(acts.size());
      for (const Vector &act : acts) {
        if (act.size() != layer.in_dim) {
          throw ShapeError("input width does not match layer " +
                           std::to_string(i));
        }
        slices.push_back(slice_vector(act, a.row_span));
      }
      auto res = batch_inference_forward(layer.tiles[t], slices, mode,
                                         noise, net.hw,
                                         rng.derive(a.tile_index));
      for (std::size_t k = 0; k < res.size(); ++k) {
        for (std::size_t c = 0; c < res[k].size(); ++c) {
          outs[k][a.col_span.start + c] += res[k][c];
        }
      }
    }
    for (std::size_t k = 0; k < outs.size(); ++k) {
      for (std::size_t c = 0; c < outs[k].size(); ++c) {
        outs[k][c] += layer.bias[c];
      }
      if (i + 1 < net.layers.size()) {
        outs[k] = tanh_vector(outs[k]);
      }
    }
    acts = std::move(outs);
  }
  return acts;
}

} // namespace aimc
