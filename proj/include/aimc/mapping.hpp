/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "aimc/common.hpp"
#include "aimc/hw_config.hpp"

namespace aimc {

enum class LayerKind { Linear, Conv };

/* One weight matrix to place on tiles. Convolutions arrive unfolded:
 * rows = k_h * k_w * c_in, cols = c_out. */
struct LayerShape {
  std::string name;
  LayerKind kind = LayerKind::Linear;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

struct Span {
  std::size_t start = 0;
  std::size_t length = 0;
};

struct TileAssignment {
  std::string layer;
  std::size_t tile_index = 0;
  Span row_span;
  Span col_span;
};

struct UtilizationReport {
  /* model-level parameter count when the manifest declares one,
   * otherwise equal to mapped_params */
  std::size_t total_params = 0;
  /* weights plus per-output biases of every mapped layer */
  std::size_t mapped_params = 0;
  std::size_t num_tiles = 0;
  /* mean over layers of (layer weight cells) / (layer tiles * tile cells) */
  double avg_utilization = 0.0;
};

/* Splits a dimension of size m into ceil(m/tile) spans: full tiles first,
 * the residual mod(m, tile) in the last span. */
std::vector<std::size_t> partition_dim(std::size_t m, std::size_t tile);

/* Places every layer on its own grid of tiles (no tile sharing across
 * layers) and accumulates the utilization report. Assignment order is
 * row-span-major per layer; tile_index is global and consecutive. */
std::pair<std::vector<TileAssignment>, UtilizationReport>
map_network(const std::vector<LayerShape> &shapes,
            const TileHardwareConfig &config);

/* Differential encoding: positive weights on the plus grid, negative on
 * the minus grid, scaled by the per-column cap in µS. Throws MappingError
 * when |w| exceeds 1 or a cap is not positive. */
std::pair<Matrix, Matrix> encode_differential(const Matrix &w_unit,
                                              const Vector &g_cap);

/* Inverse of encode_differential: w = (g_plus - g_minus) / cap. Exact for
 * power-of-two caps; within one ulp otherwise. */
Matrix decode_differential(const Matrix &g_plus, const Matrix &g_minus,
                           const Vector &g_cap);

struct NetworkManifest {
  std::vector<LayerShape> layers;
  /* 0 when the file declares no model-level total */
  std::size_t total_params = 0;
};

/* Manifest schema: '#' starts a comment; "total_params <count>" declares
 * the model-level parameter count; every other non-blank line is one
 * record "<name> <linear|conv> <rows> <cols>". */
NetworkManifest parse_manifest(std::istream &in,
                               const std::string &source_name);
NetworkManifest load_manifest(const std::string &path);

} // namespace aimc
