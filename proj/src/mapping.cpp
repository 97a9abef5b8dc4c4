/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "aimc/mapping.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace aimc {

std::vector<std::size_t> partition_dim(std::size_t m, std::size_t tile) {
  if (m < 1 || tile < 1) {
    throw ShapeError("partition_dim requires m >= 1 and tile >= 1");
  }
  const std::size_t k = (m + tile - 1) / tile;
  std::vector<std::size_t> spans(k, tile);
  spans.back() = m - (k - 1) * tile;
  return spans;
}

std::pair<std::vector<TileAssignment>, UtilizationReport>
map_network(const std::vector<LayerShape> &shapes,
            const TileHardwareConfig &config) {
  if (shapes.empty()) {
    throw ShapeError("map_network requires at least one layer shape");
  }
  config.validate();

  std::vector<TileAssignment> assignments;
  UtilizationReport report;
  const double tile_cells =
      static_cast<double>(config.rows) * static_cast<double>(config.cols);
  double utilization_sum = 0.0;
  std::size_t tile_index = 0;

  for (const LayerShape &shape : shapes) {
    if (shape.rows < 1 || shape.cols < 1) {
      throw ShapeError("layer '" + shape.name + "' has a zero dimension");
    }
    const auto row_spans = partition_dim(shape.rows, config.rows);
    const auto col_spans = partition_dim(shape.cols, config.cols);

    std::size_t row_start = 0;
    for (std::size_t rlen : row_spans) {
      std::size_t col_start = 0;
      for (std::size_t clen : col_spans) {
        assignments.push_back(TileAssignment{
            shape.name, tile_index++, Span{row_start, rlen},
            Span{col_start, clen}});
        col_start += clen;
      }
      row_start += rlen;
    }

    const std::size_t layer_tiles = row_spans.size() * col_spans.size();
    const std::size_t weight_cells = shape.rows * shape.cols;
    report.num_tiles += layer_tiles;
    report.mapped_params += weight_cells + shape.cols;
    utilization_sum += static_cast<double>(weight_cells) /
                       (static_cast<double>(layer_tiles) * tile_cells);
  }

  report.avg_utilization =
      utilization_sum / static_cast<double>(shapes.size());
  report.total_params = report.mapped_params;
  return {std::move(assignments), report};
}

std::pair<Matrix, Matrix> encode_differential(const Matrix &w_unit,
                                              const Vector &g_cap) {
  if (g_cap.size() != w_unit.cols) {
    throw ShapeError("encode_differential cap length " +
                     std::to_string(g_cap.size()) +
                     " does not match matrix cols " +
                     std::to_string(w_unit.cols));
  }
  for (double c : g_cap) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw MappingError("conductance cap must be positive");
    }
  }
  Matrix g_plus(w_unit.rows, w_unit.cols);
  Matrix g_minus(w_unit.rows, w_unit.cols);
  for (std::size_t r = 0; r < w_unit.rows; ++r) {
    for (std::size_t c = 0; c < w_unit.cols; ++c) {
      const double w = w_unit(r, c);
      if (!(std::abs(w) <= 1.0)) {
        throw MappingError("unit weight " + std::to_string(w) +
                           " outside [-1, 1]");
      }
      if (w > 0.0) {
        g_plus(r, c) = g_cap[c] * w;
      } else if (w < 0.0) {
        g_minus(r, c) = -g_cap[c] * w;
      }
    }
  }
  return {std::move(g_plus), std::move(g_minus)};
}

Matrix decode_differential(const Matrix &g_plus, const Matrix &g_minus,
                           const Vector &g_cap) {
  if (!g_plus.same_shape(g_minus)) {
    throw ShapeError("decode_differential grids differ in shape");
  }
  if (g_cap.size() != g_plus.cols) {
    throw ShapeError("decode_differential cap length does not match cols");
  }
  for (double c : g_cap) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw MappingError("conductance cap must be positive");
    }
  }
  Matrix w(g_plus.rows, g_plus.cols);
  for (std::size_t r = 0; r < w.rows; ++r) {
    for (std::size_t c = 0; c < w.cols; ++c) {
      w(r, c) = (g_plus(r, c) - g_minus(r, c)) / g_cap[c];
    }
  }
  return w;
}

namespace {

[[noreturn]] void parse_fail(const std::string &source, std::size_t line,
                             const std::string &msg) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + msg);
}

std::size_t parse_count(const std::string &source, std::size_t line,
                        const std::string &token, const char *what) {
  std::size_t pos = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(token, &pos);
  } catch (const std::exception &) {
    parse_fail(source, line, std::string(what) + " '" + token +
                                 "' is not a count");
  }
  if (pos != token.size()) {
    parse_fail(source, line, std::string(what) + " '" + token +
                                 "' is not a count");
  }
  if (value == 0) {
    parse_fail(source, line, std::string(what) + " must be at least 1");
  }
  return static_cast<std::size_t>(value);
}

} // namespace

NetworkManifest parse_manifest(std::istream &in,
                               const std::string &source_name) {
  NetworkManifest manifest;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) {
      raw.erase(hash);
    }
    std::istringstream line(raw);
    std::string first;
    if (!(line >> first)) {
      continue;
    }
    if (first == "total_params") {
      std::string value;
      if (!(line >> value)) {
        parse_fail(source_name, line_no, "total_params needs a count");
      }
      manifest.total_params = parse_count(source_name, line_no, value,
                                          "total_params");
      std::string extra;
      if (line >> extra) {
        parse_fail(source_name, line_no,
                   "unexpected token '" + extra + "' after total_params");
      }
      continue;
    }
    std::string kind_token, rows_token, cols_token;
    if (!(line >> kind_token >> rows_token >> cols_token)) {
      parse_fail(source_name, line_no,
                 "record needs '<name> <linear|conv> <rows> <cols>'");
    }
    std::string extra;
    if (line >> extra) {
      parse_fail(source_name, line_no,
                 "unexpected token '" + extra + "' after record");
    }
    LayerShape shape;
    shape.name = first;
    if (kind_token == "linear") {
      shape.kind = LayerKind::Linear;
    } else if (kind_token == "conv") {
      shape.kind = LayerKind::Conv;
    } else {
      parse_fail(source_name, line_no,
                 "unknown layer kind '" + kind_token + "'");
    }
    shape.rows = parse_count(source_name, line_no, rows_token, "rows");
    shape.cols = parse_count(source_name, line_no, cols_token, "cols");
    manifest.layers.push_back(std::move(shape));
  }
  if (manifest.layers.empty()) {
    throw ParseError(source_name + ": manifest declares no layers");
  }
  return manifest;
}

NetworkManifest load_manifest(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open manifest '" + path + "'");
  }
  return parse_manifest(in, path);
}

} // namespace aimc
