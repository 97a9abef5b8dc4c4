/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "aimc/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "aimc/csv.hpp"

namespace aimc {

namespace {

/* Guards the saturation post-condition against accumulation rounding
 * when the peak is re-estimated on the rescaled column. */
constexpr double kCapMargin = 1.0 - 1e-9;

void require(bool ok, const char *what) {
  if (!ok) {
    throw ConfigError(what);
  }
}

bool has_nonzero(const Vector &x) {
  for (double v : x) {
    if (v != 0.0) {
      return true;
    }
  }
  return false;
}

void scale_column(Matrix &g, std::size_t col, double factor, double cap) {
  for (std::size_t r = 0; r < g.rows; ++r) {
    g(r, col) = clip(g(r, col) * factor, 0.0, cap);
  }
}

TileCalibration &report_slot(CalibrationReport &report, std::size_t layer,
                             std::size_t tile) {
  for (TileCalibration &slot : report.tiles) {
    if (slot.layer == layer && slot.tile == tile) {
      return slot;
    }
  }
  report.tiles.push_back(TileCalibration{layer, tile, 0.0, {}});
  return report.tiles.back();
}

} // namespace

CalibrationConfig CalibrationConfig::from_hardware(
    const TileHardwareConfig &hw) {
  hw.validate();
  CalibrationConfig cfg;
  cfg.g_max = hw.g_max;
  cfg.g_min_floor = hw.g_max / 4.0;
  cfg.i_sat = hw.i_sat;
  cfg.v_read = hw.v_read;
  cfg.y_factor = hw.y_factor;
  return cfg;
}

void CalibrationConfig::validate() const {
  require(n_samples >= 1, "n_samples must be at least 1");
  require(percentile_k > 0.0 && percentile_k <= 100.0,
          "percentile_k outside (0, 100]");
  require(n_std >= 0.0 && std::isfinite(n_std), "n_std must be >= 0");
  require(g_max > 0.0 && std::isfinite(g_max), "g_max must be positive");
  require(g_min_floor > 0.0 && g_min_floor <= g_max,
          "g_min_floor outside (0, g_max]");
  require(i_sat > 0.0 && std::isfinite(i_sat), "i_sat must be positive");
  require(v_read > 0.0 && std::isfinite(v_read), "v_read must be positive");
  require(y_factor > 0.0 && std::isfinite(y_factor),
          "y_factor must be positive");
}

NetworkSamples collect_input_samples(
    const MappedNetwork &net, const std::vector<std::vector<Vector>> &batches,
    std::size_t n) {
  net.validate();
  if (n < 1) {
    throw CalibrationError("at least one sample batch is required");
  }
  if (batches.size() < n) {
    throw CalibrationError("sample source yields only " +
                           std::to_string(batches.size()) + " of " +
                           std::to_string(n) + " batches");
  }
  NetworkSamples samples(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    samples[l].resize(net.layers[l].tiles.size());
  }
  for (std::size_t b = 0; b < n; ++b) {
    for (const Vector &x : batches[b]) {
      std::vector<Vector> inputs = network_layer_inputs(net, x);
      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const MappedLayer &layer = net.layers[l];
        for (std::size_t t = 0; t < layer.tiles.size(); ++t) {
          const Span &span = layer.tiles[t].row_span;
          samples[l][t].emplace_back(
              inputs[l].begin() + static_cast<std::ptrdiff_t>(span.start),
              inputs[l].begin() +
                  static_cast<std::ptrdiff_t>(span.start + span.length));
        }
      }
    }
  }
  return samples;
}

double optimize_input_range(const SampleSet &samples, double k) {
  if (!(k > 0.0) || k > 100.0) {
    throw ConfigError("percentile outside (0, 100]");
  }
  Vector magnitudes;
  for (const Vector &sample : samples) {
    for (double v : sample) {
      magnitudes.push_back(std::abs(v));
    }
  }
  if (magnitudes.empty()) {
    throw CalibrationError("no input samples captured");
  }
  const double n = static_cast<double>(magnitudes.size());
  auto rank = static_cast<std::size_t>(std::ceil(k * n / 100.0 - 1e-9));
  rank = std::min(std::max<std::size_t>(rank, 1), magnitudes.size());
  std::nth_element(magnitudes.begin(),
                   magnitudes.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   magnitudes.end());
  const double range = magnitudes[rank - 1];
  if (!(range > 0.0)) {
    throw CalibrationError("input samples give a degenerate range of 0");
  }
  return range;
}

ColumnPeaks estimate_column_peaks(const AnalogTile &tile,
                                  const SampleSet &samples,
                                  const CalibrationConfig &cfg,
                                  RngStream *rng) {
  cfg.validate();
  if (cfg.sampled_peak && rng == nullptr) {
    throw ConfigError("sampled_peak requires an rng stream");
  }
  const std::size_t rows = tile.rows();
  const std::size_t cols = tile.cols();
  std::vector<const Vector *> used;
  for (const Vector &sample : samples) {
    if (sample.size() != rows) {
      throw ShapeError("sample width does not match the tile rows");
    }
    if (has_nonzero(sample)) {
      used.push_back(&sample);
    }
  }
  ColumnPeaks result;
  result.peaks.assign(cols, 0.0);
  result.n_used = used.size();
  if (used.empty()) {
    return result;
  }
  const double x_r = tile.input_range;
  const double count_scale = cfg.v_read / x_r * cfg.y_factor;
  Vector u(rows);
  std::vector<double> sum(cols * 2, 0.0);
  std::vector<double> sumsq(cols * 2, 0.0);
  for (const Vector *sample : used) {
    for (std::size_t r = 0; r < rows; ++r) {
      u[r] = clip((*sample)[r], -x_r, x_r);
    }
    for (std::size_t c = 0; c < cols; ++c) {
      double acc_p = 0.0;
      double acc_m = 0.0;
      for (std::size_t r = 0; r < rows; ++r) {
        acc_p += tile.g_plus(r, c) * u[r];
        acc_m += tile.g_minus(r, c) * u[r];
      }
      const double ip = std::abs(acc_p * count_scale);
      const double im = std::abs(acc_m * count_scale);
      sum[2 * c] += ip;
      sumsq[2 * c] += ip * ip;
      sum[2 * c + 1] += im;
      sumsq[2 * c + 1] += im * im;
    }
  }
  const double n = static_cast<double>(used.size());
  for (std::size_t c = 0; c < cols; ++c) {
    double peak = 0.0;
    for (int pol = 0; pol < 2; ++pol) {
      const double mean = sum[2 * c + pol] / n;
      const double var =
          std::max(0.0, sumsq[2 * c + pol] / n - mean * mean);
      const double sd = std::sqrt(var);
      const double estimate =
          cfg.sampled_peak ? mean + cfg.n_std * rng->normal(0.0, sd)
                           : mean + cfg.n_std * sd;
      peak = std::max(peak, estimate);
    }
    result.peaks[c] = peak;
  }
  return result;
}

std::vector<ColumnCalibration> optimize_conductance_ranges(
    AnalogTile &tile, const SampleSet &samples, const CalibrationConfig &cfg,
    RngStream *rng) {
  cfg.validate();
  const std::size_t cols = tile.cols();
  std::vector<ColumnCalibration> report(cols);
  bool any_nonzero = false;
  for (const Vector &sample : samples) {
    if (has_nonzero(sample)) {
      any_nonzero = true;
      break;
    }
  }
  if (!any_nonzero) {
    for (std::size_t c = 0; c < cols; ++c) {
      report[c].g_col_cap = tile.g_col_cap[c];
      report[c].skipped = true;
    }
    return report;
  }
  for (std::size_t c = 0; c < cols; ++c) {
    const double old_cap = tile.g_col_cap[c];
    if (old_cap != cfg.g_max) {
      const double restore = cfg.g_max / old_cap;
      scale_column(tile.g_plus, c, restore, cfg.g_max);
      scale_column(tile.g_minus, c, restore, cfg.g_max);
      tile.out_scale[c] /= restore;
      tile.g_col_cap[c] = cfg.g_max;
    }
  }
  ColumnPeaks peaks = estimate_column_peaks(tile, samples, cfg, rng);
  const double sat_counts = cfg.i_sat * cfg.y_factor;
  for (std::size_t c = 0; c < cols; ++c) {
    ColumnCalibration &col = report[c];
    col.peak_before = peaks.peaks[c];
    col.peak_after = peaks.peaks[c];
    col.g_col_cap = tile.g_col_cap[c];
    if (peaks.peaks[c] > sat_counts) {
      col.saturating = true;
      const double ratio = sat_counts / peaks.peaks[c];
      const double cap =
          std::max(cfg.g_max * ratio * kCapMargin, cfg.g_min_floor);
      const double shrink = cap / cfg.g_max;
      scale_column(tile.g_plus, c, shrink, cap);
      scale_column(tile.g_minus, c, shrink, cap);
      tile.out_scale[c] /= shrink;
      tile.g_col_cap[c] = cap;
      col.g_col_cap = cap;
      col.peak_after = peaks.peaks[c] * shrink;
    }
  }
  return report;
}

void calibrate_input_ranges(TiledNetwork &net, const NetworkSamples &samples,
                            const CalibrationConfig &cfg,
                            CalibrationReport &report) {
  cfg.validate();
  if (samples.size() != net.layers.size()) {
    throw ShapeError("sample sets do not match the network layers");
  }
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    TiledLayer &layer = net.layers[l];
    if (samples[l].size() != layer.tiles.size()) {
      throw ShapeError("sample sets do not match the layer tiles");
    }
    for (std::size_t t = 0; t < layer.tiles.size(); ++t) {
      const double range =
          optimize_input_range(samples[l][t], cfg.percentile_k);
      set_input_range(layer.tiles[t], range);
      TileCalibration &slot = report_slot(report, l, t);
      slot.input_range = range;
    }
  }
}

void calibrate_conductance_ranges(TiledNetwork &net,
                                  const NetworkSamples &samples,
                                  const CalibrationConfig &cfg,
                                  CalibrationReport &report,
                                  RngStream *rng) {
  cfg.validate();
  if (samples.size() != net.layers.size()) {
    throw ShapeError("sample sets do not match the network layers");
  }
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    TiledLayer &layer = net.layers[l];
    if (samples[l].size() != layer.tiles.size()) {
      throw ShapeError("sample sets do not match the layer tiles");
    }
    for (std::size_t t = 0; t < layer.tiles.size(); ++t) {
      auto columns =
          optimize_conductance_ranges(layer.tiles[t], samples[l][t], cfg,
                                      rng);
      TileCalibration &slot = report_slot(report, l, t);
      slot.columns = std::move(columns);
      slot.input_range = layer.tiles[t].input_range;
    }
  }
}

std::vector<std::vector<std::string>>
calibration_rows(const CalibrationReport &report) {
  std::vector<std::vector<std::string>> rows;
  for (const TileCalibration &tile : report.tiles) {
    if (tile.columns.empty()) {
      rows.push_back({format_count(tile.layer), format_count(tile.tile),
                      "-1", format_double(tile.input_range), "", "", "", "0",
                      "0"});
      continue;
    }
    for (std::size_t c = 0; c < tile.columns.size(); ++c) {
      const ColumnCalibration &col = tile.columns[c];
      rows.push_back({format_count(tile.layer), format_count(tile.tile),
                      format_count(c), format_double(tile.input_range),
                      format_double(col.g_col_cap),
                      format_double(col.peak_before),
                      format_double(col.peak_after),
                      col.saturating ? "1" : "0", col.skipped ? "1" : "0"});
    }
  }
  return rows;
}

void write_calibration_rows(const CalibrationReport &report,
                            std::ostream &out) {
  for (const std::vector<std::string> &row : calibration_rows(report)) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i)
        out << ',';
      out << row[i];
    }
    out << '\n';
  }
}

} // namespace aimc
