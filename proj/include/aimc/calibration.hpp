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
#include <vector>

#include "aimc/common.hpp"
#include "aimc/hw_config.hpp"
#include "aimc/network.hpp"
#include "aimc/rng.hpp"
#include "aimc/tile.hpp"

namespace aimc {

struct CalibrationConfig {
  /* input batches captured per tile */
  std::size_t n_samples = 2;
  /* percentile of |x| that becomes the DAC full scale, in (0, 100] */
  double percentile_k = 99.995;
  /* peak estimate is mean + n_std * std of the column current */
  double n_std = 2.0;
  double g_max = 25.0;
  /* lowest permitted column cap, in (0, g_max] */
  double g_min_floor = 25.0 / 4.0;
  /* converter saturation current in µA */
  double i_sat = 50.0;
  double v_read = 0.2;
  /* ADC counts per µA; peaks are estimated and reported in counts */
  double y_factor = 2.54;
  /* draw the peak as mean + n_std * Normal(0, std) instead of the
   * deterministic estimate; requires an rng */
  bool sampled_peak = false;

  static CalibrationConfig from_hardware(const TileHardwareConfig &hw);
  void validate() const;
};

struct ColumnCalibration {
  double g_col_cap = 0.0;
  /* estimated peak column current in ADC counts */
  double peak_before = 0.0;
  double peak_after = 0.0;
  bool saturating = false;
  /* no usable current samples; column left unchanged */
  bool skipped = false;
};

struct TileCalibration {
  std::size_t layer = 0;
  std::size_t tile = 0;
  double input_range = 0.0;
  std::vector<ColumnCalibration> columns;
};

struct CalibrationReport {
  std::vector<TileCalibration> tiles;
};

/* The pre-DAC activation vectors captured for one tile. */
using SampleSet = std::vector<Vector>;
/* Indexed [layer][tile]. */
using NetworkSamples = std::vector<std::vector<SampleSet>>;

/* Runs digital forwards over the first n batches and records, for every
 * tile, the row-span slice of the activation vector entering its layer.
 * Throws CalibrationError when the source yields fewer than n batches. */
NetworkSamples collect_input_samples(
    const MappedNetwork &net, const std::vector<std::vector<Vector>> &batches,
    std::size_t n);

/* Nearest-rank percentile of the absolute values of every captured
 * element. Throws CalibrationError on empty or all-zero samples. */
double optimize_input_range(const SampleSet &samples, double k);

/* Estimated peak column current in ADC counts: per polarity grid, the
 * per-sample current magnitudes |v_read / x_r * sum_r g[r][c] * u_r| *
 * y_factor with u = clip(x, ±x_r) form a distribution whose mean +
 * n_std * std is the peak; the column estimate is the larger polarity.
 * n_used reports how many sample vectors carried any nonzero element. */
struct ColumnPeaks {
  Vector peaks;
  std::size_t n_used = 0;
};
ColumnPeaks estimate_column_peaks(const AnalogTile &tile,
                                  const SampleSet &samples,
                                  const CalibrationConfig &cfg,
                                  RngStream *rng = nullptr);

/* Per column: resets the cap to g_max (rescaling conductances and
 * out_scale inversely), re-estimates the peak, and when it exceeds
 * i_sat * y_factor shrinks the cap by the saturation ratio down to at
 * most g_min_floor, again with out_scale compensation, so the noise-free
 * digital function never changes. */
std::vector<ColumnCalibration> optimize_conductance_ranges(
    AnalogTile &tile, const SampleSet &samples, const CalibrationConfig &cfg,
    RngStream *rng = nullptr);

/* Applies optimize_input_range to every tile of the exported network. */
void calibrate_input_ranges(TiledNetwork &net, const NetworkSamples &samples,
                            const CalibrationConfig &cfg,
                            CalibrationReport &report);

/* Applies optimize_conductance_ranges to every tile. */
void calibrate_conductance_ranges(TiledNetwork &net,
                                  const NetworkSamples &samples,
                                  const CalibrationConfig &cfg,
                                  CalibrationReport &report,
                                  RngStream *rng = nullptr);

/* One CSV data row per tile column:
 * layer,tile,column,input_range,g_col_cap,peak_before,peak_after,
 * saturating,skipped. A tile with no calibrated columns yields one row
 * with column -1 and empty peak cells. */
std::vector<std::vector<std::string>>
calibration_rows(const CalibrationReport &report);
void write_calibration_rows(const CalibrationReport &report,
                            std::ostream &out);

} // namespace aimc
