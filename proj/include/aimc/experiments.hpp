/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "aimc/csv.hpp"
#include "aimc/hw_config.hpp"
#include "aimc/train.hpp"

namespace aimc {

/* Settings for the tile-level error sweep: one randomly weighted tile is
 * programmed once and read back over a grid of evaluation times. */
struct MvmExperimentConfig {
  std::size_t n_inputs = 5120;
  /* weights are Normal(0, weight_sigma) clipped to [-1, 1] */
  double weight_sigma = 0.25;
  double input_range = 1.0;
  double t_prog = 0.0;
  std::vector<double> times = {20.0,     60.0,      3600.0,
                               86400.0,  2592000.0, 31536000.0};
  bool ir_drop = false;
  bool quantization = true;
};

/* Overrides for the post-training calibration passes. Values derived
 * from the hardware (caps, currents) follow the hardware section;
 * g_min_floor < 0 keeps the derived floor of g_max / 4. */
struct CalibrationSettings {
  std::size_t n_samples = 2;
  double percentile_k = 99.995;
  double n_std = 2.0;
  double g_min_floor = -1.0;
  bool sampled_peak = false;
};

/* The desk-scale ablation bench: a small MLP on scaled two-moons data,
 * trained hardware-aware, then evaluated on programmed tiles under every
 * combination of the two calibration passes. i_sat_factor shrinks the
 * converter headroom to i_sat_factor * g_max * v_read so the hidden
 * columns actually saturate. */
struct AblationExperimentConfig {
  std::size_t seeds = 10;
  std::size_t train_count = 256;
  std::size_t val_count = 256;
  double data_noise = 0.1;
  double data_scale = 2.0;
  std::size_t hidden = 64;
  std::size_t tile_dim = 32;
  double i_sat_factor = 0.3;
  double lr_init = 5e-3;
  double lr_final = 5e-6;
  std::size_t epochs = 12;
  std::size_t batch_size = 8;
  std::size_t calib_batch_size = 32;
  std::vector<double> eval_times = {20.0, 3600.0};
};

struct ExperimentConfig {
  TileHardwareConfig hw;
  NoiseModel noise;
  MvmExperimentConfig mvm;
  CalibrationSettings calibration;
  TrainConfig train;
  AblationExperimentConfig ablation;

  /* Re-derives the coupled fields (converter bits, saturation bound)
   * from the hardware section and validates every block. */
  void finalize();
};

ExperimentConfig default_experiment_config();

/* Parses the JSON text; unknown keys anywhere raise ConfigError, type
 * mismatches ParseError. Missing keys keep their defaults. The returned
 * config is finalized. */
ExperimentConfig parse_experiment_config(const std::string &json_text);
ExperimentConfig load_experiment_config(const std::string &path);

/* Canonical one-line JSON of the effective config, keys sorted; equal
 * configs always serialize identically. */
std::string config_fingerprint(const ExperimentConfig &cfg);

/* L2 error of a programmed tile against the exact product, one row per
 * evaluation time: time_seconds,l2_error_percent,seed. */
CsvDocument run_mvm_error(const ExperimentConfig &cfg, std::uint64_t seed);

/* Tiling summary for a model manifest, one row per layer plus a TOTAL
 * row: name,kind,rows,cols,tiles,mapped_params,utilization_percent. */
CsvDocument run_map_report(const std::string &manifest_path,
                           const TileHardwareConfig &hw);

/* Runs both calibration passes on a freshly built (untrained) bench
 * network and reports every column decision:
 * layer,tile,column,input_range,g_col_cap,peak_before,peak_after,
 * saturating,skipped. */
CsvDocument run_calibrate_demo(const ExperimentConfig &cfg,
                               std::uint64_t seed);

/* One hardware-aware training run on the bench network, one row per
 * epoch: epoch,train_loss,train_accuracy,val_loss,val_accuracy,seed. */
CsvDocument run_train_demo(const ExperimentConfig &cfg, std::uint64_t seed);

/* The calibration ablation over independent seeds. Data rows:
 * seed,variant,time_seconds,accuracy with variants none, pt_input,
 * pt_conductance, pt_both, learned, learned_pt; then one mean and one
 * std row per (variant, time) with "mean"/"std" in the seed column.
 * jobs > 1 distributes seeds over threads; results are identical to the
 * serial run. */
CsvDocument run_ablation(const ExperimentConfig &cfg, std::uint64_t seed,
                         std::size_t jobs);

} // namespace aimc
