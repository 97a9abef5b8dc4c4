/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "aimc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>
#include <utility>

#include <json.hpp>

#include "aimc/calibration.hpp"
#include "aimc/forward.hpp"
#include "aimc/mapping.hpp"
#include "aimc/network.hpp"
#include "aimc/tile.hpp"

namespace aimc {

namespace {

using nlohmann::json;

void check_keys(const json &obj, const std::string &path,
                std::initializer_list<const char *> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char *key : allowed)
      if (it.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("unknown config key " + path + "." + it.key());
  }
}

const json *find(const json &obj, const char *key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double read_num(const json &v, const std::string &path) {
  if (!v.is_number())
    throw ParseError("config key " + path + " must be a number");
  return v.get<double>();
}

std::size_t read_count(const json &v, const std::string &path) {
  if (!v.is_number_integer() || v.get<double>() < 0.0)
    throw ParseError("config key " + path +
                     " must be a non-negative integer");
  return v.get<std::size_t>();
}

int read_int(const json &v, const std::string &path) {
  if (!v.is_number_integer())
    throw ParseError("config key " + path + " must be an integer");
  return v.get<int>();
}

bool read_bool(const json &v, const std::string &path) {
  if (!v.is_boolean())
    throw ParseError("config key " + path + " must be a boolean");
  return v.get<bool>();
}

std::vector<double> read_num_array(const json &v, const std::string &path) {
  if (!v.is_array() || v.empty())
    throw ParseError("config key " + path +
                     " must be a non-empty array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const json &e : v)
    out.push_back(read_num(e, path));
  return out;
}

void parse_hardware(const json &obj, TileHardwareConfig &hw) {
  check_keys(obj, "hardware",
             {"rows", "cols", "dac_bits", "adc_bits", "g_max",
              "wire_resistance", "v_read", "i_sat", "y_factor"});
  if (const json *v = find(obj, "rows"))
    hw.rows = read_count(*v, "hardware.rows");
  if (const json *v = find(obj, "cols"))
    hw.cols = read_count(*v, "hardware.cols");
  if (const json *v = find(obj, "dac_bits"))
    hw.dac_bits = read_int(*v, "hardware.dac_bits");
  if (const json *v = find(obj, "adc_bits"))
    hw.adc_bits = read_int(*v, "hardware.adc_bits");
  if (const json *v = find(obj, "g_max"))
    hw.g_max = read_num(*v, "hardware.g_max");
  if (const json *v = find(obj, "wire_resistance"))
    hw.wire_resistance = read_num(*v, "hardware.wire_resistance");
  if (const json *v = find(obj, "v_read"))
    hw.v_read = read_num(*v, "hardware.v_read");
  /* saturation current and counts-per-µA follow the physical fields
   * unless pinned explicitly */
  if (const json *v = find(obj, "i_sat"))
    hw.i_sat = read_num(*v, "hardware.i_sat");
  else
    hw.i_sat = 10.0 * hw.g_max * hw.v_read;
  if (const json *v = find(obj, "y_factor"))
    hw.y_factor = read_num(*v, "hardware.y_factor");
  else
    hw.y_factor =
        static_cast<double>((1 << hw.adc_bits) - 2) / 2.0 / hw.i_sat;
}

void parse_noise(const json &obj, NoiseModel &noise) {
  check_keys(obj, "noise",
             {"sigma_w", "sigma_inp", "sigma_out", "prog_coeffs",
              "read_coeffs", "drift_nu_mean", "drift_nu_std", "t0"});
  if (const json *v = find(obj, "sigma_w"))
    noise.sigma_w = read_num(*v, "noise.sigma_w");
  if (const json *v = find(obj, "sigma_inp"))
    noise.sigma_inp = read_num(*v, "noise.sigma_inp");
  if (const json *v = find(obj, "sigma_out"))
    noise.sigma_out = read_num(*v, "noise.sigma_out");
  if (const json *v = find(obj, "prog_coeffs")) {
    const std::vector<double> c = read_num_array(*v, "noise.prog_coeffs");
    if (c.size() != 3)
      throw ConfigError("noise.prog_coeffs needs exactly 3 entries");
    noise.prog_coeffs = {c[0], c[1], c[2]};
  }
  if (const json *v = find(obj, "read_coeffs")) {
    const std::vector<double> c = read_num_array(*v, "noise.read_coeffs");
    if (c.size() != 2)
      throw ConfigError("noise.read_coeffs needs exactly 2 entries");
    noise.read_coeffs = {c[0], c[1]};
  }
  if (const json *v = find(obj, "drift_nu_mean"))
    noise.drift_nu_mean = read_num(*v, "noise.drift_nu_mean");
  if (const json *v = find(obj, "drift_nu_std"))
    noise.drift_nu_std = read_num(*v, "noise.drift_nu_std");
  if (const json *v = find(obj, "t0"))
    noise.t0 = read_num(*v, "noise.t0");
}

void parse_mvm(const json &obj, MvmExperimentConfig &mvm) {
  check_keys(obj, "mvm",
             {"n_inputs", "weight_sigma", "input_range", "t_prog", "times",
              "ir_drop", "quantization"});
  if (const json *v = find(obj, "n_inputs"))
    mvm.n_inputs = read_count(*v, "mvm.n_inputs");
  if (const json *v = find(obj, "weight_sigma"))
    mvm.weight_sigma = read_num(*v, "mvm.weight_sigma");
  if (const json *v = find(obj, "input_range"))
    mvm.input_range = read_num(*v, "mvm.input_range");
  if (const json *v = find(obj, "t_prog"))
    mvm.t_prog = read_num(*v, "mvm.t_prog");
  if (const json *v = find(obj, "times"))
    mvm.times = read_num_array(*v, "mvm.times");
  if (const json *v = find(obj, "ir_drop"))
    mvm.ir_drop = read_bool(*v, "mvm.ir_drop");
  if (const json *v = find(obj, "quantization"))
    mvm.quantization = read_bool(*v, "mvm.quantization");
}

void parse_calibration(const json &obj, CalibrationSettings &cal) {
  check_keys(obj, "calibration",
             {"n_samples", "percentile_k", "n_std", "g_min_floor",
              "sampled_peak"});
  if (const json *v = find(obj, "n_samples"))
    cal.n_samples = read_count(*v, "calibration.n_samples");
  if (const json *v = find(obj, "percentile_k"))
    cal.percentile_k = read_num(*v, "calibration.percentile_k");
  if (const json *v = find(obj, "n_std"))
    cal.n_std = read_num(*v, "calibration.n_std");
  if (const json *v = find(obj, "g_min_floor"))
    cal.g_min_floor = read_num(*v, "calibration.g_min_floor");
  if (const json *v = find(obj, "sampled_peak"))
    cal.sampled_peak = read_bool(*v, "calibration.sampled_peak");
}

void parse_train(const json &obj, TrainConfig &train) {
  check_keys(obj, "train",
             {"sigma_w", "sigma_out", "lr_init", "lr_final", "epochs",
              "batch_size", "decay_eta", "learn_input_range",
              "learn_conductance_scale", "quantization", "weight_decay"});
  if (const json *v = find(obj, "sigma_w"))
    train.sigma_w = read_num(*v, "train.sigma_w");
  if (const json *v = find(obj, "sigma_out"))
    train.sigma_out = read_num(*v, "train.sigma_out");
  if (const json *v = find(obj, "lr_init"))
    train.lr_init = read_num(*v, "train.lr_init");
  if (const json *v = find(obj, "lr_final"))
    train.lr_final = read_num(*v, "train.lr_final");
  if (const json *v = find(obj, "epochs"))
    train.epochs = read_count(*v, "train.epochs");
  if (const json *v = find(obj, "batch_size"))
    train.batch_size = read_count(*v, "train.batch_size");
  if (const json *v = find(obj, "decay_eta"))
    train.decay_eta = read_num(*v, "train.decay_eta");
  if (const json *v = find(obj, "learn_input_range"))
    train.learn_input_range = read_bool(*v, "train.learn_input_range");
  if (const json *v = find(obj, "learn_conductance_scale"))
    train.learn_conductance_scale =
        read_bool(*v, "train.learn_conductance_scale");
  if (const json *v = find(obj, "quantization"))
    train.enable_quantization = read_bool(*v, "train.quantization");
  if (const json *v = find(obj, "weight_decay"))
    train.weight_decay = read_num(*v, "train.weight_decay");
}

void parse_ablation(const json &obj, AblationExperimentConfig &abl) {
  check_keys(obj, "ablation",
             {"seeds", "train_count", "val_count", "data_noise",
              "data_scale", "hidden", "tile_dim", "i_sat_factor", "lr_init",
              "lr_final", "epochs", "batch_size", "calib_batch_size",
              "eval_times"});
  if (const json *v = find(obj, "seeds"))
    abl.seeds = read_count(*v, "ablation.seeds");
  if (const json *v = find(obj, "train_count"))
    abl.train_count = read_count(*v, "ablation.train_count");
  if (const json *v = find(obj, "val_count"))
    abl.val_count = read_count(*v, "ablation.val_count");
  if (const json *v = find(obj, "data_noise"))
    abl.data_noise = read_num(*v, "ablation.data_noise");
  if (const json *v = find(obj, "data_scale"))
    abl.data_scale = read_num(*v, "ablation.data_scale");
  if (const json *v = find(obj, "hidden"))
    abl.hidden = read_count(*v, "ablation.hidden");
  if (const json *v = find(obj, "tile_dim"))
    abl.tile_dim = read_count(*v, "ablation.tile_dim");
  if (const json *v = find(obj, "i_sat_factor"))
    abl.i_sat_factor = read_num(*v, "ablation.i_sat_factor");
  if (const json *v = find(obj, "lr_init"))
    abl.lr_init = read_num(*v, "ablation.lr_init");
  if (const json *v = find(obj, "lr_final"))
    abl.lr_final = read_num(*v, "ablation.lr_final");
  if (const json *v = find(obj, "epochs"))
    abl.epochs = read_count(*v, "ablation.epochs");
  if (const json *v = find(obj, "batch_size"))
    abl.batch_size = read_count(*v, "ablation.batch_size");
  if (const json *v = find(obj, "calib_batch_size"))
    abl.calib_batch_size = read_count(*v, "ablation.calib_batch_size");
  if (const json *v = find(obj, "eval_times"))
    abl.eval_times = read_num_array(*v, "ablation.eval_times");
}

json hardware_json(const TileHardwareConfig &hw) {
  return json{{"rows", hw.rows},
              {"cols", hw.cols},
              {"dac_bits", hw.dac_bits},
              {"adc_bits", hw.adc_bits},
              {"g_max", hw.g_max},
              {"wire_resistance", hw.wire_resistance},
              {"v_read", hw.v_read},
              {"i_sat", hw.i_sat},
              {"y_factor", hw.y_factor}};
}

json noise_json(const NoiseModel &noise) {
  return json{
      {"sigma_w", noise.sigma_w},
      {"sigma_inp", noise.sigma_inp},
      {"sigma_out", noise.sigma_out},
      {"prog_coeffs",
       {noise.prog_coeffs[0], noise.prog_coeffs[1], noise.prog_coeffs[2]}},
      {"read_coeffs", {noise.read_coeffs[0], noise.read_coeffs[1]}},
      {"drift_nu_mean", noise.drift_nu_mean},
      {"drift_nu_std", noise.drift_nu_std},
      {"t0", noise.t0}};
}

json mvm_json(const MvmExperimentConfig &mvm) {
  return json{{"n_inputs", mvm.n_inputs},
              {"weight_sigma", mvm.weight_sigma},
              {"input_range", mvm.input_range},
              {"t_prog", mvm.t_prog},
              {"times", mvm.times},
              {"ir_drop", mvm.ir_drop},
              {"quantization", mvm.quantization}};
}

json calibration_json(const CalibrationSettings &cal) {
  return json{{"n_samples", cal.n_samples},
              {"percentile_k", cal.percentile_k},
              {"n_std", cal.n_std},
              {"g_min_floor", cal.g_min_floor},
              {"sampled_peak", cal.sampled_peak}};
}

json train_json(const TrainConfig &train) {
  return json{{"sigma_w", train.sigma_w},
              {"sigma_out", train.sigma_out},
              {"lr_init", train.lr_init},
              {"lr_final", train.lr_final},
              {"epochs", train.epochs},
              {"batch_size", train.batch_size},
              {"decay_eta", train.decay_eta},
              {"learn_input_range", train.learn_input_range},
              {"learn_conductance_scale", train.learn_conductance_scale},
              {"quantization", train.enable_quantization},
              {"weight_decay", train.weight_decay}};
}

json ablation_json(const AblationExperimentConfig &abl) {
  return json{{"seeds", abl.seeds},
              {"train_count", abl.train_count},
              {"val_count", abl.val_count},
              {"data_noise", abl.data_noise},
              {"data_scale", abl.data_scale},
              {"hidden", abl.hidden},
              {"tile_dim", abl.tile_dim},
              {"i_sat_factor", abl.i_sat_factor},
              {"lr_init", abl.lr_init},
              {"lr_final", abl.lr_final},
              {"epochs", abl.epochs},
              {"batch_size", abl.batch_size},
              {"calib_batch_size", abl.calib_batch_size},
              {"eval_times", abl.eval_times}};
}

std::vector<std::string> csv_headers(const char *experiment,
                                     std::uint64_t seed,
                                     const ExperimentConfig &cfg) {
  return {std::string("experiment: ") + experiment,
          "seed: " + format_count(seed), "config: " + config_fingerprint(cfg)};
}

const char *kind_name(LayerKind kind) {
  return kind == LayerKind::Linear ? "linear" : "conv";
}

std::size_t argmax_index(const Vector &v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best])
      best = i;
  return best;
}

/* the ablation bench shrinks the tiles and the converter headroom */
TileHardwareConfig bench_hardware(const ExperimentConfig &cfg) {
  TileHardwareConfig hw = cfg.hw;
  hw.rows = cfg.ablation.tile_dim;
  hw.cols = cfg.ablation.tile_dim;
  hw.i_sat = cfg.ablation.i_sat_factor * hw.g_max * hw.v_read;
  hw.y_factor = static_cast<double>((1 << hw.adc_bits) - 2) / 2.0 / hw.i_sat;
  hw.validate();
  return hw;
}

std::vector<LayerShape> bench_shapes(std::size_t hidden) {
  return {{"fc0", LayerKind::Linear, 2, hidden},
          {"fc1", LayerKind::Linear, hidden, hidden},
          {"fc2", LayerKind::Linear, hidden, 2}};
}

TrainConfig bench_train_config(const ExperimentConfig &cfg,
                               const TileHardwareConfig &hw) {
  TrainConfig t = cfg.train;
  t.lr_init = cfg.ablation.lr_init;
  t.lr_final = cfg.ablation.lr_final;
  t.epochs = cfg.ablation.epochs;
  t.batch_size = cfg.ablation.batch_size;
  t.dac_bits = hw.dac_bits;
  t.adc_bits = hw.adc_bits;
  t.sat_bound = hw.i_sat / (hw.v_read * hw.g_max);
  t.validate();
  return t;
}

void bench_data(const ExperimentConfig &cfg, RngStream &rng, Dataset &train,
                Dataset &val) {
  train = make_moons(cfg.ablation.train_count, cfg.ablation.data_noise,
                     cfg.ablation.data_scale, rng);
  val = make_moons(cfg.ablation.val_count, cfg.ablation.data_noise,
                   cfg.ablation.data_scale, rng);
}

NetworkSamples bench_samples(const MappedNetwork &net, const Dataset &train,
                             const ExperimentConfig &cfg) {
  std::vector<std::vector<Vector>> batches;
  const std::size_t bs = cfg.ablation.calib_batch_size;
  for (std::size_t i = 0; i < train.inputs.size(); i += bs) {
    const std::size_t hi = std::min(i + bs, train.inputs.size());
    batches.emplace_back(train.inputs.begin() +
                             static_cast<std::ptrdiff_t>(i),
                         train.inputs.begin() +
                             static_cast<std::ptrdiff_t>(hi));
  }
  return collect_input_samples(net, batches, cfg.calibration.n_samples);
}

CalibrationConfig bench_calibration(const ExperimentConfig &cfg,
                                    const TileHardwareConfig &hw) {
  CalibrationConfig cc = CalibrationConfig::from_hardware(hw);
  cc.n_samples = cfg.calibration.n_samples;
  cc.percentile_k = cfg.calibration.percentile_k;
  cc.n_std = cfg.calibration.n_std;
  if (cfg.calibration.g_min_floor >= 0.0)
    cc.g_min_floor = cfg.calibration.g_min_floor;
  cc.sampled_peak = cfg.calibration.sampled_peak;
  cc.validate();
  return cc;
}

constexpr const char *kVariants[] = {"none",    "pt_input", "pt_conductance",
                                     "pt_both", "learned",  "learned_pt"};
constexpr std::size_t kVariantCount = 6;

/* accuracy per variant and evaluation time for one seed */
std::vector<std::vector<double>> ablation_seed(const ExperimentConfig &cfg,
                                               const TileHardwareConfig &hw,
                                               const RngStream &stream) {
  RngStream data_rng = stream.derive(rng_tag::kData);
  Dataset train_set;
  Dataset val_set;
  bench_data(cfg, data_rng, train_set, val_set);

  RngStream build_rng = stream.derive(rng_tag::kWeights);
  const MappedNetwork net0 =
      build_network(bench_shapes(cfg.ablation.hidden), hw, build_rng);

  /* the baseline model is trained noise-aware but converter-free, the
   * way a model is trained before it ever meets the tile periphery; the
   * learned variant trains through the converters with the input ranges
   * as parameters, starting from calibrated values */
  TrainConfig cfg_fixed = bench_train_config(cfg, hw);
  cfg_fixed.learn_input_range = false;
  cfg_fixed.learn_conductance_scale = false;
  cfg_fixed.enable_quantization = false;
  TrainConfig cfg_learn = bench_train_config(cfg, hw);
  cfg_learn.learn_input_range = true;
  cfg_learn.learn_conductance_scale = false;

  const CalibrationConfig cc = bench_calibration(cfg, hw);

  MappedNetwork net_fixed = net0;
  finetune(net_fixed, train_set, val_set, cfg_fixed,
           stream.derive(rng_tag::kTrain).derive(0));

  MappedNetwork net_learn = net0;
  {
    const NetworkSamples init_samples = bench_samples(net0, train_set, cfg);
    for (std::size_t l = 0; l < net_learn.layers.size(); ++l)
      for (std::size_t t = 0; t < net_learn.layers[l].tiles.size(); ++t)
        net_learn.layers[l].tile_input_range[t] =
            optimize_input_range(init_samples[l][t], cc.percentile_k);
  }
  finetune(net_learn, train_set, val_set, cfg_learn,
           stream.derive(rng_tag::kTrain).derive(1));

  const NetworkSamples samples_fixed = bench_samples(net_fixed, train_set, cfg);
  const NetworkSamples samples_learn = bench_samples(net_learn, train_set, cfg);

  auto image = [&](const MappedNetwork &net, const NetworkSamples &samples,
                   bool pt_input, bool pt_conductance, std::uint64_t tag) {
    TiledNetwork tiled = export_tiles(net);
    CalibrationReport report;
    if (pt_input)
      calibrate_input_ranges(tiled, samples, cc, report);
    if (pt_conductance) {
      RngStream crng = stream.derive(rng_tag::kCalib).derive(tag);
      calibrate_conductance_ranges(tiled, samples, cc, report, &crng);
    }
    return tiled;
  };

  /* pt on the learned model keeps its learned ranges and calibrates the
   * remaining knob, the conductance caps */
  std::vector<TiledNetwork> images;
  images.push_back(image(net_fixed, samples_fixed, false, false, 0));
  images.push_back(image(net_fixed, samples_fixed, true, false, 1));
  images.push_back(image(net_fixed, samples_fixed, false, true, 2));
  images.push_back(image(net_fixed, samples_fixed, true, true, 3));
  images.push_back(image(net_learn, samples_learn, false, false, 4));
  images.push_back(image(net_learn, samples_learn, false, true, 5));

  std::vector<std::vector<double>> acc(
      kVariantCount, std::vector<double>(cfg.ablation.eval_times.size(), 0.0));
  for (std::size_t v = 0; v < kVariantCount; ++v) {
    const TiledNetwork programmed = program_network(
        images[v], cfg.noise, 0.0, stream.derive(rng_tag::kProgram));
    for (std::size_t ti = 0; ti < cfg.ablation.eval_times.size(); ++ti) {
      const ForwardMode mode =
          ForwardMode::inference(cfg.ablation.eval_times[ti], false, true);
      /* eval noise streams are shared across variants so accuracy
       * differences reflect the variants, not fresh noise draws */
      const std::vector<Vector> ys = analog_batch_forward(
          programmed, val_set.inputs, mode, cfg.noise,
          stream.derive(rng_tag::kEval).derive(ti));
      std::size_t correct = 0;
      for (std::size_t k = 0; k < ys.size(); ++k)
        if (argmax_index(ys[k]) ==
            static_cast<std::size_t>(val_set.labels[k]))
          ++correct;
      acc[v][ti] = static_cast<double>(correct) /
                   static_cast<double>(val_set.labels.size());
    }
  }
  return acc;
}

} // namespace

void ExperimentConfig::finalize() {
  hw.validate();
  noise.validate(hw.g_max);
  train.dac_bits = hw.dac_bits;
  train.adc_bits = hw.adc_bits;
  train.sat_bound = hw.i_sat / (hw.v_read * hw.g_max);
  train.validate();

  if (mvm.n_inputs == 0)
    throw ConfigError("mvm.n_inputs must be >= 1");
  if (!(mvm.weight_sigma > 0.0))
    throw ConfigError("mvm.weight_sigma must be > 0");
  if (!(mvm.input_range > 0.0))
    throw ConfigError("mvm.input_range must be > 0");
  if (!(mvm.t_prog >= 0.0))
    throw ConfigError("mvm.t_prog must be >= 0");
  for (double t : mvm.times)
    if (!(t >= mvm.t_prog + noise.t0))
      throw ConfigError("every mvm.times entry must be at least t_prog + t0");

  if (calibration.n_samples == 0)
    throw ConfigError("calibration.n_samples must be >= 1");
  if (!(calibration.percentile_k > 0.0) || calibration.percentile_k > 100.0)
    throw ConfigError("calibration.percentile_k must lie in (0, 100]");
  if (!(calibration.n_std >= 0.0))
    throw ConfigError("calibration.n_std must be >= 0");
  if (calibration.g_min_floor >= 0.0 &&
      (!(calibration.g_min_floor > 0.0) ||
       calibration.g_min_floor > hw.g_max))
    throw ConfigError("calibration.g_min_floor must lie in (0, g_max]");

  const AblationExperimentConfig &a = ablation;
  if (a.seeds < 2)
    throw ConfigError("ablation.seeds must be >= 2");
  if (a.train_count == 0 || a.val_count == 0)
    throw ConfigError("ablation sample counts must be >= 1");
  if (!(a.data_noise >= 0.0) || !(a.data_scale > 0.0))
    throw ConfigError("ablation data parameters out of range");
  if (a.hidden == 0 || a.tile_dim == 0)
    throw ConfigError("ablation.hidden and ablation.tile_dim must be >= 1");
  if (!(a.i_sat_factor > 0.0))
    throw ConfigError("ablation.i_sat_factor must be > 0");
  if (!(a.lr_init > 0.0) || !(a.lr_final > 0.0) || a.lr_final > a.lr_init)
    throw ConfigError("ablation learning rates must satisfy "
                      "0 < lr_final <= lr_init");
  if (a.epochs == 0 || a.batch_size == 0 || a.calib_batch_size == 0)
    throw ConfigError("ablation step sizes must be >= 1");
  if (a.eval_times.empty())
    throw ConfigError("ablation.eval_times must be non-empty");
  for (double t : a.eval_times)
    if (!(t >= noise.t0))
      throw ConfigError("every ablation.eval_times entry must be at least t0");
}

ExperimentConfig default_experiment_config() {
  ExperimentConfig cfg;
  cfg.finalize();
  return cfg;
}

ExperimentConfig parse_experiment_config(const std::string &json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception &e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object())
    throw ParseError("config root must be a JSON object");
  check_keys(root, "config",
             {"hardware", "noise", "mvm", "calibration", "train",
              "ablation"});

  ExperimentConfig cfg;
  try {
    if (const json *v = find(root, "hardware"))
      parse_hardware(*v, cfg.hw);
    if (const json *v = find(root, "noise"))
      parse_noise(*v, cfg.noise);
    if (const json *v = find(root, "mvm"))
      parse_mvm(*v, cfg.mvm);
    if (const json *v = find(root, "calibration"))
      parse_calibration(*v, cfg.calibration);
    if (const json *v = find(root, "train"))
      parse_train(*v, cfg.train);
    if (const json *v = find(root, "ablation"))
      parse_ablation(*v, cfg.ablation);
  } catch (const json::exception &e) {
    throw ParseError(std::string("config value out of range: ") + e.what());
  }
  cfg.finalize();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment_config(text.str());
}

std::string config_fingerprint(const ExperimentConfig &cfg) {
  json j;
  j["hardware"] = hardware_json(cfg.hw);
  j["noise"] = noise_json(cfg.noise);
  j["mvm"] = mvm_json(cfg.mvm);
  j["calibration"] = calibration_json(cfg.calibration);
  j["train"] = train_json(cfg.train);
  j["ablation"] = ablation_json(cfg.ablation);
  return j.dump();
}

CsvDocument run_mvm_error(const ExperimentConfig &cfg, std::uint64_t seed) {
  const TileHardwareConfig &hw = cfg.hw;
  RngStream base(seed);

  RngStream weight_rng = base.derive(rng_tag::kWeights);
  Matrix w(hw.rows, hw.cols);
  for (double &v : w.data)
    v = clip(weight_rng.normal(0.0, cfg.mvm.weight_sigma), -1.0, 1.0);
  const AnalogTile target = make_tile(w, hw, cfg.mvm.input_range);

  RngStream input_rng = base.derive(rng_tag::kInputs);
  std::vector<Vector> xs(cfg.mvm.n_inputs, Vector(hw.rows, 0.0));
  for (Vector &x : xs)
    for (double &v : x)
      v = input_rng.uniform(-cfg.mvm.input_range, cfg.mvm.input_range);

  RngStream prog_rng = base.derive(rng_tag::kProgram);
  const AnalogTile programmed =
      program_tile(target, cfg.noise, hw, cfg.mvm.t_prog, prog_rng);

  double denom = 0.0;
  std::vector<Vector> ideal(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    ideal[k] = ideal_mvm(xs[k], w);
    for (double v : ideal[k])
      denom += v * v;
  }
  if (!(denom > 0.0))
    throw NumericalError("reference outputs are identically zero");

  CsvDocument doc;
  doc.header_lines = csv_headers("mvm-error", seed, cfg);
  doc.columns = {"time_seconds", "l2_error_percent", "seed"};
  for (std::size_t ti = 0; ti < cfg.mvm.times.size(); ++ti) {
    const double t = cfg.mvm.times[ti];
    const ForwardMode mode =
        ForwardMode::inference(t, cfg.mvm.ir_drop, cfg.mvm.quantization);
    const std::vector<Vector> ys =
        batch_inference_forward(programmed, xs, mode, cfg.noise, hw,
                                base.derive(rng_tag::kEval).derive(ti));
    double num = 0.0;
    for (std::size_t k = 0; k < ys.size(); ++k)
      for (std::size_t c = 0; c < ys[k].size(); ++c) {
        const double d = ys[k][c] - ideal[k][c];
        num += d * d;
      }
    const double err_percent = 100.0 * std::sqrt(num / denom);
    doc.rows.push_back({format_double(t), format_double(err_percent),
                        format_count(seed)});
  }
  return doc;
}

CsvDocument run_map_report(const std::string &manifest_path,
                           const TileHardwareConfig &hw) {
  const NetworkManifest manifest = load_manifest(manifest_path);
  if (manifest.layers.empty())
    throw MappingError("manifest lists no layers: " + manifest_path);
  const auto [assignments, report] = map_network(manifest.layers, hw);
  (void)assignments;

  CsvDocument doc;
  doc.header_lines = {"experiment: map-report",
                      "manifest: " + manifest_path};
  doc.columns = {"name",  "kind",          "rows",
                 "cols",  "tiles",         "mapped_params",
                 "utilization_percent"};
  for (const LayerShape &shape : manifest.layers) {
    const std::size_t tiles = partition_dim(shape.rows, hw.rows).size() *
                              partition_dim(shape.cols, hw.cols).size();
    const double util =
        100.0 * static_cast<double>(shape.rows * shape.cols) /
        (static_cast<double>(tiles) * static_cast<double>(hw.rows) *
         static_cast<double>(hw.cols));
    const std::size_t mapped = shape.rows * shape.cols + shape.cols;
    doc.rows.push_back({shape.name, kind_name(shape.kind),
                        format_count(shape.rows), format_count(shape.cols),
                        format_count(tiles), format_count(mapped),
                        format_double(util)});
  }
  doc.rows.push_back({"TOTAL", "", "", "", format_count(report.num_tiles),
                      format_count(report.mapped_params),
                      format_double(100.0 * report.avg_utilization)});
  return doc;
}

CsvDocument run_calibrate_demo(const ExperimentConfig &cfg,
                               std::uint64_t seed) {
  const TileHardwareConfig hw = bench_hardware(cfg);
  RngStream base(seed);
  RngStream build_rng = base.derive(rng_tag::kWeights);
  const MappedNetwork net =
      build_network(bench_shapes(cfg.ablation.hidden), hw, build_rng);

  RngStream data_rng = base.derive(rng_tag::kData);
  Dataset train_set;
  Dataset val_set;
  bench_data(cfg, data_rng, train_set, val_set);

  const NetworkSamples samples = bench_samples(net, train_set, cfg);
  const CalibrationConfig cc = bench_calibration(cfg, hw);
  TiledNetwork tiled = export_tiles(net);

  CalibrationReport report;
  calibrate_input_ranges(tiled, samples, cc, report);
  RngStream calib_rng = base.derive(rng_tag::kCalib);
  calibrate_conductance_ranges(tiled, samples, cc, report, &calib_rng);

  CsvDocument doc;
  doc.header_lines = csv_headers("calibrate", seed, cfg);
  doc.columns = {"layer",       "tile",        "column",
                 "input_range", "g_col_cap",   "peak_before",
                 "peak_after",  "saturating",  "skipped"};
  doc.rows = calibration_rows(report);
  return doc;
}

CsvDocument run_train_demo(const ExperimentConfig &cfg, std::uint64_t seed) {
  const TileHardwareConfig hw = bench_hardware(cfg);
  RngStream base(seed);
  RngStream build_rng = base.derive(rng_tag::kWeights);
  MappedNetwork net =
      build_network(bench_shapes(cfg.ablation.hidden), hw, build_rng);

  RngStream data_rng = base.derive(rng_tag::kData);
  Dataset train_set;
  Dataset val_set;
  bench_data(cfg, data_rng, train_set, val_set);

  const TrainConfig tcfg = bench_train_config(cfg, hw);
  const TrainResult res =
      finetune(net, train_set, val_set, tcfg, base.derive(rng_tag::kTrain));

  CsvDocument doc;
  doc.header_lines = csv_headers("train-demo", seed, cfg);
  doc.columns = {"epoch",    "train_loss", "train_accuracy",
                 "val_loss", "val_accuracy", "seed"};
  for (const EpochMetrics &m : res.epochs)
    doc.rows.push_back({format_count(m.epoch), format_double(m.train_loss),
                        format_double(m.train_accuracy),
                        format_double(m.val_loss),
                        format_double(m.val_accuracy), format_count(seed)});
  return doc;
}

CsvDocument run_ablation(const ExperimentConfig &cfg, std::uint64_t seed,
                         std::size_t jobs) {
  const TileHardwareConfig hw = bench_hardware(cfg);
  const std::size_t n_seeds = cfg.ablation.seeds;
  const std::size_t n_times = cfg.ablation.eval_times.size();
  const RngStream base(seed);

  std::vector<std::vector<std::vector<double>>> results(n_seeds);
  if (jobs <= 1) {
    for (std::size_t s = 0; s < n_seeds; ++s)
      results[s] = ablation_seed(cfg, hw, base.derive(s));
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const std::size_t workers = std::min(jobs, n_seeds);
    std::vector<std::exception_ptr> failures(workers);
    for (std::size_t wi = 0; wi < workers; ++wi)
      pool.emplace_back([&, wi] {
        try {
          for (;;) {
            const std::size_t s = next.fetch_add(1);
            if (s >= n_seeds)
              return;
            results[s] = ablation_seed(cfg, hw, base.derive(s));
          }
        } catch (...) {
          failures[wi] = std::current_exception();
        }
      });
    for (std::thread &t : pool)
      t.join();
    for (const std::exception_ptr &p : failures)
      if (p)
        std::rethrow_exception(p);
  }

  CsvDocument doc;
  doc.header_lines = csv_headers("ablation", seed, cfg);
  doc.columns = {"seed", "variant", "time_seconds", "accuracy"};
  for (std::size_t s = 0; s < n_seeds; ++s)
    for (std::size_t v = 0; v < kVariantCount; ++v)
      for (std::size_t ti = 0; ti < n_times; ++ti)
        doc.rows.push_back({format_count(s), kVariants[v],
                            format_double(cfg.ablation.eval_times[ti]),
                            format_double(results[s][v][ti])});

  for (std::size_t v = 0; v < kVariantCount; ++v)
    for (std::size_t ti = 0; ti < n_times; ++ti) {
      double mean = 0.0;
      for (std::size_t s = 0; s < n_seeds; ++s)
        mean += results[s][v][ti];
      mean /= static_cast<double>(n_seeds);
      double var = 0.0;
      for (std::size_t s = 0; s < n_seeds; ++s) {
        const double d = results[s][v][ti] - mean;
        var += d * d;
      }
      var /= static_cast<double>(n_seeds - 1);
      doc.rows.push_back({"mean", kVariants[v],
                          format_double(cfg.ablation.eval_times[ti]),
                          format_double(mean)});
      doc.rows.push_back({"std", kVariants[v],
                          format_double(cfg.ablation.eval_times[ti]),
                          format_double(std::sqrt(var))});
    }
  return doc;
}

} // namespace aimc
