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
#include "aimc/network.hpp"
#include "aimc/rng.hpp"

namespace aimc {

struct TrainConfig {
  /* weight perturbation std per forward, unit-weight domain */
  double sigma_w = 0.06;
  /* additive output noise std before the output quantizer */
  double sigma_out = 0.1;
  double lr_init = 5e-5;
  /* linear decay target over the full step budget */
  double lr_final = 5e-8;
  std::size_t epochs = 20;
  std::size_t batch_size = 8;
  /* decay pressure on learned input ranges */
  double decay_eta = 1e-2;
  bool learn_input_range = false;
  bool learn_conductance_scale = false;
  /* DAC and output quantizers in the training forward */
  bool enable_quantization = true;
  int dac_bits = 8;
  int adc_bits = 8;
  /* output-quantizer bound per unit input range: i_sat/(v_read*g_max) */
  double sat_bound = 10.0;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  /* projection floor for learned channel scales */
  double eta_min = 1e-3;

  void validate() const;
};

struct Dataset {
  std::vector<Vector> inputs;
  std::vector<int> labels;
};

/* Two interleaved half circles, the classic 2-D benchmark; class i is
 * every second point. noise_std perturbs both coordinates before the
 * whole plane is multiplied by scale. */
Dataset make_moons(std::size_t count, double noise_std, double scale,
                   RngStream &rng);

/* Two linearly separable unit-variance blobs centered at
 * ±(separation, separation). */
Dataset make_blobs(std::size_t count, double separation, RngStream &rng);

/* One noisy training MAC on a bare weight matrix with a unit DAC range:
 * y = (W + sigma_w ξ)ᵀ f_dac(x) + sigma_out ξ. The expectation over ξ
 * equals the noiseless product. Draw order: weight grid row-major, then
 * one draw per output. */
Vector noisy_forward(const Matrix &weights_unit, const Vector &x,
                     const TrainConfig &cfg, RngStream &rng);

/* Gradient of the loss with respect to the DAC full scale x_r:
 *   sum over clipped-high elements of min(grad, 0)
 * − sum over clipped-low  elements of max(grad, 0)
 * + x_r * eta * (count of |x| < x_r) / numel
 * where grad is the incoming gradient at the clip output. */
double input_range_gradient(const Vector &x_cached, const Vector &grad_x,
                            double x_r, double eta);

/* Gradient of the loss with respect to a channel scale: the scale
 * multiplies its column's pre-quantizer output, so the gradient is the
 * inner product of the incoming gradient with that output. */
double channel_scale_gradient(const Vector &grad_y, const Vector &pre_scale);

struct LayerGradients {
  Matrix weight;
  Vector bias;
  Vector channel_scale;
  /* per tile */
  Vector input_range;
};

struct BatchGradients {
  std::vector<LayerGradients> layers;
  /* dL/dx at the network input, one vector per sample */
  std::vector<Vector> input;
  double loss = 0.0;
  double accuracy = 0.0;
};

/* Mean cross-entropy loss and gradients over one batch through the
 * hardware-aware forward: per tile, DAC with the tile's input range,
 * weight noise, channel scaling, output noise, output quantizer with the
 * bound sat_bound * x_r, straight-through estimators across both
 * quantizers. noise_rng = nullptr runs noiseless. */
BatchGradients network_gradients(const MappedNetwork &net,
                                 const std::vector<Vector> &xs,
                                 const std::vector<int> &labels,
                                 const TrainConfig &cfg,
                                 const RngStream *noise_rng);

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  std::vector<EpochMetrics> epochs;
};

/* Minibatch finetuning with decoupled weight decay on the weights,
 * linear learning-rate decay, hard weight clipping to [−1, 1], and,
 * when enabled, input-range and channel-scale learning with their
 * projections. Validation metrics come from the noiseless training
 * forward. Throws TrainingError with epoch/step context when the loss
 * stops being finite. */
TrainResult finetune(MappedNetwork &net, const Dataset &train_data,
                     const Dataset &val_data, const TrainConfig &cfg,
                     const RngStream &rng);

} // namespace aimc
