/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "aimc/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "aimc/quantize.hpp"

namespace aimc {

namespace {

constexpr double kAdamEps = 1e-8;
constexpr double kRangeFloor = 1e-3;
constexpr double kWeightBound = 1.0;
constexpr double kPi = 3.141592653589793238462643383279502884;

Vector slice(const Vector &v, const Span &s) {
  return Vector(v.begin() + static_cast<std::ptrdiff_t>(s.start),
                v.begin() + static_cast<std::ptrdiff_t>(s.start + s.length));
}

struct TileCache {
  /* raw input slice before the DAC */
  Vector x_in;
  /* DAC output */
  Vector u;
  /* weight slice including this pass's perturbation */
  Matrix w_eff;
  /* column sums before channel scaling */
  Vector s;
  /* pre-quantizer output */
  Vector a;
};

struct LayerCache {
  /* layer input (post-tanh of the previous layer) */
  Vector x;
  std::vector<TileCache> tiles;
};

/* numerically stable softmax cross entropy; writes the probability
 * vector over logits in place */
double softmax_cross_entropy(Vector &logits, int label) {
  double top = logits[0];
  for (double v : logits)
    top = std::max(top, v);
  double denom = 0.0;
  for (double &v : logits) {
    v = std::exp(v - top);
    denom += v;
  }
  for (double &v : logits)
    v /= denom;
  return -std::log(logits[static_cast<std::size_t>(label)]);
}

std::size_t argmax(const Vector &v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best])
      best = i;
  return best;
}

/* one moving tensor with its optimizer state */
struct AdamTensor {
  std::vector<double *> params;
  std::vector<const double *> grads;
  std::vector<double> m;
  std::vector<double> v;
  bool decay = false;
  double lo = -kWeightBound;
  double hi = kWeightBound;
};

void adam_step(AdamTensor &t, const TrainConfig &cfg, double lr,
               std::size_t step_count) {
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_count));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_count));
  for (std::size_t i = 0; i < t.params.size(); ++i) {
    const double g = *t.grads[i];
    t.m[i] = cfg.beta1 * t.m[i] + (1.0 - cfg.beta1) * g;
    t.v[i] = cfg.beta2 * t.v[i] + (1.0 - cfg.beta2) * g * g;
    const double mh = t.m[i] / bc1;
    const double vh = t.v[i] / bc2;
    double p = *t.params[i];
    p -= lr * mh / (std::sqrt(vh) + kAdamEps);
    if (t.decay)
      p -= lr * cfg.weight_decay * p;
    *t.params[i] = clip(p, t.lo, t.hi);
  }
}

} // namespace

void TrainConfig::validate() const {
  if (!(sigma_w >= 0.0) || !(sigma_out >= 0.0))
    throw ConfigError("noise stds must be >= 0");
  if (!(lr_init > 0.0))
    throw ConfigError("lr_init must be > 0");
  if (!(lr_final >= 0.0) || lr_final > lr_init)
    throw ConfigError("lr_final must lie in [0, lr_init]");
  if (epochs < 1)
    throw ConfigError("epochs must be >= 1");
  if (batch_size < 1)
    throw ConfigError("batch_size must be >= 1");
  if (!(decay_eta >= 0.0))
    throw ConfigError("decay_eta must be >= 0");
  if (dac_bits < 2 || dac_bits > 32 || adc_bits < 2 || adc_bits > 32)
    throw ConfigError("converter bits must lie in [2, 32]");
  if (!(sat_bound > 0.0))
    throw ConfigError("sat_bound must be > 0");
  if (!(weight_decay >= 0.0))
    throw ConfigError("weight_decay must be >= 0");
  if (!(beta1 >= 0.0) || beta1 >= 1.0 || !(beta2 >= 0.0) || beta2 >= 1.0)
    throw ConfigError("adam betas must lie in [0, 1)");
  if (!(eta_min > 0.0) || eta_min > 1.0)
    throw ConfigError("eta_min must lie in (0, 1]");
}

Dataset make_moons(std::size_t count, double noise_std, double scale,
                   RngStream &rng) {
  if (count == 0)
    throw ConfigError("make_moons: count must be >= 1");
  if (!(noise_std >= 0.0) || !(scale > 0.0))
    throw ConfigError("make_moons: noise_std >= 0 and scale > 0 required");
  Dataset out;
  out.inputs.reserve(count);
  out.labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int label = static_cast<int>(i % 2);
    const double theta = rng.uniform(0.0, kPi);
    double px;
    double py;
    if (label == 0) {
      px = std::cos(theta);
      py = std::sin(theta);
    } else {
      px = 1.0 - std::cos(theta);
      py = 0.5 - std::sin(theta);
    }
    if (noise_std > 0.0) {
      px += rng.normal(0.0, noise_std);
      py += rng.normal(0.0, noise_std);
    }
    out.inputs.push_back({px * scale, py * scale});
    out.labels.push_back(label);
  }
  return out;
}

Dataset make_blobs(std::size_t count, double separation, RngStream &rng) {
  if (count == 0)
    throw ConfigError("make_blobs: count must be >= 1");
  if (!(separation > 0.0))
    throw ConfigError("make_blobs: separation must be > 0");
  Dataset out;
  out.inputs.reserve(count);
  out.labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int label = static_cast<int>(i % 2);
    const double c = label == 0 ? -separation : separation;
    out.inputs.push_back({c + rng.normal(), c + rng.normal()});
    out.labels.push_back(label);
  }
  return out;
}

Vector noisy_forward(const Matrix &weights_unit, const Vector &x,
                     const TrainConfig &cfg, RngStream &rng) {
  if (x.size() != weights_unit.rows)
    throw ShapeError("noisy_forward: input length does not match weight rows");
  const Vector u =
      cfg.enable_quantization ? dac_quantize(x, 1.0, cfg.dac_bits) : x;
  Vector y(weights_unit.cols, 0.0);
  if (cfg.sigma_w > 0.0) {
    for (std::size_t r = 0; r < weights_unit.rows; ++r)
      for (std::size_t c = 0; c < weights_unit.cols; ++c)
        y[c] += (weights_unit(r, c) + cfg.sigma_w * rng.normal()) * u[r];
  } else {
    for (std::size_t r = 0; r < weights_unit.rows; ++r)
      for (std::size_t c = 0; c < weights_unit.cols; ++c)
        y[c] += weights_unit(r, c) * u[r];
  }
  if (cfg.sigma_out > 0.0)
    for (double &v : y)
      v += cfg.sigma_out * rng.normal();
  return y;
}

double input_range_gradient(const Vector &x_cached, const Vector &grad_x,
                            double x_r, double eta) {
  if (x_cached.empty())
    throw ShapeError("input_range_gradient: empty input");
  if (x_cached.size() != grad_x.size())
    throw ShapeError("input_range_gradient: input/gradient length mismatch");
  if (!(x_r > 0.0))
    throw ConfigError("input_range_gradient: x_r must be > 0");
  if (!(eta >= 0.0))
    throw ConfigError("input_range_gradient: eta must be >= 0");
  double upper = 0.0;
  double lower = 0.0;
  double inside = 0.0;
  for (std::size_t i = 0; i < x_cached.size(); ++i) {
    if (x_cached[i] >= x_r)
      upper += std::min(grad_x[i], 0.0);
    else if (x_cached[i] <= -x_r)
      lower += std::max(grad_x[i], 0.0);
    else
      inside += 1.0;
  }
  const double numel = static_cast<double>(x_cached.size());
  return upper - lower + x_r * eta * inside / numel;
}

double channel_scale_gradient(const Vector &grad_y, const Vector &pre_scale) {
  if (grad_y.size() != pre_scale.size())
    throw ShapeError("channel_scale_gradient: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < grad_y.size(); ++i)
    acc += grad_y[i] * pre_scale[i];
  return acc;
}

BatchGradients network_gradients(const MappedNetwork &net,
                                 const std::vector<Vector> &xs,
                                 const std::vector<int> &labels,
                                 const TrainConfig &cfg,
                                 const RngStream *noise_rng) {
  if (xs.empty())
    throw ShapeError("network_gradients: empty batch");
  if (xs.size() != labels.size())
    throw ShapeError("network_gradients: inputs/labels size mismatch");
  if (net.layers.empty())
    throw ConfigError("network_gradients: network has no layers");
  const std::size_t n_layers = net.layers.size();
  const std::size_t out_dim = net.layers.back().shape.cols;

  BatchGradients out;
  out.layers.resize(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    const MappedLayer &layer = net.layers[l];
    out.layers[l].weight = Matrix(layer.weight.rows, layer.weight.cols);
    out.layers[l].bias.assign(layer.bias.size(), 0.0);
    out.layers[l].channel_scale.assign(layer.channel_scale.size(), 0.0);
    out.layers[l].input_range.assign(layer.tiles.size(), 0.0);
  }
  out.input.resize(xs.size());

  std::vector<LayerCache> cache(n_layers);
  std::size_t correct = 0;

  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (xs[k].size() != net.layers.front().shape.rows)
      throw ShapeError("network_gradients: input length does not match "
                       "the first layer");
    if (labels[k] < 0 || static_cast<std::size_t>(labels[k]) >= out_dim)
      throw DomainError("network_gradients: label out of range");

    /* forward */
    Vector x = xs[k];
    Vector logits;
    for (std::size_t l = 0; l < n_layers; ++l) {
      const MappedLayer &layer = net.layers[l];
      LayerCache &lc = cache[l];
      lc.x = x;
      lc.tiles.assign(layer.tiles.size(), TileCache{});
      Vector y = layer.bias;
      for (std::size_t t = 0; t < layer.tiles.size(); ++t) {
        const TileAssignment &a = layer.tiles[t];
        TileCache &tc = lc.tiles[t];
        tc.x_in = slice(x, a.row_span);
        const double x_r = layer.tile_input_range[t];
        tc.u = cfg.enable_quantization
                   ? dac_quantize(tc.x_in, x_r, cfg.dac_bits)
                   : tc.x_in;
        tc.w_eff = Matrix(a.row_span.length, a.col_span.length);
        for (std::size_t r = 0; r < a.row_span.length; ++r)
          for (std::size_t c = 0; c < a.col_span.length; ++c)
            tc.w_eff(r, c) =
                layer.weight(a.row_span.start + r, a.col_span.start + c);
        RngStream tile_rng;
        if (noise_rng)
          tile_rng = noise_rng->derive(k).derive(l).derive(t);
        if (noise_rng && cfg.sigma_w > 0.0)
          for (std::size_t r = 0; r < a.row_span.length; ++r)
            for (std::size_t c = 0; c < a.col_span.length; ++c)
              tc.w_eff(r, c) += cfg.sigma_w * tile_rng.normal();
        tc.s.assign(a.col_span.length, 0.0);
        for (std::size_t r = 0; r < a.row_span.length; ++r)
          for (std::size_t c = 0; c < a.col_span.length; ++c)
            tc.s[c] += tc.w_eff(r, c) * tc.u[r];
        tc.a.resize(a.col_span.length);
        const double bound = cfg.sat_bound * x_r;
        for (std::size_t c = 0; c < a.col_span.length; ++c) {
          double v = layer.channel_scale[a.col_span.start + c] * tc.s[c];
          if (noise_rng && cfg.sigma_out > 0.0)
            v += cfg.sigma_out * tile_rng.normal();
          tc.a[c] = v;
          const double z = cfg.enable_quantization
                               ? adc_quantize(v, bound, cfg.adc_bits)
                               : v;
          y[a.col_span.start + c] += z;
        }
      }
      if (l + 1 < n_layers) {
        x.resize(y.size());
        for (std::size_t i = 0; i < y.size(); ++i)
          x[i] = std::tanh(y[i]);
      } else {
        logits = y;
      }
    }

    if (argmax(logits) == static_cast<std::size_t>(labels[k]))
      ++correct;
    Vector grad_y = logits;
    out.loss += softmax_cross_entropy(grad_y, labels[k]);
    grad_y[static_cast<std::size_t>(labels[k])] -= 1.0;

    /* backward */
    for (std::size_t l = n_layers; l-- > 0;) {
      const MappedLayer &layer = net.layers[l];
      const LayerCache &lc = cache[l];
      LayerGradients &lg = out.layers[l];
      for (std::size_t i = 0; i < grad_y.size(); ++i)
        lg.bias[i] += grad_y[i];
      Vector grad_x(lc.x.size(), 0.0);
      for (std::size_t t = 0; t < layer.tiles.size(); ++t) {
        const TileAssignment &a = layer.tiles[t];
        const TileCache &tc = lc.tiles[t];
        const double x_r = layer.tile_input_range[t];
        const double bound = cfg.sat_bound * x_r;
        Vector grad_s(a.col_span.length, 0.0);
        for (std::size_t c = 0; c < a.col_span.length; ++c) {
          double g = grad_y[a.col_span.start + c];
          if (cfg.enable_quantization && std::abs(tc.a[c]) >= bound)
            g = 0.0;
          lg.channel_scale[a.col_span.start + c] += g * tc.s[c];
          grad_s[c] = layer.channel_scale[a.col_span.start + c] * g;
        }
        Vector grad_u(a.row_span.length, 0.0);
        for (std::size_t r = 0; r < a.row_span.length; ++r) {
          double acc = 0.0;
          for (std::size_t c = 0; c < a.col_span.length; ++c) {
            lg.weight(a.row_span.start + r, a.col_span.start + c) +=
                tc.u[r] * grad_s[c];
            acc += tc.w_eff(r, c) * grad_s[c];
          }
          grad_u[r] = acc;
        }
        lg.input_range[t] +=
            input_range_gradient(tc.x_in, grad_u, x_r, cfg.decay_eta);
        for (std::size_t r = 0; r < a.row_span.length; ++r) {
          if (cfg.enable_quantization && std::abs(tc.x_in[r]) >= x_r)
            continue;
          grad_x[a.row_span.start + r] += grad_u[r];
        }
      }
      if (l == 0) {
        out.input[k] = std::move(grad_x);
      } else {
        /* lc.x is the tanh output of the previous layer */
        grad_y.assign(lc.x.size(), 0.0);
        for (std::size_t i = 0; i < lc.x.size(); ++i)
          grad_y[i] = grad_x[i] * (1.0 - lc.x[i] * lc.x[i]);
      }
    }
  }

  const double inv = 1.0 / static_cast<double>(xs.size());
  out.loss *= inv;
  out.accuracy = static_cast<double>(correct) * inv;
  for (LayerGradients &lg : out.layers) {
    for (double &v : lg.weight.data)
      v *= inv;
    for (double &v : lg.bias)
      v *= inv;
    for (double &v : lg.channel_scale)
      v *= inv;
    for (double &v : lg.input_range)
      v *= inv;
  }
  for (Vector &g : out.input)
    for (double &v : g)
      v *= inv;
  return out;
}

TrainResult finetune(MappedNetwork &net, const Dataset &train_data,
                     const Dataset &val_data, const TrainConfig &cfg,
                     const RngStream &rng) {
  cfg.validate();
  net.validate();
  if (train_data.inputs.empty() || val_data.inputs.empty())
    throw ConfigError("finetune: train and validation sets must be non-empty");
  if (train_data.inputs.size() != train_data.labels.size() ||
      val_data.inputs.size() != val_data.labels.size())
    throw ShapeError("finetune: inputs/labels size mismatch");

  const std::size_t n = train_data.inputs.size();
  const std::size_t batches_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total_steps = cfg.epochs * batches_per_epoch;

  /* gradient buffers are rebuilt per step; optimizer tensors bind to the
   * network parameters once and to a stable gradient mirror */
  BatchGradients mirror;
  mirror.layers.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const MappedLayer &layer = net.layers[l];
    mirror.layers[l].weight = Matrix(layer.weight.rows, layer.weight.cols);
    mirror.layers[l].bias.assign(layer.bias.size(), 0.0);
    mirror.layers[l].channel_scale.assign(layer.channel_scale.size(), 0.0);
    mirror.layers[l].input_range.assign(layer.tiles.size(), 0.0);
  }

  std::vector<AdamTensor> tensors;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    MappedLayer &layer = net.layers[l];
    LayerGradients &lg = mirror.layers[l];
    AdamTensor w;
    w.decay = true;
    for (std::size_t i = 0; i < layer.weight.data.size(); ++i) {
      w.params.push_back(&layer.weight.data[i]);
      w.grads.push_back(&lg.weight.data[i]);
    }
    tensors.push_back(std::move(w));
    AdamTensor b;
    b.lo = -1e300;
    b.hi = 1e300;
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      b.params.push_back(&layer.bias[i]);
      b.grads.push_back(&lg.bias[i]);
    }
    tensors.push_back(std::move(b));
    if (cfg.learn_conductance_scale) {
      AdamTensor e;
      e.lo = cfg.eta_min;
      e.hi = 1.0;
      for (std::size_t i = 0; i < layer.channel_scale.size(); ++i) {
        e.params.push_back(&layer.channel_scale[i]);
        e.grads.push_back(&lg.channel_scale[i]);
      }
      tensors.push_back(std::move(e));
    }
    if (cfg.learn_input_range) {
      AdamTensor r;
      r.lo = kRangeFloor;
      r.hi = 1e300;
      for (std::size_t i = 0; i < layer.tile_input_range.size(); ++i) {
        r.params.push_back(&layer.tile_input_range[i]);
        r.grads.push_back(&lg.input_range[i]);
      }
      tensors.push_back(std::move(r));
    }
  }
  for (AdamTensor &t : tensors) {
    t.m.assign(t.params.size(), 0.0);
    t.v.assign(t.params.size(), 0.0);
  }

  const RngStream data_rng = rng.derive(rng_tag::kData);
  const RngStream noise_base = rng.derive(rng_tag::kTrain);

  TrainResult result;
  std::vector<std::size_t> order(n);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i)
      order[i] = i;
    RngStream shuffle_rng = data_rng.derive(epoch);
    for (std::size_t i = n; i-- > 1;) {
      auto j = static_cast<std::size_t>(shuffle_rng.uniform() *
                                        static_cast<double>(i + 1));
      std::swap(order[i], order[j]);
    }

    double epoch_loss = 0.0;
    double epoch_acc = 0.0;
    for (std::size_t b = 0; b < batches_per_epoch; ++b) {
      const std::size_t lo = b * cfg.batch_size;
      const std::size_t hi = std::min(lo + cfg.batch_size, n);
      std::vector<Vector> bx;
      std::vector<int> by;
      bx.reserve(hi - lo);
      by.reserve(hi - lo);
      for (std::size_t i = lo; i < hi; ++i) {
        bx.push_back(train_data.inputs[order[i]]);
        by.push_back(train_data.labels[order[i]]);
      }
      const RngStream step_rng = noise_base.derive(step);
      BatchGradients grads = network_gradients(net, bx, by, cfg, &step_rng);
      if (!std::isfinite(grads.loss))
        throw TrainingError("loss not finite at epoch " +
                            std::to_string(epoch + 1) + " step " +
                            std::to_string(step));
      /* copy in place: the optimizer tensors hold pointers into mirror */
      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        LayerGradients &dst = mirror.layers[l];
        const LayerGradients &src = grads.layers[l];
        std::copy(src.weight.data.begin(), src.weight.data.end(),
                  dst.weight.data.begin());
        std::copy(src.bias.begin(), src.bias.end(), dst.bias.begin());
        std::copy(src.channel_scale.begin(), src.channel_scale.end(),
                  dst.channel_scale.begin());
        std::copy(src.input_range.begin(), src.input_range.end(),
                  dst.input_range.begin());
      }

      double lr = cfg.lr_init;
      if (total_steps > 1)
        lr += (cfg.lr_final - cfg.lr_init) * static_cast<double>(step) /
              static_cast<double>(total_steps - 1);
      ++step;
      for (AdamTensor &t : tensors)
        adam_step(t, cfg, lr, step);

      epoch_loss += grads.loss;
      epoch_acc += grads.accuracy;
    }

    const BatchGradients val = network_gradients(
        net, val_data.inputs, val_data.labels, cfg, nullptr);
    EpochMetrics m;
    m.epoch = epoch + 1;
    m.train_loss = epoch_loss / static_cast<double>(batches_per_epoch);
    m.train_accuracy = epoch_acc / static_cast<double>(batches_per_epoch);
    m.val_loss = val.loss;
    m.val_accuracy = val.accuracy;
    result.epochs.push_back(m);
  }
  return result;
}

} // namespace aimc
