/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "aimc/device_noise.hpp"

#include <cmath>
#include <string>

namespace aimc {

Matrix program_conductances(const Matrix &targets, const NoiseModel &noise,
                            double g_max, RngStream &rng) {
  for (double g : targets.data) {
    if (!(g >= 0.0 && g <= g_max)) {
      throw MappingError("program target " + std::to_string(g) +
                         " outside [0, " + std::to_string(g_max) + "] uS");
    }
  }
  Matrix out = targets;
  if (noise.prog_coeffs[0] == 0.0 && noise.prog_coeffs[1] == 0.0 &&
      noise.prog_coeffs[2] == 0.0) {
    return out;
  }
  for (double &g : out.data) {
    g = clip(g + rng.normal(0.0, noise.prog_std(g)), 0.0, g_max);
  }
  return out;
}

Matrix apply_drift(const Matrix &g, double t, double programmed_at,
                   const NoiseModel &noise, double g_max, RngStream rng) {
  const double elapsed = t - programmed_at;
  if (!(elapsed >= noise.t0)) {
    throw TemporalError("drift evaluation at t = " + std::to_string(t) +
                        " s precedes programming at " +
                        std::to_string(programmed_at) + " s plus t0 = " +
                        std::to_string(noise.t0) + " s");
  }
  Matrix out = g;
  if (noise.drift_nu_mean == 0.0 && noise.drift_nu_std == 0.0) {
    return out;
  }
  const double log_ratio = std::log(elapsed / noise.t0);
  for (double &v : out.data) {
    const double nu = rng.normal(noise.drift_nu_mean, noise.drift_nu_std);
    v = clip(v * std::exp(-nu * log_ratio), 0.0, g_max);
  }
  return out;
}

Matrix read_noise(const Matrix &g, const NoiseModel &noise, double g_max,
                  RngStream &rng) {
  Matrix out = g;
  for (double &v : out.data) {
    const double sd = noise.read_std(v);
    if (sd > 0.0) {
      v = clip(v + rng.normal(0.0, sd), 0.0, g_max);
    }
  }
  return out;
}

} // namespace aimc
