/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "aimc/hw_config.hpp"

#include <cmath>
#include <string>

#include "aimc/common.hpp"

namespace aimc {

namespace {

void require(bool ok, const std::string &msg) {
  if (!ok) {
    throw ConfigError(msg);
  }
}

bool finite(double v) { return std::isfinite(v); }

} // namespace

void TileHardwareConfig::validate() const {
  require(rows >= 1, "rows must be at least 1");
  require(cols >= 1, "cols must be at least 1");
  require(dac_bits >= 1 && dac_bits <= 24, "dac_bits must be in [1, 24]");
  require(adc_bits >= 1 && adc_bits <= 24, "adc_bits must be in [1, 24]");
  require(finite(g_max) && g_max > 0.0, "g_max must be positive");
  require(finite(v_read) && v_read > 0.0, "v_read must be positive");
  require(finite(i_sat) && i_sat > 0.0, "i_sat must be positive");
  require(finite(wire_resistance) && wire_resistance >= 0.0,
          "wire_resistance must be non-negative");
  require(finite(y_factor) && y_factor > 0.0, "y_factor must be positive");
}

void NoiseModel::validate(double g_max) const {
  require(finite(sigma_w) && sigma_w >= 0.0, "sigma_w must be non-negative");
  require(finite(sigma_inp) && sigma_inp >= 0.0,
          "sigma_inp must be non-negative");
  require(finite(sigma_out) && sigma_out >= 0.0,
          "sigma_out must be non-negative");
  require(finite(t0) && t0 > 0.0, "t0 must be positive");
  require(finite(drift_nu_mean), "drift_nu_mean must be finite");
  require(finite(drift_nu_std) && drift_nu_std >= 0.0,
          "drift_nu_std must be non-negative");
  for (double c : prog_coeffs) {
    require(finite(c), "prog_coeffs must be finite");
  }
  for (double c : read_coeffs) {
    require(finite(c), "read_coeffs must be finite");
  }

  /* The std polynomials must be non-negative everywhere a conductance
   * can sit. Endpoints cover the affine read model; the quadratic
   * programming model also needs its vertex when it falls inside. */
  require(prog_std(0.0) >= 0.0 && prog_std(g_max) >= 0.0,
          "prog_coeffs give a negative std on [0, g_max]");
  if (prog_coeffs[2] != 0.0) {
    const double vertex = -prog_coeffs[1] / (2.0 * prog_coeffs[2]);
    if (vertex > 0.0 && vertex < g_max) {
      require(prog_std(vertex) >= 0.0,
              "prog_coeffs give a negative std on [0, g_max]");
    }
  }
  require(read_std(0.0) >= 0.0 && read_std(g_max) >= 0.0,
          "read_coeffs give a negative std on [0, g_max]");
}

} // namespace aimc
