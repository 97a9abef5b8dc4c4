/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <array>
#include <cstddef>

namespace aimc {

/* Physical parameters of one crossbar tile. Conductances are in µS,
 * voltages in V, currents in µA (µS * V = µA), resistances in Ω. */
struct TileHardwareConfig {
  std::size_t rows = 512;
  std::size_t cols = 512;
  int dac_bits = 8;
  int adc_bits = 8;
  double g_max = 25.0;
  double wire_resistance = 0.35;
  double v_read = 0.2;
  /* ADC saturates when 10 cells at g_max see full-scale inputs. */
  double i_sat = 10.0 * g_max * v_read;
  /* ADC counts per µA at the default saturation current. */
  double y_factor = static_cast<double>((1 << adc_bits) - 2) / 2.0 / i_sat;

  /* Throws ConfigError when any field is out of range. */
  void validate() const;
};

/* Stochastic non-idealities. sigma_w and sigma_out are unitless training
 * perturbations; prog/read/drift describe the physical device in µS. */
struct NoiseModel {
  double sigma_w = 0.06;
  double sigma_inp = 0.0;
  double sigma_out = 0.1;
  /* std of programming error: c0 + c1*G + c2*G^2, evaluated at the target */
  std::array<double, 3> prog_coeffs = {0.26, 0.0786, 0.0};
  /* std of read error: a + b*G */
  std::array<double, 2> read_coeffs = {0.0, 0.08};
  /* conductance decays as ((t - t_prog)/t0)^(-nu), nu drawn per cell */
  double drift_nu_mean = 0.06;
  double drift_nu_std = 0.02;
  double t0 = 20.0;

  /* Throws ConfigError when a std parameter can go negative on [0, g_max]. */
  void validate(double g_max) const;

  double prog_std(double g) const {
    return prog_coeffs[0] + prog_coeffs[1] * g + prog_coeffs[2] * g * g;
  }
  double read_std(double g) const {
    return read_coeffs[0] + read_coeffs[1] * g;
  }
};

} // namespace aimc
