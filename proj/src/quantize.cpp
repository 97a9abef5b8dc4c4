/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "aimc/quantize.hpp"

#include <cmath>

namespace aimc {

namespace {

constexpr int kMaxBits = 24;

void validate(double range, int bits, const char *who) {
  if (!(range > 0.0)) {
    throw ConfigError(std::string(who) + ": range must be positive");
  }
  if (bits < 1 || bits > kMaxBits) {
    throw ConfigError(std::string(who) + ": bits must be in [1, 24]");
  }
}

} // namespace

double symmetric_quantize(double value, double range, int bits) {
  const long half_levels = (1L << (bits - 1)) - 1;
  if (half_levels == 0) {
    return 0.0;
  }
  if (value >= range) {
    return range;
  }
  if (value <= -range) {
    return -range;
  }
  const double step = range / static_cast<double>(half_levels);
  const double snapped = std::round(value / step) * step;
  return clip(snapped, -range, range);
}

double dac_quantize(double x, double input_range, int bits) {
  validate(input_range, bits, "dac_quantize");
  return symmetric_quantize(x, input_range, bits);
}

Vector dac_quantize(const Vector &x, double input_range, int bits) {
  validate(input_range, bits, "dac_quantize");
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = symmetric_quantize(x[i], input_range, bits);
  }
  return out;
}

double adc_quantize(double current, double i_sat, int bits) {
  validate(i_sat, bits, "adc_quantize");
  return symmetric_quantize(current, i_sat, bits);
}

Vector adc_quantize(const Vector &currents, double i_sat, int bits) {
  validate(i_sat, bits, "adc_quantize");
  Vector out(currents.size());
  for (std::size_t i = 0; i < currents.size(); ++i) {
    out[i] = symmetric_quantize(currents[i], i_sat, bits);
  }
  return out;
}

} // namespace aimc
