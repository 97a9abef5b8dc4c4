/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include "aimc/common.hpp"

namespace aimc {

/* Symmetric uniform quantizer with 2^bits - 1 levels (odd count, zero is
 * always representable) spanning [-range, +range]. Values at or beyond the
 * range saturate to exactly +-range. Ties between adjacent levels round
 * away from zero. */

double symmetric_quantize(double value, double range, int bits);

/** DAC model: clip to the input range and snap to the level grid. */
double dac_quantize(double x, double input_range, int bits);
Vector dac_quantize(const Vector &x, double input_range, int bits);

/** ADC model: same grid over [-i_sat, +i_sat]; returns current units. */
double adc_quantize(double current, double i_sat, int bits);
Vector adc_quantize(const Vector &currents, double i_sat, int bits);

} // namespace aimc
