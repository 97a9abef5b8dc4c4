/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include "aimc/common.hpp"
#include "aimc/hw_config.hpp"

namespace aimc {

/* Sensed per-column currents (µA) of a crossbar with resistive wires.
 * Each device g[i][j] (µS) bridges wordline node (i,j) and bitline node
 * (i,j); adjacent nodes on a line are joined by wire_resistance (Ω).
 * Wordline i is driven by v_in[i] (V) through one segment at the j=0 end;
 * bitline j is sensed at virtual ground through one segment at the
 * i=rows-1 end. With wire_resistance = 0 this reduces to v_in' * g,
 * computed exactly. Solved by alternating wordline/bitline tridiagonal
 * relaxation to 1e-13 relative residual; throws NumericalError when the
 * sweep limit is hit first. */
Vector ir_drop_currents(const Matrix &g, const Vector &v_in,
                        double wire_resistance);

/* Direct banded-Cholesky solve of the same network, for cross-checking
 * the relaxation. Node count is 2*rows*cols; intended for tiles up to
 * 64x64. */
Vector ir_drop_currents_dense(const Matrix &g, const Vector &v_in,
                              double wire_resistance);

/* Current at which the ADC rails: ten cells at g_max driven at full
 * scale. */
double saturation_current(const TileHardwareConfig &config);

} // namespace aimc
