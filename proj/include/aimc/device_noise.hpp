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
#include "aimc/rng.hpp"

namespace aimc {

/* Writes targets (µS) to cells with additive Gaussian error whose std is
 * noise.prog_std evaluated at the target. Output is clipped to [0, g_max].
 * Throws MappingError when a target lies outside [0, g_max]. */
Matrix program_conductances(const Matrix &targets, const NoiseModel &noise,
                            double g_max, RngStream &rng);

/* Decays every cell by ((t - programmed_at) / t0)^(-nu) with nu drawn
 * per cell. Takes the stream by value so repeated calls for the same
 * programming event replay identical exponents at any t. Throws
 * TemporalError when t is earlier than programmed_at + t0. */
Matrix apply_drift(const Matrix &g, double t, double programmed_at,
                   const NoiseModel &noise, double g_max, RngStream rng);

/* Adds instantaneous read error with std noise.read_std per cell, fresh
 * draws on every call. Cells whose std is zero are returned untouched.
 * Output is clipped to [0, g_max]. */
Matrix read_noise(const Matrix &g, const NoiseModel &noise, double g_max,
                  RngStream &rng);

} // namespace aimc
