/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "aimc/ir_drop.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace aimc {

namespace {

void check_inputs(const Matrix &g, const Vector &v_in,
                  double wire_resistance) {
  if (v_in.size() != g.rows) {
    throw ShapeError("ir_drop_currents input length " +
                     std::to_string(v_in.size()) + " does not match rows " +
                     std::to_string(g.rows));
  }
  if (!(wire_resistance >= 0.0) || !std::isfinite(wire_resistance)) {
    throw ConfigError("wire_resistance must be non-negative");
  }
  for (double v : v_in) {
    if (!std::isfinite(v)) {
      throw DomainError("ir_drop_currents: non-finite voltage");
    }
  }
  for (double v : g.data) {
    if (!std::isfinite(v) || v < 0.0) {
      throw DomainError("ir_drop_currents: conductances must be finite and "
                        "non-negative");
    }
  }
}

/* µS times V gives µA directly */
Vector ideal_currents(const Matrix &g, const Vector &v_in) {
  Vector out(g.cols, 0.0);
  for (std::size_t i = 0; i < g.rows; ++i) {
    const double vi = v_in[i];
    const double *row = g.row(i);
    for (std::size_t j = 0; j < g.cols; ++j) {
      out[j] += vi * row[j];
    }
  }
  return out;
}

/* Number of wire segments incident on wordline node (i, j); the j=0 node
 * also ties to its driver. */
double wordline_degree(std::size_t j, std::size_t cols) {
  double n = (j == 0) ? 1.0 : 0.0;
  if (j > 0) {
    n += 1.0;
  }
  if (j + 1 < cols) {
    n += 1.0;
  }
  return n;
}

/* Number of wire segments incident on bitline node (i, j); the last row
 * also ties to virtual ground. */
double bitline_degree(std::size_t i, std::size_t rows) {
  double n = (i + 1 == rows) ? 1.0 : 0.0;
  if (i > 0) {
    n += 1.0;
  }
  if (i + 1 < rows) {
    n += 1.0;
  }
  return n;
}

/* Thomas solve of a symmetric tridiagonal system with constant off-diagonal
 * value off; diag and rhs are overwritten, the solution lands in rhs. */
void tridiag_solve(std::vector<double> &diag, std::vector<double> &rhs,
                   double off, std::size_t n) {
  for (std::size_t k = 1; k < n; ++k) {
    const double m = off / diag[k - 1];
    diag[k] -= m * off;
    rhs[k] -= m * rhs[k - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t k = n - 1; k > 0; --k) {
    rhs[k - 1] = (rhs[k - 1] - off * rhs[k]) / diag[k - 1];
  }
}

} // namespace

Vector ir_drop_currents(const Matrix &g, const Vector &v_in,
                        double wire_resistance) {
  check_inputs(g, v_in, wire_resistance);
  if (wire_resistance == 0.0) {
    return ideal_currents(g, v_in);
  }
  const std::size_t rows = g.rows;
  const std::size_t cols = g.cols;
  const double gw = 1e6 / wire_resistance;

  double vmax = 0.0;
  for (double v : v_in) {
    vmax = std::max(vmax, std::abs(v));
  }
  if (vmax == 0.0) {
    return Vector(cols, 0.0);
  }

  Matrix u(rows, cols);
  Matrix b(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      u(i, j) = v_in[i];
    }
  }

  const std::size_t line = std::max(rows, cols);
  std::vector<double> diag(line);
  std::vector<double> rhs(line);

  const double tol = 1e-13;
  const int max_sweeps = 20000;
  const double res_scale = gw * vmax;
  bool converged = false;

  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        diag[j] = gw * wordline_degree(j, cols) + g(i, j);
        rhs[j] = g(i, j) * b(i, j);
      }
      rhs[0] += gw * v_in[i];
      tridiag_solve(diag, rhs, -gw, cols);
      for (std::size_t j = 0; j < cols; ++j) {
        u(i, j) = rhs[j];
      }
    }
    for (std::size_t j = 0; j < cols; ++j) {
      for (std::size_t i = 0; i < rows; ++i) {
        diag[i] = gw * bitline_degree(i, rows) + g(i, j);
        rhs[i] = g(i, j) * u(i, j);
      }
      tridiag_solve(diag, rhs, -gw, rows);
      for (std::size_t i = 0; i < rows; ++i) {
        b(i, j) = rhs[i];
      }
    }

    /* KCL residual; the only source terms scale with gw * vmax */
    double res = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        const double left = (j == 0) ? v_in[i] : u(i, j - 1);
        double r_w = gw * (left - u(i, j)) - g(i, j) * (u(i, j) - b(i, j));
        if (j + 1 < cols) {
          r_w += gw * (u(i, j + 1) - u(i, j));
        }
        double r_b = g(i, j) * (u(i, j) - b(i, j));
        if (i > 0) {
          r_b += gw * (b(i - 1, j) - b(i, j));
        }
        if (i + 1 < rows) {
          r_b += gw * (b(i + 1, j) - b(i, j));
        } else {
          r_b -= gw * b(i, j);
        }
        res = std::max(res, std::max(std::abs(r_w), std::abs(r_b)));
      }
    }
    converged = res <= tol * res_scale;
  }

  if (!converged) {
    throw NumericalError("IR-drop relaxation did not reach residual 1e-13 in "
                         "20000 sweeps");
  }

  Vector out(cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    out[j] = gw * b(rows - 1, j);
  }
  return out;
}

Vector ir_drop_currents_dense(const Matrix &g, const Vector &v_in,
                              double wire_resistance) {
  check_inputs(g, v_in, wire_resistance);
  if (wire_resistance == 0.0) {
    return ideal_currents(g, v_in);
  }
  const std::size_t rows = g.rows;
  const std::size_t cols = g.cols;
  if (rows > 64 || cols > 64) {
    throw ShapeError("dense IR-drop solver supports tiles up to 64x64");
  }
  const double gw = 1e6 / wire_resistance;

  /* Nodes interleave as W(i,j) -> 2(i*cols+j), B(i,j) -> 2(i*cols+j)+1,
   * giving a symmetric positive definite band of half-width 2*cols. */
  const std::size_t n = 2 * rows * cols;
  const std::size_t bw = std::min(n - 1, 2 * cols);
  std::vector<double> band((bw + 1) * n, 0.0);
  std::vector<double> rhs(n, 0.0);
  auto at = [&](std::size_t d, std::size_t k) -> double & {
    return band[d * n + k];
  };

  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t w = 2 * (i * cols + j);
      const std::size_t bn = w + 1;
      at(0, w) = gw * wordline_degree(j, cols) + g(i, j);
      at(0, bn) = gw * bitline_degree(i, rows) + g(i, j);
      at(1, w) = -g(i, j);
      if (j + 1 < cols) {
        at(2, w) = -gw;
      }
      if (i + 1 < rows) {
        at(2 * cols, bn) = -gw;
      }
      if (j == 0) {
        rhs[w] = gw * v_in[i];
      }
    }
  }

  /* banded Cholesky, factor stored over the band */
  for (std::size_t k = 0; k < n; ++k) {
    double dk = at(0, k);
    const std::size_t m_lo = (k > bw) ? k - bw : 0;
    for (std::size_t m = m_lo; m < k; ++m) {
      const double l = at(k - m, m);
      dk -= l * l;
    }
    if (!(dk > 0.0)) {
      throw NumericalError("IR-drop nodal system is not positive definite");
    }
    dk = std::sqrt(dk);
    at(0, k) = dk;
    const std::size_t d_hi = std::min(bw, n - 1 - k);
    for (std::size_t d = 1; d <= d_hi; ++d) {
      double val = at(d, k);
      const std::size_t lo = (k + d > bw) ? k + d - bw : 0;
      for (std::size_t m = std::max(lo, m_lo); m < k; ++m) {
        val -= at(k + d - m, m) * at(k - m, m);
      }
      at(d, k) = val / dk;
    }
  }

  for (std::size_t k = 0; k < n; ++k) {
    double v = rhs[k];
    const std::size_t m_lo = (k > bw) ? k - bw : 0;
    for (std::size_t m = m_lo; m < k; ++m) {
      v -= at(k - m, m) * rhs[m];
    }
    rhs[k] = v / at(0, k);
  }
  for (std::size_t k = n; k-- > 0;) {
    double v = rhs[k];
    const std::size_t d_hi = std::min(bw, n - 1 - k);
    for (std::size_t d = 1; d <= d_hi; ++d) {
      v -= at(d, k) * rhs[k + d];
    }
    rhs[k] = v / at(0, k);
  }

  Vector out(cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    out[j] = gw * rhs[2 * ((rows - 1) * cols + j) + 1];
  }
  return out;
}

double saturation_current(const TileHardwareConfig &config) {
  config.validate();
  return 10.0 * config.g_max * config.v_read;
}

} // namespace aimc
