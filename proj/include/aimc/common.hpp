/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace aimc {

/* error taxonomy: every failure carries a stable category string that the
 * CLI prints as "error: <category>: <message>". */

class Error : public std::runtime_error {
public:
  Error(std::string category, const std::string &msg)
      : std::runtime_error(msg), category_(std::move(category)) {}

  const std::string &category() const { return category_; }

private:
  std::string category_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string &msg) : Error("config", msg) {}
};

class ShapeError : public Error {
public:
  explicit ShapeError(const std::string &msg) : Error("shape", msg) {}
};

class DomainError : public Error {
public:
  explicit DomainError(const std::string &msg) : Error("domain", msg) {}
};

class MappingError : public Error {
public:
  explicit MappingError(const std::string &msg) : Error("mapping", msg) {}
};

class TemporalError : public Error {
public:
  explicit TemporalError(const std::string &msg) : Error("temporal", msg) {}
};

class NumericalError : public Error {
public:
  explicit NumericalError(const std::string &msg) : Error("numerical", msg) {}
};

class CalibrationError : public Error {
public:
  explicit CalibrationError(const std::string &msg)
      : Error("calibration", msg) {}
};

class TrainingError : public Error {
public:
  explicit TrainingError(const std::string &msg) : Error("training", msg) {}
};

class ParseError : public Error {
public:
  explicit ParseError(const std::string &msg) : Error("parse", msg) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string &msg) : Error("io", msg) {}
};

using Vector = std::vector<double>;

/* dense row-major matrix of doubles */
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double &operator()(std::size_t r, std::size_t c) {
    return data[r * cols + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }

  const double *row(std::size_t r) const { return data.data() + r * cols; }
  double *row(std::size_t r) { return data.data() + r * cols; }

  bool same_shape(const Matrix &o) const {
    return rows == o.rows && cols == o.cols;
  }
};

inline double clip(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

/** y[n] = sum_m x[m] * w[m][n]; the noise-free reference for every
 *  ideality-off test. Rejects NaN/Inf entries. */
Vector ideal_mvm(const Vector &x, const Matrix &w);

} // namespace aimc
