/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "aimc/rng.hpp"

#include "aimc/common.hpp"

#include <cmath>

namespace aimc {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

inline std::uint64_t splitmix64(std::uint64_t &state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  return splitmix64(h);
}

/* 256-layer ziggurat tables for the standard normal, built once at first
 * use from the canonical base point r for n=256. Layer i >= 1 samples the
 * band [f[i-1], f[i]] with rectangle width x[i-1]; layer 0 is the base
 * rectangle plus the tail. The equal-area recurrence closes with x[255]=0
 * and f[255]=1 at the peak. */
struct ZigguratTables {
  static constexpr int kLayers = 256;
  double x[kLayers];
  double f[kLayers];
  double base_width;

  ZigguratTables() {
    const double r = 3.6541528853610088;
    const double fr = std::exp(-0.5 * r * r);
    /* per-layer area: base rectangle plus the tail mass */
    const double v =
        r * fr + std::sqrt(3.14159265358979323846 / 2.0) *
                     std::erfc(r / std::sqrt(2.0));
    x[0] = r;
    f[0] = fr;
    for (int i = 1; i < kLayers - 1; ++i) {
      const double fi = f[i - 1] + v / x[i - 1];
      if (fi >= 1.0) {
        throw NumericalError("ziggurat table construction failed");
      }
      x[i] = std::sqrt(-2.0 * std::log(fi));
      f[i] = fi;
    }
    x[kLayers - 1] = 0.0;
    f[kLayers - 1] = 1.0;
    base_width = v / fr;
    /* the recurrence must close at the peak */
    if (std::abs(f[kLayers - 2] + v / x[kLayers - 2] - 1.0) > 1e-9) {
      throw NumericalError("ziggurat table closure failed");
    }
  }
};

const ZigguratTables &ziggurat() {
  static const ZigguratTables tables;
  return tables;
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::uint64_t z =
      seed ^ (stream_id * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
  for (auto &word : s_) {
    word = splitmix64(z);
  }
}

RngStream RngStream::derive(std::uint64_t key) const {
  return RngStream(seed_, mix_key(stream_id_, key));
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double RngStream::normal() {
  const ZigguratTables &z = ziggurat();
  for (;;) {
    const std::uint64_t bits = next_u64();
    const int layer = static_cast<int>(bits & 255u);
    const double sign = (bits & 256u) ? -1.0 : 1.0;
    const double u =
        static_cast<double>((bits >> 9) & ((1ULL << 53) - 1)) * 0x1.0p-53;
    if (layer == 0) {
      const double cand = u * z.base_width;
      if (cand < z.x[0]) {
        return sign * cand;
      }
      /* tail beyond the base point */
      for (;;) {
        const double e1 = -std::log(1.0 - uniform()) / z.x[0];
        const double e2 = -std::log(1.0 - uniform());
        if (e1 * e1 <= 2.0 * e2) {
          return sign * (z.x[0] + e1);
        }
      }
    }
    const double cand = u * z.x[layer - 1];
    if (cand < z.x[layer]) {
      return sign * cand;
    }
    const double fy = z.f[layer - 1] + uniform() * (z.f[layer] - z.f[layer - 1]);
    if (fy < std::exp(-0.5 * cand * cand)) {
      return sign * cand;
    }
  }
}

double RngStream::normal(double mean, double std_dev) {
  return mean + std_dev * normal();
}

Vector ideal_mvm(const Vector &x, const Matrix &w) {
  if (x.size() != w.rows) {
    throw ShapeError("ideal_mvm: input length " + std::to_string(x.size()) +
                     " does not match matrix rows " + std::to_string(w.rows));
  }
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw DomainError("ideal_mvm: non-finite input entry");
    }
  }
  for (double v : w.data) {
    if (!std::isfinite(v)) {
      throw DomainError("ideal_mvm: non-finite weight entry");
    }
  }
  Vector y(w.cols, 0.0);
  for (std::size_t m = 0; m < w.rows; ++m) {
    const double xm = x[m];
    const double *row = w.row(m);
    for (std::size_t n = 0; n < w.cols; ++n) {
      y[n] += xm * row[n];
    }
  }
  return y;
}

} // namespace aimc
