/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "aimc/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <system_error>

#include "aimc/common.hpp"

namespace aimc {

std::string format_double(double value) {
  if (!std::isfinite(value)) {
    throw NumericalError("refusing to serialize a non-finite value");
  }
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc()) {
    throw NumericalError("double formatting failed");
  }
  return std::string(buf, res.ptr);
}

std::string format_count(std::size_t value) {
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_csv(const CsvDocument &doc, std::ostream &out) {
  for (const std::string &line : doc.header_lines) {
    out << "# " << line << "\n";
  }
  for (std::size_t i = 0; i < doc.columns.size(); ++i) {
    if (i > 0) {
      out << ",";
    }
    out << doc.columns[i];
  }
  out << "\n";
  for (const auto &row : doc.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) {
        out << ",";
      }
      out << row[i];
    }
    out << "\n";
  }
}

void write_csv_file(const CsvDocument &doc, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  write_csv(doc, out);
  if (!out) {
    throw IoError("write failed for " + path);
  }
}

} // namespace aimc
