/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace aimc {

/* Shortest round-trip decimal form, locale independent. Throws
 * NumericalError on non-finite values so artifacts never carry them. */
std::string format_double(double value);
std::string format_count(std::size_t value);

/* A plain CSV artifact: '#'-prefixed header lines naming the run that
 * produced it, one column-name line, then data rows. Rows are written
 * verbatim, so equal inputs produce byte-identical files. */
struct CsvDocument {
  std::vector<std::string> header_lines;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const CsvDocument &doc, std::ostream &out);
/* Throws IoError when the path cannot be opened for writing. */
void write_csv_file(const CsvDocument &doc, const std::string &path);

} // namespace aimc
