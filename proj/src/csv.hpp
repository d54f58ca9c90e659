#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace structest {

// Wide-format ingestion: one row per subject, indicator and group columns
// selected by header name. Missing entries are empty fields or the literal
// NA. Multiple stratum columns combine into one cartesian label.
struct CsvReadOptions {
  std::vector<std::string> indicators;
  std::string group;
  std::vector<std::string> strata;
};

IndicatorDataset read_csv(std::istream& in, const CsvReadOptions& options);
IndicatorDataset read_csv_file(const std::string& path, const CsvReadOptions& options);

// Writes indicators, the group column (z) and any stratum column (stratum)
// in shortest round-trip decimal form; missing values become empty fields.
void write_csv(const IndicatorDataset& data, std::ostream& out);
void write_csv_file(const IndicatorDataset& data, const std::string& path);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

// Atomic replace: write to a sibling temp file, then rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace structest
