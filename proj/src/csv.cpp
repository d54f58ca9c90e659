#include "csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace structest {

namespace {

// One CSV record; supports quoted fields with doubled-quote escapes.
std::vector<std::string> split_record(const std::string& line, std::size_t row) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted)
    throw_error(errc::parse_error, "row " + std::to_string(row) + ": unterminated quote");
  fields.push_back(std::move(field));
  return fields;
}

bool is_missing_token(const std::string& s) { return s.empty() || s == "NA"; }

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw_error(errc::missing_column, "column '" + name + "' not found in header");
  return static_cast<std::size_t>(it - header.begin());
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

IndicatorDataset read_csv(std::istream& in, const CsvReadOptions& options) {
  if (options.indicators.size() < 1)
    throw_error(errc::invalid_argument, "need at least one indicator column");
  if (options.group.empty())
    throw_error(errc::invalid_argument, "need a group column");

  std::string line;
  if (!std::getline(in, line))
    throw_error(errc::parse_error, "input has no header row");
  const auto header = split_record(strip_cr(line), 0);

  std::vector<std::size_t> indicator_cols;
  indicator_cols.reserve(options.indicators.size());
  for (const auto& name : options.indicators)
    indicator_cols.push_back(column_index(header, name));
  const std::size_t group_col = column_index(header, options.group);
  std::vector<std::size_t> strata_cols;
  for (const auto& name : options.strata) strata_cols.push_back(column_index(header, name));

  std::vector<double> values;
  std::vector<std::string> groups;
  std::vector<std::string> strata;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    ++row;
    if (line.empty()) continue;
    const auto fields = split_record(line, row);
    if (fields.size() != header.size())
      throw_error(errc::parse_error, "row " + std::to_string(row) + ": expected " +
                                         std::to_string(header.size()) + " fields, got " +
                                         std::to_string(fields.size()));
    for (std::size_t j = 0; j < indicator_cols.size(); ++j) {
      const std::string& cell = fields[indicator_cols[j]];
      if (is_missing_token(cell)) {
        values.push_back(missing_value());
        continue;
      }
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw_error(errc::non_numeric_indicator,
                    "row " + std::to_string(row) + ", column '" + options.indicators[j] +
                        "': '" + cell + "' is not a number");
      values.push_back(v);
    }
    const std::string& g = fields[group_col];
    if (is_missing_token(g))
      throw_error(errc::parse_error,
                  "row " + std::to_string(row) + ": missing group value");
    groups.push_back(g);
    if (!strata_cols.empty()) {
      std::string label;
      for (std::size_t j = 0; j < strata_cols.size(); ++j) {
        const std::string& cell = fields[strata_cols[j]];
        if (is_missing_token(cell))
          throw_error(errc::parse_error,
                      "row " + std::to_string(row) + ": missing stratum value");
        if (j > 0) label += '|';
        label += cell;
      }
      strata.push_back(std::move(label));
    }
  }
  if (groups.empty()) throw_error(errc::parse_error, "input has no data rows");

  return IndicatorDataset::from_labels(std::move(values), groups.size(),
                                       options.indicators.size(), groups, strata,
                                       options.indicators);
}

IndicatorDataset read_csv_file(const std::string& path, const CsvReadOptions& options) {
  std::ifstream in(path);
  if (!in) throw_error(errc::io_error, "cannot open '" + path + "' for reading");
  return read_csv(in, options);
}

void write_csv(const IndicatorDataset& data, std::ostream& out) {
  const std::size_t n = data.num_indicators();
  for (std::size_t i = 0; i < n; ++i) out << data.indicator_names()[i] << ',';
  out << 'z';
  if (data.has_strata()) out << ",stratum";
  out << '\n';
  for (std::size_t k = 0; k < data.num_subjects(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!data.missing(k, i)) out << format_double(data.value(k, i));
      out << ',';
    }
    out << data.group_names()[static_cast<std::size_t>(data.group_of(k))];
    if (data.has_strata())
      out << ',' << data.stratum_names()[static_cast<std::size_t>(data.stratum_of(k))];
    out << '\n';
  }
}

void write_csv_file(const IndicatorDataset& data, const std::string& path) {
  std::ostringstream out;
  write_csv(data, out);
  write_file_atomic(path, out.str());
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_error(errc::io_error, "cannot open '" + tmp + "' for writing");
    out << content;
    if (!out.flush()) throw_error(errc::io_error, "write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw_error(errc::io_error, "cannot rename '" + tmp + "' to '" + path + "'");
  }
}

}  // namespace structest
