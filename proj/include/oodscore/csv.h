//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef OODSCORE_CSV_H_
#define OODSCORE_CSV_H_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oodscore {

// Minimal RFC 4180 style table: a header row plus data rows. Quoted fields
// may contain commas and doubled quotes; embedded newlines are not supported.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based line number of each row in the source, for error messages.
  std::vector<std::size_t> line_numbers;

  // Index of a header column, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name,
                             std::string_view source) const;
};

std::vector<std::string> split_csv_line(std::string_view line);

CsvTable read_csv(std::istream &is, std::string_view source = "<stream>");
CsvTable read_csv_file(const std::filesystem::path &path);

// Strict number parsing: the whole (trimmed) field must be consumed.
std::optional<double> parse_double(std::string_view field);
std::optional<long long> parse_int(std::string_view field);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

std::string csv_escape(std::string_view field);

}  // namespace oodscore

#endif  // OODSCORE_CSV_H_
