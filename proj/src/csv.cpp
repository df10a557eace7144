//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "oodscore/csv.h"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "oodscore/errors.h"

namespace oodscore {
namespace {
std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty()
         && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}
}  // namespace

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name)
      return i;
  }
  return std::nullopt;
}

std::size_t CsvTable::require_column(std::string_view name,
                                     std::string_view source) const {
  auto idx = column(name);
  if (!idx) {
    throw ValidationError(std::string(source) + ": missing required column '"
                          + std::string(name) + "'");
  }
  return *idx;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted)
    throw ValidationError("unterminated quoted field");
  fields.emplace_back(trim(cur));
  return fields;
}

CsvTable read_csv(std::istream &is, std::string_view source) {
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (lineno == 1 && line.size() >= 3
        && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
      line.erase(0, 3);
    if (trim(line).empty())
      continue;

    std::vector<std::string> fields;
    try {
      fields = split_csv_line(line);
    } catch (const ValidationError &e) {
      throw ValidationError(std::string(source) + ":" + std::to_string(lineno)
                            + ": " + e.what());
    }

    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ValidationError(std::string(source) + ":" + std::to_string(lineno)
                            + ": expected " + std::to_string(table.header.size())
                            + " fields, got " + std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(lineno);
  }
  return table;
}

CsvTable read_csv_file(const std::filesystem::path &path) {
  std::ifstream ifs(path);
  if (!ifs)
    throw ValidationError("cannot open " + path.string());
  return read_csv(ifs, path.string());
}

std::optional<double> parse_double(std::string_view field) {
  field = trim(field);
  if (field.empty())
    return std::nullopt;
  if (field.front() == '+')
    field.remove_prefix(1);
  double value = 0;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    return std::nullopt;
  return value;
}

std::optional<long long> parse_int(std::string_view field) {
  field = trim(field);
  long long value = 0;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
    return std::nullopt;
  return value;
}

std::string format_double(double value) {
  if (std::isnan(value))
    return "nan";
  std::array<char, 32> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos)
    return std::string(field);
  std::string out = "\"";
  for (char c: field) {
    if (c == '"')
      out += "\"\"";
    else
      out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace oodscore
