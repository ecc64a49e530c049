#pragma once

// Minimal RFC 4180 style CSV reading and writing. Every table this project
// exchanges has a fixed header, so readers look columns up by name.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace promises::csv {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Record = std::vector<std::string>;

inline Record parse_line(std::string_view line) {
  Record fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) {
    throw CsvError("unterminated quoted field in line: " + std::string(line));
  }
  fields.push_back(std::move(field));
  return fields;
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string join(const Record& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += quote(fields[i]);
  }
  return out;
}

// A parsed table with a header row. `where(i)` names the source line of data
// row i for diagnostics.
class Table {
 public:
  Table(std::string source, Record header) : source_(std::move(source)), header_(std::move(header)) {}

  static Table read(std::istream& in, std::string source) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<Table> table;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      Record rec = parse_line(line);
      if (!table) {
        table.emplace(source, std::move(rec));
        continue;
      }
      if (rec.size() != table->header_.size()) {
        throw CsvError(source + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(table->header_.size()) + " fields, got " +
                       std::to_string(rec.size()));
      }
      table->rows_.push_back(std::move(rec));
      table->lines_.push_back(line_no);
    }
    if (!table) {
      throw CsvError(source + ": missing header row");
    }
    return std::move(*table);
  }

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
      if (header_[i] == name) return i;
    }
    throw CsvError(source_ + ": missing column '" + std::string(name) + "'");
  }

  bool has_column(std::string_view name) const {
    for (const auto& h : header_) {
      if (h == name) return true;
    }
    return false;
  }

  const std::vector<Record>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  std::string where(std::size_t row) const {
    return source_ + ":" + std::to_string(lines_.at(row));
  }

 private:
  std::string source_;
  Record header_;
  std::vector<Record> rows_;
  std::vector<std::size_t> lines_;
};

inline std::int64_t to_int(std::string_view s, const std::string& where) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw CsvError(where + ": not an integer: '" + std::string(s) + "'");
  }
  return v;
}

inline double to_double(std::string_view s, const std::string& where) {
  std::string tmp(s);
  char* end = nullptr;
  double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size() || !std::isfinite(v)) {
    throw CsvError(where + ": not a finite number: '" + tmp + "'");
  }
  return v;
}

// Shortest representation that round-trips through strtod.
inline std::string format_double(double v) {
  char buf[32];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace promises::csv
