#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scout {

// Error taxonomy. The CLI maps these onto exit codes (usage 1, data 2,
// stage failure 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input. `line` is 1-based when the input is line-oriented, 0 otherwise.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a domain invariant.
class DataError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;

std::string format_rfc3339(Timestamp t);
Timestamp parse_rfc3339(std::string_view text);
Timestamp from_epoch(std::int64_t seconds);
std::int64_t to_epoch(Timestamp t);

// "YYYY-MM-DD" <-> day number since the epoch.
std::int64_t parse_date(std::string_view text);
std::string format_date(std::int64_t day);
std::int64_t day_of(Timestamp t);

// Parses "30s", "10m", "168h", "2d" or a bare number of seconds.
Seconds parse_duration(std::string_view text);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
bool iequals(std::string_view a, std::string_view b);
bool contains_icase(std::string_view haystack, std::string_view needle);
bool is_hex_digit(char c);
bool parse_bool(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

std::string sha256_hex(std::string_view bytes);

// Minimal RFC 4180 CSV. Rows keep the physical line number they start on.
struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

class CsvTable {
 public:
  static CsvTable parse(std::string_view text);
  static CsvTable load(const std::filesystem::path& path);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<CsvRow>& rows() const { return rows_; }

  // Index of a header column; throws ParseError naming the column if absent.
  std::size_t column(std::string_view name) const;
  std::optional<std::size_t> find_column(std::string_view name) const;

  // Throws ParseError unless the header equals `expected` exactly.
  void require_header(const std::vector<std::string>& expected) const;

 private:
  std::vector<std::string> header_;
  std::vector<CsvRow> rows_;
};

std::string csv_escape(std::string_view field);
std::string csv_line(const std::vector<std::string>& fields);

// Shortest round-trip decimal rendering of a double.
std::string format_double(double v);

}  // namespace scout
