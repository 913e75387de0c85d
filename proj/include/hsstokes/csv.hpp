#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hsstokes::csv {

inline constexpr const char* kVersion = "hsstokes 0.1.0";

// Shortest decimal that round-trips to the same double; "nan", "inf", "-inf"
// for non-finite values.
std::string format_double(double v);

// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& text);
std::string hex64(std::uint64_t v);

// One CSV artifact: '#' header lines (version stamp, config hash, notes), a
// column line and rows. Fields containing ',', '"' or newlines are quoted.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  // Throws std::invalid_argument when the row width differs from the columns.
  void add_row(std::vector<std::string> row);
  void add_note(std::string note) { notes_.push_back(std::move(note)); }

  // Column line and rows only.
  std::string body() const;
  void write(std::ostream& os, std::uint64_t config_hash) const;
  void write_file(const std::string& path, std::uint64_t config_hash) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::string> notes_;
};

// Body of a file written by Table::write: everything after the '#' header.
std::string read_body(const std::string& path);

}  // namespace hsstokes::csv
