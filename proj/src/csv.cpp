#include "hsstokes/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hsstokes::csv {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

namespace {

std::string quote(const std::string& f) {
  if (f.find_first_of(",\"\n\r") == std::string::npos) return f;
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void put_line(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << quote(fields[i]);
  os << '\n';
}

}  // namespace

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns_.size())
    throw std::invalid_argument("csv row has " + std::to_string(row.size()) + " fields, expected " +
                                std::to_string(columns_.size()));
  rows_.push_back(std::move(row));
}

std::string Table::body() const {
  std::ostringstream os;
  put_line(os, columns_);
  for (const auto& r : rows_) put_line(os, r);
  return os.str();
}

void Table::write(std::ostream& os, std::uint64_t config_hash) const {
  os << "# " << kVersion << '\n' << "# config_hash=" << hex64(config_hash) << '\n';
  for (const auto& n : notes_) os << "# " << n << '\n';
  os << body();
}

void Table::write_file(const std::string& path, std::uint64_t config_hash) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  write(f, config_hash);
  if (!f) throw std::runtime_error("write to " + path + " failed");
}

std::string read_body(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string line, out;
  bool header = true;
  while (std::getline(f, line)) {
    if (header && !line.empty() && line[0] == '#') continue;
    header = false;
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace hsstokes::csv
