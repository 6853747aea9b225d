#pragma once

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace bohm::io {

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

std::string sha256_hex(std::string_view data);

/// Comma-separated table built in memory; rows exclude the header.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  void add_row(std::initializer_list<double> values);
  /// First column integral (ids), rest floating point.
  void add_row(std::size_t id, std::initializer_list<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t columns() const noexcept { return columns_.size(); }
  const std::string& text() const noexcept { return text_; }

 private:
  std::vector<std::string> columns_;
  std::string text_;
  std::size_t rows_ = 0;
};

struct WrittenFile {
  std::string name;  // relative to the run directory
  std::size_t rows = 0;
  std::string sha256;
  std::size_t bytes = 0;
};

/// Writes `data` to dir/name and returns its manifest entry.
WrittenFile write_file(const std::filesystem::path& dir, const std::string& name, std::string_view data,
                       std::size_t rows);

}  // namespace bohm::io
