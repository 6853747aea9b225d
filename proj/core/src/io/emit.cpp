#include "bohm/io/emit.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <fstream>
#include <system_error>

#include "bohm/error.hpp"

namespace bohm::io {

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw Error("cannot format a floating-point value");
  return std::string(buf.data(), end);
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) text_.push_back(',');
    text_ += columns_[i];
  }
  text_.push_back('\n');
}

void CsvTable::add_row(std::initializer_list<double> values) {
  if (values.size() != columns_.size()) throw ShapeError("CSV row width does not match the header");
  bool first = true;
  for (double v : values) {
    if (!first) text_.push_back(',');
    first = false;
    text_ += format_double(v);
  }
  text_.push_back('\n');
  ++rows_;
}

void CsvTable::add_row(std::size_t id, std::initializer_list<double> values) {
  if (values.size() + 1 != columns_.size()) throw ShapeError("CSV row width does not match the header");
  text_ += std::to_string(id);
  for (double v : values) {
    text_.push_back(',');
    text_ += format_double(v);
  }
  text_.push_back('\n');
  ++rows_;
}

WrittenFile write_file(const std::filesystem::path& dir, const std::string& name, std::string_view data,
                       std::size_t rows) {
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("write failed for " + path.string());
  return WrittenFile{name, rows, sha256_hex(data), data.size()};
}

}  // namespace bohm::io
