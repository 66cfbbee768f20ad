#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the CSV readers and writers.
namespace panoclass::text {

// Shortest representation that round-trips through parse_double.
std::string format_double(double v);

double parse_double(std::string_view s);
std::int64_t parse_int(std::string_view s);
std::uint64_t parse_uint(std::string_view s);

std::vector<std::string_view> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string join(const std::vector<std::string>& parts, char sep = ',');

// Iterates lines of a buffer, stripping '\r'. Lines starting with '#' are
// provenance comments and are skipped by every reader in the library.
class LineReader {
 public:
  explicit LineReader(std::string_view data) : data_(data) {}
  // Returns false at end of input. `offset` receives the line's byte offset.
  bool next(std::string_view& line, std::size_t& offset);
  std::size_t line_number() const { return line_no_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace panoclass::text
