#pragma once
// Minimal RFC 4180 reader: quoted fields may contain separators, doubled
// quotes and newlines.

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace factkb::detail {

class CsvReader {
 public:
  CsvReader(std::istream& in, char separator) : in_(in), sep_(separator) {}

  // Next record, or nullopt at end of input. Throws std::runtime_error on an
  // unterminated quoted field.
  std::optional<std::vector<std::string>> next();

  // Physical line on which the last returned record started (1-based).
  std::size_t record_line() const { return record_line_; }

 private:
  std::istream& in_;
  char sep_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

}  // namespace factkb::detail
