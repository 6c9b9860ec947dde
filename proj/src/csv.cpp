#include "csv.hpp"

#include <stdexcept>

namespace factkb::detail {

std::optional<std::vector<std::string>> CsvReader::next() {
  while (true) {
    if (in_.peek() == std::char_traits<char>::eof()) return std::nullopt;

    record_line_ = line_;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool field_was_quoted = false;
    bool done = false;
    while (!done) {
      const int c = in_.get();
      if (c == std::char_traits<char>::eof()) {
        if (quoted) {
          throw std::runtime_error("unterminated quoted field starting on line " +
                                   std::to_string(record_line_));
        }
        done = true;
        break;
      }
      const char ch = static_cast<char>(c);
      if (quoted) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            quoted = false;
          }
        } else {
          if (ch == '\n') ++line_;
          field.push_back(ch);
        }
        continue;
      }
      if (ch == '"' && field.empty() && !field_was_quoted) {
        quoted = true;
        field_was_quoted = true;
      } else if (ch == sep_) {
        fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
      } else if (ch == '\n') {
        ++line_;
        done = true;
      } else if (ch == '\r' && in_.peek() == '\n') {
        // CRLF: the LF ends the record.
      } else {
        field.push_back(ch);
      }
    }
    fields.push_back(std::move(field));
    if (fields.size() == 1 && fields[0].empty() && !field_was_quoted) continue;
    return fields;
  }
}

}  // namespace factkb::detail
