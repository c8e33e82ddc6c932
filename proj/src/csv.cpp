#include "readability/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <system_error>

#include "readability/error.hpp"

namespace readability::csv {

std::vector<Record> read(std::istream& in) {
  std::vector<Record> records;
  std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (content.size() >= 3 && content.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    content.erase(0, 3);
  }

  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = content.size();
  while (i < n) {
    Record record;
    record.line = line;
    std::string field;
    bool row_done = false;
    while (!row_done) {
      field.clear();
      if (i < n && content[i] == '"') {
        ++i;
        bool closed = false;
        while (i < n) {
          const char c = content[i];
          if (c == '"') {
            if (i + 1 < n && content[i + 1] == '"') {
              field.push_back('"');
              i += 2;
              continue;
            }
            ++i;
            closed = true;
            break;
          }
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
        if (!closed) {
          throw FormatError("line " + std::to_string(record.line) + ": unterminated quoted field");
        }
        if (i < n && content[i] == '\r') ++i;
        if (i < n && content[i] != ',' && content[i] != '\n') {
          throw FormatError("line " + std::to_string(line) + ": unexpected character after closing quote");
        }
      } else {
        while (i < n && content[i] != ',' && content[i] != '\n') {
          field.push_back(content[i]);
          ++i;
        }
        if (!field.empty() && field.back() == '\r') field.pop_back();
      }
      record.fields.push_back(field);
      if (i >= n) {
        row_done = true;
      } else if (content[i] == ',') {
        ++i;
      } else {
        ++i;
        ++line;
        row_done = true;
      }
    }
    // Blank lines carry no record.
    if (record.fields.size() == 1 && record.fields.front().empty()) continue;
    records.push_back(std::move(record));
  }
  return records;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  const auto result = std::from_chars(first, last, value);
  if (text.empty() || result.ec != std::errc{} || result.ptr != last || !std::isfinite(value)) {
    throw FormatError(std::string(what) + ": not a finite number: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace readability::csv
