#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace readability::csv {

struct Record {
  std::size_t line = 0;  // 1-based line on which the record starts
  std::vector<std::string> fields;
};

/// Comma-separated, optional full-field double quoting ("" escapes a quote
/// inside a quoted field; quoted fields may span lines). Throws FormatError
/// on an unterminated quote or stray characters after a closing quote.
std::vector<Record> read(std::istream& in);

/// Quotes the field when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

/// Strict full-string parse; throws FormatError mentioning `what`.
double parse_double(std::string_view text, std::string_view what);

}  // namespace readability::csv
