#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace asag::csv {

using Row = std::vector<std::string>;

// Parses RFC-4180-style CSV: comma separators, optional quoting with "" escapes,
// LF or CRLF line endings, optional UTF-8 BOM. Throws DataError on unbalanced quotes.
std::vector<Row> parse(std::string_view content);

std::vector<Row> read_file(const std::string& path);

// Quotes a field when it contains a comma, quote, or newline.
std::string escape_field(std::string_view field);

std::string format_row(const Row& row);

void write_file(const std::string& path, const std::vector<Row>& rows);

}  // namespace asag::csv
