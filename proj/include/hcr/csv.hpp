#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace hcr::csv {

/// Parsed CSV content. The header row is kept separate; `line_numbers[i]`
/// is the 1-based line on which data row i starts (the header is line 1).
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
};

/// Strict reader: UTF-8, comma separated, RFC 4180 quoting, header row
/// mandatory. Quoted fields may contain commas, quotes ("") and newlines.
/// Throws std::runtime_error on malformed quoting or a missing header.
Table read(std::istream& in);

/// Same, from a file path. Throws std::runtime_error if the file cannot
/// be opened.
Table read_file(const std::string& path);

/// Quotes a field if it contains a comma, quote or newline.
std::string escape(const std::string& field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace hcr::csv
