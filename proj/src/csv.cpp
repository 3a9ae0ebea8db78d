#include "hcr/csv.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hcr::csv {

namespace {

// One record, possibly spanning lines inside quoted fields. Returns false
// on clean EOF before any character of a new record.
bool read_record(std::istream& in, std::vector<std::string>& out,
                 std::size_t& line, std::size_t& record_line) {
    out.clear();
    int c = in.get();
    while (c == '\n') {  // skip blank lines between records
        ++line;
        c = in.get();
    }
    if (c == EOF) return false;
    record_line = line;

    std::string field;
    bool in_quotes = false;
    bool quoted_field = false;
    for (;; c = in.get()) {
        if (c == EOF) {
            if (in_quotes)
                throw std::runtime_error("csv: unterminated quote starting near line " +
                                         std::to_string(record_line));
            out.push_back(std::move(field));
            return true;
        }
        char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
            case '"':
                if (!field.empty())
                    throw std::runtime_error("csv: stray quote in unquoted field, line " +
                                             std::to_string(line));
                in_quotes = true;
                quoted_field = true;
                break;
            case ',':
                out.push_back(std::move(field));
                field.clear();
                quoted_field = false;
                break;
            case '\r':
                break;  // tolerate CRLF
            case '\n':
                ++line;
                out.push_back(std::move(field));
                return true;
            default:
                if (quoted_field)
                    throw std::runtime_error("csv: data after closing quote, line " +
                                             std::to_string(line));
                field.push_back(ch);
        }
    }
}

}  // namespace

Table read(std::istream& in) {
    Table table;
    std::size_t line = 1;
    std::size_t record_line = 1;
    if (!read_record(in, table.header, line, record_line))
        throw std::runtime_error("csv: missing header row");
    std::vector<std::string> row;
    while (read_record(in, row, line, record_line)) {
        table.rows.push_back(row);
        table.line_numbers.push_back(record_line);
    }
    return table;
}

Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return read(in);
}

std::string escape(const std::string& field) {
    bool needs_quotes = field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << escape(fields[i]);
    }
    out << '\n';
}

}  // namespace hcr::csv
