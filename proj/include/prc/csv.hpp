#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "prc/errors.hpp"

namespace prc {

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline std::optional<double> try_parse_double(const std::string& field) {
    if (field.empty()) return std::nullopt;
    const char* begin = field.data();
    const char* end = begin + field.size();
    // Skip surrounding spaces so " 1.5" parses like "1.5".
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
    if (begin == end) return std::nullopt;
    std::string trimmed(begin, end);
    if (trimmed == "nan" || trimmed == "NaN" || trimmed == "NA")
        return std::numeric_limits<double>::quiet_NaN();
    if (trimmed == "inf" || trimmed == "Inf") return std::numeric_limits<double>::infinity();
    if (trimmed == "-inf" || trimmed == "-Inf") return -std::numeric_limits<double>::infinity();
    double value = 0.0;
    auto res = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), value);
    if (res.ec != std::errc() || res.ptr != trimmed.data() + trimmed.size()) return std::nullopt;
    return value;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return static_cast<int>(j);
        return -1;
    }

    int require_column(const std::string& name, const std::string& what) const {
        int j = column(name);
        if (j < 0) throw data_error(what + " is missing required column '" + name + "'");
        return j;
    }
};

namespace detail {

// Splits one logical CSV record; `line` already has the trailing \r removed.
// Quoted fields may contain commas and doubled quotes.
inline bool split_csv_line(const std::string& line, std::vector<std::string>& out) {
    out.clear();
    std::string field;
    bool in_quotes = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return !in_quotes;  // false => record continues on the next physical line
}

}  // namespace detail

inline CsvTable read_csv(std::istream& in, const std::string& what = "csv input") {
    CsvTable table;
    std::string line;
    std::vector<std::string> fields;
    bool have_header = false;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && !have_header) continue;
        // Re-join physical lines while inside a quoted field.
        std::string record = line;
        while (!detail::split_csv_line(record, fields)) {
            std::string next;
            if (!std::getline(in, next)) throw data_error(what + ": unterminated quote at line " + std::to_string(lineno));
            ++lineno;
            if (!next.empty() && next.back() == '\r') next.pop_back();
            record += "\n" + next;
        }
        if (!have_header) {
            table.header = fields;
            have_header = true;
        } else {
            if (fields.size() != table.header.size())
                throw data_error(what + ": line " + std::to_string(lineno) + " has " +
                                 std::to_string(fields.size()) + " fields, expected " +
                                 std::to_string(table.header.size()));
            table.rows.push_back(fields);
        }
    }
    if (!have_header) throw data_error(what + ": empty input, no header row");
    return table;
}

inline CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    return read_csv(in, path);
}

inline std::string csv_escape(const std::string& field) {
    bool needs_quotes = field.find_first_of(",\"\n") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (size_t j = 0; j < fields.size(); ++j) {
        if (j > 0) out << ',';
        out << csv_escape(fields[j]);
    }
    out << '\n';
}

inline void write_csv(std::ostream& out, const CsvTable& table) {
    write_csv_row(out, table.header);
    for (const auto& row : table.rows) write_csv_row(out, row);
}

inline void write_csv_file(const std::string& path, const CsvTable& table) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    write_csv(out, table);
    if (!out) throw io_error("failed while writing '" + path + "'");
}

}  // namespace prc
