#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "cocite/errors.hpp"

namespace cocite::csv {

// Splits one CSV line in place. The input formats use plain comma-separated
// fields with no quoting; ids may not contain commas or control characters.
inline void split(std::string_view line, char delim, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

inline bool has_control_chars(std::string_view s) {
    for (unsigned char c : s)
        if (c < 0x20 || c == 0x7f) return true;
    return false;
}

inline int parse_int(std::string_view s, std::size_t line_no, const char* what) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw parse_error(std::string("expected integer ") + what + ", got '" + std::string(s) + "'", line_no);
    return value;
}

inline long long parse_int64(std::string_view s, std::size_t line_no, const char* what) {
    long long value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw parse_error(std::string("expected integer ") + what + ", got '" + std::string(s) + "'", line_no);
    return value;
}

// Reads lines, strips CR, verifies the header, and hands each body row to fn
// as split fields. fn receives (fields, 1-based line number).
template <typename Fn>
void for_each_row(std::istream& in, std::string_view expected_header, Fn&& fn) {
    std::string line;
    if (!std::getline(in, line))
        throw parse_error("missing header row", 1);
    if (strip_cr(line) != expected_header)
        throw parse_error("expected header '" + std::string(expected_header) + "', got '" + line + "'", 1);
    const std::size_t ncols = std::count(expected_header.begin(), expected_header.end(), ',') + 1;
    std::vector<std::string_view> fields;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = strip_cr(line);
        if (body.empty()) continue;
        split(body, ',', fields);
        if (fields.size() != ncols)
            throw parse_error("expected " + std::to_string(ncols) + " columns, got " +
                                  std::to_string(fields.size()),
                              line_no);
        fn(fields, line_no);
    }
}

// Shortest decimal form that round-trips; used for all numeric CSV output so
// artifacts are byte-stable.
inline std::string format_double(double v) {
    char buf[64];
    if (v == static_cast<long long>(v) && v > -1e15 && v < 1e15) {
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
        return buf;
    }
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) break;
    }
    return buf;
}

} // namespace cocite::csv
