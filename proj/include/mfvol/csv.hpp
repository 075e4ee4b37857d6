#pragma once

// Minimal comma-separated reader/writer for the flat, unquoted schemas this
// library exchanges. Row numbers are 1-based with the header as row 1.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "date.hpp"
#include "errors.hpp"

namespace mfvol::csv {

struct Table {
    std::string path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_numbers;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw Error(Errc::load, "market_data", path + ": missing column '" + std::string(name) + "'");
    }
};

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline Table read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::load, "market_data", "cannot open '" + path + "'");
    Table t;
    t.path = path;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::string_view view(line);
        if (number == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
        if (trim(view).empty()) continue;
        if (t.header.empty()) {
            t.header = split(view);
            continue;
        }
        auto fields = split(view);
        if (fields.size() != t.header.size()) {
            throw Error(Errc::load, "market_data",
                        path + " row " + std::to_string(number) + ": expected " +
                            std::to_string(t.header.size()) + " fields, got " + std::to_string(fields.size()));
        }
        t.rows.push_back(std::move(fields));
        t.row_numbers.push_back(number);
    }
    if (t.header.empty()) throw Error(Errc::load, "market_data", path + ": missing header row");
    return t;
}

inline std::string where(const Table& t, std::size_t i) {
    return t.path + " row " + std::to_string(t.row_numbers[i]);
}

inline double to_double(const Table& t, std::size_t i, std::string_view field) {
    double v = 0.0;
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw Error(Errc::load, "market_data", where(t, i) + ": unparseable number '" + std::string(field) + "'");
    }
    return v;
}

inline bool to_flag(const Table& t, std::size_t i, std::string_view field) {
    if (field == "0") return false;
    if (field == "1") return true;
    throw Error(Errc::load, "market_data", where(t, i) + ": flag must be 0 or 1, got '" + std::string(field) + "'");
}

inline Date to_date(const Table& t, std::size_t i, std::string_view field) {
    try {
        return Date::parse(field);
    } catch (const Error&) {
        throw Error(Errc::load, "market_data", where(t, i) + ": unparseable date '" + std::string(field) + "'");
    }
}

/// Shortest decimal form that reads back to the same double.
inline std::string format(double v) {
    char buf[32];
    const bool whole = std::abs(v) < 1e15 && v == std::trunc(v);
    auto [ptr, ec] = whole ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed)
                           : std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

class Writer {
public:
    Writer(const std::string& path, const std::vector<std::string>& header) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw Error(Errc::io, "report", "cannot write '" + path + "'");
        row(header);
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }

private:
    std::string path_;
    std::ofstream out_;
};

}  // namespace mfvol::csv
