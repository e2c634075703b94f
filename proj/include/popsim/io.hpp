#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "popsim/errors.hpp"

namespace popsim {

// One output cell: integers exact, reals printed with 6 decimals, absent
// values empty (CSV) or null (JSON).
using Cell = std::variant<std::monostate, std::int64_t, std::uint64_t, double, bool,
                          std::string>;

struct Field {
    std::string name;
    Cell value;
};

using Row = std::vector<Field>;

enum class OutputFormat { csv, json };

inline OutputFormat format_from_name(std::string_view name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    throw InvalidArgumentError("unknown output format: " + std::string(name));
}

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline std::string cell_to_csv(const Cell& c) {
    struct Visitor {
        std::string operator()(std::monostate) const { return ""; }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(std::uint64_t v) const { return std::to_string(v); }
        std::string operator()(double v) const { return format_double(v); }
        std::string operator()(bool v) const { return v ? "true" : "false"; }
        std::string operator()(const std::string& v) const { return v; }
    };
    return std::visit(Visitor{}, c);
}

// RFC 4180: quote fields containing commas, quotes or line breaks.
inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += "\"\"";
        else out += ch;
    }
    out += "\"";
    return out;
}

inline nlohmann::json cell_to_json(const Cell& c) {
    struct Visitor {
        nlohmann::json operator()(std::monostate) const { return nullptr; }
        nlohmann::json operator()(std::int64_t v) const { return v; }
        nlohmann::json operator()(std::uint64_t v) const { return v; }
        nlohmann::json operator()(double v) const { return v; }
        nlohmann::json operator()(bool v) const { return v; }
        nlohmann::json operator()(const std::string& v) const { return v; }
    };
    return std::visit(Visitor{}, c);
}

inline void check_schema(const std::vector<Row>& rows) {
    if (rows.empty()) return;
    for (const Row& row : rows) {
        if (row.size() != rows.front().size())
            throw InvalidArgumentError("mixed-schema rows");
        for (std::size_t i = 0; i < row.size(); ++i)
            if (row[i].name != rows.front()[i].name)
                throw InvalidArgumentError("mixed-schema rows");
    }
}

} // namespace detail

// Header comes from `header` when rows are empty, else from the first row.
inline std::string rows_to_csv(const std::vector<Row>& rows,
                               const std::vector<std::string>& header = {}) {
    detail::check_schema(rows);
    std::string out;
    const auto write_header = [&](const auto& names, auto&& name_of) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i > 0) out += ",";
            out += detail::csv_escape(name_of(names[i]));
        }
        out += "\n";
    };
    if (!rows.empty())
        write_header(rows.front(), [](const Field& f) { return f.name; });
    else
        write_header(header, [](const std::string& s) { return s; });
    for (const Row& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) out += ",";
            out += detail::csv_escape(detail::cell_to_csv(row[i].value));
        }
        out += "\n";
    }
    return out;
}

inline std::string rows_to_json(const std::vector<Row>& rows) {
    detail::check_schema(rows);
    nlohmann::json arr = nlohmann::json::array();
    for (const Row& row : rows) {
        nlohmann::json obj = nlohmann::json::object();
        for (const Field& f : row) obj[f.name] = detail::cell_to_json(f.value);
        arr.push_back(std::move(obj));
    }
    return arr.dump(2) + "\n";
}

inline void write_text(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

inline void write_rows(const std::vector<Row>& rows, OutputFormat format,
                       const std::string& path, const std::vector<std::string>& header = {}) {
    const std::string text =
        format == OutputFormat::csv ? rows_to_csv(rows, header) : rows_to_json(rows);
    write_text(text, path);
}

} // namespace popsim
