#include "cosci/csv_io.hpp"

#include "cosci/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <string_view>

namespace cosci {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::string location(std::size_t line, std::size_t field) {
    return "row " + std::to_string(line) + ", column " + std::to_string(field);
}

double parse_cell(std::string_view cell, std::size_t line, std::size_t field) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size()) {
        throw InputError("non-numeric cell '" + std::string(cell) + "' at " + location(line, field));
    }
    if (!std::isfinite(value)) {
        throw InputError("non-finite cell '" + std::string(cell) + "' at " + location(line, field));
    }
    return value;
}

template <typename Fn>
void split_fields(std::string_view line, Fn&& fn) {
    std::size_t field = 0;
    while (true) {
        const std::size_t comma = line.find(',');
        fn(field, line.substr(0, comma));
        ++field;
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
    }
}

}  // namespace

DatasetMatrix ingest_matrix(const std::string& path, bool has_header, bool transpose) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return ingest_matrix(in, has_header, transpose);
}

DatasetMatrix ingest_matrix(std::istream& in, bool has_header, bool transpose) {
    DatasetMatrix m;
    std::vector<std::string> header;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool seen_data = false;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (view.empty()) continue;
        if (has_header && header.empty() && !seen_data) {
            split_fields(view, [&](std::size_t, std::string_view cell) { header.emplace_back(trim(cell)); });
            continue;
        }

        std::size_t fields = 0;
        if (transpose) {
            std::vector<double> feature;
            split_fields(view, [&](std::size_t f, std::string_view cell) { feature.push_back(parse_cell(cell, line_no, f + 1)); });
            fields = feature.size();
            m.columns.push_back(std::move(feature));
        } else {
            split_fields(view, [&](std::size_t f, std::string_view cell) {
                const double v = parse_cell(cell, line_no, f + 1);
                if (!seen_data) {
                    m.columns.emplace_back();
                } else if (f >= width) {
                    throw InputError("ragged row " + std::to_string(line_no) + ": more than " +
                                     std::to_string(width) + " fields");
                }
                m.columns[f].push_back(v);
                fields = f + 1;
            });
        }
        if (!seen_data) {
            width = fields;
            seen_data = true;
        } else if (fields != width) {
            throw InputError("ragged row " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                             " fields, found " + std::to_string(fields));
        }
    }
    if (!seen_data) throw InputError("input holds no data rows");

    m.n = transpose ? width : m.columns.front().size();
    if (!transpose && has_header) {
        if (header.size() != m.columns.size()) {
            throw InputError("header has " + std::to_string(header.size()) + " names for " +
                             std::to_string(m.columns.size()) + " columns");
        }
        m.names = std::move(header);
    } else {
        for (std::size_t j = 0; j < m.columns.size(); ++j) m.names.push_back("f" + std::to_string(j + 1));
    }
    return m;
}

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

void write_matrix_csv(const std::string& path, const DatasetMatrix& matrix) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    write_matrix_csv(out, matrix);
    if (!out) throw InputError("write to '" + path + "' failed");
}

void write_matrix_csv(std::ostream& out, const DatasetMatrix& matrix) {
    for (std::size_t j = 0; j < matrix.p(); ++j) out << (j ? "," : "") << matrix.names.at(j);
    out << '\n';
    std::string row;
    for (std::size_t i = 0; i < matrix.n; ++i) {
        row.clear();
        for (std::size_t j = 0; j < matrix.p(); ++j) {
            if (j) row += ',';
            row += format_double(matrix.columns[j][i]);
        }
        out << row << '\n';
    }
}

}  // namespace cosci
