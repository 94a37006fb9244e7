#ifndef BFL_IO_HPP
#define BFL_IO_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "dataset.hpp"
#include "errors.hpp"

namespace bfl::io {

// ---------------------------------------------------------------------------
// Tokenizing and number formatting

/// Split on commas when the line has any, otherwise on whitespace.
inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    const bool comma = line.find(',') != std::string_view::npos;
    auto trim = [](std::string_view s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string_view::npos) return std::string_view{};
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    };
    if (comma) {
        std::size_t start = 0;
        for (;;) {
            const auto pos = line.find(',', start);
            out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
    } else {
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            if (i >= line.size()) break;
            std::size_t j = i;
            while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
            out.push_back(line.substr(i, j - i));
            i = j;
        }
    }
    return out;
}

inline bool parse_double(std::string_view token, double& value) {
    if (token.empty()) return false;
    if (token.front() == '+') token.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    return ec == std::errc{} && ptr == token.data() + token.size();
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

inline bool is_blank_or_comment(std::string_view line) {
    const auto b = line.find_first_not_of(" \t\r");
    return b == std::string_view::npos || line[b] == '#';
}

/// Write through a temporary file and rename it into place.
inline void atomic_write(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---------------------------------------------------------------------------
// UCR time-series files: label in the first column, the series after it

struct UcrRecord {
    long label = 0;
    std::vector<double> series;
};

using LabelMap = std::map<long, double>;

/// Default mapping: -1 -> 0, 1 -> 1.
inline LabelMap default_label_map() { return {{-1, 0.0}, {1, 1.0}}; }

/// Parses "from:to,from:to", e.g. "-1:1,1:0".
inline LabelMap parse_label_map(std::string_view text) {
    LabelMap map;
    for (auto item : split_fields(text)) {
        const auto colon = item.find(':');
        double from = 0, to = 0;
        if (colon == std::string_view::npos || !parse_double(item.substr(0, colon), from) ||
            !parse_double(item.substr(colon + 1), to) || (to != 0.0 && to != 1.0) || from != std::round(from)) {
            throw parse_error("bad label map entry '" + std::string(item) + "' (expected <int>:<0|1>)");
        }
        map[static_cast<long>(from)] = to;
    }
    if (map.empty()) throw parse_error("empty label map");
    return map;
}

inline std::vector<UcrRecord> read_ucr_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path.string());
    std::vector<UcrRecord> records;
    std::string line;
    long line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank_or_comment(line)) continue;
        const auto fields = split_fields(line);
        const auto where = path.string() + ":" + std::to_string(line_no);
        if (fields.size() < 2) throw parse_error(where + ": need a label and at least one value");
        UcrRecord rec;
        double label = 0;
        if (!parse_double(fields[0], label) || label != std::round(label)) {
            throw parse_error(where + ": label '" + std::string(fields[0]) + "' is not an integer");
        }
        rec.label = static_cast<long>(label);
        rec.series.reserve(fields.size() - 1);
        for (std::size_t k = 1; k < fields.size(); ++k) {
            double v = 0;
            if (!parse_double(fields[k], v)) {
                throw parse_error(where + ": field " + std::to_string(k + 1) + " '" + std::string(fields[k]) +
                                  "' is not a number");
            }
            rec.series.push_back(v);
        }
        if (width == 0) width = rec.series.size();
        if (rec.series.size() != width) {
            throw parse_error(where + ": row has " + std::to_string(rec.series.size()) + " values, expected " +
                              std::to_string(width));
        }
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw parse_error(path.string() + ": no data rows");
    return records;
}

inline Dataset load_ucr(const std::filesystem::path& path, const LabelMap& label_map = default_label_map()) {
    const auto records = read_ucr_records(path);
    const auto n = static_cast<Eigen::Index>(records.size());
    const auto p = static_cast<Eigen::Index>(records.front().series.size());
    Dataset d{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& rec = records[static_cast<std::size_t>(i)];
        const auto it = label_map.find(rec.label);
        if (it == label_map.end()) {
            throw parse_error(path.string() + ": row " + std::to_string(i + 1) + " has unmapped label " +
                              std::to_string(rec.label));
        }
        d.y[i] = it->second;
        for (Eigen::Index j = 0; j < p; ++j) d.X(i, j) = rec.series[static_cast<std::size_t>(j)];
    }
    return d;
}

// ---------------------------------------------------------------------------
// Generic delimited matrices with a response column

struct Standardization {
    Eigen::VectorXd center;
    Eigen::VectorXd scale;

    bool empty() const { return center.size() == 0; }
};

struct MatrixLoad {
    Dataset data;
    std::vector<std::string> feature_names;  // empty when the file has no header row
    Standardization standardization;         // empty unless requested
};

/// Column-wise mean 0, sample sd 1. Throws on a zero-variance column.
inline Standardization standardize_columns(Eigen::MatrixXd& X) {
    Standardization s;
    s.center = X.colwise().mean().transpose();
    s.scale.resize(X.cols());
    const double denom = std::max<double>(static_cast<double>(X.rows()) - 1.0, 1.0);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        X.col(j).array() -= s.center[j];
        const double sd = std::sqrt(X.col(j).squaredNorm() / denom);
        if (!(sd > 0.0)) throw domain_error("column " + std::to_string(j + 1) + " has zero variance; cannot standardize");
        s.scale[j] = sd;
        X.col(j) /= sd;
    }
    return s;
}

inline void apply_standardization(Eigen::MatrixXd& X, const Standardization& s) {
    if (s.empty()) return;
    if (s.center.size() != X.cols()) throw dimension_error("standardization and feature widths differ");
    for (Eigen::Index j = 0; j < X.cols(); ++j) X.col(j) = (X.col(j).array() - s.center[j]) / s.scale[j];
}

/**
 * Load a delimited numeric file. response_col is a 0-based column index, or
 * negative to count from the end (-1 = last). A first row with any
 * non-numeric field is taken as a header. Responses must be 0/1.
 */
inline MatrixLoad load_matrix(const std::filesystem::path& path, int response_col = -1, bool standardize = false) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::vector<std::string> header;
    std::string line;
    long line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank_or_comment(line)) continue;
        const auto fields = split_fields(line);
        const auto where = path.string() + ":" + std::to_string(line_no);
        std::vector<double> row;
        bool numeric = true;
        for (auto f : fields) {
            double v = 0;
            if (!parse_double(f, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (rows.empty() && header.empty()) {
                for (auto f : fields) header.emplace_back(f);
                width = header.size();
                continue;
            }
            throw parse_error(where + ": non-numeric field");
        }
        if (width == 0) width = row.size();
        if (row.size() != width) {
            throw parse_error(where + ": row has " + std::to_string(row.size()) + " fields, expected " +
                              std::to_string(width));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw parse_error(path.string() + ": no data rows");
    if (width < 2) throw dimension_error(path.string() + ": need a response column and at least one feature");
    const int resp = response_col < 0 ? static_cast<int>(width) + response_col : response_col;
    if (resp < 0 || resp >= static_cast<int>(width)) {
        throw dimension_error(path.string() + ": response column " + std::to_string(response_col) + " out of range");
    }

    MatrixLoad out;
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(width - 1);
    out.data.X.resize(n, p);
    out.data.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        Eigen::Index col = 0;
        for (std::size_t k = 0; k < width; ++k) {
            if (static_cast<int>(k) == resp) {
                out.data.y[i] = row[k];
                if (row[k] != 0.0 && row[k] != 1.0) {
                    throw parse_error(path.string() + ": data row " + std::to_string(i + 1) +
                                      " has response " + format_double(row[k]) + " (expected 0 or 1)");
                }
            } else {
                out.data.X(i, col++) = row[k];
            }
        }
    }
    if (!header.empty()) {
        for (std::size_t k = 0; k < header.size(); ++k) {
            if (static_cast<int>(k) != resp) out.feature_names.push_back(header[k]);
        }
    }
    if (standardize) out.standardization = standardize_columns(out.data.X);
    return out;
}

/// Comma-separated x_1..x_p,y with a header row; values written exactly.
inline std::string format_matrix(const Dataset& data) {
    std::ostringstream os;
    for (Eigen::Index j = 0; j < data.p(); ++j) os << "x" << (j + 1) << ',';
    os << "y\n";
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        for (Eigen::Index j = 0; j < data.p(); ++j) os << format_double(data.X(i, j)) << ',';
        os << format_double(data.y[i]) << '\n';
    }
    return os.str();
}

inline void write_matrix(const std::filesystem::path& path, const Dataset& data) {
    atomic_write(path, format_matrix(data));
}

} // namespace bfl::io

#endif
