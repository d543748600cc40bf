#pragma once

// Plain-text artifacts: CSV tables with 17 significant digits, small CSV
// readers for grid values and (x, y) pairs, and a fixed-order worker pool.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "qtrap/errors.hpp"

namespace qtrap {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string format_double(double x) { return fmt::format("{:.17g}", x); }

/// Column-major table built row by row and rendered as CSV.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(const std::vector<double>& row) {
        if (row.size() != header_.size()) throw std::logic_error("csv: row width does not match header");
        rows_.push_back(row);
    }

    std::size_t rows() const noexcept { return rows_.size(); }

    std::string render() const {
        std::string out;
        for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + header_[i];
        out += '\n';
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out += ',';
                out += format_double(row[i]);
            }
            out += '\n';
        }
        return out;
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    return cells;
}

inline bool parse_cell(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

}  // namespace detail

/// Numeric CSV: an optional non-numeric header row, then rows of equal width.
struct CsvData {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column_index(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ValidationError("csv: no column named '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
};

inline CsvData parse_csv(const std::string& text, const std::string& source = "csv") {
    CsvData data;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = detail::split_csv_line(line);
        std::vector<double> row(cells.size());
        bool numeric = true;
        for (std::size_t i = 0; i < cells.size(); ++i) numeric = numeric && detail::parse_cell(cells[i], row[i]);
        if (!numeric) {
            if (data.header.empty() && data.rows.empty()) {
                data.header = cells;
                width = cells.size();
                continue;
            }
            throw ValidationError(source + ": line " + std::to_string(line_no) + " is not numeric");
        }
        if (width == 0) width = row.size();
        if (row.size() != width) throw ValidationError(source + ": line " + std::to_string(line_no) + " has the wrong width");
        data.rows.push_back(std::move(row));
    }
    if (data.rows.empty()) throw ValidationError(source + ": no data rows");
    return data;
}

inline CsvData read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path), path.string()); }

/// Worker count: QTRAP_WORKERS if set to a positive integer, else the
/// hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("QTRAP_WORKERS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || n < 1) throw ValidationError("QTRAP_WORKERS must be a positive integer");
        return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// out[i] = f(i) for i < n. Tasks are independent, so results do not depend
/// on the worker count. The exception of the lowest failing index is rethrown.
template <class T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& f, unsigned workers) {
    std::vector<T> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned pool = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n));
    if (pool <= 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        for (unsigned w = 0; w < pool; ++w) threads.emplace_back(work);
        for (auto& th : threads) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace qtrap
