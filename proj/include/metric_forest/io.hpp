#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "metric_forest/common.hpp"
#include "metric_forest/geometry.hpp"
#include "metric_forest/metric_space.hpp"

namespace metric_forest {

inline std::vector<std::vector<double>> read_csv_rows(std::istream& in, bool skip_header) {
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first && skip_header) {
            first = false;
            continue;
        }
        first = false;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(parse_double(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<std::vector<double>> read_csv_rows(const std::string& path, bool skip_header) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path + "'");
    return read_csv_rows(in, skip_header);
}

inline MetricSpaceView read_point_cloud(const std::string& path, bool skip_header = false) {
    return MetricSpaceView::euclidean(read_csv_rows(path, skip_header));
}

inline MetricSpaceView read_distance_matrix(const std::string& path, bool skip_header = false) {
    auto rows = read_csv_rows(path, skip_header);
    const std::size_t n = rows.size();
    std::vector<double> m;
    m.reserve(n * n);
    for (auto& r : rows) {
        if (r.size() != n) throw data_error("distance matrix is not square");
        m.insert(m.end(), r.begin(), r.end());
    }
    return MetricSpaceView::explicit_matrix(std::move(m), n);
}

/// Drops later rows that coincide with an earlier one (exact coordinate
/// equality), keeping first occurrences in order.
inline std::vector<std::vector<double>> dedup_points(const std::vector<std::vector<double>>& pts) {
    std::vector<std::vector<double>> out;
    for (const auto& p : pts)
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    return out;
}

inline void write_csv_row(std::ostream& out, const std::vector<double>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ',';
        out << format_double(row[i]);
    }
    out << '\n';
}

inline void write_point_cloud(const std::string& path, const std::vector<Vec>& pts) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write '" + path + "'");
    for (const auto& p : pts) write_csv_row(out, p);
}

inline void write_matrix(const std::string& path, const MetricSpaceView& space) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write '" + path + "'");
    std::vector<double> row(space.size());
    for (PointId a = 0; a < space.size(); ++a) {
        for (PointId b = 0; b < space.size(); ++b) row[b] = space.distance(a, b);
        write_csv_row(out, row);
    }
}

}  // namespace metric_forest
