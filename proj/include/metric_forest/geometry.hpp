#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "metric_forest/common.hpp"

namespace metric_forest {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vec sub(std::span<const double> a, std::span<const double> b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

/// Projection parameter t in [0,1] of p onto segment [a,b] and the distance.
struct SegmentProjection {
    double t = 0.0;
    double distance = 0.0;
};

inline SegmentProjection project_to_segment(std::span<const double> p, std::span<const double> a,
                                            std::span<const double> b) {
    Vec ab = sub(b, a);
    Vec ap = sub(p, a);
    double denom = dot(ab, ab);
    double t = denom > 0 ? std::clamp(dot(ap, ab) / denom, 0.0, 1.0) : 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double d = p[i] - (a[i] + t * ab[i]);
        s += d * d;
    }
    return {t, std::sqrt(s)};
}

inline double point_segment_distance(std::span<const double> p, std::span<const double> a,
                                     std::span<const double> b) {
    return project_to_segment(p, a, b).distance;
}

/// Minimal distance between segments [a1,b1] and [a2,b2] in R^m. The
/// unconstrained quadratic is solved first; clamped edge cases reduce to four
/// point-segment problems.
inline double segment_segment_distance(std::span<const double> a1, std::span<const double> b1,
                                       std::span<const double> a2, std::span<const double> b2) {
    Vec u = sub(b1, a1), v = sub(b2, a2), w = sub(a1, a2);
    double A = dot(u, u), B = dot(u, v), C = dot(v, v), D = dot(u, w), E = dot(v, w);
    double det = A * C - B * B;
    double s = 0.0, t = 0.0;
    if (det > 1e-14 * std::max(1.0, A * C)) {
        s = std::clamp((B * E - C * D) / det, 0.0, 1.0);
        t = std::clamp((A * E - B * D) / det, 0.0, 1.0);
    }
    auto point_at = [](std::span<const double> a, const Vec& dvec, double x) {
        Vec r(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + x * dvec[i];
        return r;
    };
    double best = kInfinity;
    // candidate from the interior solution
    {
        Vec p = point_at(a1, u, s), q = point_at(a2, v, t);
        best = std::min(best, norm(sub(p, q)));
    }
    best = std::min(best, point_segment_distance(a1, a2, b2));
    best = std::min(best, point_segment_distance(b1, a2, b2));
    best = std::min(best, point_segment_distance(a2, a1, b1));
    best = std::min(best, point_segment_distance(b2, a1, b1));
    return best;
}

/// Straight-line tree in R^m: vertex coordinates plus an edge list that must
/// form a tree. theta() is the minimal angle between adjacent edges, l_max()
/// the longest edge.
struct StraightLineTree {
    std::vector<Vec> vertices;
    std::vector<std::pair<std::size_t, std::size_t>> edges;

    std::size_t vertex_count() const { return vertices.size(); }

    bool is_tree() const {
        if (vertices.empty()) return false;
        if (edges.size() + 1 != vertices.size()) return false;
        std::vector<std::vector<std::size_t>> adj(vertices.size());
        for (auto& [a, b] : edges) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        std::vector<char> seen(vertices.size(), 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        std::size_t cnt = 0;
        while (!stack.empty()) {
            std::size_t v = stack.back();
            stack.pop_back();
            ++cnt;
            for (std::size_t w : adj[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
        }
        return cnt == vertices.size();
    }

    double edge_length(std::size_t e) const {
        return norm(sub(vertices[edges[e].first], vertices[edges[e].second]));
    }

    double max_edge_length() const {
        double m = 0.0;
        for (std::size_t e = 0; e < edges.size(); ++e) m = std::max(m, edge_length(e));
        return m;
    }

    /// Minimal angle over all pairs of edges sharing a vertex; pi when no two
    /// edges are adjacent.
    double min_adjacent_angle() const {
        std::vector<std::vector<std::size_t>> incident(vertices.size());
        for (std::size_t e = 0; e < edges.size(); ++e) {
            incident[edges[e].first].push_back(e);
            incident[edges[e].second].push_back(e);
        }
        double best = M_PI;
        for (std::size_t v = 0; v < vertices.size(); ++v) {
            const auto& inc = incident[v];
            for (std::size_t i = 0; i < inc.size(); ++i)
                for (std::size_t j = i + 1; j < inc.size(); ++j) {
                    auto other = [&](std::size_t e) {
                        return edges[e].first == v ? edges[e].second : edges[e].first;
                    };
                    Vec u1 = sub(vertices[other(inc[i])], vertices[v]);
                    Vec u2 = sub(vertices[other(inc[j])], vertices[v]);
                    double c = dot(u1, u2) / (norm(u1) * norm(u2));
                    best = std::min(best, std::acos(std::clamp(c, -1.0, 1.0)));
                }
        }
        return best;
    }

    double distance_to(std::span<const double> p) const {
        double best = kInfinity;
        for (auto& [a, b] : edges)
            best = std::min(best, point_segment_distance(p, vertices[a], vertices[b]));
        if (edges.empty()) best = norm(sub(p, vertices[0]));
        return best;
    }
};

/// Directed Hausdorff distance from a cloud to a straight-line graph:
/// max over cloud points of the distance to the nearest edge.
inline double directed_hausdorff(const StraightLineTree& t, const std::vector<Vec>& cloud) {
    if (cloud.empty()) throw std::invalid_argument("directed_hausdorff: empty cloud");
    double worst = 0.0;
    for (const auto& p : cloud) worst = std::max(worst, t.distance_to(p));
    return worst;
}

}  // namespace metric_forest
