#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "metric_forest/common.hpp"
#include "metric_forest/geometry.hpp"
#include "metric_forest/metric_space.hpp"

namespace metric_forest {

/// Seeded generator: mersenne twister (mt19937_64, portable output stream)
/// with a fixed 53-bit mapping to doubles. Sub-streams are derived from the
/// master seed with splitmix64 so that stages stay independent.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static std::uint64_t split(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// uniform double in [0, 1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t integer(std::uint64_t bound) {  // in [0, bound)
        // rejection to keep the draw unbiased
        std::uint64_t limit = (~0ULL) - (~0ULL) % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

/// Two separated sets: blocks A and B of 2^k points each. Inside a block,
/// points carry indices 1..2^k; with (a_1..a_k) the k-bit representation of
/// the index (mod 2^k, most significant bit first) and J the first position
/// where two indices differ, d = 1 + (k+1-J)/(k+1). Every cross distance is
/// 2^10. Ids 0..2^k-1 form A, the rest form B.
inline MetricSpaceView gen_two_separated_sets(std::size_t k) {
    if (k < 1 || k > 12) throw std::invalid_argument("gen_two_separated_sets: k must be in [1,12]");
    const std::size_t block = std::size_t{1} << k;
    const std::size_t n = 2 * block;
    auto bit = [&](std::size_t index, std::size_t t) {  // t = 1..k, MSB first
        std::size_t v = index % block;                  // 2^k wraps to 0
        return (v >> (k - t)) & 1u;
    };
    auto intra = [&](std::size_t i, std::size_t j) {  // 1-based block indices
        std::size_t J = 0;
        for (std::size_t t = 1; t <= k; ++t)
            if (bit(i, t) != bit(j, t)) {
                J = t;
                break;
            }
        return 1.0 + (static_cast<double>(k + 1 - J)) / static_cast<double>(k + 1);
    };
    std::vector<double> m(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            bool same_block = (a < block) == (b < block);
            double d = same_block ? intra(a % block + 1, b % block + 1) : 1024.0;
            m[a * n + b] = d;
            m[b * n + a] = d;
        }
    return MetricSpaceView::explicit_matrix(std::move(m), n);
}

/// Planar star with n equal spokes of the given length, spokes equally
/// spaced; feasible only when n * min_angle <= 2 pi. Vertex 0 is the center.
inline StraightLineTree gen_star(std::size_t n_edges, double min_angle, double edge_length) {
    if (n_edges < 1) throw std::invalid_argument("gen_star: need at least one edge");
    if (!(edge_length > 0)) throw std::invalid_argument("gen_star: edge length must be positive");
    double spacing = 2.0 * M_PI / static_cast<double>(n_edges);
    if (n_edges >= 2 && spacing < min_angle)
        throw std::invalid_argument("gen_star: angle constraint infeasible");
    StraightLineTree t;
    t.vertices.push_back({0.0, 0.0});
    for (std::size_t j = 0; j < n_edges; ++j) {
        double a = spacing * static_cast<double>(j);
        t.vertices.push_back({edge_length * std::cos(a), edge_length * std::sin(a)});
        t.edges.push_back({0, j + 1});
    }
    return t;
}

inline MetricSpaceView gen_line_cloud(const std::vector<double>& values) {
    std::vector<Vec> pts;
    pts.reserve(values.size());
    for (double v : values) pts.push_back({v});
    return MetricSpaceView::euclidean(std::move(pts));
}

/// Random planar tree grown vertex by vertex: a base vertex is drawn with
/// probability proportional to its degree, the new vertex lands uniformly in
/// the annulus B(v, l_max) \ B(v, l_min), and the candidate edge is accepted
/// only if every adjacent angle stays >= theta and the new edge keeps
/// clearance w from all non-adjacent edges and other vertices.
inline StraightLineTree gen_sensible_tree(std::size_t n_vertices, double l_max, double l_min,
                                          double theta, double w, std::uint64_t seed) {
    if (!(l_min < l_max) || !(l_min > 0)) throw std::invalid_argument("need 0 < l_min < l_max");
    if (!(theta > 0)) throw std::invalid_argument("theta must be positive");
    Rng rng(Rng::split(seed, 0x7ee5));
    StraightLineTree t;
    t.vertices.push_back({0.0, 0.0});
    if (n_vertices <= 1) return t;

    std::vector<std::size_t> degree{0};
    const std::size_t budget = 10000 * n_vertices;
    std::size_t tries = 0;
    while (t.vertices.size() < n_vertices) {
        if (++tries > budget) throw data_error("gen_sensible_tree: rejection budget exhausted");
        // degree-proportional choice (uniform while all degrees are zero)
        std::size_t v;
        std::size_t total = 0;
        for (std::size_t d : degree) total += d;
        if (total == 0) {
            v = rng.integer(t.vertices.size());
        } else {
            std::uint64_t pick = rng.integer(total);
            v = 0;
            std::size_t acc = 0;
            for (std::size_t u = 0; u < degree.size(); ++u) {
                acc += degree[u];
                if (pick < acc) {
                    v = u;
                    break;
                }
            }
        }
        double ang = rng.uniform(0.0, 2.0 * M_PI);
        double rad = std::sqrt(rng.uniform(l_min * l_min, l_max * l_max));
        Vec p{t.vertices[v][0] + rad * std::cos(ang), t.vertices[v][1] + rad * std::sin(ang)};

        // adjacent angles at v
        bool ok = true;
        Vec nu = sub(p, t.vertices[v]);
        for (auto& [a, b] : t.edges) {
            if (a != v && b != v) continue;
            std::size_t o = (a == v) ? b : a;
            Vec eu = sub(t.vertices[o], t.vertices[v]);
            double c = dot(nu, eu) / (norm(nu) * norm(eu));
            if (std::acos(std::clamp(c, -1.0, 1.0)) < theta) {
                ok = false;
                break;
            }
        }
        // clearance of the new edge from non-adjacent edges and of the new
        // vertex from everything else
        if (ok && w > 0) {
            for (auto& [a, b] : t.edges) {
                if (a == v || b == v) continue;
                if (segment_segment_distance(t.vertices[v], p, t.vertices[a], t.vertices[b]) < w) {
                    ok = false;
                    break;
                }
            }
            if (ok)
                for (std::size_t u = 0; u < t.vertices.size(); ++u) {
                    if (u == v) continue;
                    if (norm(sub(p, t.vertices[u])) < w ||
                        point_segment_distance(t.vertices[u], t.vertices[v], p) < w) {
                        ok = false;
                        break;
                    }
                }
        }
        if (!ok) continue;
        std::size_t id = t.vertices.size();
        t.vertices.push_back(p);
        t.edges.push_back({v, id});
        degree.push_back(1);
        ++degree[v];
    }
    return t;
}

/// Monte-Carlo eps-sample: uniform points in the inflated bounding box of T,
/// kept while their distance to T stays within eps.
inline std::vector<Vec> gen_eps_sample(const StraightLineTree& t, std::size_t n_points, double eps,
                                       std::uint64_t seed) {
    if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
    if (t.vertices.empty()) throw std::invalid_argument("empty tree");
    const std::size_t m = t.vertices.front().size();
    Vec lo = t.vertices.front(), hi = t.vertices.front();
    for (const auto& v : t.vertices)
        for (std::size_t c = 0; c < m; ++c) {
            lo[c] = std::min(lo[c], v[c]);
            hi[c] = std::max(hi[c], v[c]);
        }
    for (std::size_t c = 0; c < m; ++c) {
        lo[c] -= eps;
        hi[c] += eps;
    }
    Rng rng(Rng::split(seed, 0xe95));
    std::vector<Vec> cloud;
    cloud.reserve(n_points);
    const std::size_t budget = n_points * 100000 + 1000000;
    std::size_t tries = 0;
    while (cloud.size() < n_points) {
        if (++tries > budget) throw data_error("gen_eps_sample: rejection budget exhausted");
        Vec p(m);
        for (std::size_t c = 0; c < m; ++c) p[c] = rng.uniform(lo[c], hi[c]);
        if (t.distance_to(p) <= eps) cloud.push_back(std::move(p));
    }
    return cloud;
}

/// Uniform cloud in the unit cube, the workhorse of randomized tests.
inline std::vector<Vec> gen_uniform_cloud(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Rng rng(Rng::split(seed, 0xc10d));
    std::vector<Vec> pts(n, Vec(dim));
    for (auto& p : pts)
        for (auto& c : p) c = rng.uniform();
    return pts;
}

}  // namespace metric_forest
