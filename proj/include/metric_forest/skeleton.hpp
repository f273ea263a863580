#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <vector>

#include "metric_forest/common.hpp"
#include "metric_forest/cover_tree.hpp"
#include "metric_forest/geometry.hpp"
#include "metric_forest/graph.hpp"
#include "metric_forest/kde.hpp"
#include "metric_forest/knn.hpp"
#include "metric_forest/metric_space.hpp"
#include "metric_forest/mst.hpp"

namespace metric_forest {

/// k-th minimum spanning graph: the k-nearest-neighbor graph completed to
/// connectivity by the cheapest cross-component edges (Boruvka over the
/// component cuts of the full metric).
inline WeightedGraph msg_k(const MetricSpaceView& cloud, std::size_t k, unsigned threads = 1) {
    if (k < 1) throw std::invalid_argument("msg_k: k must be >= 1");
    const std::size_t n = cloud.size();
    WeightedGraph g(n);
    if (n == 1) return g;
    CompressedCoverTree tree = CompressedCoverTree::build(cloud);
    std::vector<KnnResult> knn(n);
    parallel_for(n, threads, [&](std::size_t v) {
        knn[v] = knn_exact(tree, static_cast<PointId>(v), std::min(k + 1, n));
    });
    std::vector<std::map<std::size_t, double>> want(n);
    for (std::size_t v = 0; v < n; ++v) {
        std::size_t added = 0;
        for (auto& [id, d] : knn[v].neighbors) {
            if (id == v) continue;
            if (added == k) break;
            ++added;
            std::size_t lo = v, hi = id;
            if (hi < lo) std::swap(lo, hi);
            want[lo].emplace(hi, d);
        }
    }
    for (std::size_t a = 0; a < n; ++a)
        for (auto& [b, d] : want[a]) g.add_edge(a, b, d);

    // connectivity completion: merge components along their cheapest cross edges
    PartitionForest forest(n);
    for (const auto& e : g.edges()) forest.unite(e.a, e.b);
    while (forest.component_count() > 1) {
        std::vector<SpanningEdge> picks;
        for (std::size_t u : forest.roots())
            picks.push_back(boruvka_step_bruteforce(cloud, forest, u));
        for (const auto& e : picks)
            if (forest.find(e.a) != forest.find(e.b)) {
                forest.unite(e.a, e.b);
                g.add_edge(std::min(e.a, e.b), std::max(e.a, e.b), e.length);
            }
    }
    return g;
}

/// Truncated Dijkstra flood: updates Dist and the nearest-dense-point map for
/// every vertex within path distance delta of p. Relaxation accepts r only
/// when Dist(r) > t and t < delta.
inline void path_metric_neighborhood(const WeightedGraph& g, std::size_t p, double delta,
                                     std::vector<double>& dist, std::vector<std::size_t>& ndp) {
    if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist[p] = 0.0;
    ndp[p] = p;
    heap.push({0.0, p});
    while (!heap.empty()) {
        auto [d, q] = heap.top();
        heap.pop();
        if (d > dist[q]) continue;
        for (auto& [r, len] : g.neighbors(q)) {
            double t = d + len;
            if (dist[r] > t && t < delta) {
                dist[r] = t;
                ndp[r] = ndp[q];
                heap.push({t, r});
            }
        }
    }
}

struct SparseDense {
    std::vector<std::size_t> dense;     // selected points, in selection order
    std::vector<double> dist;           // path distance to the nearest dense point
    std::vector<std::size_t> ndp;       // nearest dense point per vertex
};

/// Greedy sparse set of densest points: scan vertices by descending density
/// (ties to the lower id); a vertex still at Dist = +inf is selected and its
/// delta-neighborhood flooded. The result is delta-sparse in the path metric.
inline SparseDense sparse_dense_subset(const WeightedGraph& g, const std::vector<double>& density,
                                       double delta) {
    const std::size_t n = g.vertex_count();
    if (density.size() != n) throw std::invalid_argument("density size mismatch");
    SparseDense out;
    out.dist.assign(n, kInfinity);
    out.ndp.resize(n);
    std::iota(out.ndp.begin(), out.ndp.end(), std::size_t{0});
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return density[a] > density[b] || (density[a] == density[b] && a < b);
    });
    for (std::size_t v : order) {
        if (out.dist[v] != kInfinity) continue;
        out.dense.push_back(v);
        path_metric_neighborhood(g, v, delta, out.dist, out.ndp);
    }
    return out;
}

/// Dense tree: quotient the graph by the nearest-dense-point map, weight each
/// quotient edge by min over cut edges of Dist(u)+Dist(v)+length, then take
/// the minimum spanning tree (classic Boruvka). Vertices keep the dense
/// points' coordinates.
inline StraightLineTree dense_tree(const WeightedGraph& g, const SparseDense& sd,
                                   const std::vector<Vec>& coords) {
    StraightLineTree t;
    std::map<std::size_t, std::size_t> index;  // dense point id -> vertex index
    for (std::size_t i = 0; i < sd.dense.size(); ++i) {
        index[sd.dense[i]] = i;
        t.vertices.push_back(coords[sd.dense[i]]);
    }
    if (sd.dense.size() <= 1) return t;
    std::map<std::pair<std::size_t, std::size_t>, double> quotient;
    for (const auto& e : g.edges()) {
        std::size_t du = sd.ndp[e.a], dv = sd.ndp[e.b];
        if (du == dv) continue;
        double w = sd.dist[e.a] + sd.dist[e.b] + e.w;
        std::size_t lo = index.at(du), hi = index.at(dv);
        if (hi < lo) std::swap(lo, hi);
        auto [it, fresh] = quotient.emplace(std::make_pair(lo, hi), w);
        if (!fresh && w < it->second) it->second = w;
    }
    std::vector<GraphEdge> edges;
    edges.reserve(quotient.size());
    for (auto& [key, w] : quotient) edges.push_back({key.first, key.second, w});
    SpanningTree mst = boruvka_classic(sd.dense.size(), edges);
    for (const auto& e : mst.edges) t.edges.push_back({e.a, e.b});
    return t;
}

/// Right-hand side of the homeomorphism condition:
/// 2*gamma*(eps + eps/sin(theta/2) + l_max/sin(min(theta, pi/2))).
inline double homeomorphism_delta(double theta, double gamma, double eps, double l_max_g) {
    if (!(theta > 0) || theta > M_PI) throw std::invalid_argument("theta must be in (0, pi]");
    if (gamma < 1) throw std::invalid_argument("gamma must be >= 1");
    return 2.0 * gamma *
           (eps + eps / std::sin(theta / 2.0) + l_max_g / std::sin(std::min(theta, M_PI / 2.0)));
}

/// Upper bound on the number of dense vertices:
/// sum over edges of (|e| + 2 eps) / (2 sqrt(delta^2/gamma^2 - 4 eps^2)).
inline double vertex_count_bound(const StraightLineTree& t, double eps, double delta,
                                 double gamma) {
    double d2 = delta * delta / (gamma * gamma) - 4.0 * eps * eps;
    if (!(d2 > 0)) throw std::invalid_argument("vertex_count_bound requires delta/gamma > 2 eps");
    double denom = 2.0 * std::sqrt(d2);
    double s = 0.0;
    for (std::size_t e = 0; e < t.edges.size(); ++e) s += (t.edge_length(e) + 2.0 * eps) / denom;
    return s;
}

struct GammaMeasurement {
    double gamma = 1.0;
    bool separation_ok = true;   // min non-adjacent edge gap > l_max(G) + 2 eps
    double min_nonadjacent_gap = kInfinity;
};

/// Measured distortion of the graph metric against the Euclidean one inside
/// every edge-set e^eps of T, plus the non-adjacent-edge separation flag.
inline GammaMeasurement measure_gamma(const StraightLineTree& t, const std::vector<Vec>& cloud,
                                      const WeightedGraph& g, double eps) {
    GammaMeasurement out;
    const std::size_t n = cloud.size();
    std::vector<std::vector<std::size_t>> edge_sets(t.edges.size());
    for (std::size_t e = 0; e < t.edges.size(); ++e) {
        auto& [a, b] = t.edges[e];
        for (std::size_t i = 0; i < n; ++i)
            if (point_segment_distance(cloud[i], t.vertices[a], t.vertices[b]) <= eps)
                edge_sets[e].push_back(i);
    }
    std::vector<char> needed(n, 0);
    for (auto& s : edge_sets)
        for (std::size_t i : s) needed[i] = 1;
    std::vector<std::vector<double>> dg(n);
    for (std::size_t i = 0; i < n; ++i)
        if (needed[i]) dg[i] = g.dijkstra(i);
    for (auto& s : edge_sets)
        for (std::size_t x = 0; x < s.size(); ++x)
            for (std::size_t y = x + 1; y < s.size(); ++y) {
                std::size_t a = s[x], b = s[y];
                double de = norm(sub(cloud[a], cloud[b]));
                if (de <= 0) continue;
                out.gamma = std::max(out.gamma, dg[a][b] / de);
            }
    for (std::size_t e = 0; e < t.edges.size(); ++e)
        for (std::size_t h = e + 1; h < t.edges.size(); ++h) {
            auto& [a1, b1] = t.edges[e];
            auto& [a2, b2] = t.edges[h];
            if (a1 == a2 || a1 == b2 || b1 == a2 || b1 == b2) continue;  // adjacent
            out.min_nonadjacent_gap = std::min(
                out.min_nonadjacent_gap,
                segment_segment_distance(t.vertices[a1], t.vertices[b1], t.vertices[a2],
                                         t.vertices[b2]));
        }
    out.separation_ok = out.min_nonadjacent_gap > g.max_edge_length() + 2.0 * eps;
    return out;
}

/// Mean of squared point-to-assigned-segment distances. `allowed` restricts
/// each point to a set of edge indices (empty vector = all edges).
inline double skeleton_objective(const StraightLineTree& t, const std::vector<Vec>& cloud,
                                 const std::vector<std::vector<std::size_t>>& allowed) {
    double s = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        double best = kInfinity;
        if (t.edges.empty()) {
            best = norm(sub(cloud[i], t.vertices[0]));
        } else if (allowed.empty() || allowed[i].empty()) {
            for (auto& [a, b] : t.edges)
                best = std::min(best,
                                point_segment_distance(cloud[i], t.vertices[a], t.vertices[b]));
        } else {
            for (std::size_t e : allowed[i])
                best = std::min(best, point_segment_distance(cloud[i], t.vertices[t.edges[e].first],
                                                             t.vertices[t.edges[e].second]));
        }
        s += best * best;
    }
    return s / static_cast<double>(cloud.size());
}

/// Gradient descent on vertex coordinates of the mean squared distance to the
/// nearest allowed segment. Assignments are recomputed each iteration and the
/// gradient is the analytic one for the frozen assignment; eta backtracks by
/// halving (up to 20 times) whenever a step would raise the objective, so the
/// final objective never exceeds the initial one.
inline StraightLineTree optimize_skeleton(const StraightLineTree& t0,
                                          const std::vector<Vec>& cloud, double eta,
                                          std::size_t iters,
                                          const std::vector<std::vector<std::size_t>>& allowed = {}) {
    if (!(eta > 0)) throw std::invalid_argument("eta must be positive");
    StraightLineTree t = t0;
    if (cloud.empty() || t.vertices.empty() || iters == 0) return t;
    const std::size_t m = t.vertices.front().size();
    const double inv_n = 1.0 / static_cast<double>(cloud.size());

    double obj = skeleton_objective(t, cloud, allowed);
    for (std::size_t it = 0; it < iters; ++it) {
        // freeze nearest-allowed-segment assignments
        struct Assign {
            std::size_t edge;
            double tpar;
        };
        std::vector<Assign> assign(cloud.size());
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            double best = kInfinity;
            Assign a{0, 0.0};
            auto consider = [&](std::size_t e) {
                auto pr = project_to_segment(cloud[i], t.vertices[t.edges[e].first],
                                             t.vertices[t.edges[e].second]);
                if (pr.distance < best) {
                    best = pr.distance;
                    a = {e, pr.t};
                }
            };
            if (t.edges.empty()) {
                assign[i] = {static_cast<std::size_t>(-1), 0.0};
                continue;
            }
            if (allowed.empty() || allowed[i].empty())
                for (std::size_t e = 0; e < t.edges.size(); ++e) consider(e);
            else
                for (std::size_t e : allowed[i]) consider(e);
            assign[i] = a;
        }
        // analytic gradient for the frozen assignment
        std::vector<Vec> grad(t.vertices.size(), Vec(m, 0.0));
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            if (t.edges.empty()) {
                Vec r = sub(cloud[i], t.vertices[0]);
                for (std::size_t c = 0; c < m; ++c) grad[0][c] -= 2.0 * inv_n * r[c];
                continue;
            }
            auto [e, tt] = assign[i];
            std::size_t va = t.edges[e].first, vb = t.edges[e].second;
            for (std::size_t c = 0; c < m; ++c) {
                double proj = t.vertices[va][c] + tt * (t.vertices[vb][c] - t.vertices[va][c]);
                double r = cloud[i][c] - proj;
                grad[va][c] -= 2.0 * inv_n * (1.0 - tt) * r;
                grad[vb][c] -= 2.0 * inv_n * tt * r;
            }
        }
        double step = eta;
        bool moved = false;
        for (int half = 0; half <= 20; ++half) {
            StraightLineTree trial = t;
            for (std::size_t v = 0; v < t.vertices.size(); ++v)
                for (std::size_t c = 0; c < m; ++c) trial.vertices[v][c] -= step * grad[v][c];
            double trial_obj = skeleton_objective(trial, cloud, allowed);
            if (trial_obj <= obj) {
                t = std::move(trial);
                obj = trial_obj;
                moved = true;
                break;
            }
            step /= 2.0;
        }
        if (!moved) break;  // no admissible step at any scale
    }
    return t;
}

/// Degree-list recognition rate between a reconstruction G and a reference H:
/// 1 - sum over i in [1, maxdeg(G)] of |q(i,G)-q(i,H)| / |V(G)|.
inline double degree_list_recognition(const std::vector<std::size_t>& degrees_g,
                                      const std::vector<std::size_t>& degrees_h) {
    if (degrees_g.empty()) throw std::invalid_argument("empty graph");
    std::size_t k = *std::max_element(degrees_g.begin(), degrees_g.end());
    auto count = [](const std::vector<std::size_t>& deg, std::size_t i) {
        return static_cast<double>(std::count(deg.begin(), deg.end(), i));
    };
    double mismatch = 0.0;
    for (std::size_t i = 1; i <= k; ++i)
        mismatch += std::abs(count(degrees_g, i) - count(degrees_h, i));
    return 1.0 - mismatch / static_cast<double>(degrees_g.size());
}

inline std::vector<std::size_t> tree_degrees(const StraightLineTree& t) {
    std::vector<std::size_t> deg(t.vertices.size(), 0);
    for (auto& [a, b] : t.edges) {
        ++deg[a];
        ++deg[b];
    }
    return deg;
}

inline double degree_list_recognition(const StraightLineTree& g, const StraightLineTree& h) {
    return degree_list_recognition(tree_degrees(g), tree_degrees(h));
}

/// Sorted degree sequence with degree-2 vertices suppressed: equal sequences
/// mean homeomorphic trees.
inline std::vector<std::size_t> smoothed_degree_sequence(const StraightLineTree& t) {
    std::vector<std::size_t> out;
    for (std::size_t d : tree_degrees(t))
        if (d != 2) out.push_back(d);
    std::sort(out.begin(), out.end());
    return out;
}

struct PipelineParams {
    std::size_t k = 10;
    double kernel_r = 0.15;
    double kernel_t = 0.025;
    double delta = 0.45;
    double eta = 0.05;
    std::size_t iters = 50;
    unsigned threads = 1;
};

struct PipelineResult {
    WeightedGraph msg{0};
    std::vector<double> density;
    SparseDense sd;
    StraightLineTree dt;
    StraightLineTree odt;
    double dh_dt = 0.0;   // directed Hausdorff, dense tree to cloud
    double dh_odt = 0.0;  // directed Hausdorff, optimized tree to cloud
};

/// Stages: NN_k -> MSG_k -> KDE on the cloud -> sparse densest subset ->
/// dense tree -> optimized dense tree.
inline PipelineResult full_pipeline(const std::vector<Vec>& cloud, const PipelineParams& p) {
    if (cloud.empty()) throw std::invalid_argument("empty cloud");
    PipelineResult out;
    MetricSpaceView space = MetricSpaceView::euclidean(cloud);
    out.msg = msg_k(space, p.k, p.threads);
    SigmoidKernel kernel = fit_sigmoid(p.kernel_r, p.kernel_t);
    out.density = kde_exact(kernel, space, space, p.threads).values;
    out.sd = sparse_dense_subset(out.msg, out.density, p.delta);
    out.dt = dense_tree(out.msg, out.sd, cloud);
    // allocation: every cloud point may match the edges around its nearest
    // dense point
    std::vector<std::vector<std::size_t>> allowed;
    if (!out.dt.edges.empty()) {
        std::map<std::size_t, std::size_t> index;
        for (std::size_t i = 0; i < out.sd.dense.size(); ++i) index[out.sd.dense[i]] = i;
        std::vector<std::vector<std::size_t>> star(out.dt.vertices.size());
        for (std::size_t e = 0; e < out.dt.edges.size(); ++e) {
            star[out.dt.edges[e].first].push_back(e);
            star[out.dt.edges[e].second].push_back(e);
        }
        allowed.resize(cloud.size());
        for (std::size_t i = 0; i < cloud.size(); ++i) allowed[i] = star[index.at(out.sd.ndp[i])];
    }
    out.odt = optimize_skeleton(out.dt, cloud, p.eta, p.iters, allowed);
    out.dh_dt = directed_hausdorff(out.dt, cloud);
    out.dh_odt = directed_hausdorff(out.odt, cloud);
    return out;
}

struct SkeletonReport {
    double gamma = 1.0;
    double delta_required = 0.0;
    double degree_recognition = 0.0;
    double dh = 0.0;
    double vertex_bound = 0.0;
    bool separation_ok = true;
    bool delta_ok = true;  // delta used >= delta required
};

/// Theorem-condition checkers and quality metrics against a known reference
/// tree.
inline SkeletonReport evaluate_skeleton(const StraightLineTree& reference,
                                        const std::vector<Vec>& cloud, const PipelineResult& run,
                                        double eps, double delta_used) {
    SkeletonReport rep;
    GammaMeasurement gm = measure_gamma(reference, cloud, run.msg, eps);
    rep.gamma = gm.gamma;
    rep.separation_ok = gm.separation_ok;
    rep.delta_required = homeomorphism_delta(reference.min_adjacent_angle(), gm.gamma, eps,
                                             run.msg.max_edge_length());
    rep.delta_ok = delta_used >= rep.delta_required;
    rep.degree_recognition = degree_list_recognition(run.odt, reference);
    rep.dh = run.dh_dt;
    double d2 = delta_used * delta_used / (gm.gamma * gm.gamma) - 4.0 * eps * eps;
    rep.vertex_bound = d2 > 0 ? vertex_count_bound(reference, eps, delta_used, gm.gamma) : kInfinity;
    return rep;
}

}  // namespace metric_forest
