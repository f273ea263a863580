#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "metric_forest/common.hpp"
#include "metric_forest/metric_space.hpp"
#include "metric_forest/mst.hpp"
#include "metric_forest/union_find.hpp"

namespace metric_forest {

/// Merge tree of single-linkage clustering. Clusters 0..n-1 are the leaves
/// (born at scale 0); each merge event kills its input clusters and births a
/// new one at the merge scale. Equal-length MST edges are processed together,
/// so simultaneous merges form one multi-way event per connected batch.
struct Dendrogram {
    struct ClusterRecord {
        double birth = 0.0;
        double death = kInfinity;  // +inf for the final whole-set cluster
    };
    struct MergeEvent {
        double scale = 0.0;
        std::vector<std::size_t> inputs;  // cluster ids, >= 2 of them
        std::size_t output = 0;
    };

    std::size_t n_leaves = 0;
    std::vector<ClusterRecord> clusters;
    std::vector<MergeEvent> events;  // sorted by scale ascending
};

inline Dendrogram sl_dendrogram_from_mst(std::size_t n, std::vector<SpanningEdge> edges) {
    Dendrogram d;
    d.n_leaves = n;
    d.clusters.resize(n);
    std::sort(edges.begin(), edges.end(), [](const SpanningEdge& x, const SpanningEdge& y) {
        return x.length < y.length;
    });
    PartitionForest forest(n);
    std::vector<std::size_t> cluster_of(n);   // forest root -> active cluster id
    std::vector<std::size_t> rep_leaf{};      // cluster id -> one of its leaves
    rep_leaf.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        cluster_of[i] = i;
        rep_leaf[i] = i;
    }

    std::size_t i = 0;
    while (i < edges.size()) {
        std::size_t j = i;
        while (j < edges.size() && edges[j].length == edges[i].length) ++j;
        const double scale = edges[i].length;
        std::vector<std::size_t> touched;  // cluster ids merged at this scale
        for (std::size_t e = i; e < j; ++e) {
            std::size_t ra = forest.find(edges[e].a), rb = forest.find(edges[e].b);
            if (ra == rb) continue;
            touched.push_back(cluster_of[ra]);
            touched.push_back(cluster_of[rb]);
            forest.unite(ra, rb);
        }
        if (!touched.empty()) {
            std::sort(touched.begin(), touched.end());
            touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
            // one multi-way event per connected batch of merged clusters
            std::map<std::size_t, std::vector<std::size_t>> groups;  // post-union root -> inputs
            for (std::size_t c : touched) groups[forest.find(rep_leaf[c])].push_back(c);
            for (auto& [root, inputs] : groups) {
                std::sort(inputs.begin(), inputs.end());
                std::size_t out = d.clusters.size();
                d.clusters.push_back({scale, kInfinity});
                rep_leaf.push_back(rep_leaf[inputs.front()]);
                for (std::size_t c : inputs) d.clusters[c].death = scale;
                d.events.push_back({scale, inputs, out});
                cluster_of[root] = out;
            }
        }
        i = j;
    }
    return d;
}

/// Single-linkage dendrogram of a finite metric space (via an MST).
inline Dendrogram sl_dendrogram(const MetricSpaceView& space) {
    SpanningTree t = mst_oracle_prim(space);
    return sl_dendrogram_from_mst(space.size(), t.edges);
}

/// Multiset of (birth, death) pairs. Infinite deaths use +inf.
struct Diagram {
    std::vector<std::pair<double, double>> points;

    void normalize() {
        for (auto& [b, d] : points)
            if (d < b) throw data_error("diagram point with death < birth");
        std::sort(points.begin(), points.end());
    }
};

/// Mergegram: one pair (birth, merge scale) per dendrogram cluster record;
/// the final cluster contributes (birth, +inf).
inline Diagram mergegram(const Dendrogram& d) {
    Diagram out;
    out.points.reserve(d.clusters.size());
    for (const auto& c : d.clusters) out.points.push_back({c.birth, c.death});
    out.normalize();
    return out;
}

/// 0-dimensional persistence of the distance filtration: (0, l) for every MST
/// edge length l plus the single infinite class. `scale_factor` rescales the
/// deaths (0.5 for the ball-filtration convention).
inline Diagram pd0(const MetricSpaceView& space, double scale_factor = 1.0) {
    SpanningTree t = mst_oracle_prim(space);
    Diagram out;
    for (const auto& e : t.edges) out.points.push_back({0.0, e.length * scale_factor});
    out.points.push_back({0.0, kInfinity});
    out.normalize();
    return out;
}

inline Diagram pd0_from_mst(const SpanningTree& t, double scale_factor = 1.0) {
    Diagram out;
    for (const auto& e : t.edges) out.points.push_back({0.0, e.length * scale_factor});
    out.points.push_back({0.0, kInfinity});
    out.normalize();
    return out;
}

namespace detail {

/// Hopcroft-Karp maximum bipartite matching.
class BipartiteMatcher {
public:
    BipartiteMatcher(std::size_t nl, std::size_t nr) : adj_(nl), nl_(nl), nr_(nr) {}
    void add_edge(std::size_t l, std::size_t r) { adj_[l].push_back(r); }

    std::size_t max_matching() {
        match_l_.assign(nl_, kNil);
        match_r_.assign(nr_, kNil);
        std::size_t matched = 0;
        while (bfs()) {
            for (std::size_t l = 0; l < nl_; ++l)
                if (match_l_[l] == kNil && dfs(l)) ++matched;
        }
        return matched;
    }

private:
    static constexpr std::size_t kNil = static_cast<std::size_t>(-1);

    bool bfs() {
        std::vector<std::size_t> q;
        dist_.assign(nl_, kNil);
        for (std::size_t l = 0; l < nl_; ++l)
            if (match_l_[l] == kNil) {
                dist_[l] = 0;
                q.push_back(l);
            }
        bool reachable = false;
        for (std::size_t h = 0; h < q.size(); ++h) {
            std::size_t l = q[h];
            for (std::size_t r : adj_[l]) {
                std::size_t l2 = match_r_[r];
                if (l2 == kNil)
                    reachable = true;
                else if (dist_[l2] == kNil) {
                    dist_[l2] = dist_[l] + 1;
                    q.push_back(l2);
                }
            }
        }
        return reachable;
    }

    bool dfs(std::size_t l) {
        for (std::size_t r : adj_[l]) {
            std::size_t l2 = match_r_[r];
            if (l2 == kNil || (dist_[l2] == dist_[l] + 1 && dfs(l2))) {
                match_l_[l] = r;
                match_r_[r] = l;
                return true;
            }
        }
        dist_[l] = kNil;
        return false;
    }

    std::vector<std::vector<std::size_t>> adj_;
    std::vector<std::size_t> match_l_, match_r_, dist_;
    std::size_t nl_, nr_;
};

inline double linf(const std::pair<double, double>& a, const std::pair<double, double>& b) {
    return std::max(std::abs(a.first - b.first), std::abs(a.second - b.second));
}

inline double diag_gap(const std::pair<double, double>& a) { return (a.second - a.first) / 2.0; }

/// Feasibility of a delta-matching between the finite parts. Standard
/// augmentation: each real point owns a diagonal copy on the opposite side;
/// diagonal copies match each other freely.
inline bool delta_matching_exists(const std::vector<std::pair<double, double>>& A,
                                  const std::vector<std::pair<double, double>>& B, double delta) {
    const std::size_t m = A.size(), n = B.size();
    BipartiteMatcher M(m + n, n + m);
    // left: A points then diag copies of B; right: B points then diag copies of A
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            if (linf(A[i], B[j]) <= delta) M.add_edge(i, j);
        if (diag_gap(A[i]) <= delta) M.add_edge(i, n + i);
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (diag_gap(B[j]) <= delta) M.add_edge(m + j, j);
        for (std::size_t i = 0; i < m; ++i) M.add_edge(m + j, n + i);  // diag-diag
    }
    return M.max_matching() == m + n;
}

}  // namespace detail

/// Bottleneck distance between diagrams. Finite pairs may go to the diagonal;
/// infinite-death pairs match only among themselves (count mismatch -> +inf).
/// Exact: binary search over the candidate costs (all pairwise L-inf costs
/// plus all diagonal gaps).
inline double bottleneck(const Diagram& d1, const Diagram& d2) {
    std::vector<std::pair<double, double>> A, B;
    std::vector<double> infA, infB;
    for (auto& p : d1.points) {
        if (std::isinf(p.second))
            infA.push_back(p.first);
        else
            A.push_back(p);
    }
    for (auto& p : d2.points) {
        if (std::isinf(p.second))
            infB.push_back(p.first);
        else
            B.push_back(p);
    }
    if (infA.size() != infB.size()) return kInfinity;
    double essential = 0.0;
    std::sort(infA.begin(), infA.end());
    std::sort(infB.begin(), infB.end());
    for (std::size_t i = 0; i < infA.size(); ++i)
        essential = std::max(essential, std::abs(infA[i] - infB[i]));

    if (A.empty() && B.empty()) return essential;
    std::vector<double> candidates{0.0};
    for (auto& a : A) {
        candidates.push_back(detail::diag_gap(a));
        for (auto& b : B) candidates.push_back(detail::linf(a, b));
    }
    for (auto& b : B) candidates.push_back(detail::diag_gap(b));
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::size_t lo = 0, hi = candidates.size() - 1;
    if (!detail::delta_matching_exists(A, B, candidates[hi]))
        throw internal_error("bottleneck: even the largest candidate is infeasible");
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (detail::delta_matching_exists(A, B, candidates[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }
    return std::max(candidates[lo], essential);
}

/// Ultrametric of a dendrogram: u(x,y) is the earliest scale at which x and y
/// share a cluster. Output is an explicit-matrix space.
inline MetricSpaceView ultrametric(const Dendrogram& d) {
    const std::size_t n = d.n_leaves;
    std::vector<double> u(n * n, 0.0);
    std::vector<std::vector<PointId>> members(d.clusters.size());
    for (std::size_t i = 0; i < n; ++i) members[i] = {static_cast<PointId>(i)};
    for (const auto& ev : d.events) {
        std::vector<PointId> merged;
        for (std::size_t idx = 0; idx < ev.inputs.size(); ++idx) {
            const auto& add = members[ev.inputs[idx]];
            for (PointId x : merged)
                for (PointId y : add) {
                    u[x * n + y] = ev.scale;
                    u[y * n + x] = ev.scale;
                }
            merged.insert(merged.end(), add.begin(), add.end());
        }
        members[ev.output] = std::move(merged);
    }
    return MetricSpaceView::explicit_matrix(std::move(u), n);
}

}  // namespace metric_forest
