#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <vector>

#include "metric_forest/common.hpp"
#include "metric_forest/cover_tree.hpp"
#include "metric_forest/metric_space.hpp"
#include "metric_forest/union_find.hpp"

namespace metric_forest {

struct SpanningEdge {
    PointId a = 0;
    PointId b = 0;
    double length = 0.0;
};

struct SpanningTree {
    std::vector<SpanningEdge> edges;
    double total_weight = 0.0;
    std::size_t rounds = 0;  // Boruvka rounds (0 for non-Boruvka construction)

    std::vector<double> edge_lengths() const {
        std::vector<double> l;
        l.reserve(edges.size());
        for (const auto& e : edges) l.push_back(e.length);
        std::sort(l.begin(), l.end());
        return l;
    }
};

/// tau table: for every node p and every level where its distinctive
/// descendant set S_i(p) changes, either the single cluster containing all of
/// S_i(p) or a witness point outside p's own cluster. Computed in one
/// bottom-up pass; entries are keyed by the frozen forest's roots.
class TauTable {
public:
    struct Entry {
        bool pure = true;
        std::size_t cluster = 0;  // forest root when pure
        PointId witness = 0;      // some point of S_i(p) outside F(p) when impure
    };

    TauTable(const CompressedCoverTree& tree, const PartitionForest& forest)
        : boundaries_(tree.size()), entries_(tree.size()) {
        const std::size_t n = tree.size();
        // own cluster of every point under the frozen forest
        std::vector<std::size_t> cluster(n);
        for (PointId p = 0; p < n; ++p) cluster[p] = forest.find(p);
        // full-subtree summary per node, computed in level order (children of
        // a node always have strictly smaller levels, so a post-order DFS
        // works; do it iteratively to spare the stack)
        std::vector<Entry> full(n);
        std::vector<PointId> order = dfs_postorder(tree);
        for (PointId p : order) {
            const auto& node = tree.node(p);
            Entry state{true, cluster[p], 0};
            auto& bounds = boundaries_[p];
            auto& ents = entries_[p];
            bounds.push_back(std::numeric_limits<Level>::min());
            ents.push_back(state);  // S_i(p) = {p} below every child
            for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) {
                // ascending level order
                for (PointId c : it->second) {
                    if (!state.pure) break;
                    if (cluster[c] != cluster[p]) {
                        state.pure = false;
                        state.witness = c;
                    } else if (!full[c].pure) {
                        state.pure = false;
                        state.witness = full[c].witness;
                    }
                }
                bounds.push_back(it->first + 1);
                ents.push_back(state);
            }
            full[p] = state;
        }
    }

    /// Entry describing S_i(p).
    const Entry& at(PointId p, Level i) const {
        const auto& bounds = boundaries_[p];
        auto it = std::upper_bound(bounds.begin(), bounds.end(), i);
        return entries_[p][static_cast<std::size_t>(it - bounds.begin()) - 1];
    }

    /// True when S_i(p) lies entirely inside the cluster with root `u_root`.
    bool contained_in(PointId p, Level i, std::size_t u_root) const {
        const Entry& e = at(p, i);
        return e.pure && e.cluster == u_root;
    }

    std::size_t total_entries() const {
        std::size_t s = 0;
        for (const auto& v : entries_) s += v.size();
        return s;
    }

private:
    static std::vector<PointId> dfs_postorder(const CompressedCoverTree& tree) {
        // children have strictly smaller levels, so sorting by level ascending
        // is a valid processing order
        std::vector<PointId> order(tree.size());
        for (PointId p = 0; p < tree.size(); ++p) order[p] = p;
        std::sort(order.begin(), order.end(), [&](PointId a, PointId b) {
            return tree.node(a).level < tree.node(b).level;
        });
        return order;
    }

    std::vector<std::vector<Level>> boundaries_;
    std::vector<std::vector<Entry>> entries_;
};

inline TauTable find_clusters(const CompressedCoverTree& tree, const PartitionForest& forest) {
    return TauTable(tree, forest);
}

/// One Boruvka step for cluster U: the closest pair (q in U, p outside U),
/// found by descending the cover tree with the tau-guided candidate filter.
/// The pruning bound mirrors the pending-descendant radius: after expanding
/// children at level b every unexplored point of a candidate lies within
/// 2^(b+1), so a candidate farther than l + 2^(b+1) from U cannot hide the
/// nearest foreign point. With `audit` set, every pruning pass re-checks that
/// the true nearest foreign point stays reachable through some surviving
/// candidate's pending descendants.
inline SpanningEdge boruvka_step(const CompressedCoverTree& tree, const TauTable& tau,
                                 const PartitionForest& forest, std::size_t u_root,
                                 bool audit = false) {
    if (forest.component_count() < 2) throw internal_error("boruvka_step on a single component");
    const std::vector<std::size_t> members = forest.members(u_root);

    struct Cand {
        PointId id;
        double d_to_u;  // min distance to U
        PointId q;      // witness q in U achieving it
    };
    auto eval = [&](PointId p) {
        Cand c{p, kInfinity, 0};
        for (std::size_t q : members) {
            double d = tree.space().distance(q, p);
            if (d < c.d_to_u || (d == c.d_to_u && q < c.q)) {
                c.d_to_u = d;
                c.q = q;
            }
        }
        return c;
    };

    std::vector<Cand> R{eval(tree.root())};
    auto next_boundary = [&](Level below) -> std::optional<Level> {
        std::optional<Level> b;
        for (const auto& c : R) {
            auto nl = tree.next_level(c.id, below);
            if (nl && (!b || *nl > *b)) b = nl;
        }
        return b;
    };

    std::optional<Level> b = next_boundary(tree.node(tree.root()).level - 1);
    while (b) {
        const Level lvl = *b;
        const double radius = pow2(lvl + 1);
        std::size_t old = R.size();
        for (std::size_t i = 0; i < old; ++i) {
            const auto& kids = tree.node(R[i].id).children;
            auto it = kids.find(lvl);
            if (it == kids.end()) continue;
            for (PointId c : it->second) R.push_back(eval(c));
        }
        // drop candidates whose pending set lies entirely inside U
        std::vector<Cand> useful;
        useful.reserve(R.size());
        for (const auto& c : R)
            if (!tau.contained_in(c.id, lvl, u_root)) useful.push_back(c);
        // bound on d(U, R \ U): a foreign point hides within 2^(b+1) of any
        // kept own-cluster candidate, foreign candidates count as-is
        double bound = kInfinity;
        for (const auto& c : R) {
            if (tau.contained_in(c.id, lvl, u_root)) continue;
            if (forest.find(c.id) == u_root)
                bound = std::min(bound, c.d_to_u + radius);
            else
                bound = std::min(bound, c.d_to_u);
        }
        R.clear();
        for (const auto& c : useful)
            if (c.d_to_u <= bound + radius) R.push_back(c);
        if (audit) {
            // the true nearest foreign point must be a distinctive descendant
            // of some surviving candidate
            double truth = kInfinity;
            PointId target = 0;
            for (std::size_t q : members)
                for (PointId p = 0; p < tree.size(); ++p) {
                    if (forest.find(p) == u_root) continue;
                    double d = tree.space().distance(q, p);
                    if (d < truth) {
                        truth = d;
                        target = p;
                    }
                }
            bool reachable = false;
            for (const auto& c : R) {
                auto dd = tree.distinctive_descendants(c.id, lvl);
                if (std::find(dd.begin(), dd.end(), target) != dd.end()) {
                    reachable = true;
                    break;
                }
            }
            if (!reachable) {
                // ties: any point at the same distance will do
                for (const auto& c : R) {
                    for (PointId w : tree.distinctive_descendants(c.id, lvl))
                        if (forest.find(w) != u_root) {
                            double best_w = kInfinity;
                            for (std::size_t q : members)
                                best_w = std::min(best_w, tree.space().distance(q, w));
                            if (best_w == truth) {
                                reachable = true;
                                break;
                            }
                        }
                    if (reachable) break;
                }
            }
            if (!reachable)
                throw internal_error("boruvka_step pruned away the nearest foreign point");
        }
        b = next_boundary(lvl - 1);
    }

    SpanningEdge bestEdge;
    double bestD = kInfinity;
    bool found = false;
    for (const auto& c : R) {
        if (forest.find(c.id) == u_root) continue;
        std::pair<double, std::pair<PointId, PointId>> key{c.d_to_u, {c.q, c.id}};
        if (!found || key < std::make_pair(bestD, std::make_pair(bestEdge.a, bestEdge.b))) {
            bestD = c.d_to_u;
            bestEdge = {c.q, c.id, c.d_to_u};
            found = true;
        }
    }
    if (!found) throw internal_error("boruvka_step found no foreign candidate");
    return bestEdge;
}

/// Brute-force counterpart of boruvka_step, used by the instrumented mode and
/// by tests.
inline SpanningEdge boruvka_step_bruteforce(const MetricSpaceView& space,
                                            const PartitionForest& forest, std::size_t u_root) {
    SpanningEdge best;
    double bestD = kInfinity;
    bool found = false;
    for (std::size_t q : forest.members(u_root))
        for (PointId p = 0; p < space.size(); ++p) {
            if (forest.find(p) == u_root) continue;
            double d = space.distance(q, p);
            auto key = std::make_pair(d, std::make_pair(q, p));
            if (!found || key < std::make_pair(bestD, std::make_pair(best.a, best.b))) {
                bestD = d;
                best = {q, p, d};
                found = true;
            }
        }
    if (!found) throw internal_error("no foreign point exists");
    return best;
}

/// Minimum spanning tree by single-tree Boruvka over a compressed cover tree.
/// Each round recomputes tau for the frozen forest, proposes one outgoing
/// edge per cluster, then merges; the component count at least halves per
/// round. With `audited` every proposed edge is checked against brute force.
inline SpanningTree mst_singletree_boruvka(const CompressedCoverTree& tree, bool audited = false) {
    const std::size_t n = tree.size();
    SpanningTree out;
    if (n <= 1) return out;
    PartitionForest forest(n);
    while (forest.component_count() > 1) {
        ++out.rounds;
        TauTable tau = find_clusters(tree, forest);
        std::vector<SpanningEdge> proposals;
        proposals.reserve(forest.component_count());
        for (std::size_t u : forest.roots()) {
            SpanningEdge e = boruvka_step(tree, tau, forest, u, audited);
            if (audited) {
                SpanningEdge t = boruvka_step_bruteforce(tree.space(), forest, u);
                if (t.length != e.length)
                    throw internal_error("boruvka_step disagrees with brute force");
            }
            proposals.push_back(e);
        }
        for (const auto& e : proposals) {
            if (forest.find(e.a) == forest.find(e.b)) continue;  // already merged this round
            forest.unite(e.a, e.b);
            out.edges.push_back(e);
            out.total_weight += e.length;
        }
    }
    return out;
}

/// O(n^2) Prim oracle.
inline SpanningTree mst_oracle_prim(const MetricSpaceView& space) {
    const std::size_t n = space.size();
    SpanningTree out;
    if (n <= 1) return out;
    std::vector<char> in_tree(n, 0);
    std::vector<double> best(n, kInfinity);
    std::vector<PointId> from(n, 0);
    in_tree[0] = 1;
    for (PointId v = 1; v < n; ++v) {
        best[v] = space.distance(0, v);
        from[v] = 0;
    }
    for (std::size_t step = 1; step < n; ++step) {
        PointId pick = 0;
        double bd = kInfinity;
        for (PointId v = 0; v < n; ++v)
            if (!in_tree[v] && best[v] < bd) {
                bd = best[v];
                pick = v;
            }
        in_tree[pick] = 1;
        out.edges.push_back({from[pick], pick, bd});
        out.total_weight += bd;
        for (PointId v = 0; v < n; ++v)
            if (!in_tree[v]) {
                double d = space.distance(pick, v);
                if (d < best[v]) {
                    best[v] = d;
                    from[v] = pick;
                }
            }
    }
    return out;
}

struct GraphEdge {
    std::size_t a = 0, b = 0;
    double w = 0.0;
};

/// Classic Boruvka on an explicit weighted graph. Ties are broken by the
/// lexicographic (weight, a, b) key, which keeps the algorithm correct when
/// edge weights repeat. Throws on disconnected input.
inline SpanningTree boruvka_classic(std::size_t n, const std::vector<GraphEdge>& edges) {
    SpanningTree out;
    if (n <= 1) return out;
    PartitionForest forest(n);
    auto key = [](const GraphEdge& e) {
        return std::make_tuple(e.w, std::min(e.a, e.b), std::max(e.a, e.b));
    };
    while (forest.component_count() > 1) {
        ++out.rounds;
        std::map<std::size_t, const GraphEdge*> cheapest;  // root -> edge
        for (const auto& e : edges) {
            std::size_t ra = forest.find(e.a), rb = forest.find(e.b);
            if (ra == rb) continue;
            for (std::size_t r : {ra, rb}) {
                auto it = cheapest.find(r);
                if (it == cheapest.end() || key(e) < key(*it->second)) cheapest[r] = &e;
            }
        }
        if (cheapest.empty()) throw data_error("boruvka_classic: graph is disconnected");
        for (const auto& [root, e] : cheapest) {
            if (forest.find(e->a) == forest.find(e->b)) continue;
            forest.unite(e->a, e->b);
            out.edges.push_back({e->a, e->b, e->w});
            out.total_weight += e->w;
        }
    }
    return out;
}

template <typename Graph>
SpanningTree boruvka_classic(const Graph& g) {
    std::vector<GraphEdge> edges;
    edges.reserve(g.edges().size());
    for (const auto& e : g.edges()) edges.push_back({e.a, e.b, e.w});
    return boruvka_classic(g.vertex_count(), edges);
}

/// Boruvka clustering trace: the partition sequence F_0, F_1, ... where every
/// cluster merges with a nearest neighboring component each round. Computed
/// by brute force; each partition is reported with sorted members.
inline std::vector<std::vector<std::vector<PointId>>> boruvka_clustering_trace(
    const MetricSpaceView& space) {
    const std::size_t n = space.size();
    PartitionForest forest(n);
    auto snapshot = [&]() {
        std::vector<std::vector<PointId>> part;
        for (std::size_t r : forest.roots()) {
            auto m = forest.members(r);
            std::sort(m.begin(), m.end());
            part.push_back(std::move(m));
        }
        return part;
    };
    std::vector<std::vector<std::vector<PointId>>> trace{snapshot()};
    while (forest.component_count() > 1) {
        std::vector<SpanningEdge> picks;
        for (std::size_t u : forest.roots()) picks.push_back(boruvka_step_bruteforce(space, forest, u));
        for (const auto& e : picks) forest.unite(e.a, e.b);
        trace.push_back(snapshot());
    }
    return trace;
}

/// rho = 17 + 8 * (max MST edge / min MST edge); the edge extremes do not
/// depend on which minimum spanning tree is used.
inline double rho(const MetricSpaceView& space) {
    if (space.size() < 2) throw std::invalid_argument("rho needs at least two points");
    SpanningTree t = mst_oracle_prim(space);
    double lo = kInfinity, hi = 0.0;
    for (const auto& e : t.edges) {
        lo = std::min(lo, e.length);
        hi = std::max(hi, e.length);
    }
    return 17.0 + 8.0 * (hi / lo);
}

}  // namespace metric_forest
