#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "metric_forest/common.hpp"
#include "metric_forest/metric_space.hpp"

namespace metric_forest {

using Level = std::int64_t;

/// Compressed cover tree: one node per point, each node carries a single
/// integer level l(p). Axioms kept by construction and re-checked by
/// verify_tree:
///   covering:   d(p, parent(p)) <= 2^(l(p)+1) and l(p) < l(parent(p));
///   separation: the cover set C_i = {p : l(p) >= i} is pairwise > 2^i apart.
///
/// A node's descendants all lie within 2^(l+1) of it; the descendants still
/// pending below level i (the distinctive descendant set S_i) lie within
/// 2^(i+1). Those two radii drive every pruning rule built on the tree.
class CompressedCoverTree {
public:
    static constexpr PointId kNoParent = static_cast<PointId>(-1);

    struct Node {
        Level level = 0;
        PointId parent = kNoParent;
        // children grouped by their level, highest level first
        std::map<Level, std::vector<PointId>, std::greater<Level>> children;
        std::size_t subtree_size = 1;

        // post-build index: child levels ascending with cumulative subtree sizes
        std::vector<Level> child_levels_asc;
        std::vector<std::size_t> child_size_prefix;  // prefix sums, same order
    };

    const MetricSpaceView& space() const { return *space_; }
    PointId root() const { return root_; }
    std::size_t size() const { return nodes_.size(); }
    Level level_max() const { return l_max_; }
    Level level_min() const { return l_min_; }
    const Node& node(PointId p) const { return nodes_[p]; }

    /// The tree references the space it was built on; keep the space alive for
    /// the tree's lifetime. Rvalue spaces are rejected at compile time.
    static CompressedCoverTree build(MetricSpaceView&&,
                                     const std::vector<PointId>* = nullptr) = delete;
    static CompressedCoverTree restore(MetricSpaceView&&,
                                       const std::vector<std::pair<Level, PointId>>&) = delete;

    /// Builds the tree by repeated insertion. The insertion order changes the
    /// shape but not the axioms; pass a permutation to override input order.
    static CompressedCoverTree build(const MetricSpaceView& space,
                                     const std::vector<PointId>* insertion_order = nullptr) {
        const std::size_t n = space.size();
        if (n == 0) throw std::invalid_argument("cover tree needs at least one point");
        if (space.kind() == MetricSpaceView::Kind::explicit_matrix) {
            for (PointId a = 0; a < n; ++a) {
                if (space.distance(a, a) != 0.0)
                    throw std::invalid_argument("explicit matrix has nonzero diagonal");
                for (PointId b = a + 1; b < n; ++b)
                    if (space.distance(a, b) != space.distance(b, a))
                        throw std::invalid_argument("explicit matrix is asymmetric");
            }
        }
        std::vector<PointId> order(n);
        if (insertion_order) {
            if (insertion_order->size() != n) throw std::invalid_argument("bad insertion order");
            order = *insertion_order;
            std::vector<bool> seen(n, false);
            for (PointId p : order) {
                if (p >= n || seen[p]) throw std::invalid_argument("insertion order is not a permutation");
                seen[p] = true;
            }
        } else {
            std::iota(order.begin(), order.end(), PointId{0});
        }

        CompressedCoverTree t;
        t.space_ = &space;
        t.nodes_.resize(n);
        t.root_ = order[0];
        t.nodes_[t.root_].level = 0;
        t.l_max_ = 0;
        t.l_min_ = 0;
        t.root_level_fixed_ = false;
        for (std::size_t i = 1; i < order.size(); ++i) t.insert(order[i]);
        t.build_descendant_index();
        return t;
    }

    /// Rebuilds a tree from serialized (level, parent) pairs; children maps,
    /// subtree sizes and the descendant index are derived. The axioms are not
    /// re-checked here; callers wanting a guarantee run verify().
    static CompressedCoverTree restore(const MetricSpaceView& space,
                                       const std::vector<std::pair<Level, PointId>>& level_parent) {
        if (level_parent.size() != space.size()) throw data_error("node count mismatch");
        CompressedCoverTree t;
        t.space_ = &space;
        t.nodes_.resize(space.size());
        bool root_seen = false;
        for (PointId p = 0; p < level_parent.size(); ++p) {
            auto [lvl, par] = level_parent[p];
            t.nodes_[p].level = lvl;
            t.nodes_[p].parent = par;
            if (par == kNoParent) {
                if (root_seen) throw data_error("several roots in serialized tree");
                root_seen = true;
                t.root_ = p;
            } else if (par >= level_parent.size()) {
                throw data_error("parent id out of range");
            }
        }
        if (!root_seen) throw data_error("no root in serialized tree");
        t.l_max_ = t.nodes_[t.root_].level;
        t.l_min_ = t.l_max_;
        for (PointId p = 0; p < t.nodes_.size(); ++p) {
            t.l_min_ = std::min(t.l_min_, t.nodes_[p].level);
            if (t.nodes_[p].parent != kNoParent)
                t.nodes_[t.nodes_[p].parent].children[t.nodes_[p].level].push_back(p);
        }
        // subtree sizes bottom-up (children always sit at lower levels)
        std::vector<PointId> order(t.nodes_.size());
        std::iota(order.begin(), order.end(), PointId{0});
        std::sort(order.begin(), order.end(), [&](PointId a, PointId b) {
            return t.nodes_[a].level < t.nodes_[b].level;
        });
        for (PointId p : order)
            if (t.nodes_[p].parent != kNoParent)
                t.nodes_[t.nodes_[p].parent].subtree_size += t.nodes_[p].subtree_size;
        t.root_level_fixed_ = true;
        t.build_descendant_index();
        return t;
    }

    /// Maximum level j <= i at which p has at least one child; empty when
    /// p has no child at level <= i.
    std::optional<Level> next_level(PointId p, Level i) const {
        const auto& lv = nodes_[p].child_levels_asc;
        auto it = std::upper_bound(lv.begin(), lv.end(), i);
        if (it == lv.begin()) return std::nullopt;
        return *(it - 1);
    }

    /// |S_i(p)|: p itself plus the full subtrees of children at level <= i-1.
    std::size_t distinctive_size(PointId p, Level i) const {
        const auto& node = nodes_[p];
        const auto& lv = node.child_levels_asc;
        auto it = std::upper_bound(lv.begin(), lv.end(), i - 1);
        std::size_t idx = static_cast<std::size_t>(it - lv.begin());
        return 1 + (idx == 0 ? 0 : node.child_size_prefix[idx - 1]);
    }

    /// S_i(p) as an explicit id set.
    std::vector<PointId> distinctive_descendants(PointId p, Level i) const {
        if (i > nodes_[p].level + 1)
            throw std::invalid_argument("distinctive_descendants: level above l(p)+1");
        std::vector<PointId> out{p};
        for (const auto& [lvl, kids] : nodes_[p].children) {
            if (lvl > i - 1) continue;
            for (PointId c : kids) collect_subtree(c, out);
        }
        return out;
    }

    std::vector<PointId> subtree(PointId p) const {
        std::vector<PointId> out;
        collect_subtree(p, out);
        return out;
    }

    /// Distinct node levels, descending (the levels a top-down traversal visits).
    std::vector<Level> height_levels() const {
        std::vector<Level> h;
        h.reserve(size());
        for (const auto& nd : nodes_) h.push_back(nd.level);
        std::sort(h.begin(), h.end(), std::greater<Level>());
        h.erase(std::unique(h.begin(), h.end()), h.end());
        return h;
    }

    /// Essential levels of p: l(p) together with l(c)+1 for every child c.
    /// These are the levels where S_i(p) changes; the total over all nodes is
    /// at most 2n.
    std::vector<Level> essential_levels(PointId p) const {
        std::vector<Level> e;
        e.push_back(nodes_[p].level);
        for (Level l : nodes_[p].child_levels_asc) e.push_back(l + 1);
        std::sort(e.begin(), e.end());
        e.erase(std::unique(e.begin(), e.end()), e.end());
        return e;
    }

    struct TreeReport {
        bool covering_ok = true;
        bool separation_ok = true;
        bool partition_ok = true;  // one node per point, single root, parents consistent
        bool all_ok() const { return covering_ok && separation_ok && partition_ok; }
    };

    TreeReport verify() const {
        TreeReport r;
        const std::size_t n = size();
        std::size_t roots = 0;
        for (PointId p = 0; p < n; ++p) {
            const auto& nd = nodes_[p];
            if (nd.parent == kNoParent) {
                ++roots;
                if (p != root_ || nd.level != l_max_) r.partition_ok = false;
            } else {
                if (nd.level >= nodes_[nd.parent].level) r.covering_ok = false;
                if (space_->distance(p, nd.parent) > pow2(nd.level + 1)) r.covering_ok = false;
            }
            for (const auto& [lvl, kids] : nd.children)
                for (PointId c : kids)
                    if (nodes_[c].parent != p || nodes_[c].level != lvl) r.partition_ok = false;
        }
        if (roots != 1) r.partition_ok = false;
        if (nodes_[root_].subtree_size != n) r.partition_ok = false;
        // Separation pairwise within each realized cover set.
        std::vector<PointId> by_level(n);
        std::iota(by_level.begin(), by_level.end(), PointId{0});
        std::sort(by_level.begin(), by_level.end(), [&](PointId a, PointId b) {
            return nodes_[a].level > nodes_[b].level;
        });
        std::vector<PointId> cover;
        std::size_t pos = 0;
        for (Level i : height_levels()) {
            while (pos < n && nodes_[by_level[pos]].level >= i) cover.push_back(by_level[pos++]);
            double sep = pow2(i);
            for (std::size_t a = 0; a < cover.size() && r.separation_ok; ++a)
                for (std::size_t b = a + 1; b < cover.size(); ++b)
                    if (space_->distance(cover[a], cover[b]) <= sep) {
                        r.separation_ok = false;
                        break;
                    }
        }
        return r;
    }

    // test hook: deliberately move a node's level (invalidates the index)
    void mutate_level_for_tests(PointId p, Level l) { nodes_[p].level = l; }

private:
    void collect_subtree(PointId p, std::vector<PointId>& out) const {
        out.push_back(p);
        for (const auto& [lvl, kids] : nodes_[p].children)
            for (PointId c : kids) collect_subtree(c, out);
    }

    // Insertion descends candidate frames one level at a time. The frame at
    // level i holds every node q with l(q) >= i and d(p,q) <= 2^(i+1); the
    // step to level i-1 expands children at level i-1 and re-filters at 2^i.
    // When a frame comes up empty, p attaches one level below the deepest
    // frame whose nearest candidate is within 2^i: covering holds by the
    // filter, separation because any closer cover point would have kept a
    // deeper frame alive.
    void insert(PointId p) {
        double droot = space_->distance(p, root_);
        if (droot == 0.0)
            throw std::invalid_argument("duplicate points: separation cannot hold (dedup first)");
        if (!root_level_fixed_) {
            // first real insertion pins the root level at ceil(log2 d)
            Level l = ceil_log2(droot);
            nodes_[root_].level = l;
            l_max_ = l;
            l_min_ = std::min(l_min_, l);
            root_level_fixed_ = true;
        }
        while (droot > pow2(l_max_)) {  // lazy re-rooting: raise the root level
            ++l_max_;
            nodes_[root_].level = l_max_;
        }

        struct FrameInfo {
            Level i;
            double dmin;
            PointId closest;
        };
        std::vector<FrameInfo> trail;
        std::vector<std::pair<double, PointId>> frame{{droot, root_}};
        trail.push_back({l_max_, droot, root_});

        Level i = l_max_;
        while (true) {
            // Build the frame at level i-1.
            std::vector<std::pair<double, PointId>> next;
            double filter = pow2(i);
            for (const auto& [d, q] : frame) {
                if (d <= filter) next.push_back({d, q});
                auto it = nodes_[q].children.find(i - 1);
                if (it == nodes_[q].children.end()) continue;
                for (PointId c : it->second) {
                    double dc = space_->distance(p, c);
                    if (dc == 0.0)
                        throw std::invalid_argument(
                            "duplicate points: separation cannot hold (dedup first)");
                    if (dc <= filter) next.push_back({dc, c});
                }
            }
            if (next.empty()) break;
            double dmin = kInfinity;
            PointId closest = kNoParent;
            for (const auto& [d, q] : next)
                if (d < dmin) {
                    dmin = d;
                    closest = q;
                }
            --i;
            trail.push_back({i, dmin, closest});
            // Once no candidate has children left, the remaining frames only
            // shrink by the filter; jump to the last level the closest
            // candidate survives. (The children map is live here; the packed
            // index exists only after build.)
            bool has_child = false;
            for (const auto& [d, q] : next) {
                const auto& ch = nodes_[q].children;
                if (!ch.empty() && ch.rbegin()->first <= i - 1) {
                    has_child = true;
                    break;
                }
            }
            if (!has_child) {
                // Only the filter shrinks from here on; the deepest admissible
                // frame sits at the smallest m with dmin <= 2^m.
                Level ma = ceil_log2(dmin);
                if (ma < i) trail.push_back({ma, dmin, closest});
                frame.clear();
                break;
            }
            frame = std::move(next);
        }

        // Attach below the deepest admissible frame.
        for (std::size_t s = trail.size(); s-- > 0;) {
            const FrameInfo& fr = trail[s];
            if (fr.dmin <= pow2(fr.i)) {
                attach(p, fr.closest, fr.i - 1);
                return;
            }
        }
        throw internal_error("cover tree insert failed to find a parent");
    }

    void attach(PointId p, PointId parent, Level level) {
        nodes_[p].level = level;
        nodes_[p].parent = parent;
        nodes_[parent].children[level].push_back(p);
        l_min_ = std::min(l_min_, level);
        for (PointId a = parent; a != kNoParent; a = nodes_[a].parent) ++nodes_[a].subtree_size;
    }

    void build_descendant_index() {
        for (auto& nd : nodes_) {
            nd.child_levels_asc.clear();
            nd.child_size_prefix.clear();
            std::size_t run = 0;
            for (auto it = nd.children.rbegin(); it != nd.children.rend(); ++it) {
                std::size_t at_level = 0;
                for (PointId c : it->second) at_level += nodes_[c].subtree_size;
                run += at_level;
                nd.child_levels_asc.push_back(it->first);
                nd.child_size_prefix.push_back(run);
            }
        }
    }

    const MetricSpaceView* space_ = nullptr;
    PointId root_ = 0;
    Level l_max_ = 0;
    Level l_min_ = 0;
    bool root_level_fixed_ = false;
    std::vector<Node> nodes_;
};

}  // namespace metric_forest
