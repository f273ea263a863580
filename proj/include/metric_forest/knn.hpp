#pragma once

#include <algorithm>
#include <functional>
#include <queue>
#include <vector>

#include "metric_forest/common.hpp"
#include "metric_forest/cover_tree.hpp"

namespace metric_forest {

/// Neighbors sorted by distance ascending; ties broken by id so results are
/// deterministic. Length is min(k, n).
struct KnnResult {
    std::vector<std::pair<PointId, double>> neighbors;  // (id, distance)

    std::vector<double> distances() const {
        std::vector<double> d;
        d.reserve(neighbors.size());
        for (auto& [id, dist] : neighbors) d.push_back(dist);
        return d;
    }
};

/// Ground-truth oracle: full scan and partial sort.
inline KnnResult knn_bruteforce(std::size_t n, const std::function<double(PointId)>& dist_to,
                                std::size_t k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (n == 0) throw std::invalid_argument("empty reference set");
    std::vector<std::pair<double, PointId>> all(n);
    for (PointId r = 0; r < n; ++r) all[r] = {dist_to(r), r};
    std::size_t kk = std::min(k, n);
    std::partial_sort(all.begin(), all.begin() + kk, all.end());
    KnnResult res;
    res.neighbors.reserve(kk);
    for (std::size_t i = 0; i < kk; ++i) res.neighbors.push_back({all[i].second, all[i].first});
    return res;
}

inline KnnResult knn_bruteforce(const MetricSpaceView& space, PointId q, std::size_t k) {
    return knn_bruteforce(space.size(), [&](PointId r) { return space.distance(q, r); }, k);
}

/// lambda_k over candidates ordered by distance ascending: the node at the
/// largest index whose prefix sum of subtree sizes stays <= k. When even the
/// first subtree exceeds k the nearest node is returned; its distance is then
/// still a usable (over-)estimate for pruning.
inline std::size_t lambda_k_index(const std::vector<std::size_t>& sizes_in_distance_order,
                                  std::size_t k) {
    if (sizes_in_distance_order.empty()) throw std::invalid_argument("lambda_k: empty candidate set");
    std::size_t sum = 0, best = 0;
    for (std::size_t i = 0; i < sizes_in_distance_order.size(); ++i) {
        sum += sizes_in_distance_order[i];
        if (sum <= k)
            best = i;
        else
            break;
    }
    return best;
}

namespace detail {

// Shared single-query traversal. epsilon == 0 gives the exact search.
//
// Candidates hold their still-pending descendant sets S_b; after expanding
// children at level b every pending point sits within 2^(b+1) of its
// candidate. d_ub is a running upper bound on the true k-th distance, fed by
// (a) the k-th best exact distance seen so far and (b) the subtree-counting
// bound d(q, r_s) + 2^(b+1) where r_s is the first candidate (by distance)
// whose prefix of pending sizes reaches k. A candidate whose pending points
// provably cannot enter the answer is dropped; with epsilon > 0 the drop
// threshold shrinks by 1+epsilon against the k-th best exact distance found
// so far, which keeps every returned distance within (1+epsilon) of the true
// distance at its rank.
inline KnnResult knn_traverse(const CompressedCoverTree& tree,
                              const std::function<double(PointId)>& dist_to, std::size_t k,
                              double epsilon,
                              const std::function<void(const std::vector<PointId>&, Level)>*
                                  prune_audit = nullptr) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    const std::size_t n = tree.size();
    if (n == 0) throw std::invalid_argument("empty tree");
    const std::size_t kk = std::min(k, n);

    // best kk exact distances seen so far; top = worst kept
    std::priority_queue<std::pair<double, PointId>> best;
    auto offer = [&](double d, PointId id) {
        if (best.size() < kk) {
            best.push({d, id});
        } else if (std::make_pair(d, id) < best.top()) {
            best.pop();
            best.push({d, id});
        }
    };

    struct Cand {
        double d;
        PointId id;
    };
    std::vector<Cand> R;
    double droot = dist_to(tree.root());
    R.push_back({droot, tree.root()});
    offer(droot, tree.root());

    double d_ub = kInfinity;
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
        // expand children at level lvl
        std::size_t old = R.size();
        for (std::size_t i = 0; i < old; ++i) {
            const auto& kids = tree.node(R[i].id).children;
            auto it = kids.find(lvl);
            if (it == kids.end()) continue;
            for (PointId c : it->second) {
                double dc = dist_to(c);
                R.push_back({dc, c});
                offer(dc, c);
            }
        }
        std::sort(R.begin(), R.end(), [](const Cand& a, const Cand& b2) {
            return a.d < b2.d || (a.d == b2.d && a.id < b2.id);
        });
        // subtree-counting bound on the k-th distance
        std::size_t prefix = 0;
        for (const auto& c : R) {
            prefix += tree.distinctive_size(c.id, lvl);
            if (prefix >= kk) {
                d_ub = std::min(d_ub, c.d + radius);
                break;
            }
        }
        if (best.size() == kk) d_ub = std::min(d_ub, best.top().first);

        double keep = d_ub + radius;
        if (epsilon > 0 && best.size() == kk)
            keep = std::min(keep, best.top().first / (1.0 + epsilon) + radius);
        std::vector<Cand> survivors;
        survivors.reserve(R.size());
        for (const auto& c : R)
            if (c.d <= keep) survivors.push_back(c);
        R = std::move(survivors);

        if (prune_audit) {
            std::vector<PointId> ids;
            ids.reserve(R.size());
            for (const auto& c : R) ids.push_back(c.id);
            (*prune_audit)(ids, lvl);
        }
        b = next_boundary(lvl - 1);
    }

    std::vector<std::pair<double, PointId>> out;
    out.reserve(best.size());
    while (!best.empty()) {
        out.push_back(best.top());
        best.pop();
    }
    std::sort(out.begin(), out.end());
    KnnResult res;
    for (auto& [d, id] : out) res.neighbors.push_back({id, d});
    return res;
}

}  // namespace detail

/// Exact k nearest neighbors of an external query; dist_to gives the distance
/// from the query to each reference id.
inline KnnResult knn_exact(const CompressedCoverTree& tree,
                           const std::function<double(PointId)>& dist_to, std::size_t k) {
    return detail::knn_traverse(tree, dist_to, k, 0.0);
}

inline KnnResult knn_exact(const CompressedCoverTree& tree, std::span<const double> query,
                           std::size_t k) {
    const auto& space = tree.space();
    return knn_exact(tree, [&](PointId r) { return space.distance_to(query, r); }, k);
}

inline KnnResult knn_exact(const CompressedCoverTree& tree, PointId query, std::size_t k) {
    const auto& space = tree.space();
    return knn_exact(tree, [&](PointId r) { return space.distance(query, r); }, k);
}

/// (1+epsilon)-approximate k nearest neighbors: each returned distance is at
/// most (1+epsilon) times the true distance of its rank.
inline KnnResult knn_approx(const CompressedCoverTree& tree,
                            const std::function<double(PointId)>& dist_to, std::size_t k,
                            double epsilon) {
    if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be > 0");
    return detail::knn_traverse(tree, dist_to, k, epsilon);
}

inline KnnResult knn_approx(const CompressedCoverTree& tree, std::span<const double> query,
                            std::size_t k, double epsilon) {
    const auto& space = tree.space();
    return knn_approx(tree, [&](PointId r) { return space.distance_to(query, r); }, k, epsilon);
}

inline KnnResult knn_approx(const CompressedCoverTree& tree, PointId query, std::size_t k,
                            double epsilon) {
    const auto& space = tree.space();
    return knn_approx(tree, [&](PointId r) { return space.distance(query, r); }, k, epsilon);
}

/// Instrumented exact search: after every pruning pass, checks that the true
/// k nearest neighbors still sit inside the surviving candidates' pending
/// descendant sets. Throws internal_error on violation.
inline KnnResult knn_exact_audited(const CompressedCoverTree& tree,
                                   const std::function<double(PointId)>& dist_to, std::size_t k) {
    const std::size_t n = tree.size();
    KnnResult truth = knn_bruteforce(n, dist_to, k);
    double truth_kth = truth.neighbors.back().second;
    std::function<void(const std::vector<PointId>&, Level)> audit =
        [&](const std::vector<PointId>& survivors, Level lvl) {
            std::vector<char> reachable(n, 0);
            for (PointId r : survivors)
                for (PointId w : tree.distinctive_descendants(r, lvl)) reachable[w] = 1;
            for (auto& [id, d] : truth.neighbors)
                if (!reachable[id] && d < truth_kth)
                    throw internal_error("knn prune dropped a strict nearest neighbor");
            // at the k-th distance a tied representative must survive
            std::size_t have = 0;
            for (auto& [id, d] : truth.neighbors)
                if (reachable[id]) ++have;
            if (have < truth.neighbors.size()) {
                std::size_t ties = 0;
                for (PointId w = 0; w < n; ++w)
                    if (reachable[w] && dist_to(w) <= truth_kth) ++ties;
                if (ties < truth.neighbors.size())
                    throw internal_error("knn prune lost the k-th neighbor");
            }
        };
    return detail::knn_traverse(tree, dist_to, k, 0.0, &audit);
}

}  // namespace metric_forest
