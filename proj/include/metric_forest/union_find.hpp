#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "metric_forest/common.hpp"

namespace metric_forest {

/// Union-find over point ids with union by rank, path compression, and a
/// member list per component (intrusive chains, O(1) splice on merge).
class PartitionForest {
public:
    explicit PartitionForest(std::size_t n)
        : parent_(n), rank_(n, 0), next_(n, kEnd), head_(n), tail_(n), size_(n, 1), min_id_(n),
          count_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
        std::iota(head_.begin(), head_.end(), std::size_t{0});
        std::iota(tail_.begin(), tail_.end(), std::size_t{0});
        std::iota(min_id_.begin(), min_id_.end(), std::size_t{0});
    }

    std::size_t size() const { return parent_.size(); }
    std::size_t component_count() const { return count_; }

    std::size_t find(std::size_t a) const {
        std::size_t root = a;
        while (parent_[root] != root) root = parent_[root];
        while (parent_[a] != root) {
            std::size_t up = parent_[a];
            parent_[a] = root;
            a = up;
        }
        return root;
    }

    bool same(std::size_t a, std::size_t b) const { return find(a) == find(b); }

    /// Merges the components of a and b; returns false when already joined.
    bool unite(std::size_t a, std::size_t b) {
        std::size_t ra = find(a), rb = find(b);
        if (ra == rb) return false;
        if (rank_[ra] < rank_[rb]) std::swap(ra, rb);
        if (rank_[ra] == rank_[rb]) ++rank_[ra];
        parent_[rb] = ra;
        next_[tail_[ra]] = head_[rb];
        tail_[ra] = tail_[rb];
        size_[ra] += size_[rb];
        min_id_[ra] = std::min(min_id_[ra], min_id_[rb]);
        --count_;
        return true;
    }

    std::size_t component_size(std::size_t a) const { return size_[find(a)]; }

    std::vector<std::size_t> members(std::size_t a) const {
        std::size_t root = find(a);
        std::vector<std::size_t> out;
        out.reserve(size_[root]);
        for (std::size_t v = head_[root]; v != kEnd; v = next_[v]) out.push_back(v);
        return out;
    }

    /// Component roots ordered by their smallest member id (deterministic
    /// iteration order for per-cluster passes).
    std::vector<std::size_t> roots() const {
        std::vector<std::size_t> out;
        out.reserve(count_);
        for (std::size_t v = 0; v < parent_.size(); ++v)
            if (find(v) == v) out.push_back(v);
        std::sort(out.begin(), out.end(),
                  [&](std::size_t a, std::size_t b) { return min_id_[a] < min_id_[b]; });
        return out;
    }

private:
    static constexpr std::size_t kEnd = static_cast<std::size_t>(-1);

    mutable std::vector<std::size_t> parent_;
    std::vector<std::size_t> rank_;
    std::vector<std::size_t> next_, head_, tail_, size_, min_id_;
    std::size_t count_;
};

}  // namespace metric_forest
