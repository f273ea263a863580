#pragma once

#include <algorithm>
#include <queue>
#include <vector>

#include "metric_forest/common.hpp"

namespace metric_forest {

/// Undirected weighted graph with adjacency lists; no self-loops, positive
/// lengths.
class WeightedGraph {
public:
    struct Edge {
        std::size_t a, b;
        double w;
    };

    explicit WeightedGraph(std::size_t n = 0) : adj_(n) {}

    std::size_t vertex_count() const { return adj_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<std::pair<std::size_t, double>>& neighbors(std::size_t v) const {
        return adj_[v];
    }

    void add_edge(std::size_t a, std::size_t b, double w) {
        if (a == b) throw std::invalid_argument("self-loop");
        if (!(w > 0)) throw std::invalid_argument("edge length must be positive");
        if (a >= adj_.size() || b >= adj_.size()) throw std::invalid_argument("vertex out of range");
        edges_.push_back({a, b, w});
        adj_[a].push_back({b, w});
        adj_[b].push_back({a, w});
    }

    bool has_edge(std::size_t a, std::size_t b) const {
        for (auto& [v, w] : adj_[a])
            if (v == b) return true;
        return false;
    }

    double max_edge_length() const {
        double m = 0.0;
        for (const auto& e : edges_) m = std::max(m, e.w);
        return m;
    }

    bool connected() const {
        if (adj_.empty()) return true;
        std::vector<char> seen(adj_.size(), 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        std::size_t cnt = 0;
        while (!stack.empty()) {
            std::size_t v = stack.back();
            stack.pop_back();
            ++cnt;
            for (auto& [w, len] : adj_[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
        }
        return cnt == adj_.size();
    }

    /// Single-source shortest paths (full Dijkstra).
    std::vector<double> dijkstra(std::size_t source) const {
        std::vector<double> dist(adj_.size(), kInfinity);
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
        dist[source] = 0.0;
        heap.push({0.0, source});
        while (!heap.empty()) {
            auto [d, v] = heap.top();
            heap.pop();
            if (d > dist[v]) continue;
            for (auto& [w, len] : adj_[v]) {
                double t = d + len;
                if (t < dist[w]) {
                    dist[w] = t;
                    heap.push({t, w});
                }
            }
        }
        return dist;
    }

private:
    std::vector<std::vector<std::pair<std::size_t, double>>> adj_;
    std::vector<Edge> edges_;
};

}  // namespace metric_forest
