#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "metric_forest/common.hpp"
#include "metric_forest/cover_tree.hpp"

namespace metric_forest {

/// Sigmoid kernel K(x) = 1/(1 + exp(p x + q)) pinned by K(r - t/2) = 0.99 and
/// K(r + t/2) = 0.01. Closed form: p = 2 ln(99)/t, q = -r p.
struct SigmoidKernel {
    double r = 0.0;
    double t = 0.0;
    double p = 0.0;
    double q = 0.0;

    double operator()(double x) const {
        double e = p * x + q;
        if (e > 700.0) return 0.0;
        if (e < -700.0) return 1.0;
        return 1.0 / (1.0 + std::exp(e));
    }
};

inline SigmoidKernel fit_sigmoid(double r, double t) {
    if (!(r > 0.0) || !(t > 0.0)) throw std::invalid_argument("fit_sigmoid: r and t must be positive");
    SigmoidKernel k;
    k.r = r;
    k.t = t;
    k.p = 2.0 * std::log(99.0) / t;
    k.q = -r * k.p;
    return k;
}

struct KdeResult {
    std::vector<double> values;          // f per query
    double epsilon = 0.0;                // 0 for exact
    bool approximate() const { return epsilon > 0.0; }
};

/// Exact kernel density estimate for one query.
inline double kde_point_exact(const SigmoidKernel& kernel,
                              const std::function<double(PointId)>& dist_to, std::size_t n_ref) {
    double f = 0.0;
    for (PointId r = 0; r < n_ref; ++r) f += kernel(dist_to(r));
    return f;
}

/// Tree-pruned evaluation for one query. A candidate whose kernel range over
/// its pending descendant ball is narrower than epsilon contributes
/// size * K(midpoint) and is dropped; every remaining point is evaluated
/// exactly, so the per-query error stays below epsilon * |R|.
inline double kde_point_approx(const SigmoidKernel& kernel, const CompressedCoverTree& tree,
                               const std::function<double(PointId)>& dist_to, double epsilon) {
    if (!(epsilon > 0)) throw std::invalid_argument("kde_point_approx: epsilon must be > 0");
    struct Cand {
        double d;
        PointId id;
    };
    double f = 0.0;
    std::vector<Cand> R{{dist_to(tree.root()), tree.root()}};

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
        // children at level lvl are still pending: radius covers them too
        const double radius = pow2(lvl + 2);
        std::vector<Cand> keep;
        keep.reserve(R.size());
        for (const auto& c : R) {
            double d_lo = std::max(0.0, c.d - radius);
            double d_hi = c.d + radius;
            if (kernel(d_lo) - kernel(d_hi) < epsilon) {
                f += static_cast<double>(tree.distinctive_size(c.id, lvl + 1)) *
                     kernel((d_lo + d_hi) / 2.0);
            } else {
                keep.push_back(c);
            }
        }
        R = std::move(keep);
        if (R.empty()) return f;
        // expand children at level lvl
        std::size_t old = R.size();
        for (std::size_t i = 0; i < old; ++i) {
            const auto& kids = tree.node(R[i].id).children;
            auto it = kids.find(lvl);
            if (it == kids.end()) continue;
            for (PointId c : it->second) R.push_back({dist_to(c), c});
        }
        b = next_boundary(lvl - 1);
    }
    for (const auto& c : R) f += kernel(c.d);
    return f;
}

/// Exact KDE of euclidean queries against a euclidean reference space.
inline KdeResult kde_exact(const SigmoidKernel& kernel, const MetricSpaceView& queries,
                           const MetricSpaceView& refs, unsigned threads = 1) {
    KdeResult out;
    out.values.resize(queries.size());
    parallel_for(queries.size(), threads, [&](std::size_t qi) {
        auto q = queries.point(qi);
        out.values[qi] = kde_point_exact(
            kernel, [&](PointId r) { return refs.distance_to(q, r); }, refs.size());
    });
    return out;
}

inline KdeResult kde_approx(const SigmoidKernel& kernel, const MetricSpaceView& queries,
                            const CompressedCoverTree& ref_tree, double epsilon,
                            unsigned threads = 1) {
    KdeResult out;
    out.epsilon = epsilon;
    out.values.resize(queries.size());
    const auto& refs = ref_tree.space();
    parallel_for(queries.size(), threads, [&](std::size_t qi) {
        auto q = queries.point(qi);
        out.values[qi] = kde_point_approx(
            kernel, ref_tree, [&](PointId r) { return refs.distance_to(q, r); }, epsilon);
    });
    return out;
}

}  // namespace metric_forest
