#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "metric_forest/common.hpp"

namespace metric_forest {

using PointId = std::size_t;

/// A finite metric space: either a Euclidean point cloud (rows of equal
/// dimension, L2 distance) or an explicit dense distance matrix. Immutable
/// after construction; safe to read from many threads.
class MetricSpaceView {
public:
    enum class Kind { euclidean, explicit_matrix };

    static constexpr std::size_t kMaxExplicitSize = 20000;

    static MetricSpaceView euclidean(std::vector<std::vector<double>> points) {
        if (points.empty()) throw std::invalid_argument("empty point cloud");
        const std::size_t dim = points.front().size();
        if (dim == 0) throw std::invalid_argument("points must have at least one coordinate");
        for (const auto& p : points)
            if (p.size() != dim) throw data_error("ragged point cloud: inconsistent dimension");
        MetricSpaceView s;
        s.kind_ = Kind::euclidean;
        s.n_ = points.size();
        s.dim_ = dim;
        s.coords_.reserve(s.n_ * dim);
        for (const auto& p : points) s.coords_.insert(s.coords_.end(), p.begin(), p.end());
        return s;
    }

    static MetricSpaceView explicit_matrix(std::vector<double> matrix, std::size_t n) {
        if (n == 0) throw std::invalid_argument("empty distance matrix");
        if (n > kMaxExplicitSize) throw data_error("explicit matrix too large (cap 20000)");
        if (matrix.size() != n * n) throw data_error("distance matrix is not n x n");
        MetricSpaceView s;
        s.kind_ = Kind::explicit_matrix;
        s.n_ = n;
        s.matrix_ = std::move(matrix);
        return s;
    }

    Kind kind() const { return kind_; }
    std::size_t size() const { return n_; }
    std::size_t dimension() const { return dim_; }

    std::span<const double> point(PointId a) const {
        check_id(a);
        return {coords_.data() + a * dim_, dim_};
    }

    double distance(PointId a, PointId b) const {
        check_id(a);
        check_id(b);
        if (kind_ == Kind::explicit_matrix) return matrix_[a * n_ + b];
        const double* pa = coords_.data() + a * dim_;
        const double* pb = coords_.data() + b * dim_;
        double s = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            double d = pa[i] - pb[i];
            s += d * d;
        }
        return std::sqrt(s);
    }

    /// Distance from an external query point to point `b` (euclidean only).
    double distance_to(std::span<const double> q, PointId b) const {
        if (kind_ != Kind::euclidean) throw std::invalid_argument("external queries need a euclidean space");
        if (q.size() != dim_) throw std::invalid_argument("query dimension mismatch");
        check_id(b);
        const double* pb = coords_.data() + b * dim_;
        double s = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            double d = q[i] - pb[i];
            s += d * d;
        }
        return std::sqrt(s);
    }

private:
    void check_id(PointId a) const {
        if (a >= n_) throw std::invalid_argument("point id out of range");
    }

    Kind kind_ = Kind::euclidean;
    std::size_t n_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> coords_;  // n * dim, row major
    std::vector<double> matrix_;  // n * n
};

struct MetricReport {
    bool symmetry_ok = true;
    bool identity_ok = true;
    bool triangle_ok = true;
    double worst_violation = 0.0;  // max d(x,z) - d(x,y) - d(y,z) over all triples

    bool all_ok() const { return symmetry_ok && identity_ok && triangle_ok; }
};

/// Exhaustive O(n^3) check of the metric axioms.
inline MetricReport verify_metric_axioms(const MetricSpaceView& space,
                                         std::size_t cap = 2000,
                                         double tol = 1e-12) {
    const std::size_t n = space.size();
    if (n > cap) throw data_error("verify_metric_axioms: size exceeds cap");
    MetricReport r;
    for (PointId a = 0; a < n; ++a) {
        if (std::abs(space.distance(a, a)) > tol) r.identity_ok = false;
        for (PointId b = a + 1; b < n; ++b) {
            double dab = space.distance(a, b);
            double dba = space.distance(b, a);
            if (std::abs(dab - dba) > tol) r.symmetry_ok = false;
            if (dab <= tol) r.identity_ok = false;  // distinct points at distance 0
            if (dab < 0) r.identity_ok = false;
        }
    }
    for (PointId x = 0; x < n; ++x)
        for (PointId z = 0; z < n; ++z) {
            if (x == z) continue;
            double dxz = space.distance(x, z);
            for (PointId y = 0; y < n; ++y) {
                if (y == x || y == z) continue;
                double slack = dxz - space.distance(x, y) - space.distance(y, z);
                if (slack > r.worst_violation) r.worst_violation = slack;
            }
        }
    if (r.worst_violation > tol) r.triangle_ok = false;
    return r;
}

/// Smallest positive pairwise distance and the diameter.
inline std::pair<double, double> min_max_pairwise(const MetricSpaceView& space) {
    const std::size_t n = space.size();
    double dmin = kInfinity, dmax = 0.0;
    for (PointId a = 0; a < n; ++a)
        for (PointId b = a + 1; b < n; ++b) {
            double d = space.distance(a, b);
            if (d > 0 && d < dmin) dmin = d;
            if (d > dmax) dmax = d;
        }
    return {dmin, dmax};
}

/// Expansion constant: max(2, sup over centers x and realized radii r of
/// |B(x,2r)| / |B(x,r)|). Radii run over all realized pairwise distances;
/// within one center's distance staircase the ratio is maximized at the
/// largest realized radius below the next step, so only those are probed.
inline double expansion_constant(const MetricSpaceView& space) {
    const std::size_t n = space.size();
    if (n == 0) throw std::invalid_argument("expansion_constant: empty space");
    if (n == 1) return 2.0;

    std::vector<double> all;
    all.reserve(n * (n - 1) / 2);
    for (PointId a = 0; a < n; ++a)
        for (PointId b = a + 1; b < n; ++b) all.push_back(space.distance(a, b));
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());

    double best = 2.0;
    std::vector<double> dx(n);
    for (PointId x = 0; x < n; ++x) {
        for (PointId b = 0; b < n; ++b) dx[b] = space.distance(x, b);
        std::sort(dx.begin(), dx.end());
        auto ball = [&](double r) {
            return static_cast<double>(std::upper_bound(dx.begin(), dx.end(), r) - dx.begin());
        };
        // Distinct steps of |B(x,.)|.
        for (std::size_t j = 0; j < n; ++j) {
            if (j + 1 < n && dx[j + 1] == dx[j]) continue;  // same step
            double denom = static_cast<double>(j + 1);
            // Largest realized radius strictly below the next step of this center.
            double r;
            if (j + 1 < n) {
                auto it = std::lower_bound(all.begin(), all.end(), dx[j + 1]);
                if (it == all.begin()) continue;
                r = *(it - 1);
                if (r < dx[j]) continue;  // no realized radius in this step interval
            } else {
                r = all.back();
            }
            double ratio = ball(2.0 * r) / denom;
            if (ratio > best) best = ratio;
        }
    }
    return best;
}

struct MetricStats {
    double d_min = 0.0;
    double diameter = 0.0;
    double aspect_ratio = 1.0;
    double expansion = 2.0;
};

inline MetricStats metric_stats(const MetricSpaceView& space) {
    MetricStats st;
    auto [dmin, dmax] = min_max_pairwise(space);
    st.d_min = dmin;
    st.diameter = dmax;
    st.aspect_ratio = (space.size() > 1) ? dmax / dmin : 1.0;
    st.expansion = expansion_constant(space);
    return st;
}

/// Hausdorff distance between two non-empty subsets of the same space.
inline double hausdorff(const MetricSpaceView& space,
                        const std::vector<PointId>& A,
                        const std::vector<PointId>& B) {
    if (A.empty() || B.empty()) throw std::invalid_argument("hausdorff: empty set");
    auto directed = [&](const std::vector<PointId>& from, const std::vector<PointId>& to) {
        double worst = 0.0;
        for (PointId a : from) {
            double best = kInfinity;
            for (PointId b : to) best = std::min(best, space.distance(a, b));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(A, B), directed(B, A));
}

/// True iff every distinct pair in S is at distance >= delta.
inline bool is_delta_sparse(const MetricSpaceView& space,
                            const std::vector<PointId>& S, double delta) {
    for (std::size_t i = 0; i < S.size(); ++i)
        for (std::size_t j = i + 1; j < S.size(); ++j)
            if (space.distance(S[i], S[j]) < delta) return false;
    return true;
}

}  // namespace metric_forest
