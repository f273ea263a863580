#include <doctest.h>

#include <algorithm>

#include "metric_forest/datasets.hpp"
#include "metric_forest/knn.hpp"

using namespace metric_forest;

TEST_CASE("lambda_k prefix rule") {
    CHECK(lambda_k_index({1, 2, 3}, 3) == 1);  // prefixes 1,3,6 -> second node
    CHECK(lambda_k_index({1, 2, 3}, 6) == 2);  // whole prefix fits -> last
    CHECK(lambda_k_index({1, 2, 3}, 100) == 2);
    CHECK(lambda_k_index({5, 1, 1}, 1) == 0);  // degenerate: first subtree alone exceeds k
    CHECK_THROWS_AS(lambda_k_index({}, 1), std::invalid_argument);
}

TEST_CASE("brute force oracle basics") {
    auto s = gen_line_cloud({1, 2, 3, 4, 5});
    std::vector<double> q0{0.0};
    auto r = knn_bruteforce(s.size(), [&](PointId r2) { return s.distance_to(q0, r2); }, 1);
    CHECK(r.neighbors.size() == 1);
    CHECK(r.neighbors[0].first == 0);
    CHECK(r.neighbors[0].second == 1.0);

    auto all = knn_bruteforce(s, 0, 10);  // k > n clips to n, sorted by distance
    CHECK(all.neighbors.size() == 5);
    for (std::size_t i = 1; i < all.neighbors.size(); ++i)
        CHECK(all.neighbors[i - 1].second <= all.neighbors[i].second);
}

TEST_CASE("exact knn on the line: q=3.5, k=2") {
    auto s = gen_line_cloud({1, 2, 3, 4, 5});
    auto t = CompressedCoverTree::build(s);
    std::vector<double> q{3.5};
    auto r = knn_exact(t, std::span<const double>(q), 2);
    REQUIRE(r.neighbors.size() == 2);
    CHECK(r.neighbors[0].second == 0.5);
    CHECK(r.neighbors[1].second == 0.5);
    CHECK(r.neighbors[0].first == 2);  // ids {3,4} are indices 2,3; lowest first
    CHECK(r.neighbors[1].first == 3);
}

TEST_CASE("query on a reference point returns distance zero") {
    auto cloud = gen_uniform_cloud(50, 3, 2);
    auto s = MetricSpaceView::euclidean(cloud);
    auto t = CompressedCoverTree::build(s);
    auto r = knn_exact(t, PointId{17}, 1);
    CHECK(r.neighbors[0].first == 17);
    CHECK(r.neighbors[0].second == 0.0);
}

TEST_CASE("oracle equivalence over random clouds") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        Rng rng(Rng::split(seed, 2));
        std::size_t n = 2 + rng.integer(500);
        std::size_t dim = 1 + rng.integer(3);
        auto cloud = gen_uniform_cloud(n, dim, seed + 40);
        auto s = MetricSpaceView::euclidean(cloud);
        auto t = CompressedCoverTree::build(s);
        for (int trial = 0; trial < 8; ++trial) {
            std::vector<double> q(dim);
            for (auto& c : q) c = rng.uniform(-0.2, 1.2);
            std::size_t k = 1 + rng.integer(8);
            auto exact = knn_exact(t, std::span<const double>(q), k);
            auto brute =
                knn_bruteforce(n, [&](PointId r2) { return s.distance_to(q, r2); }, k);
            CHECK(exact.distances() == brute.distances());
        }
    }
}

TEST_CASE("oracle equivalence on explicit-matrix spaces") {
    auto s = gen_two_separated_sets(4);
    auto t = CompressedCoverTree::build(s);
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        PointId q = static_cast<PointId>(rng.integer(s.size()));
        std::size_t k = 1 + rng.integer(6);
        CHECK(knn_exact(t, q, k).distances() == knn_bruteforce(s, q, k).distances());
    }
}

TEST_CASE("k-th distance is monotone in k") {
    auto cloud = gen_uniform_cloud(120, 2, 5);
    auto s = MetricSpaceView::euclidean(cloud);
    auto t = CompressedCoverTree::build(s);
    std::vector<double> q{0.4, 0.6};
    double prev = 0.0;
    for (std::size_t k = 1; k <= 20; ++k) {
        auto r = knn_exact(t, std::span<const double>(q), k);
        CHECK(r.neighbors.back().second >= prev);
        prev = r.neighbors.back().second;
    }
}

TEST_CASE("audited search passes on random data") {
    auto cloud = gen_uniform_cloud(200, 2, 13);
    auto s = MetricSpaceView::euclidean(cloud);
    auto t = CompressedCoverTree::build(s);
    Rng rng(51);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> q{rng.uniform(), rng.uniform()};
        auto audited =
            knn_exact_audited(t, [&](PointId r2) { return s.distance_to(q, r2); }, 5);
        auto brute = knn_bruteforce(s.size(), [&](PointId r2) { return s.distance_to(q, r2); }, 5);
        CHECK(audited.distances() == brute.distances());
    }
}

TEST_CASE("approximate knn: tiny epsilon matches exact") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto cloud = gen_uniform_cloud(150, 2, seed + 60);
        auto s = MetricSpaceView::euclidean(cloud);
        auto t = CompressedCoverTree::build(s);
        Rng rng(seed);
        std::vector<double> q{rng.uniform(), rng.uniform()};
        auto a = knn_approx(t, std::span<const double>(q), 4, 1e-9);
        auto e = knn_exact(t, std::span<const double>(q), 4);
        CHECK(a.distances() == e.distances());
    }
}

TEST_CASE("approximate knn: rank-wise ratio within 1+eps") {
    for (double eps : {0.1, 0.5, 1.0}) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            auto cloud = gen_uniform_cloud(300, 3, seed + 90);
            auto s = MetricSpaceView::euclidean(cloud);
            auto t = CompressedCoverTree::build(s);
            Rng rng(seed * 3 + 1);
            for (int trial = 0; trial < 5; ++trial) {
                std::vector<double> q{rng.uniform(), rng.uniform(), rng.uniform()};
                std::size_t k = 1 + rng.integer(5);
                auto approx = knn_approx(t, std::span<const double>(q), k, eps);
                auto brute =
                    knn_bruteforce(s.size(), [&](PointId r2) { return s.distance_to(q, r2); }, k);
                REQUIRE(approx.neighbors.size() == brute.neighbors.size());
                for (std::size_t i = 0; i < brute.neighbors.size(); ++i) {
                    double truth = brute.neighbors[i].second;
                    CHECK(approx.neighbors[i].second <= truth * (1.0 + eps) + 1e-15);
                }
            }
        }
    }
}

TEST_CASE("error paths") {
    auto s = gen_line_cloud({1, 2});
    auto t = CompressedCoverTree::build(s);
    CHECK_THROWS_AS(knn_exact(t, PointId{0}, 0), std::invalid_argument);
    CHECK_THROWS_AS(knn_approx(t, PointId{0}, 1, 0.0), std::invalid_argument);
}
