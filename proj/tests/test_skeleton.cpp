#include <doctest.h>

#include "metric_forest/datasets.hpp"
#include "metric_forest/skeleton.hpp"

using namespace metric_forest;

TEST_CASE("msg_k structure") {
    SUBCASE("k >= n-1 yields a connected graph containing the mst") {
        auto cloud = gen_uniform_cloud(20, 2, 7);
        auto s = MetricSpaceView::euclidean(cloud);
        auto g = msg_k(s, 19);
        CHECK(g.connected());
        auto mst = mst_oracle_prim(s);
        double mst_w = 0, have = 0;
        for (auto& e : mst.edges) {
            mst_w += e.length;
            for (auto& ge : g.edges())
                if ((ge.a == e.a && ge.b == e.b) || (ge.a == e.b && ge.b == e.a)) {
                    have += e.length;
                    break;
                }
        }
        CHECK(have == doctest::Approx(mst_w));
    }
    SUBCASE("collinear cloud with k=1 is path-like and connected") {
        auto s = gen_line_cloud({0, 1, 2, 3, 4, 5, 6});
        auto g = msg_k(s, 1);
        CHECK(g.connected());
        CHECK(g.vertex_count() == 7);
    }
    SUBCASE("already-connected NN graph gains no edges") {
        auto s = gen_line_cloud({0, 1, 2, 3});
        auto g3 = msg_k(s, 3);  // complete-ish
        auto count3 = g3.edges().size();
        auto g3b = msg_k(s, 3);
        CHECK(g3b.edges().size() == count3);
        CHECK(g3.connected());
    }
    CHECK_THROWS_AS(msg_k(gen_line_cloud({0, 1}), 0), std::invalid_argument);
}

TEST_CASE("path_metric_neighborhood truncated dijkstra") {
    WeightedGraph g(3);
    g.add_edge(0, 1, 1.0);
    g.add_edge(1, 2, 1.0);

    SUBCASE("delta below all incident edges updates only p") {
        std::vector<double> dist(3, kInfinity);
        std::vector<std::size_t> ndp{0, 1, 2};
        path_metric_neighborhood(g, 0, 0.5, dist, ndp);
        CHECK(dist[0] == 0.0);
        CHECK(dist[1] == kInfinity);
        CHECK(dist[2] == kInfinity);
    }
    SUBCASE("hand trace: p=0, delta=1.5 on the unit path") {
        std::vector<double> dist(3, kInfinity);
        std::vector<std::size_t> ndp{0, 1, 2};
        path_metric_neighborhood(g, 0, 1.5, dist, ndp);
        CHECK(dist[1] == 1.0);
        CHECK(ndp[1] == 0);
        CHECK(dist[2] == kInfinity);  // 2.0 is not < 1.5
    }
    SUBCASE("huge delta gives full single-source distances") {
        std::vector<double> dist(3, kInfinity);
        std::vector<std::size_t> ndp{0, 1, 2};
        path_metric_neighborhood(g, 0, 1e18, dist, ndp);
        CHECK(dist[2] == 2.0);
        CHECK(ndp[2] == 0);
    }
}

TEST_CASE("sparse_dense_subset") {
    // path of 5 unit edges
    WeightedGraph g(6);
    for (std::size_t i = 0; i + 1 < 6; ++i) g.add_edge(i, i + 1, 1.0);
    std::vector<double> f{1, 2, 3, 3, 2, 1};  // ties resolved to lower id

    SUBCASE("tiny delta selects everything") {
        auto sd = sparse_dense_subset(g, f, 1e-9);
        CHECK(sd.dense.size() == 6);
    }
    SUBCASE("delta beyond the diameter keeps only the argmax") {
        auto sd = sparse_dense_subset(g, f, 100.0);
        REQUIRE(sd.dense.size() == 1);
        CHECK(sd.dense[0] == 2);  // f ties 2,3 -> lowest id
    }
    SUBCASE("selection is delta-sparse in the path metric and covers within delta") {
        auto sd = sparse_dense_subset(g, f, 2.0);
        for (std::size_t i = 0; i < sd.dense.size(); ++i)
            for (std::size_t j = i + 1; j < sd.dense.size(); ++j) {
                auto d = g.dijkstra(sd.dense[i]);
                CHECK(d[sd.dense[j]] >= 2.0);
            }
        for (std::size_t v = 0; v < 6; ++v)
            CHECK((sd.dist[v] < 2.0 ||
                   std::find(sd.dense.begin(), sd.dense.end(), v) != sd.dense.end()));
    }
    SUBCASE("uniform density breaks ties by id") {
        std::vector<double> uni(6, 1.0);
        auto sd = sparse_dense_subset(g, uni, 1.5);
        CHECK(sd.dense.front() == 0);
    }
}

TEST_CASE("dense_tree") {
    std::vector<Vec> coords{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
    WeightedGraph g(4);
    for (std::size_t i = 0; i + 1 < 4; ++i) g.add_edge(i, i + 1, 1.0);

    SUBCASE("single dense point -> single vertex tree") {
        std::vector<double> f(4, 1.0);
        auto sd = sparse_dense_subset(g, f, 100.0);
        auto t = dense_tree(g, sd, coords);
        CHECK(t.vertices.size() == 1);
        CHECK(t.edges.empty());
    }
    SUBCASE("two dense points on a path: one edge of quotient weight d_G") {
        std::vector<double> f{2, 1, 1, 2};
        auto sd = sparse_dense_subset(g, f, 2.5);
        REQUIRE(sd.dense.size() == 2);
        auto t = dense_tree(g, sd, coords);
        REQUIRE(t.edges.size() == 1);
        CHECK(t.is_tree());
        // quotient weight = Dist(u)+Dist(v)+len over the middle cut edge = 3 = d_G(0,3)
        double w = norm(sub(t.vertices[t.edges[0].first], t.vertices[t.edges[0].second]));
        CHECK(w == doctest::Approx(3.0));  // endpoints are the dense points 0 and 3
    }
    SUBCASE("dense sample of a segment gives a path") {
        auto seg = gen_star(1, 0.1, 2.0);
        auto cloud = gen_eps_sample(seg, 400, 0.05, 77);
        auto space = MetricSpaceView::euclidean(cloud);
        auto g2 = msg_k(space, 8);
        auto kernel = fit_sigmoid(0.075, 0.0125);
        auto density = kde_exact(kernel, space, space).values;
        auto sd = sparse_dense_subset(g2, density, 0.5);
        auto t = dense_tree(g2, sd, cloud);
        CHECK(t.is_tree());
        for (std::size_t d : tree_degrees(t)) CHECK(d <= 2);
    }
}

TEST_CASE("homeomorphism delta formula") {
    CHECK(homeomorphism_delta(M_PI / 2, 1.0, 0.0, 1.0) == doctest::Approx(2.0));
    // scaling lengths scales delta
    double d1 = homeomorphism_delta(M_PI / 3, 1.5, 0.01, 0.2);
    double d2 = homeomorphism_delta(M_PI / 3, 1.5, 0.03, 0.6);
    CHECK(d2 == doctest::Approx(3.0 * d1));
    // eps -> 0 and l_max -> 0 sends delta -> 0
    CHECK(homeomorphism_delta(M_PI / 4, 2.0, 0.0, 0.0) == 0.0);
    CHECK_THROWS_AS(homeomorphism_delta(0.0, 1.0, 0.1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(homeomorphism_delta(M_PI / 2, 0.5, 0.1, 0.1), std::invalid_argument);
}

TEST_CASE("vertex count bound") {
    StraightLineTree t;
    t.vertices = {{0, 0}, {3, 0}};
    t.edges = {{0, 1}};
    CHECK(vertex_count_bound(t, 0.0, 0.5, 1.0) == doctest::Approx(3.0 / (2 * 0.5)));
    // scale invariance
    StraightLineTree t2;
    t2.vertices = {{0, 0}, {6, 0}};
    t2.edges = {{0, 1}};
    CHECK(vertex_count_bound(t, 0.01, 0.5, 1.2) ==
          doctest::Approx(vertex_count_bound(t2, 0.02, 1.0, 1.2)));
    // denominator degenerates as eps approaches delta/(2 gamma)
    CHECK(vertex_count_bound(t, 0.2499, 0.5, 1.0) > 100.0);
    CHECK_THROWS_AS(vertex_count_bound(t, 0.25, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("measure_gamma") {
    SUBCASE("complete euclidean graph has gamma 1") {
        auto cloud = gen_uniform_cloud(25, 2, 3);
        StraightLineTree seg;
        seg.vertices = {{-1, -1}, {2, 2}};
        seg.edges = {{0, 1}};
        WeightedGraph g(25);
        for (std::size_t a = 0; a < 25; ++a)
            for (std::size_t b = a + 1; b < 25; ++b)
                g.add_edge(a, b, norm(sub(cloud[a], cloud[b])));
        auto gm = measure_gamma(seg, cloud, g, 3.0);
        CHECK(gm.gamma == doctest::Approx(1.0));
    }
    SUBCASE("path graph on collinear points has gamma 1") {
        std::vector<Vec> cloud{{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}};
        StraightLineTree seg;
        seg.vertices = {{0, 0}, {3, 0}};
        seg.edges = {{0, 1}};
        WeightedGraph g(4);
        for (std::size_t i = 0; i + 1 < 4; ++i) g.add_edge(i, i + 1, 1.0);
        auto gm = measure_gamma(seg, cloud, g, 0.1);
        CHECK(gm.gamma == doctest::Approx(1.0));
    }
    SUBCASE("star cloud produces a finite measured gamma") {
        auto star = gen_star(4, M_PI / 4, 1.0);
        auto cloud = gen_eps_sample(star, 400, 0.1, 5);
        auto space = MetricSpaceView::euclidean(cloud);
        auto g = msg_k(space, 10);
        auto gm = measure_gamma(star, cloud, g, 0.1);
        CHECK(gm.gamma >= 1.0);
        CHECK(std::isfinite(gm.gamma));
    }
}

TEST_CASE("optimize_skeleton") {
    SUBCASE("zero iterations is the identity") {
        auto star = gen_star(3, 0.5, 1.0);
        auto cloud = gen_eps_sample(star, 50, 0.1, 9);
        auto t = optimize_skeleton(star, cloud, 0.1, 0);
        CHECK(t.vertices == star.vertices);
    }
    SUBCASE("cloud exactly on the tree stays fixed") {
        StraightLineTree seg;
        seg.vertices = {{0, 0}, {1, 0}};
        seg.edges = {{0, 1}};
        std::vector<Vec> cloud{{0.25, 0.0}, {0.5, 0.0}, {0.75, 0.0}};
        auto t = optimize_skeleton(seg, cloud, 0.05, 25);
        CHECK(skeleton_objective(t, cloud, {}) <= 1e-12);
        for (std::size_t v = 0; v < 2; ++v)
            for (std::size_t c = 0; c < 2; ++c)
                CHECK(t.vertices[v][c] == doctest::Approx(seg.vertices[v][c]).epsilon(1e-12));
    }
    SUBCASE("perturbed path strictly improves") {
        StraightLineTree noisy;
        noisy.vertices = {{0, 0.4}, {1, -0.3}, {2, 0.35}};
        noisy.edges = {{0, 1}, {1, 2}};
        std::vector<Vec> cloud;
        for (int i = 0; i <= 40; ++i) cloud.push_back({i * 0.05, 0.0});
        double before = skeleton_objective(noisy, cloud, {});
        auto t = optimize_skeleton(noisy, cloud, 0.2, 60);
        double after = skeleton_objective(t, cloud, {});
        CHECK(after < before);
    }
}

TEST_CASE("degree list recognition") {
    // 5-path vs 4-star: recognition 0
    StraightLineTree path, star;
    path.vertices = {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}};
    path.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}};
    star = gen_star(4, 0.5, 1.0);
    CHECK(degree_list_recognition(path, path) == doctest::Approx(1.0));
    CHECK(degree_list_recognition(path, star) == doctest::Approx(0.0));
    // degrees of H above max degree of G are ignored
    CHECK(degree_list_recognition(std::vector<std::size_t>{1, 1},
                                  std::vector<std::size_t>{1, 1, 5, 5}) ==
          doctest::Approx(1.0));
}

TEST_CASE("full pipeline on a clean segment sample") {
    auto seg = gen_star(1, 0.1, 2.0);
    double eps = 0.05;
    auto cloud = gen_eps_sample(seg, 500, eps, 11);
    PipelineParams p;
    p.k = 8;
    p.kernel_r = 1.5 * eps;
    p.kernel_t = eps / 2;
    p.delta = 2 * eps;  // dense enough that the skeleton reaches the segment ends
    p.eta = 0.05;
    p.iters = 30;
    auto run = full_pipeline(cloud, p);
    CHECK(run.dt.is_tree());
    for (std::size_t d : tree_degrees(run.dt)) CHECK(d <= 2);  // a path
    CHECK(run.dh_dt < 2 * eps);
    CHECK(run.odt.vertices.size() == run.dt.vertices.size());
}

TEST_CASE("full pipeline degenerate: huge delta keeps one vertex") {
    auto cloud = gen_uniform_cloud(10, 2, 3);
    PipelineParams p;
    p.k = 3;
    p.kernel_r = 0.3;
    p.kernel_t = 0.05;
    p.delta = 1e9;
    p.iters = 5;
    auto run = full_pipeline(cloud, p);
    CHECK(run.sd.dense.size() == 1);
    CHECK(run.dt.vertices.size() == 1);
    CHECK(run.dt.edges.empty());
    CHECK(std::isfinite(run.dh_odt));
}

TEST_CASE("star recovery end to end") {
    auto star = gen_star(5, 2 * M_PI / 5, 1.0);
    double eps = 0.05;
    std::size_t hits = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto cloud = gen_eps_sample(star, 800, eps, 900 + seed);
        PipelineParams p;
        p.k = 10;
        p.kernel_r = 1.5 * eps;
        p.kernel_t = eps / 2;
        p.delta = 0.35;
        p.eta = 0.02;
        p.iters = 20;
        auto run = full_pipeline(cloud, p);
        auto smooth = smoothed_degree_sequence(run.dt);
        if (smooth == smoothed_degree_sequence(star)) ++hits;
    }
    CHECK(hits >= 3);  // majority over seeds
}
