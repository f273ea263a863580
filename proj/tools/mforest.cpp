// mforest: exact geometry on finite metric spaces from the command line.
// Machine output goes to stdout (or the requested files); diagnostics go to
// stderr. Exit codes: 0 ok, 1 usage error, 2 data error, 3 internal error.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "metric_forest/metric_forest.hpp"
#include "metric_forest/tree_json.hpp"

using namespace metric_forest;
using nlohmann::json;

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("METRIC_FOREST_SEED")) return std::strtoull(env, nullptr, 10);
    return 42;
}

MetricSpaceView load_space(const std::string& points, const std::string& matrix, bool header,
                           bool dedup = false) {
    if (!matrix.empty()) return read_distance_matrix(matrix, header);
    if (points.empty()) throw data_error("no input given: use --input or --matrix");
    if (!dedup) return read_point_cloud(points, header);
    return MetricSpaceView::euclidean(dedup_points(read_csv_rows(points, header)));
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw data_error("cannot write '" + path + "'");
    return file;
}

// Build failures on loaded data (duplicates, asymmetric matrices) are data
// errors at the CLI surface.
CompressedCoverTree build_tree_checked(const MetricSpaceView& space,
                                       const std::vector<PointId>* order = nullptr) {
    try {
        return CompressedCoverTree::build(space, order);
    } catch (const std::invalid_argument& e) {
        throw data_error(e.what());
    }
}

json stats_json(const MetricSpaceView& space) {
    auto st = metric_stats(space);
    return json{{"n", space.size()},
                {"d_min", st.d_min},
                {"diameter", st.diameter},
                {"aspect_ratio", st.aspect_ratio},
                {"expansion_constant", st.expansion}};
}

void write_diagram(std::ostream& out, const Diagram& d) {
    out << "birth,death\n";
    for (auto& [b, dd] : d.points) out << format_double(b) << ',' << format_double(dd) << '\n';
}

Diagram read_diagram(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path + "'");
    Diagram d;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first && line.rfind("birth", 0) == 0) {
            first = false;
            continue;
        }
        first = false;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw data_error("diagram row needs birth,death");
        d.points.push_back(
            {parse_double(line.substr(0, comma)), parse_double(line.substr(comma + 1))});
    }
    d.normalize();
    return d;
}

void write_tree_files(const std::string& prefix, const StraightLineTree& t) {
    write_point_cloud(prefix + ".vertices.csv", t.vertices);
    std::ofstream out(prefix + ".edges.csv");
    if (!out) throw data_error("cannot write '" + prefix + ".edges.csv'");
    for (auto& [a, b] : t.edges) out << a << ',' << b << '\n';
}

StraightLineTree read_tree_files(const std::string& prefix) {
    StraightLineTree t;
    t.vertices = read_csv_rows(prefix + ".vertices.csv", false);
    for (auto& row : read_csv_rows(prefix + ".edges.csv", false)) {
        if (row.size() != 2) throw data_error("edge row needs two vertex ids");
        t.edges.push_back({static_cast<std::size_t>(row[0]), static_cast<std::size_t>(row[1])});
    }
    return t;
}

int run(int argc, char** argv) {
    CLI::App app{"metric forest: cover trees, k-NN, Boruvka MST, mergegrams, KDE, skeletons"};
    app.require_subcommand(1);
    unsigned threads = 1;
    app.add_option("--threads", threads, "worker cap for per-query parallel loops")
        ->capture_default_str();

    // ---- stats ----
    auto* stats = app.add_subcommand("stats", "metric statistics of a space");
    std::string st_input, st_matrix;
    bool st_header = false;
    stats->add_option("--input", st_input, "point cloud CSV");
    stats->add_option("--matrix", st_matrix, "distance matrix CSV");
    stats->add_flag("--header", st_header, "skip the first CSV row");

    // ---- verify ----
    auto* verify = app.add_subcommand("verify", "check the metric axioms");
    std::string vf_input, vf_matrix;
    bool vf_header = false;
    std::size_t vf_cap = 2000;
    verify->add_option("--input", vf_input, "point cloud CSV");
    verify->add_option("--matrix", vf_matrix, "distance matrix CSV");
    verify->add_flag("--header", vf_header, "skip the first CSV row");
    verify->add_option("--cap", vf_cap, "size cap for the O(n^3) check");

    // ---- knn ----
    auto* knn = app.add_subcommand("knn", "k nearest neighbors of every query");
    std::string knn_ref, knn_query, knn_matrix, knn_out;
    std::size_t knn_k = 1;
    double knn_eps = 0.0;
    bool knn_header = false, knn_assert = false;
    knn->add_option("--ref", knn_ref, "reference point cloud CSV");
    knn->add_option("--matrix", knn_matrix, "explicit distance matrix CSV (queries are ids)");
    knn->add_option("--query", knn_query, "query point cloud CSV (euclidean mode)");
    knn->add_option("--k", knn_k, "neighbor count")->required();
    knn->add_option("--epsilon", knn_eps, "approximation factor (0 = exact)");
    knn->add_option("--out", knn_out, "output CSV (default stdout)");
    knn->add_flag("--header", knn_header, "skip the first CSV row");
    knn->add_flag("--assert", knn_assert, "re-check pruning against brute force (slow)");
    bool knn_dedup = false;
    knn->add_flag("--dedup", knn_dedup, "drop duplicate reference points before building");

    // ---- mst ----
    auto* mst = app.add_subcommand("mst", "minimum spanning tree of a metric space");
    std::string mst_input, mst_matrix, mst_out;
    bool mst_header = false, mst_oracle = false, mst_assert = false, mst_shuffle = false;
    std::uint64_t mst_seed = default_seed();
    mst->add_option("--input", mst_input, "point cloud CSV");
    mst->add_option("--matrix", mst_matrix, "distance matrix CSV");
    mst->add_option("--out", mst_out, "edge list CSV (default mst_edges.csv)")
        ->default_val("mst_edges.csv");
    mst->add_flag("--header", mst_header, "skip the first CSV row");
    mst->add_flag("--oracle", mst_oracle, "use the Prim oracle instead of Boruvka");
    mst->add_flag("--assert", mst_assert, "verify every Boruvka step against brute force");
    mst->add_flag("--shuffle", mst_shuffle, "seeded shuffle of the insertion order");
    mst->add_option("--seed", mst_seed, "seed for --shuffle");
    bool mst_dedup = false;
    mst->add_flag("--dedup", mst_dedup, "drop duplicate points before building");

    // ---- mergegram / pd0 ----
    auto* mgram = app.add_subcommand("mergegram", "mergegram of the single-linkage dendrogram");
    std::string mg_input, mg_matrix, mg_out;
    bool mg_header = false, mg_pd0 = false, mg_half = false;
    mgram->add_option("--input", mg_input, "point cloud CSV");
    mgram->add_option("--matrix", mg_matrix, "distance matrix CSV");
    mgram->add_option("--out", mg_out, "output CSV (default stdout)");
    mgram->add_flag("--header", mg_header, "skip the first CSV row");
    mgram->add_flag("--pd0", mg_pd0, "emit the 0D persistence diagram instead");
    mgram->add_flag("--half-scale", mg_half, "divide deaths by 2 (ball filtration convention)");

    auto* pd0cmd = app.add_subcommand("pd0", "0D persistence diagram");
    std::string pd_input, pd_matrix, pd_out;
    bool pd_header = false, pd_half = false;
    pd0cmd->add_option("--input", pd_input, "point cloud CSV");
    pd0cmd->add_option("--matrix", pd_matrix, "distance matrix CSV");
    pd0cmd->add_option("--out", pd_out, "output CSV (default stdout)");
    pd0cmd->add_flag("--header", pd_header, "skip the first CSV row");
    pd0cmd->add_flag("--half-scale", pd_half, "divide deaths by 2");

    // ---- bottleneck ----
    auto* bot = app.add_subcommand("bottleneck", "bottleneck distance of two diagrams");
    std::string bot_a, bot_b;
    bot->add_option("--a", bot_a, "first diagram CSV")->required();
    bot->add_option("--b", bot_b, "second diagram CSV")->required();

    // ---- kde ----
    auto* kde = app.add_subcommand("kde", "sigmoid-kernel density estimate");
    std::string kde_ref, kde_query, kde_out;
    double kde_r = 0.0, kde_t = 0.0, kde_eps = 0.0;
    bool kde_header = false;
    kde->add_option("--ref", kde_ref, "reference point cloud CSV")->required();
    kde->add_option("--query", kde_query, "query point cloud CSV")->required();
    kde->add_option("--r", kde_r, "kernel radius")->required();
    kde->add_option("--t", kde_t, "kernel transition width")->required();
    kde->add_option("--epsilon", kde_eps, "per-point error budget (0 = exact)");
    kde->add_option("--out", kde_out, "output CSV (default stdout)");
    kde->add_flag("--header", kde_header, "skip the first CSV row");

    // ---- skeletonize ----
    auto* skel = app.add_subcommand("skeletonize", "tree skeleton of a noisy cloud");
    std::string sk_input, sk_prefix = "skeleton";
    std::size_t sk_k = 10, sk_iters = 50;
    double sk_r = 0.0, sk_t = 0.0, sk_delta = 0.0, sk_eta = 0.05;
    bool sk_header = false;
    skel->add_option("--input", sk_input, "point cloud CSV")->required();
    skel->add_option("--k", sk_k, "neighbor count for MSG_k")->required();
    skel->add_option("--r", sk_r, "kernel radius")->required();
    skel->add_option("--t", sk_t, "kernel transition width")->required();
    skel->add_option("--delta", sk_delta, "sparsification radius in the path metric")->required();
    skel->add_option("--eta", sk_eta, "optimizer learning rate");
    skel->add_option("--iters", sk_iters, "optimizer iterations");
    skel->add_option("--out", sk_prefix, "output prefix")->capture_default_str();
    skel->add_flag("--header", sk_header, "skip the first CSV row");

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "seeded dataset generators");
    std::string gen_family, gen_out = "data.csv", gen_values = "0,4,6,9,10", gen_tree;
    std::uint64_t gen_seed = default_seed();
    std::size_t gen_k = 2, gen_n = 100, gen_edges = 4;
    double gen_lmax = 1.5, gen_lmin = 0.5, gen_theta = M_PI / 4, gen_w = 0.3;
    double gen_eps = 0.1, gen_length = 1.0, gen_angle = M_PI / 4;
    gen->add_option("--family", gen_family,
                    "line_cloud | star | sensible_tree | eps_sample | two_separated_sets")
        ->required();
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output file (or prefix for trees)")->capture_default_str();
    gen->add_option("--values", gen_values, "line_cloud coordinates, comma separated");
    gen->add_option("--k", gen_k, "two_separated_sets block exponent");
    gen->add_option("--n", gen_n, "vertex or point count");
    gen->add_option("--edges", gen_edges, "star spoke count");
    gen->add_option("--length", gen_length, "star spoke length");
    gen->add_option("--min-angle", gen_angle, "star minimal angle");
    gen->add_option("--l-max", gen_lmax, "sensible tree maximal edge length");
    gen->add_option("--l-min", gen_lmin, "sensible tree minimal edge length");
    gen->add_option("--theta", gen_theta, "sensible tree minimal adjacent angle");
    gen->add_option("--w", gen_w, "sensible tree clearance width");
    gen->add_option("--epsilon", gen_eps, "eps_sample noise bound");
    gen->add_option("--tree", gen_tree, "eps_sample input tree prefix");

    // ---- bench ----
    auto* bench = app.add_subcommand("bench", "timing harness");
    std::string bench_suite = "mst", bench_sizes = "100,1000";
    std::uint64_t bench_seed = default_seed();
    bench->add_option("--suite", bench_suite, "mst | knn")->capture_default_str();
    bench->add_option("--sizes", bench_sizes, "comma separated point counts")
        ->capture_default_str();
    bench->add_option("--seed", bench_seed, "cloud seed");

    // ---- tree (serialization round trip) ----
    auto* treecmd = app.add_subcommand("tree", "build a cover tree and emit it as JSON");
    std::string tr_input, tr_matrix, tr_out;
    bool tr_header = false;
    treecmd->add_option("--input", tr_input, "point cloud CSV");
    treecmd->add_option("--matrix", tr_matrix, "distance matrix CSV");
    treecmd->add_option("--out", tr_out, "output JSON (default stdout)");
    treecmd->add_flag("--header", tr_header, "skip the first CSV row");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (*stats) {
        auto space = load_space(st_input, st_matrix, st_header);
        std::cout << stats_json(space).dump(2) << '\n';
        return 0;
    }

    if (*verify) {
        auto space = load_space(vf_input, vf_matrix, vf_header);
        auto rep = verify_metric_axioms(space, vf_cap);
        json j{{"symmetry_ok", rep.symmetry_ok},
               {"identity_ok", rep.identity_ok},
               {"triangle_ok", rep.triangle_ok},
               {"worst_violation", rep.worst_violation}};
        std::cout << j.dump(2) << '\n';
        if (!rep.all_ok()) {
            std::cerr << "metric axioms violated\n";
            return 2;
        }
        return 0;
    }

    if (*knn) {
        std::ofstream file;
        std::ostream& out = open_output(file, knn_out);
        if (!knn_matrix.empty()) {
            auto space = read_distance_matrix(knn_matrix, knn_header);
            auto tree = build_tree_checked(space);
            std::vector<KnnResult> results(space.size());
            parallel_for(space.size(), threads, [&](std::size_t q) {
                auto dist = [&](PointId r) { return space.distance(q, r); };
                results[q] = knn_assert ? knn_exact_audited(tree, dist, knn_k)
                             : knn_eps > 0 ? knn_approx(tree, dist, knn_k, knn_eps)
                                           : knn_exact(tree, dist, knn_k);
            });
            for (std::size_t q = 0; q < results.size(); ++q)
                for (std::size_t rank = 0; rank < results[q].neighbors.size(); ++rank)
                    out << q << ',' << rank + 1 << ',' << results[q].neighbors[rank].first << ','
                        << format_double(results[q].neighbors[rank].second) << '\n';
            return 0;
        }
        auto refs = load_space(knn_ref, "", knn_header, knn_dedup);
        auto queries = read_point_cloud(knn_query, knn_header);
        auto tree = build_tree_checked(refs);
        std::vector<KnnResult> results(queries.size());
        parallel_for(queries.size(), threads, [&](std::size_t q) {
            auto qs = queries.point(q);
            auto dist = [&](PointId r) { return refs.distance_to(qs, r); };
            results[q] = knn_assert ? knn_exact_audited(tree, dist, knn_k)
                         : knn_eps > 0 ? knn_approx(tree, dist, knn_k, knn_eps)
                                       : knn_exact(tree, dist, knn_k);
        });
        for (std::size_t q = 0; q < results.size(); ++q)
            for (std::size_t rank = 0; rank < results[q].neighbors.size(); ++rank)
                out << q << ',' << rank + 1 << ',' << results[q].neighbors[rank].first << ','
                    << format_double(results[q].neighbors[rank].second) << '\n';
        return 0;
    }

    if (*mst) {
        auto space = load_space(mst_input, mst_matrix, mst_header, mst_dedup);
        SpanningTree result;
        if (mst_oracle) {
            result = mst_oracle_prim(space);
        } else {
            std::vector<PointId> order(space.size());
            std::iota(order.begin(), order.end(), PointId{0});
            if (mst_shuffle) {
                Rng rng(Rng::split(mst_seed, 0x5afe));
                for (std::size_t i = order.size(); i > 1; --i)
                    std::swap(order[i - 1], order[rng.integer(i)]);
            }
            auto tree = build_tree_checked(space, &order);
            result = mst_singletree_boruvka(tree, mst_assert);
        }
        std::ofstream edges(mst_out);
        if (!edges) throw data_error("cannot write '" + mst_out + "'");
        edges << "a,b,length\n";
        for (const auto& e : result.edges)
            edges << e.a << ',' << e.b << ',' << format_double(e.length) << '\n';
        json summary = stats_json(space);
        summary["weight"] = result.total_weight;
        summary["rounds"] = result.rounds;
        summary["rho"] = space.size() >= 2 ? rho(space) : 0.0;
        summary.erase("d_min");
        summary.erase("diameter");
        std::cout << summary.dump(2) << '\n';
        return 0;
    }

    auto emit_diagram = [&](const std::string& input, const std::string& matrix, bool header,
                            bool want_pd0, bool half, const std::string& outpath) {
        auto space = load_space(input, matrix, header);
        double factor = half ? 0.5 : 1.0;
        Diagram d;
        if (want_pd0) {
            d = pd0(space, factor);
        } else {
            d = mergegram(sl_dendrogram(space));
            if (half)
                for (auto& [b, dd] : d.points) {
                    b *= 0.5;
                    dd *= 0.5;
                }
        }
        std::ofstream file;
        std::ostream& out = open_output(file, outpath);
        write_diagram(out, d);
    };

    if (*mgram) {
        emit_diagram(mg_input, mg_matrix, mg_header, mg_pd0, mg_half, mg_out);
        return 0;
    }
    if (*pd0cmd) {
        emit_diagram(pd_input, pd_matrix, pd_header, true, pd_half, pd_out);
        return 0;
    }

    if (*bot) {
        double d = bottleneck(read_diagram(bot_a), read_diagram(bot_b));
        std::cout << format_double(d) << '\n';
        return 0;
    }

    if (*kde) {
        auto refs = read_point_cloud(kde_ref, kde_header);
        auto queries = read_point_cloud(kde_query, kde_header);
        auto kernel = fit_sigmoid(kde_r, kde_t);
        KdeResult result;
        if (kde_eps > 0) {
            auto tree = build_tree_checked(refs);
            result = kde_approx(kernel, queries, tree, kde_eps, threads);
        } else {
            result = kde_exact(kernel, queries, refs, threads);
        }
        std::ofstream file;
        std::ostream& out = open_output(file, kde_out);
        for (std::size_t q = 0; q < result.values.size(); ++q)
            out << q << ',' << format_double(result.values[q]) << '\n';
        return 0;
    }

    if (*skel) {
        auto rows = read_csv_rows(sk_input, sk_header);
        PipelineParams p;
        p.k = sk_k;
        p.kernel_r = sk_r;
        p.kernel_t = sk_t;
        p.delta = sk_delta;
        p.eta = sk_eta;
        p.iters = sk_iters;
        p.threads = threads;
        auto run = full_pipeline(rows, p);
        write_tree_files(sk_prefix, run.odt);
        json rep{{"n", rows.size()},
                 {"msg_edges", run.msg.edges().size()},
                 {"dense_points", run.sd.dense.size()},
                 {"directed_hausdorff_dt", run.dh_dt},
                 {"directed_hausdorff_odt", run.dh_odt}};
        std::ofstream repf(sk_prefix + ".report.json");
        repf << rep.dump(2) << '\n';
        std::cout << rep.dump(2) << '\n';
        return 0;
    }

    if (*gen) {
        if (gen_family == "line_cloud") {
            std::vector<double> values;
            std::stringstream ss(gen_values);
            std::string cell;
            while (std::getline(ss, cell, ',')) values.push_back(parse_double(cell));
            std::vector<Vec> pts;
            for (double v : values) pts.push_back({v});
            write_point_cloud(gen_out, pts);
        } else if (gen_family == "two_separated_sets") {
            write_matrix(gen_out, gen_two_separated_sets(gen_k));
        } else if (gen_family == "star") {
            write_tree_files(gen_out, gen_star(gen_edges, gen_angle, gen_length));
        } else if (gen_family == "sensible_tree") {
            write_tree_files(gen_out,
                             gen_sensible_tree(gen_n, gen_lmax, gen_lmin, gen_theta, gen_w,
                                               gen_seed));
        } else if (gen_family == "eps_sample") {
            if (gen_tree.empty()) throw std::invalid_argument("eps_sample needs --tree PREFIX");
            auto t = read_tree_files(gen_tree);
            write_point_cloud(gen_out, gen_eps_sample(t, gen_n, gen_eps, gen_seed));
        } else {
            throw std::invalid_argument("unknown family '" + gen_family + "'");
        }
        return 0;
    }

    if (*bench) {
        std::vector<std::size_t> sizes;
        std::stringstream ss(bench_sizes);
        std::string cell;
        while (std::getline(ss, cell, ',')) sizes.push_back(std::stoul(cell));
        std::cout << "n,wall_time,rounds,rho,time_monotone\n";
        double prev = 0.0;
        for (std::size_t n : sizes) {
            auto cloud = gen_uniform_cloud(n, 2, bench_seed);
            auto space = MetricSpaceView::euclidean(cloud);
            auto t0 = std::chrono::steady_clock::now();
            SpanningTree result;
            if (bench_suite == "mst") {
                auto tree = build_tree_checked(space);
                result = mst_singletree_boruvka(tree);
            } else if (bench_suite == "knn") {
                auto tree = build_tree_checked(space);
                for (PointId q = 0; q < space.size(); ++q) knn_exact(tree, q, 5);
            } else {
                throw std::invalid_argument("unknown suite '" + bench_suite + "'");
            }
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                              .count();
            bool monotone = secs >= prev * 0.5;  // sanity: no wild collapse as n grows
            prev = secs;
            std::cout << n << ',' << format_double(secs) << ',' << result.rounds << ','
                      << format_double(n >= 2 ? rho(space) : 0.0) << ',' << (monotone ? 1 : 0)
                      << '\n';
        }
        return 0;
    }

    if (*treecmd) {
        auto space = load_space(tr_input, tr_matrix, tr_header);
        auto tree = build_tree_checked(space);
        std::ofstream file;
        std::ostream& out = open_output(file, tr_out);
        out << tree_to_json(tree).dump(2) << '\n';
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const internal_error& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
