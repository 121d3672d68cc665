#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lattree/excursion.hpp"
#include "lattree/realtree.hpp"
#include "lattree/rng.hpp"

using namespace lattree;

namespace {

// oracle distance: explicit root paths with offsets, no LCA machinery
double brute_distance(const MetricTree& t, TreePoint a, TreePoint b) {
    a = t.canonical(a);
    b = t.canonical(b);
    auto root_chain = [&](const TreePoint& p) {
        std::vector<int> nodes;
        for (int v = p.node; v != 0; v = t.nodes[v].parent) nodes.push_back(v);
        std::reverse(nodes.begin(), nodes.end());
        return nodes; // empty iff p is the root
    };
    const auto pa = root_chain(a), pb = root_chain(b);
    auto depth = [&](const std::vector<int>& chain, const TreePoint& p) {
        double d = 0.0;
        for (int v : chain) d += t.nodes[v].edge_len;
        if (p.node != 0) d -= t.nodes[p.node].edge_len - p.offset;
        return d;
    };
    const double da = depth(pa, a), db = depth(pb, b);
    const bool a_prefix =
        pa.size() <= pb.size() && std::equal(pa.begin(), pa.end(), pb.begin());
    const bool b_prefix =
        pb.size() <= pa.size() && std::equal(pb.begin(), pb.end(), pa.begin());
    if (pa.size() == pb.size() && a_prefix) return std::abs(da - db); // same edge
    // a.node strictly above b.node on b's root chain: a sits on b's root path
    if (a_prefix) return db - da;
    if (b_prefix) return da - db;
    double common = 0.0;
    for (std::size_t i = 0; i < pa.size() && i < pb.size() && pa[i] == pb[i]; ++i)
        common += t.nodes[pa[i]].edge_len;
    return da + db - 2.0 * common;
}

MetricTree sample_tree(Rng& rng, int K) { return crt_skeleton_linebreaking(K, rng); }

double ks_vs_cdf(std::vector<double> a, double (*cdf)(double)) {
    std::sort(a.begin(), a.end());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double c = cdf(a[i]);
        d = std::max(d, std::abs(c - double(i) / a.size()));
        d = std::max(d, std::abs(c - double(i + 1) / a.size()));
    }
    return d;
}

TreePoint leaf_point(const MetricTree& t, int leaf_node) {
    return TreePoint{leaf_node, leaf_node == 0 ? 0.0 : t.nodes[leaf_node].edge_len};
}

} // namespace

TEST_CASE("hand-built tree: depths, distances, canonical points") {
    MetricTree t;
    const int a = t.add_child(0, 2.0); // root -- a (2)
    const int b = t.add_child(a, 1.0); // a -- b (1)
    const int c = t.add_child(a, 3.0); // a -- c (3)
    CHECK(t.depth_of_node(c) == doctest::Approx(5.0));
    CHECK(t.total_length() == doctest::Approx(6.0));
    CHECK(t.subtree_length(a) == doctest::Approx(4.0));
    CHECK(t.lca(b, c) == a);
    CHECK(t.is_ancestor(a, c));
    CHECK_FALSE(t.is_ancestor(b, c));

    CHECK(distance(t, leaf_point(t, b), leaf_point(t, c)) == doctest::Approx(4.0));
    CHECK(distance(t, TreePoint{0, 0.0}, leaf_point(t, c)) == doctest::Approx(5.0));
    // both points hang below the vertex a: 0.5 up plus 1.5 down
    CHECK(distance(t, TreePoint{b, 0.5}, TreePoint{c, 1.5}) == doctest::Approx(2.0));

    // {b, 0} is the vertex a, i.e. {a, 2}
    CHECK(t.same_point(TreePoint{b, 0.0}, TreePoint{a, 2.0}));
    CHECK(t.same_point(TreePoint{a, 0.0}, TreePoint{0, 0.0}));
    CHECK_FALSE(t.same_point(TreePoint{b, 0.5}, TreePoint{c, 0.5}));
    CHECK_THROWS_AS(t.check_point(TreePoint{b, 1.5}), std::invalid_argument);
}

TEST_CASE("distance agrees with the explicit-root-path oracle on random trees") {
    Rng rng(101);
    for (int rep = 0; rep < 20; ++rep) {
        const auto t = sample_tree(rng, 8);
        for (int q = 0; q < 100; ++q) {
            const TreePoint x = uniform_point(t, rng);
            const TreePoint y = uniform_point(t, rng);
            CHECK(distance(t, x, y) ==
                  doctest::Approx(brute_distance(t, x, y)).epsilon(1e-12));
        }
    }
}

TEST_CASE("point_on_path splits the path additively") {
    Rng rng(202);
    for (int rep = 0; rep < 20; ++rep) {
        const auto t = sample_tree(rng, 6);
        for (int q = 0; q < 50; ++q) {
            const TreePoint x = uniform_point(t, rng);
            const TreePoint y = uniform_point(t, rng);
            const double d = distance(t, x, y);
            const double s = rng.uniform() * d;
            const TreePoint p = point_on_path(t, x, y, s);
            CHECK(distance(t, x, p) == doctest::Approx(s).epsilon(1e-10));
            CHECK(distance(t, p, y) == doctest::Approx(d - s).epsilon(1e-10));
        }
        const TreePoint x = uniform_point(t, rng);
        CHECK(t.same_point(point_on_path(t, x, x, 0.0), x));
    }
}

TEST_CASE("branch_point lies on all three pairwise paths") {
    Rng rng(303);
    for (int rep = 0; rep < 20; ++rep) {
        const auto t = sample_tree(rng, 6);
        const TreePoint a = uniform_point(t, rng);
        const TreePoint b = uniform_point(t, rng);
        const TreePoint c = uniform_point(t, rng);
        const TreePoint m = branch_point(t, a, b, c);
        const double eps = 1e-10;
        CHECK(distance(t, a, m) + distance(t, m, b) ==
              doctest::Approx(distance(t, a, b)).epsilon(eps));
        CHECK(distance(t, a, m) + distance(t, m, c) ==
              doctest::Approx(distance(t, a, c)).epsilon(eps));
        CHECK(distance(t, b, m) + distance(t, m, c) ==
              doctest::Approx(distance(t, b, c)).epsilon(eps));
        // symmetric in its arguments (up to rounding)
        CHECK(distance(t, m, branch_point(t, c, a, b)) < 1e-10);
    }
}

TEST_CASE("reduced subtree preserves the distance matrix to the root and leaves") {
    Rng rng(404);
    for (int rep = 0; rep < 15; ++rep) {
        const auto t = sample_tree(rng, 10);
        const int K = 1 + static_cast<int>(rng.uniform_index(6));
        std::vector<TreePoint> pts;
        for (int i = 0; i < K; ++i) pts.push_back(uniform_point(t, rng));
        std::vector<TreePoint> host;
        const auto r = reduced_subtree(t, pts, &host);
        REQUIRE(static_cast<int>(r.leaf_order.size()) == K);
        REQUIRE(host.size() == static_cast<std::size_t>(r.size()));
        for (int i = 0; i < K; ++i) {
            const TreePoint li = leaf_point(r, r.leaf_order[i]);
            CHECK(distance(r, TreePoint{0, 0.0}, li) ==
                  doctest::Approx(distance(t, TreePoint{0, 0.0}, pts[i])).epsilon(1e-10));
            for (int j = i + 1; j < K; ++j) {
                const TreePoint lj = leaf_point(r, r.leaf_order[j]);
                CHECK(distance(r, li, lj) ==
                      doctest::Approx(distance(t, pts[i], pts[j])).epsilon(1e-10));
            }
        }
        // host positions are faithful: r-node depths match host depths
        for (int v = 0; v < r.size(); ++v)
            CHECK(r.depth_of_node(v) ==
                  doctest::Approx(t.depth_of_point(host[v])).epsilon(1e-10));
        // no superfluous structure: every internal node has >= 2 children or is a leaf
        for (int v = 1; v < r.size(); ++v) {
            const bool is_labeled =
                std::find(r.leaf_order.begin(), r.leaf_order.end(), v) !=
                r.leaf_order.end();
            if (!is_labeled) CHECK(r.nodes[v].children.size() >= 2);
        }
    }
}

TEST_CASE("reduced subtree is idempotent") {
    Rng rng(505);
    const auto t = sample_tree(rng, 9);
    std::vector<TreePoint> pts;
    for (int i = 0; i < 5; ++i) pts.push_back(uniform_point(t, rng));
    const auto r1 = reduced_subtree(t, pts);
    std::vector<TreePoint> leaves;
    for (int lf : r1.leaf_order) leaves.push_back(leaf_point(r1, lf));
    const auto r2 = reduced_subtree(r1, leaves);
    REQUIRE(r2.size() == r1.size());
    REQUIRE(r2.leaf_order.size() == r1.leaf_order.size());
    for (std::size_t i = 0; i < leaves.size(); ++i)
        for (std::size_t j = 0; j < leaves.size(); ++j)
            CHECK(distance(r2, leaf_point(r2, r2.leaf_order[i]),
                           leaf_point(r2, r2.leaf_order[j])) ==
                  doctest::Approx(distance(r1, r1.leaf_order[i] == 0
                                                   ? TreePoint{0, 0.0}
                                                   : leaf_point(r1, r1.leaf_order[i]),
                                           leaf_point(r1, r1.leaf_order[j])))
                      .epsilon(1e-10));
}

TEST_CASE("uniform_point matches the descendant-mass functional") {
    Rng rng(606);
    const auto t = sample_tree(rng, 5);
    const TreePoint x = uniform_point(t, rng);
    const double mass = lebesgue_measure_of_descendants(t, x);
    int below = 0;
    const int reps = 20000;
    for (int i = 0; i < reps; ++i) {
        const TreePoint y = uniform_point(t, rng);
        const double d_root = distance(t, TreePoint{0, 0.0}, y);
        const double d_x = distance(t, x, y);
        const double dx_root = distance(t, TreePoint{0, 0.0}, x);
        if (std::abs(d_root - (dx_root + d_x)) < 1e-9) ++below; // x on root path of y
    }
    CHECK(std::abs(double(below) / reps - mass) < 0.02);
    CHECK(lebesgue_measure_of_descendants(t, TreePoint{0, 0.0}) ==
          doctest::Approx(1.0));
}

TEST_CASE("stick-construction skeleton: K=1 depth has tail exp(-2x^2)") {
    Rng rng(707);
    std::vector<double> depths;
    for (int i = 0; i < 6000; ++i) {
        const auto t = crt_skeleton_linebreaking(1, rng);
        REQUIRE(t.leaf_order.size() == 1);
        depths.push_back(t.depth_of_node(t.leaf_order[0]));
    }
    CHECK(ks_vs_cdf(std::move(depths), +[](double x) {
              return x <= 0.0 ? 0.0 : 1.0 - std::exp(-2.0 * x * x);
          }) < 0.03);
}

TEST_CASE("stick-construction skeletons are nested under extension") {
    Rng rng(808);
    for (int rep = 0; rep < 10; ++rep) {
        Rng local = sub_rng(99, rep);
        auto t = crt_skeleton_linebreaking(4, local);
        std::vector<std::vector<double>> before(4, std::vector<double>(4, 0.0));
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                before[i][j] = distance(t, leaf_point(t, t.leaf_order[i]),
                                        leaf_point(t, t.leaf_order[j]));
        crt_skeleton_extend(t, 9, local);
        REQUIRE(t.leaf_order.size() == 9);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                CHECK(distance(t, leaf_point(t, t.leaf_order[i]),
                               leaf_point(t, t.leaf_order[j])) ==
                      doctest::Approx(before[i][j]).epsilon(1e-12));
    }
}

TEST_CASE("excursion-coded skeleton: leaf distances equal the path pseudometric") {
    Rng rng(909);
    for (int rep = 0; rep < 15; ++rep) {
        const auto p = sample_normalized(512, rng);
        ExcursionIndex idx(p);
        std::vector<double> times;
        const int K = 2 + static_cast<int>(rng.uniform_index(5));
        for (int i = 0; i < K; ++i) times.push_back(rng.uniform());
        const auto t = crt_skeleton_from_times(idx, times);
        REQUIRE(static_cast<int>(t.leaf_order.size()) == K);
        for (int i = 0; i < K; ++i) {
            CHECK(t.depth_of_node(t.leaf_order[i]) ==
                  doctest::Approx(p.value_at(times[i])).epsilon(1e-10));
            for (int j = i + 1; j < K; ++j)
                CHECK(distance(t, leaf_point(t, t.leaf_order[i]),
                               leaf_point(t, t.leaf_order[j])) ==
                      doctest::Approx(idx.pseudometric(times[i], times[j]))
                          .epsilon(1e-10));
        }
    }
}

TEST_CASE("projection onto the excursion skeleton") {
    Rng rng(1010);
    for (int rep = 0; rep < 10; ++rep) {
        const auto p = sample_normalized(512, rng);
        ExcursionIndex idx(p);
        std::vector<double> times;
        for (int i = 0; i < 5; ++i) times.push_back(rng.uniform());
        const auto skel = crt_skeleton_from_times(idx, times);
        // a skeleton time projects to its own leaf
        for (std::size_t i = 0; i < times.size(); ++i) {
            const TreePoint pr = project_time_onto_skeleton(idx, times, skel, times[i]);
            CHECK(distance(skel, pr, leaf_point(skel, skel.leaf_order[i])) < 1e-9);
        }
        // generic times: projection depth is the best branch-point depth, and
        // the projection is an ancestor of the closest leaf's path
        for (int q = 0; q < 50; ++q) {
            const double u = rng.uniform();
            const TreePoint pr = project_time_onto_skeleton(idx, times, skel, u);
            double want = 0.0;
            for (double ti : times) want = std::max(want, idx.range_min(ti, u));
            CHECK(skel.depth_of_point(pr) == doctest::Approx(want).epsilon(1e-10));
        }
    }
}

TEST_CASE("serialization round-trips bit-exactly") {
    Rng rng(1111);
    for (int rep = 0; rep < 10; ++rep) {
        const auto t = sample_tree(rng, 7);
        const std::string s = serialize(t);
        const auto u = deserialize_tree(s);
        CHECK(serialize(u) == s); // fixed point: text -> tree -> text is exact
        REQUIRE(u.size() == t.size());
        REQUIRE(u.leaf_order.size() == t.leaf_order.size());
        // %.17g keeps every bit of each edge length; only summation order differs
        CHECK(u.total_length() == doctest::Approx(t.total_length()).epsilon(1e-14));
        for (std::size_t i = 0; i < t.leaf_order.size(); ++i)
            for (std::size_t j = 0; j < t.leaf_order.size(); ++j)
                CHECK(distance(u, leaf_point(u, u.leaf_order[i]),
                               leaf_point(u, u.leaf_order[j])) ==
                      distance(t, leaf_point(t, t.leaf_order[i]),
                               leaf_point(t, t.leaf_order[j])));
    }
    CHECK_THROWS_AS(deserialize_tree("bogus"), std::invalid_argument);
}

TEST_CASE("index-free skeleton overload matches the indexed one bit-exactly") {
    Rng rng(97);
    for (int rep = 0; rep < 50; ++rep) {
        const ExcursionPath path = sample_normalized(500, rng);
        const ExcursionIndex idx(path);
        std::vector<double> times;
        for (int i = 0; i < 1 + rep % 5; ++i) times.push_back(rng.uniform());
        CHECK(serialize(crt_skeleton_from_times(idx, times)) ==
              serialize(crt_skeleton_from_times(path, times)));
    }
}
