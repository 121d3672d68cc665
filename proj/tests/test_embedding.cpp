#include "doctest.h"

#include <cmath>
#include <vector>

#include "lattree/embedding.hpp"
#include "lattree/realtree.hpp"
#include "lattree/rng.hpp"

using namespace lattree;

TEST_CASE("root is at the origin and vertex positions are consistent") {
    Rng rng(1);
    MetricTree t;
    const int a = t.add_child(0, 1.5);
    const int b = t.add_child(a, 0.5);
    const auto g = sample_gaussian_embedding(t, 3, rng);
    for (double c : g.root_pos) CHECK(c == 0.0);
    // polylines of adjacent edges share the vertex position exactly
    CHECK(g.points[b][0] == g.vertex_pos(a));
    CHECK(evaluate(g, TreePoint{a, 1.5}) == g.vertex_pos(a));
    CHECK(evaluate(g, TreePoint{b, 0.0}) == g.vertex_pos(a));
    CHECK(evaluate(g, TreePoint{0, 0.0}) == g.root_pos);
}

TEST_CASE("single-edge variance and cross-branch independence") {
    // var per coordinate at the far end of a length-2 edge is 2; two leaves on
    // disjoint branches have uncorrelated increments past the branch point
    MetricTree t;
    const int mid = t.add_child(0, 1.0);
    const int u = t.add_child(mid, 1.0);
    const int w = t.add_child(mid, 1.0);
    Rng rng(77);
    const int reps = 40000;
    double var_u = 0.0, cov_uw = 0.0, var_mid = 0.0;
    for (int i = 0; i < reps; ++i) {
        const auto g = sample_gaussian_embedding(t, 2, rng);
        const double mu = g.vertex_pos(u)[0], mw = g.vertex_pos(w)[0];
        const double mm = g.vertex_pos(mid)[0];
        var_u += mu * mu;
        var_mid += mm * mm;
        cov_uw += (mu - mm) * (mw - mm);
    }
    var_u /= reps;
    var_mid /= reps;
    cov_uw /= reps;
    CHECK(std::abs(var_u - 2.0) < 0.06);   // ~3 standard errors at 4e4 samples
    CHECK(std::abs(var_mid - 1.0) < 0.04);
    CHECK(std::abs(cov_uw) < 0.04);
    // covariance of the two leaves equals the depth of their common ancestor
    // cov(phi(u), phi(w)) = d(root, mid) = 1
}

TEST_CASE("covariance between leaves equals depth of the branch point") {
    MetricTree t;
    const int mid = t.add_child(0, 0.7);
    const int u = t.add_child(mid, 1.0);
    const int w = t.add_child(mid, 0.4);
    Rng rng(555);
    const int reps = 40000;
    double cov = 0.0;
    for (int i = 0; i < reps; ++i) {
        const auto g = sample_gaussian_embedding(t, 1, rng);
        cov += g.vertex_pos(u)[0] * g.vertex_pos(w)[0];
    }
    cov /= reps;
    CHECK(std::abs(cov - 0.7) < 0.05);
}

TEST_CASE("evaluate interpolates linearly and stays on the polyline") {
    MetricTree t;
    const int a = t.add_child(0, 1.0);
    std::vector<Vec> pos{{0.0, 0.0}, {1.0, 0.0}};
    const auto g = embed_from_vertex_positions(t, 2, pos);
    const Vec m = evaluate(g, TreePoint{a, 0.5});
    CHECK(m[0] == doctest::Approx(0.5));
    CHECK(m[1] == doctest::Approx(0.0));

    Rng rng(9);
    const auto gb = sample_gaussian_embedding(t, 2, rng);
    for (int q = 0; q < 100; ++q) {
        const TreePoint x{a, rng.uniform()};
        const Vec p = evaluate(gb, x);
        // collinearity with the surrounding stored samples
        const auto& off = gb.offsets[a];
        const auto& pts = gb.points[a];
        for (std::size_t i = 1; i < off.size(); ++i) {
            if (x.offset <= off[i]) {
                const double al = (x.offset - off[i - 1]) / (off[i] - off[i - 1]);
                for (int c = 0; c < 2; ++c) {
                    const double want =
                        pts[i - 1][c] + al * (pts[i][c] - pts[i - 1][c]);
                    CHECK(std::abs(p[c] - want) < 1e-12);
                }
                break;
            }
        }
    }
}

TEST_CASE("serialization includes the tree and one block per edge") {
    Rng rng(3);
    const auto t = crt_skeleton_linebreaking(3, rng);
    const auto g = sample_gaussian_embedding(t, 2, rng);
    const std::string s = serialize(g);
    CHECK(s.find("tree ") == 0);
    CHECK(s.find("dim 2") != std::string::npos);
    std::size_t blocks = 0, pos = 0;
    while ((pos = s.find("edge ", pos)) != std::string::npos) {
        ++blocks;
        pos += 5;
    }
    CHECK(blocks == static_cast<std::size_t>(t.size() - 1));
}
