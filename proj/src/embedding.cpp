#include "lattree/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace lattree {

GraphSpatialTree sample_gaussian_embedding(const MetricTree& tree, int dim, Rng& rng,
                                           double resolution_floor) {
    if (dim < 1) throw std::invalid_argument("sample_gaussian_embedding: dim >= 1");
    if (resolution_floor <= 0.0)
        throw std::invalid_argument("sample_gaussian_embedding: floor > 0");
    GraphSpatialTree g;
    g.tree = tree;
    g.dim = dim;
    g.root_pos.assign(static_cast<std::size_t>(dim), 0.0);
    g.offsets.resize(tree.nodes.size());
    g.points.resize(tree.nodes.size());
    for (int v : preorder_order(tree)) {
        if (v == 0) continue;
        const double len = tree.nodes[v].edge_len;
        const double res = std::max(len / 32.0, resolution_floor);
        const int segs = std::max(1, static_cast<int>(std::ceil(len / res)));
        auto& off = g.offsets[v];
        auto& pts = g.points[v];
        off.resize(static_cast<std::size_t>(segs) + 1);
        pts.resize(off.size());
        off[0] = 0.0;
        pts[0] = g.vertex_pos(tree.nodes[v].parent);
        for (int k = 1; k <= segs; ++k) {
            off[k] = (k == segs) ? len : len * k / segs;
            const double sd = std::sqrt(off[k] - off[k - 1]);
            pts[k] = pts[k - 1];
            for (int c = 0; c < dim; ++c) pts[k][c] += sd * rng.normal();
        }
    }
    return g;
}

GraphSpatialTree embed_from_vertex_positions(const MetricTree& tree, int dim,
                                             const std::vector<Vec>& vertex_pos) {
    if (vertex_pos.size() != tree.nodes.size())
        throw std::invalid_argument("embed_from_vertex_positions: size mismatch");
    GraphSpatialTree g;
    g.tree = tree;
    g.dim = dim;
    g.root_pos = vertex_pos[0];
    g.offsets.resize(tree.nodes.size());
    g.points.resize(tree.nodes.size());
    for (int v = 1; v < tree.size(); ++v) {
        g.offsets[v] = {0.0, tree.nodes[v].edge_len};
        g.points[v] = {vertex_pos[tree.nodes[v].parent], vertex_pos[v]};
    }
    return g;
}

Vec evaluate(const GraphSpatialTree& gst, const TreePoint& x) {
    const TreePoint p = gst.tree.canonical(x);
    if (p.node == 0) return gst.root_pos;
    const auto& off = gst.offsets[p.node];
    const auto& pts = gst.points[p.node];
    const auto it = std::upper_bound(off.begin(), off.end(), p.offset);
    std::size_t i = static_cast<std::size_t>(it - off.begin());
    if (i >= off.size()) i = off.size() - 1;
    if (i == 0) return pts[0];
    const double lo = off[i - 1], hi = off[i];
    const double a = hi > lo ? (p.offset - lo) / (hi - lo) : 0.0;
    Vec out(pts[i - 1]);
    for (int c = 0; c < gst.dim; ++c) out[c] += a * (pts[i][c] - pts[i - 1][c]);
    return out;
}

std::string serialize(const GraphSpatialTree& gst) {
    std::ostringstream os;
    os << serialize(gst.tree);
    os << "dim " << gst.dim << "\n";
    char buf[64];
    auto put = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        os << buf;
    };
    os << "root";
    for (double c : gst.root_pos) {
        os << " ";
        put(c);
    }
    os << "\n";
    // edge blocks keyed by the same preorder ids as the tree block above
    const std::vector<int> order = preorder_order(gst.tree);
    for (int id = 1; id < gst.tree.size(); ++id) {
        const int v = order[id];
        os << "edge " << id << " " << gst.offsets[v].size() << "\n";
        for (std::size_t k = 0; k < gst.offsets[v].size(); ++k) {
            put(gst.offsets[v][k]);
            for (int c = 0; c < gst.dim; ++c) {
                os << ",";
                put(gst.points[v][k][c]);
            }
            os << "\n";
        }
    }
    return os.str();
}

} // namespace lattree
