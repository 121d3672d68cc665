#include "lattree/treewalk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lattree/metrics.hpp"

namespace lattree {

DiscretizedTree discretize(const GraphSpatialTree& gst, double step) {
    const MetricTree& t = gst.tree;
    if (step <= 0.0) throw std::invalid_argument("discretize: nonpositive step");
    for (int v = 1; v < t.size(); ++v)
        if (step >= t.nodes[v].edge_len)
            throw std::invalid_argument("discretize: step not below min edge length");

    DiscretizedTree d;
    d.step = step;
    d.node_point.push_back(TreePoint{0, 0.0});
    d.adj.push_back({});
    std::vector<int> vertex_node(t.nodes.size(), -1);
    vertex_node[0] = 0;
    for (int v : preorder_order(t)) {
        if (v == 0) continue;
        const double len = t.nodes[v].edge_len;
        const int m = static_cast<int>(std::ceil(len / step - 1e-12));
        const double seg = len / m;
        int prev = vertex_node[t.nodes[v].parent];
        for (int k = 1; k <= m; ++k) {
            const int id = static_cast<int>(d.node_point.size());
            d.node_point.push_back(TreePoint{v, k == m ? len : k * seg});
            d.adj.push_back({});
            d.adj[prev].push_back(id);
            d.adj[id].push_back(prev);
            prev = id;
        }
        vertex_node[v] = prev;
    }
    return d;
}

TreeWalkPath walk_on_tree(const GraphSpatialTree& gst, double step, double horizon,
                          Rng& rng, int record_every) {
    if (horizon <= 0.0) throw std::invalid_argument("walk_on_tree: nonpositive horizon");
    if (record_every < 1)
        throw std::invalid_argument("walk_on_tree: record_every < 1");
    const DiscretizedTree d = discretize(gst, step);
    const double dt = step * step;
    const long long steps = static_cast<long long>(std::ceil(horizon / dt - 1e-12));

    TreeWalkPath path;
    int node = 0;
    for (long long i = 0; i <= steps; ++i) {
        if (i % record_every == 0 || i == steps) {
            path.times.push_back(i * dt);
            path.points.push_back(d.node_point[node]);
            path.positions.push_back(evaluate(gst, d.node_point[node]));
        }
        const auto& nb = d.adj[node];
        node = nb[rng.uniform_index(nb.size())];
    }
    return path;
}

namespace {

const Vec& position_at(const TreeWalkPath& p, double t) {
    if (p.times.empty() || t > p.times.back() + 1e-12)
        throw std::invalid_argument("compare_ensembles: time beyond horizon");
    const auto it = std::upper_bound(p.times.begin(), p.times.end(), t);
    const std::size_t i = it == p.times.begin() ? 0 : (it - p.times.begin()) - 1;
    return p.positions[i];
}

} // namespace

std::vector<std::vector<double>> compare_ensembles(
    const std::vector<TreeWalkPath>& a, const std::vector<TreeWalkPath>& b,
    const std::vector<double>& times) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("compare_ensembles: empty ensemble");
    const std::size_t dim = a[0].positions.at(0).size();
    std::vector<std::vector<double>> out;
    for (double t : times) {
        std::vector<double> row;
        for (std::size_t c = 0; c < dim; ++c) {
            std::vector<double> sa, sb;
            for (const auto& p : a) sa.push_back(position_at(p, t)[c]);
            for (const auto& p : b) sb.push_back(position_at(p, t)[c]);
            row.push_back(ks_distance(sa, sb));
        }
        out.push_back(std::move(row));
    }
    return out;
}

} // namespace lattree
