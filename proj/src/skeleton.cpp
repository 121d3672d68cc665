#include "lattree/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

namespace lattree {

namespace {

struct EdgeAdj {
    std::vector<std::vector<std::pair<int, int>>> nb; // vertex -> (neighbor, edge idx)
};

EdgeAdj edge_adjacency(const LatticeGraph& g) {
    EdgeAdj a;
    a.nb.resize(g.coords.size());
    for (int e = 0; e < g.num_edges(); ++e) {
        const auto& [x, y] = g.edges[static_cast<std::size_t>(e)];
        a.nb[x].emplace_back(y, e);
        a.nb[y].emplace_back(x, e);
    }
    return a;
}

std::vector<int> bfs_distances(const LatticeGraph& g, int src) {
    std::vector<int> dist(g.coords.size(), -1);
    std::deque<int> q{src};
    dist[src] = 0;
    while (!q.empty()) {
        const int v = q.front();
        q.pop_front();
        for (int u : g.adj[v])
            if (dist[u] < 0) {
                dist[u] = dist[v] + 1;
                q.push_back(u);
            }
    }
    return dist;
}

double euclid(const std::vector<int>& a, const std::vector<int>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s);
}

} // namespace

BubbleDecomposition decompose_bubbles(const LatticeGraph& host) {
    const int n = host.num_vertices();
    const EdgeAdj adj = edge_adjacency(host);
    BubbleDecomposition out;
    out.is_bridge.assign(host.edges.size(), 0);

    // iterative Tarjan bridge finding
    std::vector<int> disc(static_cast<std::size_t>(n), -1);
    std::vector<int> low(static_cast<std::size_t>(n), 0);
    std::vector<int> enter_edge(static_cast<std::size_t>(n), -1);
    std::vector<std::pair<int, std::size_t>> stack; // (vertex, next neighbor slot)
    int timer = 0;
    disc[0] = low[0] = timer++;
    stack.emplace_back(0, 0);
    while (!stack.empty()) {
        auto& [v, slot] = stack.back();
        if (slot < adj.nb[v].size()) {
            const auto [u, e] = adj.nb[v][slot++];
            if (e == enter_edge[v]) continue;
            if (disc[u] < 0) {
                disc[u] = low[u] = timer++;
                enter_edge[u] = e;
                stack.emplace_back(u, 0);
            } else {
                low[v] = std::min(low[v], disc[u]);
            }
        } else {
            const int v_done = v;
            stack.pop_back();
            if (!stack.empty()) {
                const int p = stack.back().first;
                low[p] = std::min(low[p], low[v_done]);
                if (low[v_done] > disc[p]) {
                    out.is_bridge[static_cast<std::size_t>(enter_edge[v_done])] = 1;
                    out.bridge_edges.push_back(enter_edge[v_done]);
                }
            }
        }
    }

    // bubbles = components of the host minus bridges
    out.bubble_of.assign(static_cast<std::size_t>(n), -1);
    for (int v = 0; v < n; ++v) {
        if (out.bubble_of[v] >= 0) continue;
        const int b = out.num_bubbles++;
        std::deque<int> q{v};
        out.bubble_of[v] = b;
        while (!q.empty()) {
            const int w = q.front();
            q.pop_front();
            for (const auto& [u, e] : adj.nb[w])
                if (!out.is_bridge[static_cast<std::size_t>(e)] &&
                    out.bubble_of[u] < 0) {
                    out.bubble_of[u] = b;
                    q.push_back(u);
                }
        }
    }

    // bubble tree rooted at the origin's bubble
    out.bubble_parent.assign(static_cast<std::size_t>(out.num_bubbles), -1);
    out.bubble_parent_bridge.assign(static_cast<std::size_t>(out.num_bubbles), -1);
    std::vector<std::vector<std::pair<int, int>>> btree(
        static_cast<std::size_t>(out.num_bubbles)); // (other bubble, bridge edge)
    for (int e : out.bridge_edges) {
        const auto& [x, y] = host.edges[static_cast<std::size_t>(e)];
        btree[out.bubble_of[x]].emplace_back(out.bubble_of[y], e);
        btree[out.bubble_of[y]].emplace_back(out.bubble_of[x], e);
    }
    std::vector<char> seen(static_cast<std::size_t>(out.num_bubbles), 0);
    std::deque<int> q{out.bubble_of[0]};
    seen[static_cast<std::size_t>(out.bubble_of[0])] = 1;
    while (!q.empty()) {
        const int b = q.front();
        q.pop_front();
        for (const auto& [c, e] : btree[static_cast<std::size_t>(b)])
            if (!seen[static_cast<std::size_t>(c)]) {
                seen[static_cast<std::size_t>(c)] = 1;
                out.bubble_parent[static_cast<std::size_t>(c)] = b;
                out.bubble_parent_bridge[static_cast<std::size_t>(c)] = e;
                q.push_back(c);
            }
    }
    return out;
}

std::vector<int> find_cutpoints(const LatticeGraph& host) {
    const BubbleDecomposition dec = decompose_bubbles(host);
    std::set<int> pts;
    for (int e : dec.bridge_edges) {
        pts.insert(host.edges[static_cast<std::size_t>(e)].first);
        pts.insert(host.edges[static_cast<std::size_t>(e)].second);
    }
    return {pts.begin(), pts.end()};
}

GkInfo build_gk(const LatticeGraph& host, const std::vector<int>& points) {
    for (int x : points)
        if (x < 0 || x >= host.num_vertices())
            throw std::invalid_argument("build_gk: spanning point out of range");
    GkInfo out;
    out.bubbles = decompose_bubbles(host);
    const auto& dec = out.bubbles;
    out.on_route.assign(static_cast<std::size_t>(dec.num_bubbles), 0);
    out.bridge_crossed.assign(host.edges.size(), 0);

    const int root_bubble = dec.bubble_of[0];
    out.on_route[static_cast<std::size_t>(root_bubble)] = 1;
    std::set<std::pair<int, int>> distinguished; // (bubble, host vertex)
    distinguished.insert({root_bubble, 0});
    for (int x : points) {
        distinguished.insert({dec.bubble_of[x], x});
        int b = dec.bubble_of[x];
        while (b != root_bubble && !out.on_route[static_cast<std::size_t>(b)]) {
            out.on_route[static_cast<std::size_t>(b)] = 1;
            const int e = dec.bubble_parent_bridge[static_cast<std::size_t>(b)];
            out.bridge_crossed[static_cast<std::size_t>(e)] = 1;
            const auto& [u, w] = host.edges[static_cast<std::size_t>(e)];
            distinguished.insert({dec.bubble_of[u], u});
            distinguished.insert({dec.bubble_of[w], w});
            b = dec.bubble_parent[static_cast<std::size_t>(b)];
        }
        // bubbles already on a route still need their remaining bridges marked
        while (b != root_bubble) {
            const int e = dec.bubble_parent_bridge[static_cast<std::size_t>(b)];
            if (out.bridge_crossed[static_cast<std::size_t>(e)]) break;
            out.bridge_crossed[static_cast<std::size_t>(e)] = 1;
            const auto& [u, w] = host.edges[static_cast<std::size_t>(e)];
            distinguished.insert({dec.bubble_of[u], u});
            distinguished.insert({dec.bubble_of[w], w});
            b = dec.bubble_parent[static_cast<std::size_t>(b)];
        }
    }

    out.clique.assign(static_cast<std::size_t>(dec.num_bubbles), {});
    for (const auto& [b, v] : distinguished)
        out.clique[static_cast<std::size_t>(b)].push_back(v);
    for (int b = 0; b < dec.num_bubbles; ++b)
        if (out.on_route[static_cast<std::size_t>(b)] &&
            out.clique[static_cast<std::size_t>(b)].size() >= 4)
            out.tree_like = false;
    return out;
}

std::array<double, 3> star_legs(double dxy, double dxz, double dyz) {
    return {0.5 * (dxy + dxz - dyz), 0.5 * (dxy + dyz - dxz),
            0.5 * (dxz + dyz - dxy)};
}

SkeletonBundle build_skeleton(const LatticeGraph& host,
                              const std::vector<int>& points) {
    if (points.empty())
        throw std::invalid_argument("build_skeleton: need spanning points");
    GkInfo gk = build_gk(host, points);
    if (!gk.tree_like)
        throw std::domain_error("build_skeleton: G(K) is not tree-like");
    const auto& dec = gk.bubbles;
    const int root_bubble = dec.bubble_of[0];

    // smallest route index through each crossed bridge / distinguished vertex,
    // used to order children the way the walks to x_1, x_2, ... meet them
    std::map<int, int> bridge_route;
    std::map<int, int> vertex_route;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const int idx = static_cast<int>(i);
        const int x = points[i];
        if (!vertex_route.count(x)) vertex_route[x] = idx;
        int b = dec.bubble_of[x];
        while (b != root_bubble) {
            const int e = dec.bubble_parent_bridge[static_cast<std::size_t>(b)];
            if (bridge_route.count(e)) break;
            bridge_route[e] = idx;
            const auto& [u, w] = host.edges[static_cast<std::size_t>(e)];
            if (!vertex_route.count(u)) vertex_route[u] = idx;
            if (!vertex_route.count(w)) vertex_route[w] = idx;
            b = dec.bubble_parent[static_cast<std::size_t>(b)];
        }
    }

    SkeletonBundle out;
    out.host = host;
    out.spanning = points;
    out.big_host = {0};
    out.starred = {0};
    out.host_to_big.assign(host.coords.size(), -1);
    out.host_to_big[0] = 0;

    // graph distances from the distinguished vertices of multi-vertex bubbles
    std::map<int, std::vector<int>> dist_from;
    for (int b = 0; b < dec.num_bubbles; ++b) {
        if (!gk.on_route[static_cast<std::size_t>(b)]) continue;
        if (gk.clique[static_cast<std::size_t>(b)].size() < 2) continue;
        for (int v : gk.clique[static_cast<std::size_t>(b)])
            if (!dist_from.count(v)) dist_from[v] = bfs_distances(host, v);
    }
    auto dg = [&](int a, int b) {
        return static_cast<double>(dist_from.at(a)[static_cast<std::size_t>(b)]);
    };

    auto add_big = [&](int parent_big, double len, int host_v, bool star) {
        const int id = out.big.add_child(parent_big, len);
        out.big_host.push_back(host_v);
        out.starred.push_back(star ? 1 : 0);
        if (host_v >= 0) out.host_to_big[host_v] = id;
        return id;
    };

    // crossed child bridges grouped by the endpoint inside each bubble
    std::vector<std::vector<std::pair<int, int>>> child_bridges(
        static_cast<std::size_t>(dec.num_bubbles)); // per bubble: (bridge e, child bubble)
    for (int b = 0; b < dec.num_bubbles; ++b) {
        const int e = dec.bubble_parent_bridge[static_cast<std::size_t>(b)];
        if (e >= 0 && gk.bridge_crossed[static_cast<std::size_t>(e)])
            child_bridges[static_cast<std::size_t>(
                              dec.bubble_parent[static_cast<std::size_t>(b)])]
                .emplace_back(e, b);
    }

    // depth-first over the bubble tree, building the skeleton
    struct Frame {
        int bubble;
        int entry_host;
    };
    std::vector<Frame> stack{{root_bubble, 0}};
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        auto exits = gk.clique[static_cast<std::size_t>(f.bubble)];
        exits.erase(std::remove(exits.begin(), exits.end(), f.entry_host),
                    exits.end());
        std::sort(exits.begin(), exits.end(), [&](int a, int b) {
            return vertex_route.at(a) < vertex_route.at(b);
        });
        const int entry_big = out.host_to_big[f.entry_host];

        if (exits.size() == 1) {
            add_big(entry_big, dg(f.entry_host, exits[0]), exits[0], false);
        } else if (exits.size() == 2) {
            const int a = f.entry_host, b = exits[0], c = exits[1];
            const auto legs = star_legs(dg(a, b), dg(a, c), dg(b, c));
            if (legs[0] == 0.0) { // center at the entry vertex
                add_big(entry_big, dg(a, b), b, false);
                add_big(entry_big, dg(a, c), c, false);
            } else if (legs[1] == 0.0) { // b lies between a and c
                const int bb = add_big(entry_big, dg(a, b), b, false);
                add_big(bb, dg(b, c), c, false);
            } else if (legs[2] == 0.0) { // c lies between a and b
                const int cc = add_big(entry_big, dg(a, c), c, false);
                add_big(cc, dg(c, b), b, false);
            } else {
                const int s = add_big(entry_big, legs[0], -1, true);
                add_big(s, legs[1], b, false);
                add_big(s, legs[2], c, false);
            }
        } else if (exits.size() > 2) {
            throw std::domain_error("build_skeleton: bubble with > 3 attachments");
        }

        // descend through crossed bridges, children in route order
        auto kids = child_bridges[static_cast<std::size_t>(f.bubble)];
        std::sort(kids.begin(), kids.end(), [&](const auto& p, const auto& q) {
            return bridge_route.at(p.first) < bridge_route.at(q.first);
        });
        std::reverse(kids.begin(), kids.end()); // stack order
        for (const auto& [e, child] : kids) {
            auto [u, w] = host.edges[static_cast<std::size_t>(e)];
            if (dec.bubble_of[u] != f.bubble) std::swap(u, w);
            add_big(out.host_to_big[u], 1.0, w, false);
            stack.push_back({child, w});
        }
    }

    // lattice embedding: vertices at their sites, star centers at barycenters
    std::vector<Vec> pos(out.big.nodes.size());
    for (int v = 0; v < out.big.size(); ++v) {
        if (out.big_host[v] < 0) continue;
        const auto& c = host.coords[static_cast<std::size_t>(out.big_host[v])];
        pos[v].assign(c.begin(), c.end());
    }
    for (int v = 0; v < out.big.size(); ++v) {
        if (out.big_host[v] >= 0) continue;
        const int p = out.big.nodes[v].parent;
        const auto& kids = out.big.nodes[v].children;
        if (kids.size() != 2)
            throw std::logic_error("build_skeleton: malformed star center");
        pos[v].assign(pos[p].size(), 0.0);
        for (std::size_t k = 0; k < pos[v].size(); ++k)
            pos[v][k] = (pos[p][k] + pos[kids[0]][k] + pos[kids[1]][k]) / 3.0;
    }
    out.embedding = embed_from_vertex_positions(out.big, host.d, pos);

    // spanned reduction, leaf i+1 = x_i
    std::vector<TreePoint> leaf_pts;
    for (int x : points) {
        const int node = out.host_to_big[x];
        leaf_pts.push_back(
            TreePoint{node, node == 0 ? 0.0 : out.big.nodes[node].edge_len});
    }
    out.reduced = reduced_subtree(out.big, leaf_pts);

    // vertex projection: last skeleton vertex crossed walking out from the root
    std::vector<int> last_v(static_cast<std::size_t>(dec.num_bubbles), -1);
    {
        // bubbles in root-first order
        std::vector<int> order;
        std::vector<std::vector<int>> kids_of(
            static_cast<std::size_t>(dec.num_bubbles));
        for (int b = 0; b < dec.num_bubbles; ++b)
            if (dec.bubble_parent[static_cast<std::size_t>(b)] >= 0)
                kids_of[static_cast<std::size_t>(
                            dec.bubble_parent[static_cast<std::size_t>(b)])]
                    .push_back(b);
        std::deque<int> q{root_bubble};
        while (!q.empty()) {
            const int b = q.front();
            q.pop_front();
            order.push_back(b);
            for (int c : kids_of[static_cast<std::size_t>(b)]) q.push_back(c);
        }
        for (int b : order) {
            const int e = dec.bubble_parent_bridge[static_cast<std::size_t>(b)];
            if (b == root_bubble) {
                last_v[static_cast<std::size_t>(b)] = 0; // the root itself
            } else if (gk.bridge_crossed[static_cast<std::size_t>(e)]) {
                auto [u, w] = host.edges[static_cast<std::size_t>(e)];
                if (dec.bubble_of[w] != b) std::swap(u, w);
                last_v[static_cast<std::size_t>(b)] = out.host_to_big[w];
            } else {
                last_v[static_cast<std::size_t>(b)] = last_v[static_cast<std::size_t>(
                    dec.bubble_parent[static_cast<std::size_t>(b)])];
            }
        }
    }
    out.vertex_projection.resize(host.coords.size());
    for (int v = 0; v < host.num_vertices(); ++v)
        out.vertex_projection[v] = out.host_to_big[v] >= 0
                                       ? out.host_to_big[v]
                                       : last_v[static_cast<std::size_t>(
                                             dec.bubble_of[v])];

    // edge projection: common endpoint projection, else the deeper one
    out.edge_projection.resize(host.edges.size());
    out.mu_counts.assign(out.big.nodes.size(), 0);
    for (int e = 0; e < host.num_edges(); ++e) {
        const auto& [x, y] = host.edges[static_cast<std::size_t>(e)];
        const int px = out.vertex_projection[x], py = out.vertex_projection[y];
        int target;
        if (px == py)
            target = px;
        else if (out.big.is_ancestor(px, py))
            target = py;
        else if (out.big.is_ancestor(py, px))
            target = px;
        else {
            // both endpoints are skeleton vertices on different star legs
            // (an in-bubble chord); pick the deeper one deterministically
            const double dx = out.big.depth_of_node(px);
            const double dy = out.big.depth_of_node(py);
            target = (dy > dx || (dy == dx && py < px)) ? py : px;
        }
        out.edge_projection[e] = target;
        ++out.mu_counts[static_cast<std::size_t>(target)];
    }
    return out;
}

std::vector<double> mu_weights(const SkeletonBundle& b) {
    std::vector<double> w(b.mu_counts.size(), 0.0);
    const double m = static_cast<double>(b.host.num_edges());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = static_cast<double>(b.mu_counts[i]) / m;
    return w;
}

std::pair<double, double> sausage_diameters(const SkeletonBundle& b) {
    std::map<int, std::vector<int>> groups;
    for (int v = 0; v < b.host.num_vertices(); ++v)
        groups[b.vertex_projection[v]].push_back(v);
    double de = 0.0, di = 0.0;
    for (const auto& [node, vs] : groups) {
        for (std::size_t i = 0; i < vs.size(); ++i)
            for (std::size_t j = i + 1; j < vs.size(); ++j)
                de = std::max(de, euclid(b.host.coords[static_cast<std::size_t>(vs[i])],
                                         b.host.coords[static_cast<std::size_t>(vs[j])]));
        if (vs.size() < 2) continue;
        if (b.host.is_tree()) {
            // tree metric: double sweep inside the group is exact
            auto d0 = bfs_distances(b.host, vs[0]);
            int far = vs[0];
            for (int v : vs)
                if (d0[static_cast<std::size_t>(v)] > d0[static_cast<std::size_t>(far)])
                    far = v;
            auto d1 = bfs_distances(b.host, far);
            for (int v : vs)
                di = std::max(di,
                              static_cast<double>(d1[static_cast<std::size_t>(v)]));
        } else {
            for (int v : vs) {
                auto dv = bfs_distances(b.host, v);
                for (int u : vs)
                    di = std::max(
                        di, static_cast<double>(dv[static_cast<std::size_t>(u)]));
            }
        }
    }
    return {de, di};
}

} // namespace lattree
