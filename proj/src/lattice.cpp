#include "lattree/lattice.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lattree {

void LatticeGraph::build_adjacency() {
    adj.assign(coords.size(), {});
    for (const auto& [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
}

void LatticeGraph::validate() const {
    if (coords.empty()) throw std::invalid_argument("lattice graph: no vertices");
    for (int c : coords[0])
        if (c != 0) throw std::invalid_argument("lattice graph: root not at origin");
    for (const auto& [a, b] : edges) {
        if (a < 0 || b < 0 || a >= num_vertices() || b >= num_vertices() || a == b)
            throw std::invalid_argument("lattice graph: bad edge");
        for (int k = 0; k < d; ++k)
            if (std::abs(coords[a][k] - coords[b][k]) > L)
                throw std::invalid_argument("lattice graph: edge exceeds range L");
    }
    // connectivity
    std::vector<char> seen(coords.size(), 0);
    std::vector<std::vector<int>> nb(coords.size());
    for (const auto& [a, b] : edges) {
        nb[a].push_back(b);
        nb[b].push_back(a);
    }
    std::deque<int> q{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
        const int v = q.front();
        q.pop_front();
        for (int u : nb[v])
            if (!seen[u]) {
                seen[u] = 1;
                ++count;
                q.push_back(u);
            }
    }
    if (count != coords.size())
        throw std::invalid_argument("lattice graph: not connected");
}

double weight(const LatticeTree& tree, double z) {
    const double nbhd = std::pow(2.0 * tree.L, tree.d) - 1.0;
    return std::pow(z / nbhd, static_cast<double>(tree.num_edges()));
}

namespace {

std::string edge_set_key(const std::vector<std::pair<std::vector<int>, std::vector<int>>>&
                             edges) {
    auto sorted = edges;
    for (auto& e : sorted)
        if (e.second < e.first) std::swap(e.first, e.second);
    std::sort(sorted.begin(), sorted.end());
    std::ostringstream os;
    for (const auto& [a, b] : sorted) {
        for (int c : a) os << c << ",";
        os << "|";
        for (int c : b) os << c << ",";
        os << ";";
    }
    return os.str();
}

std::vector<std::vector<int>> displacement_ball(int d, int L) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(d), -L);
    while (true) {
        if (std::any_of(cur.begin(), cur.end(), [](int c) { return c != 0; }))
            out.push_back(cur);
        int k = 0;
        while (k < d && cur[k] == L) cur[k++] = -L;
        if (k == d) break;
        ++cur[k];
    }
    return out;
}

LatticeTree finish_tree(int d, int L, const std::vector<std::vector<int>>& coords,
                        const std::vector<int>& parent) {
    LatticeTree t;
    t.d = d;
    t.L = L;
    t.coords = coords;
    t.parent = parent;
    for (std::size_t v = 1; v < coords.size(); ++v)
        t.edges.emplace_back(parent[v], static_cast<int>(v));
    t.build_adjacency();
    std::vector<int> depth(coords.size(), 0);
    for (std::size_t v = 1; v < coords.size(); ++v) {
        depth[v] = depth[static_cast<std::size_t>(parent[v])] + 1;
        t.height = std::max(t.height, depth[v]);
    }
    std::set<std::vector<int>> sites(coords.begin(), coords.end());
    t.site_collisions = static_cast<int>(coords.size() - sites.size());
    return t;
}

} // namespace

std::vector<std::pair<LatticeTree, double>>
enumerate_small_trees(int d, int L, int max_edges, double z, std::size_t budget) {
    if (d < 1 || L < 1 || max_edges < 0)
        throw std::invalid_argument("enumerate_small_trees: bad parameters");
    const auto ball = displacement_ball(d, L);

    struct Entry {
        std::vector<std::vector<int>> coords;
        std::vector<int> parent;
    };
    std::vector<Entry> all;
    std::set<std::string> seen;
    Entry root{{std::vector<int>(static_cast<std::size_t>(d), 0)}, {-1}};
    all.push_back(root);
    seen.insert("");

    // grow trees one new vertex at a time; acyclicity forces every extension
    // to use a fresh lattice site, so dedup is on the geometric edge set
    std::size_t frontier_begin = 0;
    for (int e = 0; e < max_edges; ++e) {
        const std::size_t frontier_end = all.size();
        for (std::size_t i = frontier_begin; i < frontier_end; ++i) {
            const Entry cur = all[i];
            for (std::size_t v = 0; v < cur.coords.size(); ++v) {
                for (const auto& delta : ball) {
                    std::vector<int> site(cur.coords[v]);
                    for (int k = 0; k < d; ++k) site[k] += delta[k];
                    if (std::find(cur.coords.begin(), cur.coords.end(), site) !=
                        cur.coords.end())
                        continue; // would close a cycle (or duplicate a site)
                    Entry next = cur;
                    next.coords.push_back(site);
                    next.parent.push_back(static_cast<int>(v));
                    std::vector<std::pair<std::vector<int>, std::vector<int>>> ge;
                    for (std::size_t w = 1; w < next.coords.size(); ++w)
                        ge.emplace_back(
                            next.coords[static_cast<std::size_t>(next.parent[w])],
                            next.coords[w]);
                    const std::string key = edge_set_key(ge);
                    if (!seen.insert(key).second) continue;
                    all.push_back(std::move(next));
                    if (all.size() > budget)
                        throw std::runtime_error(
                            "enumerate_small_trees: budget exceeded");
                }
            }
        }
        frontier_begin = frontier_end;
    }

    std::vector<std::pair<LatticeTree, double>> out;
    out.reserve(all.size());
    for (const auto& ent : all) {
        LatticeTree t = finish_tree(d, L, ent.coords, ent.parent);
        const double w = weight(t, z);
        out.emplace_back(std::move(t), w);
    }
    return out;
}

LatticeTree sample_surrogate(const SurrogateParams& p, Rng& rng) {
    if (p.n < 1 || p.h <= 0.0 || p.d < 1 || p.L < 1)
        throw std::invalid_argument("sample_surrogate: bad parameters");
    const int target = static_cast<int>(std::ceil(p.h * p.n));
    const bool geometric = p.offspring == "geometric";
    if (!geometric && p.offspring != "poisson")
        throw std::invalid_argument("sample_surrogate: unknown offspring law");
    std::geometric_distribution<int> geo(0.5); // P(k) = 2^{-k-1}, mean 1
    std::poisson_distribution<int> poi(1.0);

    for (std::size_t attempt = 0; attempt < p.max_attempts; ++attempt) {
        std::vector<int> parent{-1};
        std::vector<int> depth{0};
        int height = 0;
        bool overflow = false;
        for (std::size_t v = 0; v < parent.size(); ++v) {
            const int k = geometric ? geo(rng.engine()) : poi(rng.engine());
            for (int c = 0; c < k; ++c) {
                parent.push_back(static_cast<int>(v));
                depth.push_back(depth[v] + 1);
                height = std::max(height, depth.back());
                if (parent.size() > p.max_vertices) {
                    overflow = true;
                    break;
                }
            }
            if (overflow) break;
        }
        if (overflow || height < target) continue;

        // spatial marks: iid displacements uniform on [-L,L]^d \ {0}
        std::vector<std::vector<int>> coords(parent.size());
        coords[0].assign(static_cast<std::size_t>(p.d), 0);
        for (std::size_t v = 1; v < parent.size(); ++v) {
            std::vector<int> delta(static_cast<std::size_t>(p.d));
            do {
                for (int k = 0; k < p.d; ++k)
                    delta[k] =
                        static_cast<int>(rng.uniform_index(2 * p.L + 1)) - p.L;
            } while (std::all_of(delta.begin(), delta.end(),
                                 [](int c) { return c == 0; }));
            coords[v] = coords[static_cast<std::size_t>(parent[v])];
            for (int k = 0; k < p.d; ++k) coords[v][k] += delta[k];
        }
        return finish_tree(p.d, p.L, coords, parent);
    }
    throw std::runtime_error("sample_surrogate: rejection budget exceeded after " +
                             std::to_string(p.max_attempts) + " attempts");
}

WalkPath srw(const LatticeGraph& graph, std::size_t steps, Rng& rng) {
    WalkPath w;
    w.positions.reserve(steps + 1);
    int cur = 0;
    w.positions.push_back(cur);
    for (std::size_t s = 0; s < steps; ++s) {
        const auto& nb = graph.adj[cur];
        if (nb.empty()) throw std::invalid_argument("srw: isolated vertex");
        cur = nb[rng.uniform_index(nb.size())];
        w.positions.push_back(cur);
    }
    return w;
}

int graph_distance(const LatticeGraph& graph, int x, int y) {
    if (x == y) return 0;
    std::vector<int> dist(graph.coords.size(), -1);
    std::deque<int> q{x};
    dist[x] = 0;
    while (!q.empty()) {
        const int v = q.front();
        q.pop_front();
        for (int u : graph.adj[v])
            if (dist[u] < 0) {
                dist[u] = dist[v] + 1;
                if (u == y) return dist[u];
                q.push_back(u);
            }
    }
    return -1;
}

double effective_resistance(const LatticeGraph& graph, int x, int y) {
    const int n = graph.num_vertices();
    if (x == y || x < 0 || y < 0 || x >= n || y >= n)
        throw std::invalid_argument("effective_resistance: bad vertex pair");
    const int d = graph_distance(graph, x, y);
    if (d < 0) throw std::invalid_argument("effective_resistance: disconnected pair");
    if (graph.is_tree()) return static_cast<double>(d); // unique path: series sum

    // pin y at potential 0, inject unit current at x, solve the reduced system
    std::vector<int> idx(static_cast<std::size_t>(n), -1);
    int m = 0;
    for (int v = 0; v < n; ++v)
        if (v != y) idx[v] = m++;
    std::vector<Eigen::Triplet<double>> trips;
    std::vector<double> diag(static_cast<std::size_t>(m), 0.0);
    for (const auto& [a, b] : graph.edges) {
        if (a != y && b != y) trips.emplace_back(idx[a], idx[b], -1.0);
        if (a != y && b != y) trips.emplace_back(idx[b], idx[a], -1.0);
        if (a != y) diag[static_cast<std::size_t>(idx[a])] += 1.0;
        if (b != y) diag[static_cast<std::size_t>(idx[b])] += 1.0;
    }
    for (int i = 0; i < m; ++i)
        trips.emplace_back(i, i, diag[static_cast<std::size_t>(i)]);
    Eigen::SparseMatrix<double> lap(m, m);
    lap.setFromTriplets(trips.begin(), trips.end());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    rhs[idx[x]] = 1.0;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("effective_resistance: factorization failed");
    const Eigen::VectorXd volt = solver.solve(rhs);
    return volt[idx[x]];
}

std::string serialize(const LatticeGraph& g) {
    std::ostringstream os;
    os << "lattice " << g.d << " " << g.L << " " << g.num_vertices() << "\n";
    for (int v = 0; v < g.num_vertices(); ++v) {
        for (int k = 0; k < g.d; ++k) os << (k ? " " : "") << g.coords[v][k];
        os << "\n";
    }
    for (const auto& [a, b] : g.edges) {
        for (int k = 0; k < g.d; ++k) os << (k ? " " : "") << g.coords[a][k];
        os << " ; ";
        for (int k = 0; k < g.d; ++k) os << (k ? " " : "") << g.coords[b][k];
        os << " ; " << a << " " << b << "\n";
    }
    return os.str();
}

LatticeGraph deserialize_graph(const std::string& text) {
    std::istringstream is(text);
    std::string tag;
    LatticeGraph g;
    int n = 0;
    if (!(is >> tag >> g.d >> g.L >> n) || tag != "lattice" || n < 1)
        throw std::invalid_argument("deserialize_graph: bad header");
    g.coords.resize(static_cast<std::size_t>(n));
    for (auto& c : g.coords) {
        c.resize(static_cast<std::size_t>(g.d));
        for (int k = 0; k < g.d; ++k)
            if (!(is >> c[k]))
                throw std::invalid_argument("deserialize_graph: bad vertex row");
    }
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto semi = line.rfind(';');
        if (semi == std::string::npos)
            throw std::invalid_argument("deserialize_graph: bad edge row");
        std::istringstream ls(line.substr(semi + 1));
        int a, b;
        if (!(ls >> a >> b) || a < 0 || b < 0 || a >= n || b >= n)
            throw std::invalid_argument("deserialize_graph: bad edge indices");
        g.edges.emplace_back(a, b);
    }
    g.build_adjacency();
    g.validate();
    return g;
}

} // namespace lattree
