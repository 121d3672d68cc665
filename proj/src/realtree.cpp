#include "lattree/realtree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace lattree {

int MetricTree::add_child(int parent, double len) {
    if (parent < 0 || parent >= size())
        throw std::invalid_argument("add_child: bad parent");
    Node n;
    n.parent = parent;
    n.edge_len = len;
    const int id = size();
    nodes.push_back(n);
    nodes[parent].children.push_back(id);
    return id;
}

double MetricTree::depth_of_node(int v) const {
    double d = 0.0;
    while (v != 0) {
        d += nodes[v].edge_len;
        v = nodes[v].parent;
    }
    return d;
}

double MetricTree::depth_of_point(const TreePoint& p) const {
    if (p.node == 0) return 0.0;
    return depth_of_node(nodes[p.node].parent) + p.offset;
}

double MetricTree::total_length() const {
    double s = 0.0;
    for (int v = 1; v < size(); ++v) s += nodes[v].edge_len;
    return s;
}

double MetricTree::subtree_length(int v) const {
    double s = 0.0;
    for (int c : nodes[v].children) s += nodes[c].edge_len + subtree_length(c);
    return s;
}

bool MetricTree::is_ancestor(int anc, int v) const {
    while (v != anc && v != 0) v = nodes[v].parent;
    return v == anc;
}

namespace {
int node_level(const MetricTree& t, int v) {
    int l = 0;
    while (v != 0) {
        v = t.nodes[v].parent;
        ++l;
    }
    return l;
}
} // namespace

int MetricTree::lca(int a, int b) const {
    int la = node_level(*this, a), lb = node_level(*this, b);
    while (la > lb) {
        a = nodes[a].parent;
        --la;
    }
    while (lb > la) {
        b = nodes[b].parent;
        --lb;
    }
    while (a != b) {
        a = nodes[a].parent;
        b = nodes[b].parent;
    }
    return a;
}

void MetricTree::check_point(const TreePoint& p) const {
    if (p.node < 0 || p.node >= size())
        throw std::invalid_argument("tree point: node out of range");
    if (p.node == 0) {
        if (p.offset != 0.0)
            throw std::invalid_argument("tree point: root has no edge above it");
        return;
    }
    if (p.offset < 0.0 || p.offset > nodes[p.node].edge_len)
        throw std::invalid_argument("tree point: offset outside edge");
}

TreePoint MetricTree::canonical(const TreePoint& p) const {
    check_point(p);
    TreePoint q = p;
    // offset == 0 means the parent vertex; walk up until the point sits at the
    // bottom of its own edge (or is the root)
    while (q.node != 0 && q.offset == 0.0) {
        const int par = nodes[q.node].parent;
        q = TreePoint{par, par == 0 ? 0.0 : nodes[par].edge_len};
    }
    return q;
}

bool MetricTree::same_point(const TreePoint& a, const TreePoint& b) const {
    const TreePoint ca = canonical(a), cb = canonical(b);
    return ca.node == cb.node && ca.offset == cb.offset;
}

std::vector<int> MetricTree::effective_leaf_order() const {
    if (!leaf_order.empty()) return leaf_order;
    std::vector<int> out;
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        if (nodes[v].children.empty() && v != 0) out.push_back(v);
        for (auto it = nodes[v].children.rbegin(); it != nodes[v].children.rend(); ++it)
            stack.push_back(*it);
    }
    return out;
}

namespace {

// is a on the root-to-b path (weakly)?
bool point_is_ancestor(const MetricTree& t, const TreePoint& a, const TreePoint& b) {
    const TreePoint ca = t.canonical(a), cb = t.canonical(b);
    if (ca.node == cb.node) return ca.offset <= cb.offset;
    // ca is mid-edge or vertex on edge into ca.node; the root->cb path passes
    // through that whole edge iff ca.node is a (strict) ancestor of cb.node
    return t.is_ancestor(ca.node, cb.node);
}

} // namespace

double distance(const MetricTree& t, const TreePoint& a, const TreePoint& b) {
    const TreePoint ca = t.canonical(a), cb = t.canonical(b);
    const double da = t.depth_of_point(ca), db = t.depth_of_point(cb);
    if (point_is_ancestor(t, ca, cb)) return db - da;
    if (point_is_ancestor(t, cb, ca)) return da - db;
    const double dm = t.depth_of_node(t.lca(ca.node, cb.node));
    return da + db - 2.0 * dm;
}

TreePoint ancestor_point_at_depth(const MetricTree& t, const TreePoint& below,
                                  double target_depth) {
    TreePoint p = t.canonical(below);
    if (target_depth <= 0.0) return TreePoint{0, 0.0};
    double dp = t.depth_of_point(p);
    if (target_depth >= dp) return p;
    int v = p.node;
    // depth of the parent endpoint of the edge carrying the current point
    double parent_depth = dp - p.offset;
    while (parent_depth > target_depth) {
        v = t.nodes[v].parent;
        parent_depth -= t.nodes[v].edge_len;
    }
    return TreePoint{v, target_depth - parent_depth};
}

TreePoint point_on_path(const MetricTree& t, const TreePoint& a, const TreePoint& b,
                        double dist) {
    const TreePoint ca = t.canonical(a), cb = t.canonical(b);
    const double d_ab = distance(t, ca, cb);
    if (dist < -1e-12 || dist > d_ab + 1e-9)
        throw std::invalid_argument("point_on_path: distance outside path");
    dist = std::clamp(dist, 0.0, d_ab);
    const double da = t.depth_of_point(ca);
    double dm; // depth of the path's topmost point
    if (point_is_ancestor(t, ca, cb))
        dm = da;
    else if (point_is_ancestor(t, cb, ca))
        dm = t.depth_of_point(cb);
    else
        dm = t.depth_of_node(t.lca(ca.node, cb.node));
    const double up = da - dm;
    if (dist <= up) return ancestor_point_at_depth(t, ca, da - dist);
    return ancestor_point_at_depth(t, cb, dm + (dist - up));
}

TreePoint branch_point(const MetricTree& t, const TreePoint& a, const TreePoint& b,
                       const TreePoint& c) {
    const double d_ab = distance(t, a, b);
    const double d_ac = distance(t, a, c);
    const double d_bc = distance(t, b, c);
    const double from_a = 0.5 * (d_ab + d_ac - d_bc);
    if (d_ab >= d_ac) return point_on_path(t, a, b, from_a);
    return point_on_path(t, a, c, from_a);
}

int split_at(MetricTree& t, const TreePoint& p) {
    const TreePoint c = t.canonical(p);
    if (c.node == 0) return 0;
    if (c.offset == t.nodes[c.node].edge_len) return c.node;
    const int v = c.node;
    const int par = t.nodes[v].parent;
    MetricTree::Node mid;
    mid.parent = par;
    mid.edge_len = c.offset;
    mid.children.push_back(v);
    const int id = t.size();
    t.nodes.push_back(mid);
    auto& pc = t.nodes[par].children;
    *std::find(pc.begin(), pc.end(), v) = id; // keep the slot, keep edge order
    t.nodes[v].parent = id;
    t.nodes[v].edge_len -= c.offset;
    return id;
}

MetricTree reduced_subtree(const MetricTree& t, const std::vector<TreePoint>& points,
                           std::vector<TreePoint>* host_points) {
    if (points.empty())
        throw std::invalid_argument("reduced_subtree: need at least one point");
    MetricTree r;
    std::vector<TreePoint> host{TreePoint{0, 0.0}}; // host position of each r-node

    for (std::size_t k = 0; k < points.size(); ++k) {
        const TreePoint sigma = t.canonical(points[k]);
        if (k == 0) {
            const double d = t.depth_of_point(sigma);
            if (d <= 0.0) {
                r.leaf_order.push_back(0);
            } else {
                const int leaf = r.add_child(0, d);
                host.push_back(sigma);
                r.leaf_order.push_back(leaf);
            }
            continue;
        }
        // attachment point in the host: deepest branch point with an existing leaf
        double best_depth = 0.0;
        TreePoint attach{0, 0.0};
        int chain_leaf = r.leaf_order[0];
        for (int lf : r.leaf_order) {
            const TreePoint bp = branch_point(t, TreePoint{0, 0.0}, host[lf], sigma);
            const double bd = t.depth_of_point(bp);
            if (bd > best_depth) {
                best_depth = bd;
                attach = bp;
                chain_leaf = lf; // attach lies on the root path of this leaf
            }
        }
        int at = 0;
        if (best_depth > 1e-15) {
            std::vector<int> chain;
            for (int v = chain_leaf; v != 0; v = r.nodes[v].parent) chain.push_back(v);
            std::reverse(chain.begin(), chain.end());
            double d = 0.0;
            at = -1;
            for (int v : chain) {
                const double next = d + r.nodes[v].edge_len;
                if (best_depth <= next + 1e-12) {
                    if (std::abs(best_depth - next) <= 1e-12) {
                        at = v;
                    } else {
                        at = split_at(r, TreePoint{v, best_depth - d});
                        host.push_back(t.canonical(attach));
                    }
                    break;
                }
                d = next;
            }
            if (at < 0)
                throw std::logic_error("reduced_subtree: attachment beyond chain");
        }
        const double leaf_len = t.depth_of_point(sigma) - best_depth;
        if (leaf_len <= 1e-15) {
            r.leaf_order.push_back(at);
        } else {
            const int leaf = r.add_child(at, leaf_len);
            host.push_back(sigma);
            r.leaf_order.push_back(leaf);
        }
    }
    if (host_points) *host_points = host;
    return r;
}

TreePoint uniform_point(const MetricTree& t, Rng& rng) {
    const double total = t.total_length();
    if (total <= 0.0) return TreePoint{0, 0.0};
    const double r = rng.uniform() * total;
    double acc = 0.0;
    for (int v = 1; v < t.size(); ++v) {
        const double len = t.nodes[v].edge_len;
        if (r < acc + len) return TreePoint{v, r - acc};
        acc += len;
    }
    return TreePoint{t.size() - 1, t.nodes[t.size() - 1].edge_len};
}

double lebesgue_measure_of_descendants(const MetricTree& t, const TreePoint& x) {
    const double total = t.total_length();
    if (total <= 0.0) return 1.0;
    const TreePoint c = t.canonical(x);
    double below = t.subtree_length(c.node);
    if (c.node != 0) below += t.nodes[c.node].edge_len - c.offset;
    return below / total;
}

MetricTree crt_skeleton_linebreaking(int K, Rng& rng) {
    if (K < 1) throw std::invalid_argument("crt_skeleton_linebreaking: K >= 1");
    MetricTree t;
    crt_skeleton_extend(t, K, rng);
    return t;
}

void crt_skeleton_extend(MetricTree& t, int K, Rng& rng) {
    int have = static_cast<int>(t.leaf_order.size());
    if (K <= have) return;
    // cut position of the last break, in the classical scale (our stored edge
    // lengths are half of it)
    double c = 2.0 * t.total_length();
    while (have < K) {
        const double e = rng.exponential();
        const double c_next = std::sqrt(c * c + 2.0 * e);
        const double seg = 0.5 * (c_next - c);
        if (have == 0) {
            const int leaf = t.add_child(0, seg);
            t.leaf_order.push_back(leaf);
        } else {
            TreePoint p = uniform_point(t, rng);
            const int at = split_at(t, p);
            const int leaf = t.add_child(at, seg);
            t.leaf_order.push_back(leaf);
        }
        c = c_next;
        ++have;
    }
}

MetricTree crt_skeleton_from_excursion(const ExcursionPath& path, int K, Rng& rng,
                                       std::vector<double>* times_out) {
    if (K < 1) throw std::invalid_argument("crt_skeleton_from_excursion: K >= 1");
    std::vector<double> times(static_cast<std::size_t>(K));
    for (auto& u : times) u = rng.uniform() * path.duration;
    if (times_out) *times_out = times;
    ExcursionIndex idx(path);
    return crt_skeleton_from_times(idx, times);
}

namespace {

// value/range-min provider over the raw path; same endpoint-interpolation
// semantics as ExcursionIndex, with direct scans instead of a sparse table
// (cheaper when only a handful of queries are needed)
struct PathMins {
    const ExcursionPath& path;
    double value_at(double t) const { return path.value_at(t); }
    double range_min(double s, double t) const {
        const double lo = std::min(s, t), hi = std::max(s, t);
        if (hi >= path.duration) return 0.0;
        double m = std::min(path.value_at(lo), path.value_at(hi));
        const std::size_t i0 = static_cast<std::size_t>(std::ceil(lo / path.dt));
        const std::size_t i1 = static_cast<std::size_t>(std::floor(hi / path.dt));
        for (std::size_t i = i0; i <= i1 && i < path.values.size(); ++i)
            m = std::min(m, path.values[i]);
        return m;
    }
};

template <class Mins>
MetricTree skeleton_from_times_impl(const Mins& idx, const std::vector<double>& times) {
    const int K = static_cast<int>(times.size());
    if (K < 1) throw std::invalid_argument("crt_skeleton_from_times: need times");
    std::vector<int> order(times.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return times[a] < times[b]; });

    MetricTree t;
    t.leaf_order.assign(times.size(), -1);
    // rightmost spine from the root, as (node, depth) pairs with increasing depth
    std::vector<std::pair<int, double>> spine{{0, 0.0}};
    double prev_time = 0.0;
    for (std::size_t j = 0; j < order.size(); ++j) {
        const double u = times[order[j]];
        const double depth = idx.value_at(u);
        double merge = 0.0;
        if (j > 0) merge = std::min(idx.range_min(prev_time, u), depth);
        prev_time = u;
        // pop spine nodes strictly deeper than the merge depth
        std::pair<int, double> popped{-1, 0.0};
        while (spine.back().second > merge) {
            popped = spine.back();
            spine.pop_back();
        }
        int branch;
        if (popped.first < 0 || merge - spine.back().second <= 1e-15 * (1.0 + merge)) {
            branch = spine.back().first;
        } else {
            // merge falls strictly inside the edge spine.back() -> popped
            const int v = popped.first;
            const double off = merge - spine.back().second;
            branch = split_at(t, TreePoint{v, off});
            spine.emplace_back(branch, merge);
        }
        if (depth - merge <= 1e-15 * (1.0 + depth)) {
            t.leaf_order[order[j]] = branch;
        } else {
            const int leaf = t.add_child(branch, depth - merge);
            t.leaf_order[order[j]] = leaf;
            spine.emplace_back(leaf, depth);
        }
    }
    return t;
}

} // namespace

MetricTree crt_skeleton_from_times(const ExcursionIndex& idx,
                                   const std::vector<double>& times) {
    return skeleton_from_times_impl(idx, times);
}

MetricTree crt_skeleton_from_times(const ExcursionPath& path,
                                   const std::vector<double>& times) {
    return skeleton_from_times_impl(PathMins{path}, times);
}

TreePoint project_time_onto_skeleton(const ExcursionIndex& idx,
                                     const std::vector<double>& times,
                                     const MetricTree& skel, double t) {
    if (times.empty())
        throw std::invalid_argument("project_time_onto_skeleton: need times");
    std::size_t best = 0;
    double best_depth = -1.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double m = idx.range_min(times[i], t);
        if (m > best_depth) {
            best_depth = m;
            best = i;
        }
    }
    const int leaf = skel.leaf_order[best];
    const TreePoint tip{leaf, leaf == 0 ? 0.0 : skel.nodes[leaf].edge_len};
    return ancestor_point_at_depth(skel, tip, best_depth);
}

std::vector<int> preorder_order(const MetricTree& t) {
    std::vector<int> order;
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        order.push_back(v);
        for (auto it = t.nodes[v].children.rbegin(); it != t.nodes[v].children.rend();
             ++it)
            stack.push_back(*it);
    }
    return order;
}

std::string serialize(const MetricTree& t) {
    const std::vector<int> order = preorder_order(t);
    std::vector<int> relabel(static_cast<std::size_t>(t.size()), -1);
    for (int id = 0; id < t.size(); ++id) relabel[order[id]] = id;
    std::ostringstream os;
    os << "tree " << t.size() << "\n";
    char buf[64];
    for (int id = 1; id < t.size(); ++id) {
        const int v = order[id];
        const int par = t.nodes[v].parent;
        const auto& pc = t.nodes[par].children;
        const auto rank = std::find(pc.begin(), pc.end(), v) - pc.begin();
        std::snprintf(buf, sizeof buf, "%.17g", t.nodes[v].edge_len);
        os << id << " " << relabel[par] << " " << buf << " " << rank << "\n";
    }
    for (std::size_t i = 0; i < t.leaf_order.size(); ++i)
        os << "leaf " << (i + 1) << " " << relabel[t.leaf_order[i]] << "\n";
    return os.str();
}

MetricTree deserialize_tree(const std::string& text) {
    std::istringstream is(text);
    std::string tag;
    int n = 0;
    if (!(is >> tag >> n) || tag != "tree" || n < 1)
        throw std::invalid_argument("deserialize_tree: bad header");
    MetricTree t;
    t.nodes.resize(static_cast<std::size_t>(n));
    std::vector<std::vector<std::pair<int, int>>> kids(static_cast<std::size_t>(n));
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string first;
        ls >> first;
        if (first == "leaf") {
            std::size_t label;
            int node;
            if (!(ls >> label >> node))
                throw std::invalid_argument("deserialize_tree: bad leaf row");
            if (t.leaf_order.size() < label) t.leaf_order.resize(label, -1);
            t.leaf_order[label - 1] = node;
        } else {
            int v = std::stoi(first), par, rank;
            double len;
            if (!(ls >> par >> len >> rank))
                throw std::invalid_argument("deserialize_tree: bad edge row");
            if (v < 1 || v >= n || par < 0 || par >= n)
                throw std::invalid_argument("deserialize_tree: node out of range");
            t.nodes[v].parent = par;
            t.nodes[v].edge_len = len;
            kids[par].emplace_back(rank, v);
        }
    }
    for (int v = 0; v < n; ++v) {
        std::sort(kids[v].begin(), kids[v].end());
        for (auto& [rank, c] : kids[v]) t.nodes[v].children.push_back(c);
    }
    return t;
}

} // namespace lattree
