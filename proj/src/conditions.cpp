#include "lattree/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lattree {

namespace {

TreePoint leaf_point(const MetricTree& t, int v) {
    return v == 0 ? TreePoint{0, 0.0} : TreePoint{v, t.nodes[v].edge_len};
}

// projection of x onto the subtree spanned by {root} U span: the deepest
// branch point over the root-to-span-point paths
TreePoint project_onto_span(const MetricTree& t, const std::vector<TreePoint>& span,
                            const TreePoint& x) {
    TreePoint best{0, 0.0};
    double best_depth = -1.0;
    for (const auto& s : span) {
        const TreePoint b = branch_point(t, TreePoint{0, 0.0}, s, x);
        const double d = t.depth_of_point(b);
        if (d > best_depth) {
            best_depth = d;
            best = b;
        }
    }
    return t.canonical(best);
}

int node_degree(const MetricTree& t, int v) {
    return static_cast<int>(t.nodes[v].children.size()) + (v == 0 ? 0 : 1);
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double norm2(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace

ConditionReport make_report(double statistic, double threshold, int replicas,
                            std::string notes) {
    ConditionReport r;
    r.statistic = statistic;
    r.threshold = threshold;
    r.pass = statistic <= threshold;
    r.replicas = replicas;
    r.notes = std::move(notes);
    return r;
}

std::vector<int> draw_spanning_points(const LatticeGraph& host, int count, Rng& rng) {
    if (count >= host.num_vertices())
        throw std::invalid_argument("draw_spanning_points: not enough vertices");
    std::vector<int> out;
    std::set<int> used{0};
    while (static_cast<int>(out.size()) < count) {
        const auto& e = host.edges[rng.uniform_index(host.edges.size())];
        const int v = rng.uniform() < 0.5 ? e.first : e.second;
        if (used.insert(v).second) out.push_back(v);
    }
    return out;
}

ConditionReport check_edge_uniform(const LatticeGraph& host, int trials, Rng& rng) {
    const int n = host.num_vertices();
    const int m = host.num_edges();
    double sup = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        // random connected vertex set grown from a random seed
        const std::size_t target = 1 + rng.uniform_index(static_cast<std::size_t>(n));
        std::vector<char> in(n, 0);
        std::vector<int> members, frontier;
        const int seed = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n)));
        in[seed] = 1;
        members.push_back(seed);
        frontier.push_back(seed);
        while (members.size() < target && !frontier.empty()) {
            const std::size_t pick = rng.uniform_index(frontier.size());
            const int v = frontier[pick];
            std::vector<int> fresh;
            for (int w : host.adj[v])
                if (!in[w]) fresh.push_back(w);
            if (fresh.empty()) {
                frontier[pick] = frontier.back();
                frontier.pop_back();
                continue;
            }
            const int w = fresh[rng.uniform_index(fresh.size())];
            in[w] = 1;
            members.push_back(w);
            frontier.push_back(w);
        }
        int induced = 0;
        for (const auto& e : host.edges)
            if (in[e.first] && in[e.second]) ++induced;
        const double dev = std::abs(static_cast<double>(members.size()) / n -
                                    static_cast<double>(induced) / m);
        sup = std::max(sup, dev);
    }
    std::ostringstream notes;
    notes << (host.is_tree() ? "tree host" : "general host") << "; |G|=" << n
          << " |E|=" << m << "; sup deviation over " << trials
          << " connected subsets vs bound 1/|G|";
    return make_report(sup, 1.0 / n, trials, notes.str());
}

EmpiricalMeasure empirical_measure_from_skeleton(const MetricTree& t, int K, int K1,
                                                 int K2, double tol) {
    const auto leaves = t.effective_leaf_order();
    if (static_cast<int>(leaves.size()) < K + K1 + K2)
        throw std::invalid_argument("empirical_measure_from_skeleton: too few leaves");
    std::vector<TreePoint> spanK;
    for (int i = 0; i < K; ++i) spanK.push_back(leaf_point(t, leaves[i]));

    std::vector<TreePoint> spanK1 = spanK;
    for (int i = K; i < K + K1; ++i) spanK1.push_back(leaf_point(t, leaves[i]));

    std::vector<TreePoint> hostK, hostK1;
    const MetricTree rk = reduced_subtree(t, spanK, &hostK);
    const MetricTree rk1 = reduced_subtree(t, spanK1, &hostK1);

    EmpiricalMeasure em;
    em.K = K;
    em.K1 = K1;
    em.K2 = K2;
    for (int w = 0; w < rk1.size(); ++w) {
        if (node_degree(rk1, w) != 3) continue;
        const TreePoint q = t.canonical(hostK1[w]);
        const TreePoint p = project_onto_span(t, spanK, q);
        if (distance(t, p, q) > tol) continue; // not a point of the K-span
        // skip points that were branch vertices already
        bool old_branch = false;
        for (int u = 0; u < rk.size(); ++u)
            if (node_degree(rk, u) >= 3 && distance(t, hostK[u], q) <= tol) {
                old_branch = true;
                break;
            }
        if (old_branch) continue;
        em.atoms.push_back(q);
    }
    em.weights.assign(em.atoms.size(), 0.0);
    for (int j = K + K1; j < K + K1 + K2; ++j) {
        const TreePoint p = project_onto_span(t, spanK, leaf_point(t, leaves[j]));
        for (std::size_t a = 0; a < em.atoms.size(); ++a)
            if (distance(t, p, em.atoms[a]) <= tol) {
                em.weights[a] += 1.0 / K2;
                break;
            }
    }
    return em;
}

EmpiricalMeasure build_empirical_measure(const LatticeGraph& host,
                                         const std::vector<int>& points, int K,
                                         int K1, int K2, SkeletonBundle* bundle_out) {
    if (static_cast<int>(points.size()) < K + K1 + K2)
        throw std::invalid_argument("build_empirical_measure: too few points");
    SkeletonBundle b =
        build_skeleton(host, std::vector<int>(points.begin(), points.begin() + K));

    // last host vertex before the path from v enters the skeleton; -1 when v
    // lies on the skeleton itself
    auto direction_of = [&](int v) {
        if (b.host_to_big[v] >= 0) return -1;
        std::vector<int> prev(host.num_vertices(), -2);
        std::queue<int> q;
        q.push(v);
        prev[v] = -1;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int w : host.adj[u]) {
                if (prev[w] != -2) continue;
                prev[w] = u;
                if (b.host_to_big[w] >= 0) return u;
                q.push(w);
            }
        }
        throw std::logic_error("direction_of: skeleton unreachable");
    };

    std::map<int, std::set<int>> directions; // big node -> departure directions
    for (int j = K; j < K + K1; ++j) {
        const int v = points[j];
        const int p = b.vertex_projection[v];
        const int dir = direction_of(v);
        if (dir >= 0) directions[p].insert(dir);
    }

    EmpiricalMeasure em;
    em.K = K;
    em.K1 = K1;
    em.K2 = K2;
    std::map<int, std::size_t> atom_of; // big node -> atom index
    for (const auto& [p, dirs] : directions) {
        if (node_degree(b.big, p) + static_cast<int>(dirs.size()) != 3) continue;
        atom_of[p] = em.atoms.size();
        em.atoms.push_back(leaf_point(b.big, p));
    }
    em.weights.assign(em.atoms.size(), 0.0);
    for (int j = K + K1; j < K + K1 + K2; ++j) {
        const auto it = atom_of.find(b.vertex_projection[points[j]]);
        if (it != atom_of.end()) em.weights[it->second] += 1.0 / K2;
    }
    if (bundle_out) *bundle_out = std::move(b);
    return em;
}

double tv_atomic(const MetricTree& t, const std::vector<TreePoint>& a,
                 const std::vector<double>& wa, const std::vector<TreePoint>& b,
                 const std::vector<double>& wb) {
    std::map<std::pair<int, double>, std::pair<double, double>> mass;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const TreePoint p = t.canonical(a[i]);
        mass[{p.node, p.offset}].first += wa[i];
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        const TreePoint p = t.canonical(b[i]);
        mass[{p.node, p.offset}].second += wb[i];
    }
    double up = 0.0, down = 0.0;
    for (const auto& [key, pq] : mass) {
        const double d = pq.first - pq.second;
        if (d > 0)
            up += d;
        else
            down -= d;
    }
    return std::max(up, down);
}

double v_sup_statistic(const MetricTree& t, const std::vector<TreePoint>& atoms,
                       const std::vector<double>& weights) {
    const double total = t.total_length();
    if (total <= 0.0)
        throw std::invalid_argument("v_sup_statistic: tree without length");

    // atoms per edge, plus cumulative mass strictly below each vertex
    std::vector<std::vector<std::pair<double, double>>> on_edge(t.nodes.size());
    double root_mass = 0.0, total_mass = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const TreePoint p = t.canonical(atoms[i]);
        total_mass += weights[i];
        if (p.node == 0)
            root_mass += weights[i];
        else
            on_edge[p.node].push_back({p.offset, weights[i]});
    }
    std::vector<double> edge_mass(t.nodes.size(), 0.0), below(t.nodes.size(), 0.0);
    for (std::size_t v = 0; v < t.nodes.size(); ++v)
        for (const auto& [off, w] : on_edge[v]) edge_mass[v] += w;
    const auto order = preorder_order(t);
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        for (int c : t.nodes[*it].children) below[*it] += below[c] + edge_mass[c];

    double sup = std::abs(1.0 - total_mass); // x = root
    for (int v = 1; v < t.size(); ++v) {
        const double len = t.nodes[v].edge_len;
        const double sub = t.subtree_length(v);
        // mu(T_x) for x = (v, s): below[v] + edge atoms with off > s
        // (or off == s when the atom itself counts)
        auto eval = [&](double s, bool include_at) {
            double mu = below[v];
            for (const auto& [off, w] : on_edge[v])
                if (off > s || (include_at && off == s)) mu += w;
            const double lambda = (sub + len - s) / total;
            return std::abs(lambda - mu);
        };
        sup = std::max(sup, eval(0.0, false));  // just below the parent vertex
        sup = std::max(sup, eval(len, true));   // at the vertex v
        for (const auto& [off, w] : on_edge[v]) {
            sup = std::max(sup, eval(off, true));
            // one-sided limit just past the atom; past the lower vertex the
            // child edges take over
            if (off < len) sup = std::max(sup, eval(off, false));
        }
    }
    return sup;
}

ConditionReport check_condition_V(const MetricTree& t,
                                  const std::vector<TreePoint>& atoms,
                                  const std::vector<double>& weights,
                                  double threshold) {
    const double sup = v_sup_statistic(t, atoms, weights);
    std::ostringstream notes;
    notes << "exact sup over tree points; " << atoms.size() << " atoms, mass "
          << std::accumulate(weights.begin(), weights.end(), 0.0);
    return make_report(sup, threshold, 1, notes.str());
}

ConditionReport check_condition_V(const SkeletonBundle& b, double threshold) {
    const auto w = mu_weights(b);
    std::vector<TreePoint> atoms;
    for (int v = 0; v < b.big.size(); ++v) atoms.push_back(leaf_point(b.big, v));
    auto r = check_condition_V(b.big, atoms, w, threshold);
    r.notes += "; mu = host-edge projection counts";
    return r;
}

ConditionReport check_condition_V_crt(const ExcursionIndex& idx,
                                      const std::vector<double>& times,
                                      const MetricTree& skel, int grid_points,
                                      double threshold) {
    std::vector<TreePoint> atoms;
    std::vector<double> weights;
    atoms.reserve(grid_points);
    double t_max = 0.0;
    for (double s : times) t_max = std::max(t_max, s);
    for (int i = 0; i < grid_points; ++i) {
        const double s = (i + 0.5) / grid_points;
        atoms.push_back(project_time_onto_skeleton(idx, times, skel, s));
        weights.push_back(1.0 / grid_points);
    }
    auto r = check_condition_V(skel, atoms, weights, threshold);
    r.notes += "; mu = projected time-grid mass, grid " + std::to_string(grid_points);
    return r;
}

ConditionReport check_condition_R(const LatticeGraph& host,
                                  const std::vector<int>& points, double threshold) {
    std::vector<double> ratios;
    for (int v : points) {
        if (v == 0) throw std::invalid_argument("check_condition_R: root point");
        const double r = effective_resistance(host, 0, v);
        const double d = graph_distance(host, 0, v);
        ratios.push_back(r / d);
    }
    const double rho = median(ratios);
    double dev = 0.0, lo = ratios.empty() ? 1.0 : ratios[0], hi = lo;
    for (double r : ratios) {
        dev = std::max(dev, std::abs(r - rho));
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    std::ostringstream notes;
    notes << "rho_hat=" << rho << " ratios in [" << lo << ", " << hi << "]"
          << (host.is_tree() ? "; tree host: exact" : "");
    return make_report(dev, threshold, static_cast<int>(points.size()), notes.str());
}

ConditionReport check_condition_S(const std::vector<SausageSample>& ensemble, int n,
                                  double eps, double tail_threshold) {
    if (ensemble.empty())
        throw std::invalid_argument("check_condition_S: empty ensemble");
    auto sorted = ensemble;
    std::sort(sorted.begin(), sorted.end(),
              [](const SausageSample& a, const SausageSample& b) { return a.K < b.K; });
    std::ostringstream notes;
    notes << "eps=" << eps << " tails per K:";
    double prev = 2.0, worst_rise = 0.0, last = 0.0;
    int replicas = 0;
    for (const auto& s : sorted) {
        int cz = 0, ci = 0;
        for (double x : s.zd)
            if (x / std::sqrt(static_cast<double>(n)) > eps) ++cz;
        for (double x : s.intr)
            if (x / n > eps) ++ci;
        const double tz = s.zd.empty() ? 0.0 : static_cast<double>(cz) / s.zd.size();
        const double ti = s.intr.empty() ? 0.0 : static_cast<double>(ci) / s.intr.size();
        const double tail = std::max(tz, ti);
        notes << " K=" << s.K << ":(" << tz << "," << ti << ")";
        worst_rise = std::max(worst_rise, tail - prev);
        prev = tail;
        last = tail;
        replicas += static_cast<int>(std::max(s.zd.size(), s.intr.size()));
    }
    // a rising tail fails outright regardless of the final level
    const double stat = worst_rise > 0.0 ? 1.0 + worst_rise : last;
    if (worst_rise > 0.0) notes << "; tail not monotone";
    return make_report(stat, tail_threshold, replicas, notes.str());
}

ConditionReport check_condition_G(const std::vector<SkeletonSummary>& discrete,
                                  const std::vector<SkeletonSummary>& continuum,
                                  double threshold, GFit* fit_out) {
    if (discrete.empty() || continuum.empty())
        throw std::invalid_argument("check_condition_G: empty ensemble");

    auto total_len = [](const SkeletonSummary& s) {
        return std::accumulate(s.edge_lengths.begin(), s.edge_lengths.end(), 0.0);
    };
    std::vector<double> ld, lc, dd, dc;
    for (const auto& s : discrete) {
        ld.push_back(total_len(s));
        for (const auto& v : s.leaf_disp) dd.push_back(norm2(v));
    }
    for (const auto& s : continuum) {
        lc.push_back(total_len(s));
        for (const auto& v : s.leaf_disp) dc.push_back(norm2(v));
    }
    GFit fit;
    fit.sigma_d = median(ld) / median(lc);
    fit.sigma_phi = median(dd) / (std::sqrt(fit.sigma_d) * median(dc));
    if (fit_out) *fit_out = fit;
    const double disp_scale = fit.sigma_phi * std::sqrt(fit.sigma_d);

    // shape-frequency total variation
    std::map<ShapeCode, std::pair<double, double>> freq;
    for (const auto& s : discrete) freq[s.shape].first += 1.0 / discrete.size();
    for (const auto& s : continuum) freq[s.shape].second += 1.0 / continuum.size();
    double tv = 0.0;
    for (const auto& [shape, pq] : freq) tv += std::abs(pq.first - pq.second);
    tv *= 0.5;

    // modal common shape for the marginal comparisons
    ShapeCode modal;
    double best = 0.0;
    for (const auto& [shape, pq] : freq) {
        const double c = std::min(pq.first, pq.second);
        if (c > best) {
            best = c;
            modal = shape;
        }
    }
    std::ostringstream notes;
    notes << "sigma_d=" << fit.sigma_d << " sigma_phi=" << fit.sigma_phi
          << " shape_tv=" << tv;
    if (best == 0.0) {
        notes << "; no common shapes";
        return make_report(1.0, threshold,
                           static_cast<int>(discrete.size() + continuum.size()),
                           notes.str());
    }

    double stat = tv;
    {
        std::vector<const SkeletonSummary*> md, mc;
        for (const auto& s : discrete)
            if (s.shape == modal) md.push_back(&s);
        for (const auto& s : continuum)
            if (s.shape == modal) mc.push_back(&s);
        const std::size_t ne = md[0]->edge_lengths.size();
        double ks_len = 0.0;
        for (std::size_t e = 0; e < ne; ++e) {
            std::vector<double> a, b;
            for (auto* s : md) a.push_back(s->edge_lengths[e] / fit.sigma_d);
            for (auto* s : mc) b.push_back(s->edge_lengths[e]);
            ks_len = std::max(ks_len, ks_distance(a, b));
        }
        double ks_disp = 0.0;
        const std::size_t dim = md[0]->leaf_disp.empty() ? 0 : md[0]->leaf_disp[0].size();
        for (std::size_t c = 0; c < dim; ++c) {
            std::vector<double> a, b;
            for (auto* s : md)
                for (const auto& v : s->leaf_disp) a.push_back(v[c] / disp_scale);
            for (auto* s : mc)
                for (const auto& v : s->leaf_disp) b.push_back(v[c]);
            ks_disp = std::max(ks_disp, ks_distance(a, b));
        }
        notes << " modal_shape_n=(" << md.size() << "," << mc.size() << ")"
              << " ks_len=" << ks_len << " ks_disp=" << ks_disp;
        stat = std::max({stat, ks_len, ks_disp});
    }

    // optional mass coordinate: |E|/n^2 against continuum total mass
    std::vector<double> ma, mb;
    for (const auto& s : discrete)
        if (s.edges_over_n2 >= 0.0) ma.push_back(s.edges_over_n2);
    for (const auto& s : continuum)
        if (s.edges_over_n2 >= 0.0) mb.push_back(s.edges_over_n2);
    if (!ma.empty() && !mb.empty()) {
        const double sigma_m = median(ma) / median(mb);
        std::vector<double> scaled;
        for (double x : ma) scaled.push_back(x / sigma_m);
        const double ks_m = ks_distance(scaled, mb);
        notes << " sigma_m=" << sigma_m << " ks_mass=" << ks_m;
        stat = std::max(stat, ks_m);
    }

    // covering-radius proxy: half the median max edge length (continuum)
    std::vector<double> maxes;
    for (const auto& s : continuum)
        maxes.push_back(s.edge_lengths.empty()
                            ? 0.0
                            : *std::max_element(s.edge_lengths.begin(),
                                                s.edge_lengths.end()));
    notes << " dense_radius=" << 0.5 * median(maxes)
          << "; marginal test only, weaker than weak convergence in D";
    return make_report(stat, threshold,
                       static_cast<int>(discrete.size() + continuum.size()),
                       notes.str());
}

double all_project_bound(int M) {
    return (1.0 - 1.0 / M) * std::exp(-2.0 / std::sqrt(static_cast<double>(M)));
}

ConditionReport check_all_project(int K, int K1, int M, int replicas, int grid_points,
                                  Rng& rng, double margin) {
    const int fresh = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(M))));
    int hits = 0;
    const double tol = 1e-9;
    for (int rep = 0; rep < replicas; ++rep) {
        const ExcursionPath path = sample_normalized(grid_points, rng);
        const ExcursionIndex idx(path);
        std::vector<double> times_k;
        for (int i = 0; i < K; ++i) times_k.push_back(rng.uniform());
        const MetricTree skel = crt_skeleton_from_times(idx, times_k);
        std::vector<TreePoint> atoms;
        atoms.reserve(K1);
        for (int i = 0; i < K1; ++i)
            atoms.push_back(
                project_time_onto_skeleton(idx, times_k, skel, rng.uniform()));
        bool all = true;
        for (int i = 0; i < fresh && all; ++i) {
            const TreePoint p =
                project_time_onto_skeleton(idx, times_k, skel, rng.uniform());
            bool found = false;
            for (const auto& a : atoms)
                if (distance(skel, p, a) <= tol) {
                    found = true;
                    break;
                }
            all = found;
        }
        if (all) ++hits;
    }
    const double empirical = static_cast<double>(hits) / replicas;
    const double bound = all_project_bound(M);
    std::ostringstream notes;
    notes << "empirical=" << empirical << " bound=" << bound << " fresh=" << fresh
          << " K=" << K << " K1=" << K1 << " grid=" << grid_points;
    return make_report(bound - empirical, margin, replicas, notes.str());
}

} // namespace lattree
