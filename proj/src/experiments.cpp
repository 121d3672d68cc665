#include "lattree/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "lattree/conditions.hpp"
#include "lattree/embedding.hpp"
#include "lattree/excursion.hpp"
#include "lattree/lattice.hpp"
#include "lattree/metrics.hpp"
#include "lattree/realtree.hpp"
#include "lattree/rng.hpp"
#include "lattree/skeleton.hpp"
#include "lattree/treewalk.hpp"

namespace lattree {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kCodeVersion = "0.1.0";

const std::vector<std::string> kKinds{
    "sample-tree",  "skeleton",       "check-g",           "check-v",
    "check-r",      "check-s",        "check-edge-uniform", "empirical-measure",
    "crt-sample",   "walk-compare",   "lemma-step0"};

// ---- small utilities -------------------------------------------------------

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    return out;
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string fmt6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile_of(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * (v.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= v.size()) return v.back();
    return v[i] + (pos - i) * (v[i + 1] - v[i]);
}

double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / (v.size() - 1));
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int w = std::min(workers, count);
    std::atomic<bool> failed{false};
    std::string error;
    std::mutex err_mutex;
    for (int t = 0; t < w; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    fn(i);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    failed.store(true);
                    if (error.empty()) error = e.what();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (failed.load()) throw std::runtime_error("replica failed: " + error);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

json to_json(const ConditionReport& r) {
    return json{{"statistic", r.statistic},
                {"threshold", r.threshold},
                {"pass", r.pass},
                {"replicas", r.replicas},
                {"notes", r.notes}};
}

// ---- output context --------------------------------------------------------

struct Ctx {
    const ExperimentConfig& cfg;
    std::string hash;
    fs::path dir;

    void write(const std::string& name, const std::string& content) const {
        std::ofstream os(dir / name, std::ios::binary);
        os << content;
        if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    }

    void csv(const std::string& name, const std::string& header,
             const std::vector<std::string>& rows) const {
        std::ostringstream os;
        os << "# manifest " << hash << "\n" << header << "\n";
        for (const auto& r : rows) os << r << "\n";
        write(name, os.str());
    }
};

// ---- SVG plotting ----------------------------------------------------------

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string line_chart(const std::string& hash, const std::string& title,
                       const std::string& xlab, const std::string& ylab,
                       const std::vector<double>& xs,
                       const std::vector<std::pair<std::string, std::vector<double>>>&
                           series) {
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (double x : xs) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
    }
    for (const auto& [name, ys] : series)
        for (double y : ys) {
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (x1 - x0 < 1e-12) {
        x0 -= 1.0;
        x1 += 1.0;
    }
    if (y1 - y0 < 1e-12) {
        y0 -= 1.0;
        y1 += 1.0;
    }
    const double px0 = 80, px1 = 600, py0 = 360, py1 = 40;
    auto X = [&](double x) { return px0 + (x - x0) / (x1 - x0) * (px1 - px0); };
    auto Y = [&](double y) { return py0 + (y - y0) / (y1 - y0) * (py1 - py0); };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\">\n"
       << "<!-- manifest " << hash << " -->\n"
       << "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n"
       << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
       << "</text>\n"
       << "<line x1=\"80\" y1=\"360\" x2=\"600\" y2=\"360\" stroke=\"black\"/>\n"
       << "<line x1=\"80\" y1=\"40\" x2=\"80\" y2=\"360\" stroke=\"black\"/>\n"
       << "<text x=\"340\" y=\"400\" text-anchor=\"middle\" font-size=\"12\">" << xlab
       << "</text>\n"
       << "<text x=\"20\" y=\"200\" font-size=\"12\" transform=\"rotate(-90 20 200)\" "
          "text-anchor=\"middle\">"
       << ylab << "</text>\n";
    for (int k = 0; k <= 4; ++k) {
        const double x = x0 + k * (x1 - x0) / 4, y = y0 + k * (y1 - y0) / 4;
        os << "<text x=\"" << fmt6(X(x)) << "\" y=\"378\" text-anchor=\"middle\" "
           << "font-size=\"10\">" << fmt6(x) << "</text>\n"
           << "<text x=\"74\" y=\"" << fmt6(Y(y) + 4)
           << "\" text-anchor=\"end\" font-size=\"10\">" << fmt6(y) << "</text>\n";
    }
    int si = 0;
    for (const auto& [name, ys] : series) {
        const char* color = kColors[si % 5];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" "
           << "points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i)
            os << fmt6(X(xs[i])) << "," << fmt6(Y(ys[i])) << " ";
        os << "\"/>\n";
        for (std::size_t i = 0; i < xs.size(); ++i)
            os << "<circle cx=\"" << fmt6(X(xs[i])) << "\" cy=\"" << fmt6(Y(ys[i]))
               << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        os << "<text x=\"590\" y=\"" << 56 + 16 * si
           << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">"
           << name << "</text>\n";
        ++si;
    }
    os << "</svg>\n";
    return os.str();
}

std::string bar_chart(const std::string& hash, const std::string& title,
                      const std::vector<std::string>& labels,
                      const std::vector<double>& values) {
    double y1 = 1e-12;
    for (double v : values) y1 = std::max(y1, v);
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\">\n"
       << "<!-- manifest " << hash << " -->\n"
       << "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n"
       << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
       << "</text>\n"
       << "<line x1=\"80\" y1=\"360\" x2=\"600\" y2=\"360\" stroke=\"black\"/>\n";
    const double w = 520.0 / std::max<std::size_t>(1, values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double hgt = values[i] / y1 * 300.0;
        os << "<rect x=\"" << fmt6(80 + i * w + 0.1 * w) << "\" y=\""
           << fmt6(360 - hgt) << "\" width=\"" << fmt6(0.8 * w) << "\" height=\""
           << fmt6(hgt) << "\" fill=\"#1f77b4\"/>\n"
           << "<text x=\"" << fmt6(80 + (i + 0.5) * w)
           << "\" y=\"378\" text-anchor=\"middle\" font-size=\"10\">" << labels[i]
           << "</text>\n"
           << "<text x=\"" << fmt6(80 + (i + 0.5) * w) << "\" y=\""
           << fmt6(352 - hgt) << "\" text-anchor=\"middle\" font-size=\"10\">"
           << fmt6(values[i]) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

// ---- shared sampling helpers ----------------------------------------------

SurrogateParams surrogate_params(const ExperimentConfig& cfg, int n) {
    SurrogateParams p;
    p.n = n;
    p.h = cfg.h;
    p.d = cfg.d;
    p.L = cfg.L;
    p.offspring = cfg.offspring;
    p.max_vertices = cfg.max_vertices;
    return p;
}

LatticeTree sample_host(const ExperimentConfig& cfg, int n, Rng& rng,
                        int min_vertices) {
    const SurrogateParams p = surrogate_params(cfg, n);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        LatticeTree t = sample_surrogate(p, rng);
        if (t.num_vertices() >= min_vertices) return t;
    }
    throw std::runtime_error("sample_host: hosts persistently below " +
                             std::to_string(min_vertices) + " vertices");
}

std::vector<int> or_default(const std::vector<int>& v, std::vector<int> def) {
    return v.empty() ? def : v;
}

// walk-ensemble marginal sample at one time/coordinate
double marginal_at(const TreeWalkPath& p, double t, std::size_t coord) {
    if (p.times.empty() || t > p.times.back() + 1e-12)
        throw std::invalid_argument("marginal_at: time beyond horizon");
    const auto it = std::upper_bound(p.times.begin(), p.times.end(), t);
    const std::size_t i = it == p.times.begin() ? 0 : (it - p.times.begin()) - 1;
    return p.positions[i][coord];
}

// ---- experiments -----------------------------------------------------------

json run_sample_tree(const Ctx& c) {
    const auto& cfg = c.cfg;
    if (cfg.raw.count("enumerate") && cfg.raw.at("enumerate") == "1") {
        const auto all = enumerate_small_trees(cfg.d, cfg.L, cfg.n, cfg.z);
        std::vector<std::string> rows;
        std::map<int, int> by_edges;
        double total = 0.0;
        for (std::size_t i = 0; i < all.size(); ++i) {
            rows.push_back(std::to_string(i) + "," +
                           std::to_string(all[i].first.num_edges()) + "," +
                           fmt(all[i].second));
            by_edges[all[i].first.num_edges()] += 1;
            total += all[i].second;
        }
        c.csv("enumeration.csv", "index,edges,weight", rows);
        std::vector<std::string> labels;
        std::vector<double> counts;
        for (const auto& [e, k] : by_edges) {
            labels.push_back(std::to_string(e));
            counts.push_back(k);
        }
        c.write("enumeration.svg",
                bar_chart(c.hash, "lattice trees by edge count", labels, counts));
        return json{{"mode", "enumerate"},
                    {"trees", all.size()},
                    {"weight_sum", total},
                    {"pass", true}};
    }

    struct Row {
        int vertices, edges, height, collisions;
    };
    std::vector<Row> res(cfg.replicas);
    parallel_for(cfg.replicas, cfg.workers, [&](int j) {
        Rng rng = sub_rng(cfg.seed, j);
        const LatticeTree t = sample_surrogate(surrogate_params(cfg, cfg.n), rng);
        res[j] = {t.num_vertices(), t.num_edges(), t.height, t.site_collisions};
    });
    std::vector<std::string> rows;
    std::vector<double> sizes, heights;
    for (int j = 0; j < cfg.replicas; ++j) {
        rows.push_back(std::to_string(j) + "," + std::to_string(res[j].vertices) +
                       "," + std::to_string(res[j].height) + "," +
                       std::to_string(res[j].collisions));
        sizes.push_back(res[j].vertices);
        heights.push_back(res[j].height);
    }
    c.csv("trees.csv", "replica,vertices,height,collisions", rows);

    std::vector<std::string> labels;
    std::vector<double> counts;
    {
        const double lo = quantile_of(sizes, 0.0), hi = quantile_of(sizes, 1.0);
        const int bins = 10;
        counts.assign(bins, 0.0);
        for (double s : sizes) {
            int b = static_cast<int>((s - lo) / std::max(1.0, hi - lo) * bins);
            counts[std::min(bins - 1, std::max(0, b))] += 1;
        }
        for (int b = 0; b < bins; ++b)
            labels.push_back(fmt6(lo + (b + 0.5) * (hi - lo) / bins));
    }
    c.write("sizes.svg", bar_chart(c.hash, "surrogate tree sizes", labels, counts));
    return json{{"mode", "sample"},
                {"median_vertices", median_of(sizes)},
                {"median_height", median_of(heights)},
                {"min_height_required", static_cast<int>(std::ceil(cfg.h * cfg.n))},
                {"pass", true}};
}

json run_skeleton(const Ctx& c) {
    const auto& cfg = c.cfg;
    Rng rng = sub_rng(cfg.seed, 0);
    const LatticeTree host = sample_host(cfg, cfg.n, rng, cfg.K + 3);
    const auto pts = draw_spanning_points(host, cfg.K, rng);
    json out{{"host_vertices", host.num_vertices()},
             {"host_edges", host.num_edges()},
             {"spanning", pts}};
    SkeletonBundle b;
    try {
        b = build_skeleton(host, pts);
    } catch (const std::domain_error& e) {
        out["tree_like"] = false;
        out["error"] = e.what();
        out["pass"] = false;
        return out;
    }
    long long mu_sum = 0;
    for (long long m : b.mu_counts) mu_sum += m;
    const auto [zd, intr] = sausage_diameters(b);
    out["tree_like"] = true;
    out["big_nodes"] = b.big.size();
    out["reduced_nodes"] = b.reduced.size();
    out["total_length"] = b.big.total_length();
    out["mu_counts_sum"] = mu_sum;
    out["mu_partition_exact"] = (mu_sum == host.num_edges());
    out["lambda_root_mass"] =
        lebesgue_measure_of_descendants(b.big, TreePoint{0, 0.0});
    out["sausage_diameter_zd"] = zd;
    out["sausage_diameter_intrinsic"] = intr;
    out["pass"] = (mu_sum == host.num_edges());

    std::vector<std::string> rows;
    for (int v = 0; v < b.big.size(); ++v)
        rows.push_back(std::to_string(v) + "," + std::to_string(b.big.nodes[v].parent) +
                       "," + fmt(b.big.nodes[v].edge_len) + "," +
                       std::to_string(b.big_host[v]) + "," +
                       std::to_string(static_cast<int>(b.starred[v])));
    c.csv("skeleton_nodes.csv", "node,parent,edge_len,host_vertex,starred", rows);

    // planar sketch on the first two coordinates
    {
        double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
        auto cx = [&](int v) { return static_cast<double>(host.coords[v][0]); };
        auto cy = [&](int v) {
            return cfg.d > 1 ? static_cast<double>(host.coords[v][1]) : 0.0;
        };
        for (int v = 0; v < host.num_vertices(); ++v) {
            x0 = std::min(x0, cx(v));
            x1 = std::max(x1, cx(v));
            y0 = std::min(y0, cy(v));
            y1 = std::max(y1, cy(v));
        }
        auto X = [&](double x) { return 40 + (x - x0) / std::max(1.0, x1 - x0) * 560; };
        auto Y = [&](double y) { return 380 - (y - y0) / std::max(1.0, y1 - y0) * 340; };
        std::ostringstream os;
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
              "height=\"420\">\n<!-- manifest "
           << c.hash << " -->\n<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
        for (const auto& [a, bb] : host.edges)
            os << "<line x1=\"" << fmt6(X(cx(a))) << "\" y1=\"" << fmt6(Y(cy(a)))
               << "\" x2=\"" << fmt6(X(cx(bb))) << "\" y2=\"" << fmt6(Y(cy(bb)))
               << "\" stroke=\"#cccccc\"/>\n";
        for (int v = 1; v < b.big.size(); ++v) {
            const int hu = b.big_host[b.big.nodes[v].parent];
            const int hv = b.big_host[v];
            if (hu < 0 || hv < 0) continue;
            os << "<line x1=\"" << fmt6(X(cx(hu))) << "\" y1=\"" << fmt6(Y(cy(hu)))
               << "\" x2=\"" << fmt6(X(cx(hv))) << "\" y2=\"" << fmt6(Y(cy(hv)))
               << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
        }
        for (int p : pts)
            os << "<circle cx=\"" << fmt6(X(cx(p))) << "\" cy=\"" << fmt6(Y(cy(p)))
               << "\" r=\"4\" fill=\"#1f77b4\"/>\n";
        os << "<circle cx=\"" << fmt6(X(0.0)) << "\" cy=\"" << fmt6(Y(0.0))
           << "\" r=\"4\" fill=\"black\"/>\n</svg>\n";
        c.write("skeleton.svg", os.str());
    }
    return out;
}

SkeletonSummary discrete_summary(const ExperimentConfig& cfg, const LatticeTree& host,
                                 const SkeletonBundle& b,
                                 const std::vector<int>& pts, int n) {
    SkeletonSummary s;
    s.shape = shape_code(b.reduced);
    s.edge_lengths = canonical_edge_lengths(b.reduced);
    for (int p : pts) {
        Vec v;
        for (int k = 0; k < cfg.d; ++k)
            v.push_back(static_cast<double>(host.coords[p][k]));
        s.leaf_disp.push_back(v);
    }
    s.edges_over_n2 = static_cast<double>(host.num_edges()) / (static_cast<double>(n) * n);
    return s;
}

json run_check_g(const Ctx& c) {
    const auto& cfg = c.cfg;
    const auto ns = or_default(cfg.n_list, {25, 50, 100});

    std::vector<SkeletonSummary> cont(cfg.replicas);
    parallel_for(cfg.replicas, cfg.workers, [&](int j) {
        Rng rng = sub_rng(mix_seed(cfg.seed, 999), j);
        const MetricTree t = crt_skeleton_linebreaking(cfg.K, rng);
        const GraphSpatialTree g = sample_gaussian_embedding(t, cfg.d, rng, 1e-2);
        SkeletonSummary s;
        s.shape = shape_code(t);
        s.edge_lengths = canonical_edge_lengths(t);
        for (int leaf : t.effective_leaf_order()) s.leaf_disp.push_back(g.vertex_pos(leaf));
        s.edges_over_n2 = 1.0; // normalized excursion mass
        cont[j] = s;
    });

    json reports = json::array();
    std::vector<double> xs, stats, sds, sps;
    std::vector<std::string> rows;
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
        const int n = ns[ni];
        std::vector<SkeletonSummary> disc(cfg.replicas);
        parallel_for(cfg.replicas, cfg.workers, [&](int j) {
            Rng rng = sub_rng(mix_seed(cfg.seed, 1000 + ni), j);
            const LatticeTree host = sample_host(cfg, n, rng, cfg.K + 3);
            const auto pts = draw_spanning_points(host, cfg.K, rng);
            disc[j] = discrete_summary(cfg, host, build_skeleton(host, pts), pts, n);
        });
        GFit fit;
        const auto r = check_condition_G(disc, cont, cfg.threshold, &fit);
        reports.push_back(to_json(r));
        xs.push_back(n);
        stats.push_back(r.statistic);
        sds.push_back(fit.sigma_d);
        sps.push_back(fit.sigma_phi);
        rows.push_back(std::to_string(n) + "," + fmt(r.statistic) + "," +
                       fmt(fit.sigma_d) + "," + fmt(fit.sigma_phi) + "," +
                       (r.pass ? "1" : "0"));
    }
    c.csv("check_g.csv", "n,statistic,sigma_d,sigma_phi,pass", rows);
    c.write("check_g.svg", line_chart(c.hash, "geometric distance vs scale", "n",
                                      "statistic", xs, {{"statistic", stats}}));
    bool decreasing = true;
    for (std::size_t i = 1; i < stats.size(); ++i)
        if (stats[i] > stats[i - 1]) decreasing = false;
    return json{{"reports", reports},
                {"sigma_d", sds},
                {"sigma_phi", sps},
                {"decreasing", decreasing},
                {"pass", decreasing}};
}

json run_check_v(const Ctx& c) {
    const auto& cfg = c.cfg;
    const auto Ks = or_default(cfg.K_list, {2, 4, 8, 16});
    json reports = json::array();
    std::vector<double> xs, meds;
    std::vector<std::string> rows;
    for (std::size_t ki = 0; ki < Ks.size(); ++ki) {
        const int K = Ks[ki];
        std::vector<double> stats(cfg.replicas);
        parallel_for(cfg.replicas, cfg.workers, [&](int j) {
            Rng rng = sub_rng(mix_seed(cfg.seed, 2000 + ki), j);
            const ExcursionPath path = sample_normalized(cfg.grid, rng);
            const ExcursionIndex idx(path);
            std::vector<double> times;
            for (int i = 0; i < K; ++i) times.push_back(rng.uniform());
            const MetricTree skel = crt_skeleton_from_times(idx, times);
            stats[j] = check_condition_V_crt(idx, times, skel, cfg.grid,
                                             cfg.threshold)
                           .statistic;
        });
        const double med = median_of(stats);
        reports.push_back(
            to_json(make_report(med, cfg.threshold, cfg.replicas,
                                "median over replicas at K=" + std::to_string(K))));
        xs.push_back(K);
        meds.push_back(med);
        rows.push_back(std::to_string(K) + "," + fmt(med) + "," +
                       fmt(quantile_of(stats, 0.25)) + "," +
                       fmt(quantile_of(stats, 0.75)));
    }
    c.csv("check_v.csv", "K,median,q25,q75", rows);
    c.write("check_v.svg", line_chart(c.hash, "volume discrepancy vs K", "K",
                                      "median sup", xs, {{"median", meds}}));
    bool decreasing = true;
    for (std::size_t i = 1; i < meds.size(); ++i)
        if (meds[i] > meds[i - 1]) decreasing = false;
    return json{{"reports", reports}, {"medians", meds}, {"pass", decreasing}};
}

json run_check_r(const Ctx& c) {
    const auto& cfg = c.cfg;
    std::vector<double> stats(cfg.replicas);
    std::vector<int> sizes(cfg.replicas);
    parallel_for(cfg.replicas, cfg.workers, [&](int j) {
        Rng rng = sub_rng(cfg.seed, j);
        const LatticeTree host = sample_host(cfg, cfg.n, rng, cfg.K + 3);
        const auto pts = draw_spanning_points(host, cfg.K, rng);
        stats[j] = check_condition_R(host, pts, cfg.threshold).statistic;
        sizes[j] = host.num_vertices();
    });
    std::vector<std::string> rows;
    double worst = 0.0;
    for (int j = 0; j < cfg.replicas; ++j) {
        rows.push_back(std::to_string(j) + "," + std::to_string(sizes[j]) + "," +
                       fmt(stats[j]));
        worst = std::max(worst, stats[j]);
    }
    c.csv("check_r.csv", "replica,vertices,statistic", rows);
    c.write("check_r.svg",
            bar_chart(c.hash, "resistance ratio deviation", {"max deviation"},
                      {worst}));
    const auto r = make_report(worst, cfg.threshold, cfg.replicas,
                               "max |R_eff/d - rho| over tree hosts");
    return json{{"reports", json::array({to_json(r)})}, {"pass", r.pass}};
}

json run_check_s(const Ctx& c) {
    const auto& cfg = c.cfg;
    const auto Ks = or_default(cfg.K_list, {2, 4, 8, 16});
    const int need = *std::max_element(Ks.begin(), Ks.end()) + 3;
    std::vector<LatticeTree> hosts(cfg.replicas);
    parallel_for(cfg.replicas, cfg.workers, [&](int j) {
        Rng rng = sub_rng(mix_seed(cfg.seed, 3000), j);
        hosts[j] = sample_host(cfg, cfg.n, rng, need);
    });
    std::vector<SausageSample> ensemble;
    for (std::size_t ki = 0; ki < Ks.size(); ++ki) {
        SausageSample s;
        s.K = Ks[ki];
        s.zd.resize(cfg.replicas);
        s.intr.resize(cfg.replicas);
        parallel_for(cfg.replicas, cfg.workers, [&](int j) {
            Rng rng = sub_rng(mix_seed(cfg.seed, 3001 + ki), j);
            const auto pts = draw_spanning_points(hosts[j], Ks[ki], rng);
            const auto b = build_skeleton(hosts[j], pts);
            const auto [zd, intr] = sausage_diameters(b);
            s.zd[j] = zd;
            s.intr[j] = intr;
        });
        ensemble.push_back(std::move(s));
    }
    const auto r = check_condition_S(ensemble, cfg.n, cfg.eps, cfg.tail_threshold);
    std::vector<std::string> rows;
    std::vector<double> xs, tz, ti;
    for (const auto& s : ensemble) {
        int cz = 0, ci = 0;
        for (double x : s.zd)
            if (x / std::sqrt(static_cast<double>(cfg.n)) > cfg.eps) ++cz;
        for (double x : s.intr)
            if (x / cfg.n > cfg.eps) ++ci;
        xs.push_back(s.K);
        tz.push_back(static_cast<double>(cz) / s.zd.size());
        ti.push_back(static_cast<double>(ci) / s.intr.size());
        rows.push_back(std::to_string(s.K) + "," + fmt(tz.back()) + "," +
                       fmt(ti.back()));
    }
    c.csv("check_s.csv", "K,tail_zd,tail_intrinsic", rows);
    c.write("check_s.svg",
            line_chart(c.hash, "sausage diameter tails vs K", "K", "tail prob", xs,
                       {{"euclidean", tz}, {"intrinsic", ti}}));
    return json{{"reports", json::array({to_json(r)})}, {"pass", r.pass}};
}

json run_check_edge_uniform(const Ctx& c) {
    const auto& cfg = c.cfg;
    std::vector<double> stats(cfg.replicas), bounds(cfg.replicas);
    std::vector<int> sizes(cfg.replicas);
    parallel_for(cfg.replicas, cfg.workers, [&](int j) {
        Rng rng = sub_rng(cfg.seed, j);
        const LatticeTree host = sample_host(cfg, cfg.n, rng, 4);
        const auto r = check_edge_uniform(host, cfg.trials, rng);
        stats[j] = r.statistic;
        bounds[j] = r.threshold;
        sizes[j] = host.num_vertices();
    });
    std::vector<std::string> rows;
    double worst_ratio = 0.0;
    bool all = true;
    for (int j = 0; j < cfg.replicas; ++j) {
        rows.push_back(std::to_string(j) + "," + std::to_string(sizes[j]) + "," +
                       fmt(stats[j]) + "," + fmt(bounds[j]));
        worst_ratio = std::max(worst_ratio, stats[j] / bounds[j]);
        all = all && stats[j] <= bounds[j];
    }
    c.csv("edge_uniform.csv", "replica,vertices,statistic,bound", rows);
    c.write("edge_uniform.svg",
            bar_chart(c.hash, "edge-uniform deviation over bound",
                      {"max statistic/bound"}, {worst_ratio}));
    const auto r =
        make_report(worst_ratio, 1.0, cfg.replicas,
                    "max over hosts of (sup deviation)/(1/|G|), " +
                        std::to_string(cfg.trials) + " subsets per host");
    return json{{"reports", json::array({to_json(r)})}, {"pass", all}};
}

json run_empirical_measure(const Ctx& c) {
    const auto& cfg = c.cfg;
    auto pairs = cfg.pairs;
    if (pairs.empty()) pairs = {{5, 50}, {20, 200}, {50, 1000}};
    int need = 0;
    for (const auto& [k1, k2] : pairs) need = std::max(need, cfg.K + k1 + k2 + 3);

    std::vector<LatticeTree> hosts(cfg.replicas);
    parallel_for(cfg.replicas, cfg.workers, [&](int j) {
        Rng rng = sub_rng(mix_seed(cfg.seed, 4000), j);
        hosts[j] = sample_host(cfg, cfg.n, rng, need);
    });

    json reports = json::array();
    std::vector<double> xs, meds, ses;
    std::vector<std::string> rows;
    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
        const auto [K1, K2] = pairs[pi];
        std::vector<double> tvs(cfg.replicas);
        parallel_for(cfg.replicas, cfg.workers, [&](int j) {
            Rng rng = sub_rng(mix_seed(cfg.seed, 4001 + pi), j);
            const auto pts =
                draw_spanning_points(hosts[j], cfg.K + K1 + K2, rng);
            SkeletonBundle b;
            const auto em =
                build_empirical_measure(hosts[j], pts, cfg.K, K1, K2, &b);
            std::vector<TreePoint> mu_atoms;
            for (int v = 0; v < b.big.size(); ++v)
                mu_atoms.push_back(v == 0 ? TreePoint{0, 0.0}
                                          : TreePoint{v, b.big.nodes[v].edge_len});
            tvs[j] = tv_atomic(b.big, em.atoms, em.weights, mu_atoms, mu_weights(b));
        });
        const double med = median_of(tvs);
        const double se = 1.2533 * stddev_of(tvs) / std::sqrt(double(cfg.replicas));
        xs.push_back(pi);
        meds.push_back(med);
        ses.push_back(se);
        rows.push_back(std::to_string(K1) + "," + std::to_string(K2) + "," +
                       fmt(med) + "," + fmt(se));
        reports.push_back(to_json(make_report(
            med, 1.0, cfg.replicas,
            "median TV at K1=" + std::to_string(K1) + " K2=" + std::to_string(K2))));
    }
    c.csv("empirical_measure.csv", "K1,K2,median_tv,se_median", rows);
    c.write("empirical_measure.svg",
            line_chart(c.hash, "empirical-measure TV vs refinement",
                       "schedule index", "median TV", xs, {{"median", meds}}));
    bool decreasing = true;
    for (std::size_t i = 1; i < meds.size(); ++i)
        if (meds[i] > meds[i - 1] + ses[i - 1]) decreasing = false;
    return json{{"reports", reports},
                {"medians", meds},
                {"se_medians", ses},
                {"pass", decreasing}};
}

// Reduce a skeleton onto its own labeled leaves, so edge order follows leaf
// labels. The excursion sampler emits edges in time order and the
// line-breaking sampler in label order; this puts both in one convention.
MetricTree label_canonical(const MetricTree& t) {
    std::vector<TreePoint> pts;
    for (int v : t.effective_leaf_order())
        pts.push_back(TreePoint{v, t.nodes[v].edge_len});
    return reduced_subtree(t, pts);
}

json run_crt_sample(const Ctx& c) {
    const auto& cfg = c.cfg;
    const auto Ks = or_default(cfg.K_list, {1, 2, 3});
    json reports = json::array();
    std::vector<std::string> rows;
    std::vector<std::string> labels;
    std::vector<double> values;
    bool all_pass = true;
    for (std::size_t ki = 0; ki < Ks.size(); ++ki) {
        const int K = Ks[ki];
        std::vector<ShapeCode> shape_lb(cfg.replicas), shape_ex(cfg.replicas);
        std::vector<std::vector<double>> len_lb(cfg.replicas), len_ex(cfg.replicas);
        parallel_for(cfg.replicas, cfg.workers, [&](int j) {
            Rng rng = sub_rng(mix_seed(cfg.seed, 5000 + ki), j);
            const MetricTree a = label_canonical(crt_skeleton_linebreaking(K, rng));
            shape_lb[j] = shape_code(a);
            len_lb[j] = canonical_edge_lengths(a);
            const ExcursionPath path = sample_normalized(cfg.grid, rng);
            const MetricTree b =
                label_canonical(crt_skeleton_from_excursion(path, K, rng));
            shape_ex[j] = shape_code(b);
            len_ex[j] = canonical_edge_lengths(b);
        });
        std::map<ShapeCode, std::pair<double, double>> freq;
        for (int j = 0; j < cfg.replicas; ++j) {
            freq[shape_lb[j]].first += 1.0 / cfg.replicas;
            freq[shape_ex[j]].second += 1.0 / cfg.replicas;
        }
        double shape_dev = 0.0;
        ShapeCode modal;
        double best = -1.0;
        for (const auto& [s, pq] : freq) {
            shape_dev = std::max(shape_dev, std::abs(pq.first - pq.second));
            if (std::min(pq.first, pq.second) > best) {
                best = std::min(pq.first, pq.second);
                modal = s;
            }
        }
        double edge_ks = 0.0;
        if (best > 0.0) {
            std::size_t ne = 0;
            for (int j = 0; j < cfg.replicas; ++j)
                if (shape_lb[j] == modal) ne = len_lb[j].size();
            for (std::size_t e = 0; e < ne; ++e) {
                std::vector<double> a, b;
                for (int j = 0; j < cfg.replicas; ++j) {
                    if (shape_lb[j] == modal) a.push_back(len_lb[j][e]);
                    if (shape_ex[j] == modal) b.push_back(len_ex[j][e]);
                }
                edge_ks = std::max(edge_ks, ks_distance(a, b));
            }
        }
        const double stat = std::max(shape_dev, edge_ks);
        const auto r = make_report(stat, cfg.threshold, cfg.replicas,
                                   "K=" + std::to_string(K) + " shape_dev=" +
                                       fmt6(shape_dev) + " edge_ks=" + fmt6(edge_ks));
        all_pass = all_pass && r.pass;
        reports.push_back(to_json(r));
        rows.push_back(std::to_string(K) + "," + fmt(shape_dev) + "," + fmt(edge_ks));
        labels.push_back("K=" + std::to_string(K));
        values.push_back(stat);
    }
    c.csv("crt_sample.csv", "K,shape_deviation,edge_length_ks", rows);
    c.write("crt_sample.svg",
            bar_chart(c.hash, "line-breaking vs excursion skeletons", labels, values));
    return json{{"reports", reports}, {"pass", all_pass}};
}

json run_walk_compare(const Ctx& c) {
    const auto& cfg = c.cfg;
    const auto ns = or_default(cfg.n_list, {25, 50, 100});
    auto times = cfg.times;
    if (times.empty()) times = {0.08, 0.16, 0.32};
    const double t_max = *std::max_element(times.begin(), times.end());

    // Time-scale fit window. The upper end is deliberately bounded: past
    // alpha*t_max ~ (skeleton length)^2 the tree walk is near stationary, the KS
    // objective flattens, and the fit becomes unidentifiable.
    std::vector<double> alphas;
    for (int k = -16; k <= 16; ++k) alphas.push_back(std::pow(2.0, k / 4.0));
    const double alpha_max = alphas.back();

    json reports = json::array();
    std::vector<double> xs, stats, fit_alphas;
    std::vector<std::string> rows;
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
        const int n = ns[ni];
        std::vector<TreeWalkPath> srw_ens(cfg.replicas), tree_ens(cfg.replicas);
        parallel_for(cfg.replicas, cfg.workers, [&](int j) {
            Rng rng = sub_rng(mix_seed(cfg.seed, 6000 + ni), j);
            const double root_n = std::sqrt(static_cast<double>(n));
            for (;;) {
                const LatticeTree host = sample_host(cfg, n, rng, cfg.K + 3);

                // rescaled lattice walk marginals
                const double clock = static_cast<double>(n) * host.num_edges();
                const std::size_t steps =
                    static_cast<std::size_t>(std::ceil(t_max * clock)) + 1;
                const WalkPath wp = srw(host, steps, rng);
                TreeWalkPath sp;
                sp.times.push_back(0.0);
                sp.positions.push_back(Vec(cfg.d, 0.0));
                for (double t : times) {
                    const std::size_t k = static_cast<std::size_t>(t * clock);
                    Vec v;
                    for (int q = 0; q < cfg.d; ++q)
                        v.push_back(host.coords[wp.positions[k]][q] / root_n);
                    sp.times.push_back(t);
                    sp.positions.push_back(std::move(v));
                }

                // walk on the matched rescaled skeleton
                const auto pts = draw_spanning_points(host, cfg.K, rng);
                const auto b = build_skeleton(host, pts);
                std::vector<TreePoint> leafpts;
                for (int p : pts) {
                    const int node = b.host_to_big[p];
                    leafpts.push_back(TreePoint{node, b.big.nodes[node].edge_len});
                }
                std::vector<TreePoint> bigpts;
                MetricTree rt = reduced_subtree(b.big, leafpts, &bigpts);
                double min_edge = 1e300;
                std::vector<Vec> pos;
                for (int v = 0; v < rt.size(); ++v) {
                    if (v != 0) {
                        rt.nodes[v].edge_len /= n;
                        min_edge = std::min(min_edge, rt.nodes[v].edge_len);
                    }
                    Vec p = evaluate(b.embedding, bigpts[v]);
                    for (double& x : p) x /= root_n;
                    pos.push_back(std::move(p));
                }
                if (min_edge <= cfg.step / 64) continue; // degenerate skeleton; redraw
                const double step = std::min(cfg.step, 0.45 * min_edge);
                const GraphSpatialTree gst =
                    embed_from_vertex_positions(rt, cfg.d, pos);
                srw_ens[j] = std::move(sp);
                tree_ens[j] = walk_on_tree(gst, step, alpha_max * t_max, rng, 4);
                return;
            }
        });

        auto ks_matrix = [&](double alpha) {
            std::vector<std::vector<double>> m;
            for (double t : times) {
                std::vector<double> row;
                for (int q = 0; q < cfg.d; ++q) {
                    std::vector<double> a, b;
                    for (const auto& p : srw_ens) a.push_back(marginal_at(p, t, q));
                    for (const auto& p : tree_ens)
                        b.push_back(marginal_at(p, alpha * t, q));
                    row.push_back(ks_distance(a, b));
                }
                m.push_back(std::move(row));
            }
            return m;
        };
        double best_alpha = alphas[0], best_mean = 1e300;
        for (double a : alphas) {
            const auto m = ks_matrix(a);
            double s = 0.0;
            int cnt = 0;
            for (const auto& row : m)
                for (double v : row) {
                    s += v;
                    ++cnt;
                }
            if (s / cnt < best_mean) {
                best_mean = s / cnt;
                best_alpha = a;
            }
        }
        const auto m = ks_matrix(best_alpha);
        std::vector<double> flat;
        for (const auto& row : m)
            for (double v : row) flat.push_back(v);
        const double stat = median_of(flat);
        xs.push_back(n);
        stats.push_back(stat);
        fit_alphas.push_back(best_alpha);
        std::ostringstream row;
        row << n << "," << fmt(best_alpha) << "," << fmt(stat);
        for (const auto& r2 : m)
            for (double v : r2) row << "," << fmt(v);
        rows.push_back(row.str());
        reports.push_back(to_json(make_report(
            stat, cfg.threshold, cfg.replicas,
            "n=" + std::to_string(n) + " alpha=" + fmt6(best_alpha))));
    }
    std::string header = "n,alpha,median_ks";
    for (double t : times)
        for (int q = 0; q < cfg.d; ++q)
            header += ",ks_t" + fmt6(t) + "_x" + std::to_string(q);
    c.csv("walk_compare.csv", header, rows);
    c.write("walk_compare.svg",
            line_chart(c.hash, "rescaled walk vs tree walk", "n", "median KS", xs,
                       {{"median KS", stats}}));
    bool decreasing = true;
    for (std::size_t i = 1; i < stats.size(); ++i)
        if (stats[i] >= stats[i - 1]) decreasing = false;
    return json{{"reports", reports},
                {"alphas", fit_alphas},
                {"medians", stats},
                {"pass", decreasing}};
}

json run_lemma_step0(const Ctx& c) {
    const auto& cfg = c.cfg;
    std::vector<int> K1s = cfg.K1_list.empty() ? std::vector<int>{cfg.K1} : cfg.K1_list;
    const double bound = all_project_bound(cfg.M);
    json reports = json::array();
    std::vector<double> xs, emps;
    std::vector<std::string> rows;
    bool all_pass = true;
    for (std::size_t ki = 0; ki < K1s.size(); ++ki) {
        std::vector<int> hit(cfg.replicas, 0);
        parallel_for(cfg.replicas, cfg.workers, [&](int j) {
            Rng rng = sub_rng(mix_seed(cfg.seed, 7000 + ki), j);
            const auto r =
                check_all_project(cfg.K, K1s[ki], cfg.M, 1, cfg.grid, rng, 0.0);
            hit[j] = r.statistic < bound - 0.5 ? 1 : 0;
        });
        const double empirical =
            std::accumulate(hit.begin(), hit.end(), 0.0) / cfg.replicas;
        const auto r = make_report(bound - empirical, cfg.threshold, cfg.replicas,
                                   "K1=" + std::to_string(K1s[ki]) + " empirical=" +
                                       fmt6(empirical) + " bound=" + fmt6(bound));
        if (ki == 0) all_pass = r.pass;
        reports.push_back(to_json(r));
        xs.push_back(K1s[ki]);
        emps.push_back(empirical);
        rows.push_back(std::to_string(K1s[ki]) + "," + fmt(empirical) + "," +
                       fmt(bound) + "," + fmt(r.statistic));
    }
    c.csv("lemma_step0.csv", "K1,empirical,bound,statistic", rows);
    c.write("lemma_step0.svg",
            line_chart(c.hash, "all-project probability vs K1", "K1", "probability",
                       xs, {{"empirical", emps}}));
    return json{{"reports", reports}, {"bound", bound}, {"pass", all_pass}};
}

// ---- config ----------------------------------------------------------------

std::string canonical_string(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "kind=" << cfg.kind << ";d=" << cfg.d << ";L=" << cfg.L << ";n=" << cfg.n
       << ";h=" << fmt(cfg.h) << ";K=" << cfg.K << ";K1=" << cfg.K1
       << ";K2=" << cfg.K2 << ";M=" << cfg.M << ";offspring=" << cfg.offspring
       << ";z=" << fmt(cfg.z) << ";step=" << fmt(cfg.step)
       << ";horizon=" << fmt(cfg.horizon) << ";eps=" << fmt(cfg.eps)
       << ";tail_threshold=" << fmt(cfg.tail_threshold)
       << ";threshold=" << fmt(cfg.threshold) << ";grid=" << cfg.grid
       << ";trials=" << cfg.trials << ";max_vertices=" << cfg.max_vertices
       << ";replicas=" << cfg.replicas << ";seed=" << cfg.seed;
    os << ";n_list=";
    for (int v : cfg.n_list) os << v << " ";
    os << ";K_list=";
    for (int v : cfg.K_list) os << v << " ";
    os << ";K1_list=";
    for (int v : cfg.K1_list) os << v << " ";
    os << ";pairs=";
    for (const auto& [a, b] : cfg.pairs) os << a << ":" << b << " ";
    os << ";times=";
    for (double v : cfg.times) os << fmt(v) << " ";
    if (cfg.raw.count("enumerate")) os << ";enumerate=" << cfg.raw.at("enumerate");
    return os.str();
}

json config_json(const ExperimentConfig& cfg) {
    json j;
    j["kind"] = cfg.kind;
    j["d"] = cfg.d;
    j["L"] = cfg.L;
    j["n"] = cfg.n;
    j["h"] = cfg.h;
    j["K"] = cfg.K;
    j["K1"] = cfg.K1;
    j["K2"] = cfg.K2;
    j["M"] = cfg.M;
    j["offspring"] = cfg.offspring;
    j["z"] = cfg.z;
    j["step"] = cfg.step;
    j["horizon"] = cfg.horizon;
    j["eps"] = cfg.eps;
    j["tail_threshold"] = cfg.tail_threshold;
    j["threshold"] = cfg.threshold;
    j["grid"] = cfg.grid;
    j["trials"] = cfg.trials;
    j["max_vertices"] = cfg.max_vertices;
    j["n_list"] = cfg.n_list;
    j["K_list"] = cfg.K_list;
    j["K1_list"] = cfg.K1_list;
    json pj = json::array();
    for (const auto& [a, b] : cfg.pairs) pj.push_back(json::array({a, b}));
    j["pairs"] = pj;
    j["times"] = cfg.times;
    j["replicas"] = cfg.replicas;
    j["seed"] = cfg.seed;
    return j;
}

} // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot read config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("malformed config line: " + line);
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

ExperimentConfig make_config(std::string kind, std::map<std::string, std::string> kv) {
    if (std::find(kKinds.begin(), kKinds.end(), kind) == kKinds.end())
        throw std::invalid_argument("unknown experiment kind: " + kind);
    if (!kv.count("seed"))
        throw std::invalid_argument("seed is mandatory");

    ExperimentConfig cfg;
    cfg.kind = std::move(kind);
    cfg.raw = kv;
    auto geti = [&](const char* k, int& slot, int lo, int hi) {
        if (!kv.count(k)) return;
        try {
            slot = std::stoi(kv.at(k));
        } catch (...) {
            throw std::invalid_argument(std::string("bad integer for ") + k);
        }
        if (slot < lo || slot > hi)
            throw std::invalid_argument(std::string(k) + " out of range");
        kv.erase(k);
    };
    auto getd = [&](const char* k, double& slot, double lo, double hi) {
        if (!kv.count(k)) return;
        try {
            slot = std::stod(kv.at(k));
        } catch (...) {
            throw std::invalid_argument(std::string("bad number for ") + k);
        }
        if (slot < lo || slot > hi)
            throw std::invalid_argument(std::string(k) + " out of range");
        kv.erase(k);
    };
    geti("d", cfg.d, 1, 16);
    geti("L", cfg.L, 1, 64);
    geti("n", cfg.n, 1, 100000);
    getd("h", cfg.h, 0.0, 1000.0);
    geti("K", cfg.K, 1, 100000);
    geti("K1", cfg.K1, 0, 1000000);
    geti("K2", cfg.K2, 0, 10000000);
    geti("M", cfg.M, 1, 100000000);
    getd("z", cfg.z, 0.0, 1000.0);
    getd("step", cfg.step, 1e-9, 1e9);
    getd("horizon", cfg.horizon, 0.0, 1e12);
    getd("eps", cfg.eps, 0.0, 1e9);
    getd("tail_threshold", cfg.tail_threshold, 0.0, 1.0);
    getd("threshold", cfg.threshold, 0.0, 1e9);
    geti("grid", cfg.grid, 8, 100000000);
    geti("trials", cfg.trials, 1, 100000000);
    geti("replicas", cfg.replicas, 1, 1000000000);
    geti("workers", cfg.workers, 1, 1024);
    if (kv.count("offspring")) {
        cfg.offspring = kv.at("offspring");
        if (cfg.offspring != "geometric" && cfg.offspring != "poisson")
            throw std::invalid_argument("offspring must be geometric or poisson");
        kv.erase("offspring");
    }
    if (kv.count("max_vertices")) {
        cfg.max_vertices = std::stoull(kv.at("max_vertices"));
        kv.erase("max_vertices");
    }
    if (kv.count("seed")) {
        cfg.seed = std::stoull(kv.at("seed"));
        kv.erase("seed");
    }
    if (kv.count("out")) {
        cfg.out = kv.at("out");
        kv.erase("out");
    }
    auto get_list = [&](const char* k, std::vector<int>& slot) {
        if (!kv.count(k)) return;
        for (const auto& s : split(kv.at(k), ','))
            if (!s.empty()) slot.push_back(std::stoi(s));
        kv.erase(k);
    };
    get_list("n_list", cfg.n_list);
    get_list("K_list", cfg.K_list);
    get_list("K1_list", cfg.K1_list);
    if (kv.count("pairs")) {
        for (const auto& s : split(kv.at("pairs"), ',')) {
            if (s.empty()) continue;
            const auto colon = s.find(':');
            if (colon == std::string::npos)
                throw std::invalid_argument("pairs entries must be K1:K2");
            cfg.pairs.push_back(
                {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))});
        }
        kv.erase("pairs");
    }
    if (kv.count("times")) {
        for (const auto& s : split(kv.at("times"), ','))
            if (!s.empty()) cfg.times.push_back(std::stod(s));
        kv.erase("times");
    }
    kv.erase("enumerate");
    if (!kv.empty())
        throw std::invalid_argument("unknown config key: " + kv.begin()->first);
    return cfg;
}

std::string manifest_hash(const ExperimentConfig& cfg) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(canonical_string(cfg))));
    return buf;
}

int run_experiment(const ExperimentConfig& cfg) {
    try {
        Ctx ctx{cfg, manifest_hash(cfg), fs::path(cfg.out)};
        fs::create_directories(ctx.dir);

        json manifest;
        manifest["experiment"] = cfg.kind;
        manifest["code_version"] = kCodeVersion;
        manifest["hash"] = ctx.hash;
        manifest["seed"] = cfg.seed;
        manifest["config"] = config_json(cfg);
        ctx.write("manifest.json", manifest.dump(2) + "\n");

        json body;
        if (cfg.kind == "sample-tree") body = run_sample_tree(ctx);
        else if (cfg.kind == "skeleton") body = run_skeleton(ctx);
        else if (cfg.kind == "check-g") body = run_check_g(ctx);
        else if (cfg.kind == "check-v") body = run_check_v(ctx);
        else if (cfg.kind == "check-r") body = run_check_r(ctx);
        else if (cfg.kind == "check-s") body = run_check_s(ctx);
        else if (cfg.kind == "check-edge-uniform") body = run_check_edge_uniform(ctx);
        else if (cfg.kind == "empirical-measure") body = run_empirical_measure(ctx);
        else if (cfg.kind == "crt-sample") body = run_crt_sample(ctx);
        else if (cfg.kind == "walk-compare") body = run_walk_compare(ctx);
        else if (cfg.kind == "lemma-step0") body = run_lemma_step0(ctx);

        json report;
        report["experiment"] = cfg.kind;
        report["manifest_hash"] = ctx.hash;
        report["seed"] = cfg.seed;
        report["result"] = body;
        ctx.write("report.json", report.dump(2) + "\n");
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error [" << cfg.kind << "]: " << e.what() << "\n";
        return 2;
    }
}

} // namespace lattree
