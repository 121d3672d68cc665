#include "lattree/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lattree {

namespace {

void encode_node(const MetricTree& t, int v, const std::vector<int>& label_of,
                 std::ostringstream& os) {
    os << "(";
    if (label_of[static_cast<std::size_t>(v)] >= 0)
        os << "L" << label_of[static_cast<std::size_t>(v)];
    for (int c : t.nodes[v].children) encode_node(t, c, label_of, os);
    os << ")";
}

} // namespace

ShapeCode shape_code(const MetricTree& tree) {
    std::vector<int> label_of(tree.nodes.size(), -1);
    const auto leaves = tree.effective_leaf_order();
    for (std::size_t i = 0; i < leaves.size(); ++i)
        label_of[static_cast<std::size_t>(leaves[i])] = static_cast<int>(i + 1);
    std::ostringstream os;
    encode_node(tree, 0, label_of, os);
    return os.str();
}

std::vector<double> canonical_edge_lengths(const MetricTree& tree) {
    std::vector<double> out;
    for (int v : preorder_order(tree))
        if (v != 0) out.push_back(tree.nodes[v].edge_len);
    return out;
}

double dist_d1(const MetricTree& a, const MetricTree& b) {
    if (shape_code(a) != shape_code(b))
        return std::numeric_limits<double>::infinity();
    const auto la = canonical_edge_lengths(a);
    const auto lb = canonical_edge_lengths(b);
    double sup = 0.0;
    for (std::size_t i = 0; i < la.size(); ++i)
        sup = std::max(sup, std::abs(la[i] - lb[i]));
    return sup;
}

double dist_D(const GraphSpatialTree& a, const GraphSpatialTree& b) {
    const double d1 = dist_d1(a.tree, b.tree);
    if (!std::isfinite(d1)) return 1.0;
    // correspondence: matching edges in canonical order, points matched at
    // equal length fractions; sup sampled at both polylines' breakpoints
    const auto oa = preorder_order(a.tree);
    const auto ob = preorder_order(b.tree);
    double d2 = 0.0;
    auto displacement = [&](const Vec& p, const Vec& q) {
        double s = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) s += (p[k] - q[k]) * (p[k] - q[k]);
        return std::sqrt(s);
    };
    {
        const Vec ra = a.root_pos, rb = b.root_pos;
        d2 = displacement(ra, rb);
    }
    for (std::size_t i = 1; i < oa.size(); ++i) {
        const int va = oa[i], vb = ob[i];
        const double la = a.tree.nodes[va].edge_len;
        const double lb = b.tree.nodes[vb].edge_len;
        std::vector<double> fracs;
        for (double off : a.offsets[va]) fracs.push_back(la > 0 ? off / la : 0.0);
        for (double off : b.offsets[vb]) fracs.push_back(lb > 0 ? off / lb : 0.0);
        std::sort(fracs.begin(), fracs.end());
        for (double f : fracs) {
            const Vec pa = evaluate(a, TreePoint{va, f * la});
            const Vec pb = evaluate(b, TreePoint{vb, f * lb});
            d2 = std::max(d2, displacement(pa, pb));
        }
    }
    return std::min(d1 + d2, 1.0);
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size())
        throw std::invalid_argument("total_variation: support size mismatch");
    double up = 0.0, down = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < 0.0 || q[i] < 0.0)
            throw std::invalid_argument("total_variation: negative mass");
        const double d = p[i] - q[i];
        if (d > 0)
            up += d;
        else
            down -= d;
    }
    // sup over subsets |p(A) - q(A)|; equals (1/2) sum |p-q| when both are
    // probability measures
    return std::max(up, down);
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_distance: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        // next distinct merged value; ties advance both sides together
        double x;
        if (j >= b.size() || (i < a.size() && a[i] <= b[j]))
            x = a[i];
        else
            x = b[j];
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                                 static_cast<double>(j) / b.size()));
    }
    return d;
}

} // namespace lattree
