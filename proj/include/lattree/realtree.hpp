#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "lattree/excursion.hpp"
#include "lattree/rng.hpp"

namespace lattree {

// A point on a metric tree: on the edge from parent(node) to node, at
// distance `offset` below the parent. The root itself is {0, 0}.
struct TreePoint {
    int node = 0;
    double offset = 0.0;
};

// Rooted, edge-ordered tree with positive real edge lengths. Node 0 is the
// root; each non-root node carries the length of the edge to its parent.
// `leaf_order[i]` is the node carrying leaf label i+1 (may be empty for
// hand-built trees, in which case labels default to DFS order).
struct MetricTree {
    struct Node {
        int parent = -1;
        double edge_len = 0.0;
        std::vector<int> children;
    };

    std::vector<Node> nodes;
    std::vector<int> leaf_order;

    MetricTree() { nodes.push_back(Node{}); }

    int size() const { return static_cast<int>(nodes.size()); }
    int add_child(int parent, double len);

    double depth_of_node(int v) const;
    double depth_of_point(const TreePoint& p) const;
    double total_length() const;
    // length of all edges strictly below v
    double subtree_length(int v) const;

    bool is_ancestor(int anc, int v) const; // weak (anc == v counts)
    int lca(int a, int b) const;

    void check_point(const TreePoint& p) const;
    // collapse offset==edge_len representations to the vertex itself
    TreePoint canonical(const TreePoint& p) const;
    bool same_point(const TreePoint& a, const TreePoint& b) const;

    // leaf labels: stored order, or DFS fallback
    std::vector<int> effective_leaf_order() const;
};

double distance(const MetricTree& t, const TreePoint& a, const TreePoint& b);

// point at distance `dist` from a along the unique path a -> b
TreePoint point_on_path(const MetricTree& t, const TreePoint& a, const TreePoint& b,
                        double dist);

// the unique point on all three pairwise paths
TreePoint branch_point(const MetricTree& t, const TreePoint& a, const TreePoint& b,
                       const TreePoint& c);

// Reduced subtree spanned by {root} U points, with leaf i+1 = points[i] and
// edge order given by the walk to leaf 1, then leaf 2, and so on.
// `host_points`, when non-null, receives for each output node the position of
// that node in the host tree.
MetricTree reduced_subtree(const MetricTree& t, const std::vector<TreePoint>& points,
                           std::vector<TreePoint>* host_points = nullptr);

// point chosen with edge probability proportional to length, then a uniform
// offset: normalized Lebesgue measure on the tree
TreePoint uniform_point(const MetricTree& t, Rng& rng);

// (length of the subtree at-or-below x) / (total length)
double lebesgue_measure_of_descendants(const MetricTree& t, const TreePoint& x);

// K-leaf CRT skeleton via the sequential stick construction, calibrated to
// the excursion pseudo-metric convention (lengths are half the classical
// stick lengths). Skeletons are nested along one run of the sampler.
MetricTree crt_skeleton_linebreaking(int K, Rng& rng);

// Incremental variant: extend an existing linebreaking skeleton from its
// current leaf count to K leaves (same law as sampling K directly).
void crt_skeleton_extend(MetricTree& t, int K, Rng& rng);

// K-leaf skeleton of the tree coded by an excursion, spanned by K uniform
// times. `times_out`, when non-null, receives the sampled times (leaf i+1
// corresponds to times_out[i]).
MetricTree crt_skeleton_from_excursion(const ExcursionPath& path, int K, Rng& rng,
                                       std::vector<double>* times_out = nullptr);
// same, with caller-chosen times
MetricTree crt_skeleton_from_times(const ExcursionIndex& idx,
                                   const std::vector<double>& times);
// index-free variant with identical output: range minima by direct scan,
// preferable when only a few skeletons are built per path
MetricTree crt_skeleton_from_times(const ExcursionPath& path,
                                   const std::vector<double>& times);

// Project the tree point [t] of the coded tree onto the skeleton spanned by
// `times`: the deepest branch point b(root, [u_i], [t]). Returns a point on
// the skeleton returned by crt_skeleton_from_times for the same times.
TreePoint project_time_onto_skeleton(const ExcursionIndex& idx,
                                     const std::vector<double>& times,
                                     const MetricTree& skel, double t);

// ancestor of `below` at the given depth from the root (clamped to [0, depth(below)])
TreePoint ancestor_point_at_depth(const MetricTree& t, const TreePoint& below,
                                  double target_depth);

// split the tree at p, returning the vertex there (inserts a degree-2 node
// when p is in the interior of an edge)
int split_at(MetricTree& t, const TreePoint& p);

// nodes in preorder, following stored child order (order[0] == 0)
std::vector<int> preorder_order(const MetricTree& t);

// plain-text serialization: `node parent edge_length child_rank` rows plus
// leaf label rows; bit-exact round-trip. Nodes are renumbered in preorder so
// the text depends only on the ordered shape, lengths and labels.
std::string serialize(const MetricTree& t);
MetricTree deserialize_tree(const std::string& text);

} // namespace lattree
