#pragma once

#include <array>
#include <vector>

#include "lattree/embedding.hpp"
#include "lattree/lattice.hpp"
#include "lattree/realtree.hpp"

namespace lattree {

// Decomposition of a connected graph into 2-edge-connected bubbles joined by
// bridges, rooted at the bubble containing the origin.
struct BubbleDecomposition {
    std::vector<int> bridge_edges;  // indices into host.edges
    std::vector<char> is_bridge;    // per host edge
    std::vector<int> bubble_of;     // per host vertex
    int num_bubbles = 0;
    std::vector<int> bubble_parent;        // bubble tree, root = bubble_of[0]
    std::vector<int> bubble_parent_bridge; // host edge index, -1 at the root
};

BubbleDecomposition decompose_bubbles(const LatticeGraph& host);

// endpoints of all bridges; for a tree with >= 2 vertices, every vertex
std::vector<int> find_cutpoints(const LatticeGraph& host);

// The intermediate graph G(K): bubbles crossed on the routes from the origin
// to the spanning points, each carrying the clique of its distinguished
// vertices (crossed bridge endpoints, contained spanning points, the origin).
struct GkInfo {
    BubbleDecomposition bubbles;
    std::vector<std::vector<int>> clique; // per bubble: distinguished host vertices
    std::vector<char> on_route;           // per bubble
    std::vector<char> bridge_crossed;     // per host edge
    bool tree_like = true;                // no distinguished clique of size >= 4
};

GkInfo build_gk(const LatticeGraph& host, const std::vector<int>& points);

// Star legs for a triangle with the given pairwise distances: leg of x, y, z.
// Additivity d(x,y) = leg_x + leg_y holds exactly (half-integer arithmetic).
std::array<double, 3> star_legs(double dxy, double dxz, double dyz);

// Full surgery output for a host graph and K ordered spanning points.
struct SkeletonBundle {
    LatticeGraph host;
    std::vector<int> spanning; // host vertex indices, leaf i+1 = spanning[i]

    MetricTree big;                // the skeleton tree, root = origin
    std::vector<int> big_host;     // big node -> host vertex, -1 for star centers
    std::vector<char> starred;     // big node flags
    std::vector<int> host_to_big;  // host vertex -> big node or -1
    MetricTree reduced;            // spanned reduction of big, leaf-ordered
    GraphSpatialTree embedding;    // lattice positions, star centers at barycenters

    std::vector<int> vertex_projection; // host vertex -> big node
    std::vector<int> edge_projection;   // host edge index -> big node
    std::vector<long long> mu_counts;   // host edges projecting to each big node
};

// throws std::domain_error when G(K) is not tree-like
SkeletonBundle build_skeleton(const LatticeGraph& host, const std::vector<int>& points);

// probability mass of each big node under mu (mu_counts / |E|)
std::vector<double> mu_weights(const SkeletonBundle& b);

// (max Euclidean diameter, max host-graph-metric diameter) over the
// vertex-projection preimages of skeleton vertices
std::pair<double, double> sausage_diameters(const SkeletonBundle& b);

} // namespace lattree
