#pragma once

#include <string>
#include <vector>

#include "lattree/realtree.hpp"
#include "lattree/rng.hpp"

namespace lattree {

using Vec = std::vector<double>; // one point of R^d

// A metric tree together with a continuous map into R^d, stored as one
// polyline per edge. Polylines of adjacent edges agree at shared vertices and
// are parameterized proportionally to tree distance.
struct GraphSpatialTree {
    MetricTree tree;
    int dim = 0;
    Vec root_pos; // position of the root, origin unless stated otherwise
    // per non-root node v: sample offsets along the parent edge (first 0,
    // last edge_len) and the matching R^d points (first = parent position)
    std::vector<std::vector<double>> offsets;
    std::vector<std::vector<Vec>> points;

    Vec vertex_pos(int v) const { return v == 0 ? root_pos : points[v].back(); }
};

// Brownian embedding: phi(root) = 0 and independent centered Gaussian
// increments along edges with per-coordinate variance equal to traversed tree
// length, so cov(phi(a), phi(b)) = d(root, a ^ b) Id at stored points.
// Each edge is sampled at resolution max(edge_len/32, resolution_floor).
GraphSpatialTree sample_gaussian_embedding(const MetricTree& tree, int dim, Rng& rng,
                                           double resolution_floor = 1e-3);

// straight-line embedding interpolating given vertex positions
GraphSpatialTree embed_from_vertex_positions(const MetricTree& tree, int dim,
                                             const std::vector<Vec>& vertex_pos);

// position of a tree point, interpolated along the stored polyline
Vec evaluate(const GraphSpatialTree& gst, const TreePoint& x);

// tree serialization followed by one CSV polyline block per edge
std::string serialize(const GraphSpatialTree& gst);

} // namespace lattree
