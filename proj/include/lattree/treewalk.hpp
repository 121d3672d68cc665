#pragma once

#include <vector>

#include "lattree/embedding.hpp"
#include "lattree/realtree.hpp"
#include "lattree/rng.hpp"

namespace lattree {

// Walk sample path in process time. `points` are host tree positions (empty
// for walks recorded from plain graphs); `positions` are R^d marks.
struct TreeWalkPath {
    std::vector<double> times;
    std::vector<TreePoint> points;
    std::vector<Vec> positions;
};

// Tree subdivided for simulation: node 0 is the tree root, every edge split
// into ceil(length/step) equal segments, vertex degrees preserved.
struct DiscretizedTree {
    std::vector<TreePoint> node_point; // back-map into the host tree
    std::vector<std::vector<int>> adj;
    double step = 0.0; // requested pitch; actual segment lengths are <= step
};

// throws std::invalid_argument unless step < min edge length
DiscretizedTree discretize(const GraphSpatialTree& gst, double step);

// Simple random walk on the discretization started at the root; one step
// advances process time by step^2 (diffusive clock). Records every
// `record_every`-th step plus the final one; the path covers at least
// `horizon` in process time.
TreeWalkPath walk_on_tree(const GraphSpatialTree& gst, double step, double horizon,
                          Rng& rng, int record_every = 1);

// KS distance between the coordinate marginals of two walk ensembles at each
// requested time: result[time][coordinate]. Positions are read as constant
// between recorded steps; a time beyond any path's last record throws
// std::invalid_argument.
std::vector<std::vector<double>> compare_ensembles(
    const std::vector<TreeWalkPath>& a, const std::vector<TreeWalkPath>& b,
    const std::vector<double>& times);

} // namespace lattree
