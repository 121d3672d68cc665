#pragma once

#include <string>
#include <vector>

#include "lattree/embedding.hpp"
#include "lattree/realtree.hpp"

namespace lattree {

// Canonical encoding of a rooted, edge-ordered tree with leaf labels; equal
// codes are equivalent to a root- and order-preserving isomorphism. Lengths
// and embeddings are ignored.
using ShapeCode = std::string;

ShapeCode shape_code(const MetricTree& tree);

// Edge lengths in canonical (preorder) edge order; comparable across trees
// with equal shape codes.
std::vector<double> canonical_edge_lengths(const MetricTree& tree);

// sup over corresponding ordered edges of |length difference|; infinity when
// the shapes differ
double dist_d1(const MetricTree& a, const MetricTree& b);

// d1 + sup of Euclidean displacement under the edge-proportional
// correspondence, capped at 1; 1 outright when shapes differ
double dist_D(const GraphSpatialTree& a, const GraphSpatialTree& b);

// Total variation between finite measures on a common support. Probability
// pairs give (1/2) sum |p-q|; sub-probability pairs give the subset sup
// max(sum (p-q)^+, sum (q-p)^+).
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

// two-sample Kolmogorov-Smirnov distance
double ks_distance(std::vector<double> a, std::vector<double> b);

} // namespace lattree
