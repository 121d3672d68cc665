#pragma once

#include <string>
#include <vector>

#include "lattree/embedding.hpp"
#include "lattree/excursion.hpp"
#include "lattree/lattice.hpp"
#include "lattree/metrics.hpp"
#include "lattree/realtree.hpp"
#include "lattree/rng.hpp"
#include "lattree/skeleton.hpp"

namespace lattree {

// Atomic approximation of the skeleton volume measure: atoms located by K1
// extra spanning points, weights estimated by K2 further points. Atoms are
// the points of the K-skeleton that reach degree exactly 3 in the
// (K+K1)-skeleton; weights are projection frequencies (sum <= 1).
struct EmpiricalMeasure {
    std::vector<TreePoint> atoms;
    std::vector<double> weights;
    int K = 0, K1 = 0, K2 = 0;
};

// Uniform verdict record: pass holds exactly when statistic <= threshold.
struct ConditionReport {
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
    int replicas = 0;
    std::string notes;
};

ConditionReport make_report(double statistic, double threshold, int replicas,
                            std::string notes);

// Spanning points drawn by uniform edge then uniform endpoint, resampled to
// be distinct and different from the origin.
std::vector<int> draw_spanning_points(const LatticeGraph& host, int count, Rng& rng);

// Max over sampled connected vertex sets B of
// | |B|/|G| - (induced edges of B)/|E| |, against the tree-host bound 1/|G|.
ConditionReport check_edge_uniform(const LatticeGraph& host, int trials, Rng& rng);

// Empirical measure from a reduced skeleton with >= K+K1+K2 ordered leaves;
// depends only on the ordered shape and edge lengths of `t`. Atom positions
// are points of `t` (on the span of the first K leaves).
EmpiricalMeasure empirical_measure_from_skeleton(const MetricTree& t, int K, int K1,
                                                 int K2, double tol = 1e-9);

// Host-graph pipeline: skeleton of the first K points, atoms located by the
// next K1 points' projections (split by departure direction), weights from
// the last K2 points. `points` holds >= K+K1+K2 host vertices. Atom positions
// are vertex points of the bundle's big tree. Throws std::domain_error when
// the K-point surgery is not tree-like.
EmpiricalMeasure build_empirical_measure(const LatticeGraph& host,
                                         const std::vector<int>& points, int K,
                                         int K1, int K2, SkeletonBundle* bundle_out = nullptr);

// Total variation between two atomic measures on one tree (atoms matched as
// exact canonical points; intended for lattice-derived trees where positions
// are exact).
double tv_atomic(const MetricTree& t, const std::vector<TreePoint>& a,
                 const std::vector<double>& wa, const std::vector<TreePoint>& b,
                 const std::vector<double>& wb);

// Exact sup over tree points x of |lambda(descendants of x) - mu(descendants
// of x)| where lambda is normalized length measure and mu is atomic. The
// difference is piecewise linear between atoms, so the sup is attained at
// vertices, atoms, and one-sided atom limits.
double v_sup_statistic(const MetricTree& t, const std::vector<TreePoint>& atoms,
                       const std::vector<double>& weights);

ConditionReport check_condition_V(const MetricTree& t,
                                  const std::vector<TreePoint>& atoms,
                                  const std::vector<double>& weights,
                                  double threshold);

// Skeleton-bundle variant: mu = host-edge projection counts at big-tree
// vertices, lambda = length measure on the big tree.
ConditionReport check_condition_V(const SkeletonBundle& b, double threshold);

// Continuum variant: skeleton spanned by `times` on the excursion-coded tree;
// mu estimated by projecting `grid_points` equispaced times of the excursion.
ConditionReport check_condition_V_crt(const ExcursionIndex& idx,
                                      const std::vector<double>& times,
                                      const MetricTree& skel, int grid_points,
                                      double threshold);

// Ratios R_eff(0, v)/d(0, v); statistic = max deviation from the median
// ratio. Tree hosts give ratios exactly 1.
ConditionReport check_condition_R(const LatticeGraph& host,
                                  const std::vector<int>& points, double threshold);

// One ensemble of raw sausage diameters at a fixed spanning-point count.
struct SausageSample {
    int K = 0;
    std::vector<double> zd;   // Euclidean diameters
    std::vector<double> intr; // host-graph-metric diameters
};

// Tail probabilities P(n^{-1/2} zd > eps), P(n^{-1} intr > eps) per K must be
// nonincreasing in K and end below tail_threshold; any increase fails the
// report outright.
ConditionReport check_condition_S(const std::vector<SausageSample>& ensemble, int n,
                                  double eps, double tail_threshold);

// One replica's skeleton summary for the geometric-convergence check.
struct SkeletonSummary {
    ShapeCode shape;
    std::vector<double> edge_lengths; // canonical (preorder) edge order
    std::vector<Vec> leaf_disp;       // leaf displacement from the root, R^d
    double edges_over_n2 = -1.0;      // optional |E|/n^2; < 0 when absent
};

struct GFit {
    double sigma_d = 1.0;
    double sigma_phi = 1.0;
};

// Shape-frequency total variation plus per-edge-length and per-coordinate KS
// distances on the modal common shape, after rescaling the discrete ensemble
// by fitted (sigma_d, sigma_phi). Statistic = max of all distances. When
// both ensembles carry |E|/n^2 samples, their KS joins the statistic.
ConditionReport check_condition_G(const std::vector<SkeletonSummary>& discrete,
                                  const std::vector<SkeletonSummary>& continuum,
                                  double threshold, GFit* fit_out = nullptr);

// (1 - 1/M) * exp(-2/sqrt(M))
double all_project_bound(int M);

// Empirical probability that ceil(sqrt(M)) fresh uniform points of the
// excursion-coded tree all project onto atoms located by K1 spanning points
// beyond the first K. Pass when the probability reaches the analytic bound
// minus `margin` (statistic = bound - empirical, threshold = margin).
ConditionReport check_all_project(int K, int K1, int M, int replicas, int grid_points,
                                  Rng& rng, double margin);

} // namespace lattree
