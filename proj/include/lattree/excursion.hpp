#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "lattree/rng.hpp"

namespace lattree {

// A nonnegative path on a uniform time grid, pinned to zero at both ends.
// Values are read as zero for all times past `duration`.
struct ExcursionPath {
    std::vector<double> values;
    double dt = 0.0;
    double duration = 0.0;

    // path value at real time t, linearly interpolated between grid points
    double value_at(double t) const;
    double max_value() const;
};

// Normalized excursion on `grid_points` grid nodes (duration 1).
// Construction: Gaussian random-walk bridge rotated at its minimum.
ExcursionPath sample_normalized(int grid_points, Rng& rng);

struct HeightCondition {
    double h;
};

// Excursion of a standard Brownian motion straddling the first passage of
// level h, extracted between the surrounding zeros. max(values) >= h holds
// exactly. Variable duration.
ExcursionPath sample_height_conditioned(HeightCondition cond, double dt, Rng& rng);

// d_e(s,t) = e(s) + e(t) - 2 * min over [s^t, svt]
double pseudometric(const ExcursionPath& path, double s, double t);

// Range-minimum index over the grid of an excursion, for repeated
// pseudometric queries (sparse table, O(1) per query after O(n log n) build).
class ExcursionIndex {
public:
    explicit ExcursionIndex(const ExcursionPath& path);

    double value_at(double t) const;
    // min of the interpolated path over [s^t, svt]
    double range_min(double s, double t) const;
    double pseudometric(double s, double t) const;

private:
    const ExcursionPath& path_;
    std::vector<std::vector<double>> table_; // table_[k][i] = min over 2^k cells from i
    double grid_min(std::size_t lo, std::size_t hi) const; // node indices, inclusive
};

} // namespace lattree
