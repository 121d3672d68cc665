#include "lattree/excursion.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace lattree {

double ExcursionPath::value_at(double t) const {
    if (t < 0.0) throw std::invalid_argument("excursion time must be nonnegative");
    if (t >= duration) return 0.0;
    const double u = t / dt;
    const std::size_t i = static_cast<std::size_t>(u);
    if (i + 1 >= values.size()) return values.back();
    const double frac = u - static_cast<double>(i);
    return values[i] + frac * (values[i + 1] - values[i]);
}

double ExcursionPath::max_value() const {
    return *std::max_element(values.begin(), values.end());
}

ExcursionPath sample_normalized(int grid_points, Rng& rng) {
    if (grid_points < 3)
        throw std::invalid_argument("sample_normalized: need at least 3 grid points");
    const int n = grid_points - 1; // number of increments
    const double sd = std::sqrt(1.0 / n);

    std::vector<double> walk(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 1; i <= n; ++i) walk[i] = walk[i - 1] + sd * rng.normal();

    // bridge correction, then rotate at the (a.s. unique) minimum
    const double drift = walk[n] / n;
    std::size_t argmin = 0;
    double minval = 0.0;
    std::vector<double> bridge(walk.size());
    for (int i = 0; i <= n; ++i) {
        bridge[i] = walk[i] - drift * i;
        if (i < n && bridge[i] < minval) {
            minval = bridge[i];
            argmin = static_cast<std::size_t>(i);
        }
    }

    ExcursionPath out;
    out.values.resize(walk.size());
    for (int j = 0; j <= n; ++j)
        out.values[j] = bridge[(argmin + j) % n] - minval;
    out.values[0] = 0.0;
    out.values[n] = 0.0;
    out.dt = 1.0 / n;
    out.duration = 1.0;
    return out;
}

ExcursionPath sample_height_conditioned(HeightCondition cond, double dt, Rng& rng) {
    if (cond.h <= 0.0) throw std::invalid_argument("height condition must be positive");
    if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
    const double sd = std::sqrt(dt);
    // guard against a runaway simulation; at sane dt this is unreachable
    const std::size_t max_steps = 4'000'000'000ULL;

    std::vector<double> walk;
    walk.push_back(0.0);
    double w = 0.0;
    std::size_t last_zero = 0; // last index with w <= 0 before the passage
    std::size_t steps = 0;
    // run to the first passage of h
    while (w < cond.h) {
        w += sd * rng.normal();
        walk.push_back(w);
        if (w <= 0.0) last_zero = walk.size() - 1;
        if (++steps > max_steps)
            throw std::runtime_error("sample_height_conditioned: step budget exceeded");
    }
    // continue to the next return to zero
    while (w > 0.0) {
        w += sd * rng.normal();
        walk.push_back(w);
        if (++steps > max_steps)
            throw std::runtime_error("sample_height_conditioned: step budget exceeded");
    }

    ExcursionPath out;
    out.values.reserve(walk.size() - last_zero + 1);
    out.values.push_back(0.0);
    for (std::size_t i = last_zero + 1; i + 1 < walk.size(); ++i)
        out.values.push_back(walk[i]);
    out.values.push_back(0.0);
    out.dt = dt;
    out.duration = dt * static_cast<double>(out.values.size() - 1);
    return out;
}

double pseudometric(const ExcursionPath& path, double s, double t) {
    if (s < 0.0 || t < 0.0)
        throw std::invalid_argument("pseudometric: negative time");
    const double lo = std::min(s, t), hi = std::max(s, t);
    const double es = path.value_at(lo), et = path.value_at(hi);
    double m = std::min(es, et);
    if (hi >= path.duration && lo < path.duration) {
        m = 0.0;
    } else if (hi < path.duration) {
        const std::size_t i0 = static_cast<std::size_t>(std::ceil(lo / path.dt));
        const std::size_t i1 = static_cast<std::size_t>(std::floor(hi / path.dt));
        for (std::size_t i = i0; i <= i1 && i < path.values.size(); ++i)
            m = std::min(m, path.values[i]);
    }
    return es + et - 2.0 * m;
}

ExcursionIndex::ExcursionIndex(const ExcursionPath& path) : path_(path) {
    const std::size_t n = path.values.size();
    table_.emplace_back(path.values);
    for (std::size_t len = 2; len <= n; len *= 2) {
        const auto& prev = table_.back();
        std::vector<double> row(n - len + 1);
        for (std::size_t i = 0; i + len <= n; ++i)
            row[i] = std::min(prev[i], prev[i + len / 2]);
        table_.push_back(std::move(row));
    }
}

double ExcursionIndex::value_at(double t) const { return path_.value_at(t); }

double ExcursionIndex::grid_min(std::size_t lo, std::size_t hi) const {
    if (lo > hi) return std::numeric_limits<double>::infinity();
    const std::size_t span = hi - lo + 1;
    std::size_t k = 0;
    while ((std::size_t{2} << k) <= span) ++k;
    return std::min(table_[k][lo], table_[k][hi + 1 - (std::size_t{1} << k)]);
}

double ExcursionIndex::range_min(double s, double t) const {
    const double lo = std::min(s, t), hi = std::max(s, t);
    double m = std::min(path_.value_at(lo), path_.value_at(hi));
    if (hi >= path_.duration) {
        if (lo < path_.duration) return 0.0;
        return 0.0;
    }
    const std::size_t i0 = static_cast<std::size_t>(std::ceil(lo / path_.dt));
    const std::size_t i1 = static_cast<std::size_t>(std::floor(hi / path_.dt));
    if (i0 <= i1 && i1 < path_.values.size())
        m = std::min(m, grid_min(i0, i1));
    return m;
}

double ExcursionIndex::pseudometric(double s, double t) const {
    if (s < 0.0 || t < 0.0)
        throw std::invalid_argument("pseudometric: negative time");
    return path_.value_at(s) + path_.value_at(t) - 2.0 * range_min(s, t);
}

} // namespace lattree
