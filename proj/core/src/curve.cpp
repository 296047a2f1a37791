#include "wcausal/curve.hpp"

#include <algorithm>
#include <cmath>

namespace wcausal {

namespace {

void check_finite(std::span<const double> xs, const char* what) {
    for (double x : xs) {
        if (!std::isfinite(x)) throw DomainViolation(std::string(what) + ": non-finite value");
    }
}

// Order-statistic index for level u among k samples: ceil(k*u), with a
// relative guard against upward float error in k*u. The guard is far
// smaller than the spacing of attainable grid rationals for any
// realistic k, so it never flips a genuinely non-integer product.
std::size_t order_index(std::size_t k, double u) {
    const double r = static_cast<double>(k) * u;
    double m = std::ceil(r - 1e-9 * (r + 1.0));
    if (m < 1.0) m = 1.0;
    const double kd = static_cast<double>(k);
    if (m > kd) m = kd;
    return static_cast<std::size_t>(m);
}

}  // namespace

QuantileCurve::QuantileCurve(LevelGrid grid, std::vector<double> values, double lo, double hi)
    : grid_(grid), values_(std::move(values)), lo_(lo), hi_(hi) {
    if (values_.size() != grid_.size())
        throw GridMismatch("QuantileCurve: value count does not match grid");
    if (!std::isfinite(lo_) || !std::isfinite(hi_) || lo_ > hi_)
        throw DomainViolation("QuantileCurve: invalid bounds");
    check_finite(values_, "QuantileCurve");
    for (std::size_t j = 0; j + 1 < values_.size(); ++j) {
        if (values_[j] > values_[j + 1])
            throw DomainViolation("QuantileCurve: values must be nondecreasing");
    }
    if (values_.front() < lo_ || values_.back() > hi_)
        throw DomainViolation("QuantileCurve: values leave declared bounds");
}

double QuantileCurve::at_level(double u) const {
    return interp_at_level(grid_, values_, u);
}

StepCdf StepCdf::from_samples(std::span<const double> samples) {
    if (samples.empty()) throw InsufficientData("StepCdf: empty sample set");
    check_finite(samples, "StepCdf");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    StepCdf cdf;
    const double k = static_cast<double>(sorted.size());
    std::size_t i = 0;
    std::size_t seen = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        seen += j - i;
        cdf.atoms_.push_back(sorted[i]);
        cdf.cum_.push_back(static_cast<double>(seen) / k);
        i = j;
    }
    cdf.cum_.back() = 1.0;
    return cdf;
}

double StepCdf::eval(double t) const {
    auto it = std::upper_bound(atoms_.begin(), atoms_.end(), t);
    if (it == atoms_.begin()) return 0.0;
    return cum_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
}

double StepCdf::quantile(double u) const {
    if (u <= cum_.front()) return atoms_.front();
    auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
    if (it == cum_.end()) return atoms_.back();
    return atoms_[static_cast<std::size_t>(it - cum_.begin())];
}

QuantileCurve empirical_quantile(std::span<const double> samples, const LevelGrid& grid,
                                 double lo, double hi) {
    if (samples.empty()) throw InsufficientData("empirical_quantile: empty sample set");
    check_finite(samples, "empirical_quantile");
    for (double x : samples) {
        if (x < lo || x > hi)
            throw DomainViolation("empirical_quantile: sample outside declared bounds");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t k = sorted.size();
    std::vector<double> values(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        values[j] = sorted[order_index(k, grid.level(j)) - 1];
    }
    return QuantileCurve(grid, std::move(values), lo, hi);
}

double cdf_eval(const QuantileCurve& curve, double t) {
    const auto& v = curve.values();
    const LevelGrid& g = curve.grid();
    const std::size_t m = v.size();
    if (t < v.front()) return g.level(0);
    if (t >= v.back()) return g.level(m - 1);
    // Last j with v[j] <= t; the next value is strictly larger, so the
    // interpolation below resolves flat stretches to their right end.
    auto it = std::upper_bound(v.begin(), v.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - v.begin()) - 1;
    const double frac = (t - v[j]) / (v[j + 1] - v[j]);
    return g.level(j) + frac * (g.level(j + 1) - g.level(j));
}

std::vector<double> isotonic_project(std::span<const double> values) {
    std::vector<double> mean;
    std::vector<std::size_t> count;
    mean.reserve(values.size());
    count.reserve(values.size());
    for (double x : values) {
        mean.push_back(x);
        count.push_back(1);
        while (mean.size() > 1 && mean[mean.size() - 2] > mean.back()) {
            const double w1 = static_cast<double>(count[count.size() - 2]);
            const double w2 = static_cast<double>(count.back());
            const double pooled = (w1 * mean[mean.size() - 2] + w2 * mean.back()) / (w1 + w2);
            mean.pop_back();
            count.pop_back();
            mean.back() = pooled;
            count.back() += static_cast<std::size_t>(w2);
        }
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (std::size_t b = 0; b < mean.size(); ++b) {
        out.insert(out.end(), count[b], mean[b]);
    }
    return out;
}

double interp_at_level(const LevelGrid& grid, std::span<const double> values, double u) {
    const std::size_t m = values.size();
    if (m == 1) return values[0];
    const double md = static_cast<double>(grid.size());
    if (u <= grid.level(0)) return values.front();
    if (u >= grid.level(m - 1)) return values.back();
    // Uniform spacing 1/m: node index below u in O(1).
    double pos = u * md - 0.5;
    std::size_t j = static_cast<std::size_t>(pos);
    if (j > m - 2) j = m - 2;
    double frac = pos - static_cast<double>(j);
    if (frac < 0.0) frac = 0.0;
    if (frac > 1.0) frac = 1.0;
    return values[j] + frac * (values[j + 1] - values[j]);
}

}  // namespace wcausal
