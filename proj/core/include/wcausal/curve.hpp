#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wcausal/grid.hpp"

namespace wcausal {

// Quantile curve sampled at the nodes of a LevelGrid. Invariants,
// enforced at construction: finite values, nondecreasing, inside the
// declared outcome bounds [lo, hi].
class QuantileCurve {
  public:
    QuantileCurve(LevelGrid grid, std::vector<double> values, double lo, double hi);

    const LevelGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    std::size_t size() const { return values_.size(); }

    // Piecewise-linear interpolant in the level coordinate, constant
    // beyond the first / last node.
    double at_level(double u) const;

  private:
    LevelGrid grid_;
    std::vector<double> values_;
    double lo_, hi_;
};

// Right-continuous empirical distribution of a finite sample.
class StepCdf {
  public:
    static StepCdf from_samples(std::span<const double> samples);

    // P(X <= t).
    double eval(double t) const;
    // Left-continuous generalized inverse inf{x : F(x) >= u}, u in (0, 1].
    double quantile(double u) const;

    const std::vector<double>& atoms() const { return atoms_; }
    const std::vector<double>& cum_weights() const { return cum_; }

  private:
    std::vector<double> atoms_;  // sorted, unique
    std::vector<double> cum_;    // cumulative probabilities, back() == 1
};

// Lift a raw sample onto a level grid: value at u is the ceil(k*u)-th
// order statistic. Throws InsufficientData on an empty sample and
// DomainViolation when a sample point leaves [lo, hi].
QuantileCurve empirical_quantile(std::span<const double> samples, const LevelGrid& grid,
                                 double lo, double hi);

// Level coordinate of t under the curve: sup{u in [u_1, u_m] : Q(u) <= t}
// for the piecewise-linear interpolant, clamped to the grid range. Flat
// stretches resolve to their right end.
double cdf_eval(const QuantileCurve& curve, double t);

// Pool-adjacent-violators projection onto nondecreasing vectors
// (equal weights, least squares).
std::vector<double> isotonic_project(std::span<const double> values);

// Linear interpolation of an arbitrary level-indexed vector (not
// necessarily monotone), constant beyond the end nodes.
double interp_at_level(const LevelGrid& grid, std::span<const double> values, double u);

}  // namespace wcausal
