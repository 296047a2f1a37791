#pragma once

#include <span>
#include <vector>

#include "wcausal/curve.hpp"

namespace wcausal {

// L2 norm of a level-indexed vector under the midpoint quadrature:
// sqrt(mean of squares).
double grid_l2_norm(std::span<const double> values, const LevelGrid& grid);

// Quadratic Wasserstein distance between two distributions on the line,
// computed as the grid L2 distance of their quantile curves. Grids must
// match. The span overload accepts raw (possibly non-monotone) value
// sequences so estimated barycentre curves can be compared before
// isotonic repair.
double w2_distance(const QuantileCurve& a, const QuantileCurve& b);
double w2_distance(std::span<const double> a, std::span<const double> b, const LevelGrid& grid);

// Frechet mean under w2: the pointwise (weighted) mean of quantile
// curves. Equal weights when `weights` is empty. Weights must be
// nonnegative with a positive sum.
QuantileCurve barycentre(std::span<const QuantileCurve> curves,
                         std::span<const double> weights = {});

// Monotone transport T = Q_dst o F_src evaluated at each point of
// `pts`; pushes src onto dst. The curve overload uses interpolated
// CDF/quantile semantics; the StepCdf overload uses exact step
// semantics on both sides (dst values read as equally weighted atoms).
std::vector<double> transport_map(const QuantileCurve& src, const QuantileCurve& dst,
                                  std::span<const double> pts);
std::vector<double> transport_map(const StepCdf& src, const QuantileCurve& dst,
                                  std::span<const double> pts);

// Re-reference a level-indexed curve g from lambda_src to lambda_dst:
// out_j = g(F_src(Q_dst(u_j))). Identity when the two references hold
// identical values.
std::vector<double> pushforward_compose(std::span<const double> g,
                                        const QuantileCurve& lambda_src,
                                        const QuantileCurve& lambda_dst);

}  // namespace wcausal
