#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "wcausal/curve.hpp"
#include "wcausal/grid.hpp"
#include "wcausal/outcome.hpp"
#include "wcausal/propensity.hpp"
#include "wcausal/subject.hpp"

namespace wcausal {

// Discretized covariance function of the influence process on the grid.
// Symmetric; negative round-off eigenvalues are tolerated here and
// clipped at sampling.
struct CovKernel {
    LevelGrid grid;
    Eigen::MatrixXd matrix;
};

// Simultaneous confidence band. lower and upper are stored as the
// rounded results of center -+ critical/sqrt(n); they are not
// recomputed anywhere downstream.
struct Band {
    LevelGrid grid;
    std::vector<double> center;
    std::vector<double> lower;
    std::vector<double> upper;
    double critical = 0.0;
    double alpha = 0.0;
    std::size_t n = 0;
    std::size_t resamples = 0;
};

struct NormTestResult {
    double statistic = 0.0;
    double critical = 0.0;
    bool reject = false;
};

// Per-subject influence values on the outcome fit's grid:
//   V_i(u) = A_i (Z_i(u) - m1(X_i)(u)) / pi(X_i)
//          + m1(X_i)(u)
//          - (1 - A_i)(Z_i(u) - m0(X_i)(u)) / (1 - pi(X_i))
//          - m0(X_i)(u).
// The propensity is used as clipped by predict_propensity, so both
// divisions are bounded away from zero.
std::vector<std::vector<double>> influence_curves(std::span<const Subject> subjects,
                                                  const OutcomeFit& outcome,
                                                  const PropensityFit& propensity);

// Pointwise arithmetic mean, accumulated in input order. The doubly
// robust effect curve is defined as this mean of the influence values,
// so callers needing that identity must go through this function.
std::vector<double> mean_curve(std::span<const std::vector<double>> curves);

// Sample covariance with divisor n (not n-1):
//   C(u_i, u_j) = n^{-1} sum_k (V_k(u_i) - Vbar(u_i))(V_k(u_j) - Vbar(u_j)).
// Throws InsufficientData when fewer than two curves are given.
CovKernel covariance_kernel(const LevelGrid& grid, std::span<const std::vector<double>> curves);

// Factor L with L L^T equal to the kernel after symmetrization and
// clipping of negative eigenvalues to zero. Columns are eigenvectors
// scaled by sqrt(eigenvalue), in descending eigenvalue order; this
// ordering fixes the draw-index to value mapping of the samplers.
Eigen::MatrixXd gp_factor(const CovKernel& kernel);

// B realizations of the centred Gaussian process with the given
// covariance, reduced to max_j |G(u_j)|. Draw j consumes the dedicated
// stream Rng::stream(seed, j + 1), so any subset of draws can be
// regenerated independently.
std::vector<double> gp_supnorm_samples(const CovKernel& kernel, std::size_t draws,
                                       std::uint64_t seed);

// Same draws reduced to the grid L2 norm instead of the sup norm.
// Sharing the stream layout with gp_supnorm_samples means draw j is
// the same realization in both reductions.
std::vector<double> gp_l2norm_samples(const CovKernel& kernel, std::size_t draws,
                                      std::uint64_t seed);

// Empirical p-quantile of a sample: the ceil(B*p)-th smallest value,
// with the rank clamped into [1, B].
double empirical_quantile_of(std::vector<double> samples, double p);

// Assembles a band around a center curve: half-width critical/sqrt(n).
Band make_band(const LevelGrid& grid, std::span<const double> center, double critical,
               double alpha, std::size_t n, std::size_t resamples);

// Simultaneous confidence band. The critical value is the empirical
// (1 - alpha) quantile of the resampled sup norms; that calibration is
// what delivers approximately (1 - alpha) simultaneous coverage of the
// whole curve. alpha = 1 degenerates to the narrowest band the sample
// can produce rather than erroring.
Band scb(std::span<const double> center, std::size_t n, const CovKernel& kernel, double alpha,
         std::size_t draws, std::uint64_t seed);

// True iff some grid node's interval excludes zero.
bool test_null_zero_band(const Band& band);

// Norm test of "no effect": statistic sqrt(n) * ||effect||_grid against
// the empirical (1 - alpha) quantile of resampled process norms.
NormTestResult norm_test(std::span<const double> effect, std::size_t n, const CovKernel& kernel,
                         double alpha, std::size_t draws, std::uint64_t seed);

// Covariance selection across repetitions r = 1..R:
//   Ctilde_r(s,t) = C_r(s,t) + (D_r(s) - D_med(s))(D_r(t) - D_med(t)),
// returning the Ctilde_r whose operator norm (top eigenvalue scaled by
// the quadrature weight 1/M) is the lower median among the R norms.
CovKernel cf_median_covariance(std::span<const std::vector<double>> estimates,
                               std::span<const CovKernel> kernels,
                               std::span<const double> median_estimate);

}  // namespace wcausal
