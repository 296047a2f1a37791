#include "wcausal/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wcausal/errors.hpp"
#include "wcausal/ot.hpp"
#include "wcausal/rng.hpp"

namespace wcausal {

namespace {

template <typename Reduce>
std::vector<double> gp_norm_samples(const CovKernel& kernel, std::size_t draws,
                                    std::uint64_t seed, Reduce reduce) {
    if (draws == 0) throw InvalidArgument("gp samples: need at least one draw");
    const Eigen::MatrixXd factor = gp_factor(kernel);
    const Eigen::Index m = factor.rows();
    std::vector<double> out(draws);
    Eigen::VectorXd xi(m);
    Eigen::VectorXd g(m);
    for (std::size_t j = 0; j < draws; ++j) {
        Rng rng = Rng::stream(seed, j + 1);
        for (Eigen::Index r = 0; r < m; ++r) xi(r) = rng.normal();
        g.noalias() = factor * xi;
        out[j] = reduce(g);
    }
    return out;
}

}  // namespace

std::vector<std::vector<double>> influence_curves(std::span<const Subject> subjects,
                                                  const OutcomeFit& outcome,
                                                  const PropensityFit& propensity) {
    std::vector<std::vector<double>> out;
    out.reserve(subjects.size());
    const std::size_t m = outcome.grid.size();
    for (const auto& s : subjects) {
        if (s.lifted.grid() != outcome.grid)
            throw GridMismatch("influence_curves: subject grid differs from the outcome fit");
        const double pi = predict_propensity(propensity, s.covariates);
        const std::vector<double> m1 = predict_outcome(outcome, 1, s.covariates);
        const std::vector<double> m0 = predict_outcome(outcome, 0, s.covariates);
        const std::vector<double>& z = s.lifted.values();
        const double a = static_cast<double>(s.treatment);
        std::vector<double> v(m);
        for (std::size_t j = 0; j < m; ++j)
            v[j] = a * (z[j] - m1[j]) / pi + m1[j] -
                   (1.0 - a) * (z[j] - m0[j]) / (1.0 - pi) - m0[j];
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<double> mean_curve(std::span<const std::vector<double>> curves) {
    if (curves.empty()) throw InsufficientData("mean_curve: no curves");
    const std::size_t m = curves.front().size();
    std::vector<double> out(m, 0.0);
    for (const auto& c : curves) {
        if (c.size() != m) throw GridMismatch("mean_curve: curves differ in length");
        for (std::size_t j = 0; j < m; ++j) out[j] += c[j];
    }
    const double n = static_cast<double>(curves.size());
    for (auto& v : out) v /= n;
    return out;
}

CovKernel covariance_kernel(const LevelGrid& grid, std::span<const std::vector<double>> curves) {
    if (curves.size() < 2) throw InsufficientData("covariance_kernel: need at least two curves");
    const std::size_t m = grid.size();
    const std::vector<double> mean = mean_curve(curves);
    if (mean.size() != m) throw GridMismatch("covariance_kernel: curves do not match the grid");

    const Eigen::Index n = static_cast<Eigen::Index>(curves.size());
    Eigen::MatrixXd dev(n, static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            dev(i, static_cast<Eigen::Index>(j)) = curves[static_cast<std::size_t>(i)][j] - mean[j];

    Eigen::MatrixXd c = (dev.transpose() * dev) / static_cast<double>(n);
    c = 0.5 * (c + c.transpose().eval());
    return CovKernel{grid, std::move(c)};
}

Eigen::MatrixXd gp_factor(const CovKernel& kernel) {
    if (!kernel.matrix.allFinite())
        throw NumericalError("gp_factor: kernel has non-finite entries");
    const Eigen::Index m = kernel.matrix.rows();
    if (m != kernel.matrix.cols() || m != static_cast<Eigen::Index>(kernel.grid.size()))
        throw GridMismatch("gp_factor: kernel matrix does not match its grid");
    const Eigen::MatrixXd sym = 0.5 * (kernel.matrix + kernel.matrix.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) throw NumericalError("gp_factor: eigendecomposition failed");
    Eigen::MatrixXd factor(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index src = m - 1 - r;  // eigenvalues come back ascending
        factor.col(r) = es.eigenvectors().col(src) * std::sqrt(std::max(es.eigenvalues()(src), 0.0));
    }
    return factor;
}

std::vector<double> gp_supnorm_samples(const CovKernel& kernel, std::size_t draws,
                                       std::uint64_t seed) {
    return gp_norm_samples(kernel, draws, seed,
                           [](const Eigen::VectorXd& g) { return g.cwiseAbs().maxCoeff(); });
}

std::vector<double> gp_l2norm_samples(const CovKernel& kernel, std::size_t draws,
                                      std::uint64_t seed) {
    const LevelGrid grid = kernel.grid;
    return gp_norm_samples(kernel, draws, seed, [&grid](const Eigen::VectorXd& g) {
        return grid_l2_norm(std::span<const double>(g.data(), static_cast<std::size_t>(g.size())),
                            grid);
    });
}

double empirical_quantile_of(std::vector<double> samples, double p) {
    if (samples.empty()) throw InsufficientData("empirical_quantile_of: no samples");
    if (!(p >= 0.0) || p > 1.0) throw InvalidArgument("empirical_quantile_of: p outside [0, 1]");
    std::sort(samples.begin(), samples.end());
    const double b = static_cast<double>(samples.size());
    // Slack absorbs round-off when b*p is an exact integer.
    auto rank = static_cast<std::ptrdiff_t>(std::ceil(b * p - 1e-9));
    rank = std::clamp<std::ptrdiff_t>(rank, 1, static_cast<std::ptrdiff_t>(samples.size()));
    return samples[static_cast<std::size_t>(rank - 1)];
}

Band make_band(const LevelGrid& grid, std::span<const double> center, double critical,
               double alpha, std::size_t n, std::size_t resamples) {
    if (center.size() != grid.size()) throw GridMismatch("make_band: center does not match grid");
    if (n == 0) throw InsufficientData("make_band: n must be positive");
    const double half = critical / std::sqrt(static_cast<double>(n));
    Band band{grid,
              std::vector<double>(center.begin(), center.end()),
              std::vector<double>(center.size()),
              std::vector<double>(center.size()),
              critical,
              alpha,
              n,
              resamples};
    for (std::size_t j = 0; j < center.size(); ++j) {
        band.lower[j] = center[j] - half;
        band.upper[j] = center[j] + half;
    }
    return band;
}

Band scb(std::span<const double> center, std::size_t n, const CovKernel& kernel, double alpha,
         std::size_t draws, std::uint64_t seed) {
    if (!(alpha > 0.0) || alpha > 1.0) throw InvalidArgument("scb: alpha must lie in (0, 1]");
    const double critical =
        empirical_quantile_of(gp_supnorm_samples(kernel, draws, seed), 1.0 - alpha);
    return make_band(kernel.grid, center, critical, alpha, n, draws);
}

bool test_null_zero_band(const Band& band) {
    for (std::size_t j = 0; j < band.lower.size(); ++j)
        if (band.lower[j] > 0.0 || band.upper[j] < 0.0) return true;
    return false;
}

NormTestResult norm_test(std::span<const double> effect, std::size_t n, const CovKernel& kernel,
                         double alpha, std::size_t draws, std::uint64_t seed) {
    if (!(alpha > 0.0) || alpha > 1.0) throw InvalidArgument("norm_test: alpha must lie in (0, 1]");
    if (n == 0) throw InsufficientData("norm_test: n must be positive");
    const double statistic =
        std::sqrt(static_cast<double>(n)) * grid_l2_norm(effect, kernel.grid);
    const double critical =
        empirical_quantile_of(gp_l2norm_samples(kernel, draws, seed), 1.0 - alpha);
    return NormTestResult{statistic, critical, statistic > critical};
}

CovKernel cf_median_covariance(std::span<const std::vector<double>> estimates,
                               std::span<const CovKernel> kernels,
                               std::span<const double> median_estimate) {
    const std::size_t reps = estimates.size();
    if (reps == 0) throw InsufficientData("cf_median_covariance: no repetitions");
    if (kernels.size() != reps)
        throw InvalidArgument("cf_median_covariance: estimate/kernel count mismatch");
    const LevelGrid grid = kernels[0].grid;
    const std::size_t m = grid.size();
    if (median_estimate.size() != m)
        throw GridMismatch("cf_median_covariance: median estimate does not match the grid");

    std::vector<Eigen::MatrixXd> corrected;
    corrected.reserve(reps);
    std::vector<double> norms(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        if (kernels[r].grid != grid || estimates[r].size() != m)
            throw GridMismatch("cf_median_covariance: repetition grids differ");
        Eigen::VectorXd dev(static_cast<Eigen::Index>(m));
        for (std::size_t j = 0; j < m; ++j)
            dev(static_cast<Eigen::Index>(j)) = estimates[r][j] - median_estimate[j];
        Eigen::MatrixXd c = kernels[r].matrix + dev * dev.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (c + c.transpose().eval()));
        if (es.info() != Eigen::Success)
            throw NumericalError("cf_median_covariance: eigendecomposition failed");
        norms[r] = es.eigenvalues().maxCoeff() / static_cast<double>(m);
        corrected.push_back(std::move(c));
    }

    // Lower median: the ceil(R/2)-th smallest norm, ties broken by
    // repetition order so the selection is deterministic.
    std::vector<std::size_t> order(reps);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&norms](std::size_t a, std::size_t b) {
        return norms[a] < norms[b];
    });
    const std::size_t pick = order[(reps + 1) / 2 - 1];
    return CovKernel{grid, std::move(corrected[pick])};
}

}  // namespace wcausal
