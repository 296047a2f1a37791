#include "wcausal/propensity.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace wcausal {

namespace {

double expit(double eta) {
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

// log(1 + exp(eta)) without overflow
double log1pexp(double eta) {
    if (eta > 35.0) return eta;
    return std::log1p(std::exp(eta));
}

}  // namespace

PropensityFit fit_propensity(std::span<const Subject> subjects, const FeatureMap& features,
                             double eps, double ridge) {
    const std::size_t n = subjects.size();
    if (n == 0) throw InsufficientData("fit_propensity: no subjects");
    std::size_t n1 = 0;
    for (const auto& s : subjects) n1 += static_cast<std::size_t>(s.treatment == 1);
    if (n1 == 0 || n1 == n)
        throw SeparationError("fit_propensity: one treatment arm is empty");

    const std::size_t p = features.out_dim();
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    Eigen::VectorXd A(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = features(subjects[i].covariates);
        for (std::size_t j = 0; j < p; ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        A(static_cast<Eigen::Index>(i)) = static_cast<double>(subjects[i].treatment);
    }

    // Constant non-intercept columns carry no information; freeze their
    // coefficient at 0 so degenerate designs (all-zero covariates)
    // still fit the intercept.
    std::vector<std::size_t> keep{0};
    for (std::size_t j = 1; j < p; ++j) {
        const auto col = X.col(static_cast<Eigen::Index>(j));
        if (col.maxCoeff() > col.minCoeff()) keep.push_back(j);
    }
    const std::size_t q = keep.size();
    Eigen::MatrixXd Xk(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(q));
    for (std::size_t j = 0; j < q; ++j) Xk.col(static_cast<Eigen::Index>(j)) = X.col(static_cast<Eigen::Index>(keep[j]));

    if (ridge == 0.0) {
        const Eigen::MatrixXd gram = Xk.transpose() * Xk;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
        if (static_cast<std::size_t>(lu.rank()) < q)
            throw SingularDesign("fit_propensity: rank-deficient design");
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q));
    auto penalized_loglik = [&](const Eigen::VectorXd& b) {
        const Eigen::VectorXd eta = Xk * b;
        double ll = 0.0;
        for (Eigen::Index i = 0; i < eta.size(); ++i)
            ll += A(i) * eta(i) - log1pexp(eta(i));
        double pen = 0.0;
        for (Eigen::Index j = 1; j < b.size(); ++j) pen += b(j) * b(j);
        return ll - 0.5 * ridge * pen;
    };

    std::size_t iter = 0;
    bool converged = false;
    for (; iter < 100; ++iter) {
        const Eigen::VectorXd eta = Xk * beta;
        Eigen::VectorXd prob(eta.size()), w(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            prob(i) = expit(eta(i));
            w(i) = std::max(prob(i) * (1.0 - prob(i)), 1e-10);
        }
        Eigen::VectorXd grad = Xk.transpose() * (A - prob);
        for (Eigen::Index j = 1; j < grad.size(); ++j) grad(j) -= ridge * beta(j);
        if (grad.cwiseAbs().maxCoeff() <= 1e-8) {
            converged = true;
            break;
        }
        Eigen::MatrixXd H = Xk.transpose() * w.asDiagonal() * Xk;
        for (Eigen::Index j = 1; j < H.rows(); ++j) H(j, j) += ridge;
        Eigen::VectorXd step = H.ldlt().solve(grad);
        // Halve the step until the penalized log-likelihood improves.
        // The slack keeps the search from rejecting full Newton steps
        // near the optimum, where the true improvement sits below the
        // floating-point resolution of the likelihood.
        const double ll0 = penalized_loglik(beta);
        const double slack = 1e-10 * (1.0 + std::abs(ll0));
        double scale = 1.0;
        Eigen::VectorXd next = beta + step;
        for (int h = 0; h < 30 && penalized_loglik(next) < ll0 - slack; ++h) {
            scale *= 0.5;
            next = beta + scale * step;
        }
        beta = next;
        if (beta.cwiseAbs().maxCoeff() > 1e6)
            throw SeparationError("fit_propensity: diverging coefficients (separated data)");
    }
    if (!converged) {
        if (beta.cwiseAbs().maxCoeff() > 1e3)
            throw SeparationError("fit_propensity: no convergence, coefficients drifting");
        throw NumericalError("fit_propensity: Newton iterations did not converge");
    }

    PropensityFit fit{features, std::vector<double>(p, 0.0), eps, iter};
    for (std::size_t j = 0; j < q; ++j) fit.coef[keep[j]] = beta(static_cast<Eigen::Index>(j));
    return fit;
}

double predict_propensity(const PropensityFit& fit, std::span<const double> x) {
    const auto row = fit.features(x);
    double eta = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) eta += fit.coef[j] * row[j];
    const double p = expit(eta);
    return std::min(std::max(p, fit.eps), 1.0 - fit.eps);
}

}  // namespace wcausal
