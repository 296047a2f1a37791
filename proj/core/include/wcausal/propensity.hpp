#pragma once

#include <span>
#include <vector>

#include "wcausal/features.hpp"
#include "wcausal/subject.hpp"

namespace wcausal {

// Logistic propensity model. Coefficients are stored unclipped; the
// clip epsilon is applied at prediction time only.
struct PropensityFit {
    FeatureMap features;
    std::vector<double> coef;  // full feature dimension; dropped columns carry 0
    double eps = 0.01;
    std::size_t iterations = 0;
};

// Maximum-likelihood logistic fit by damped Newton iterations
// (gradient max-norm <= 1e-8 or 100 iterations). Constant non-intercept
// columns are dropped with coefficient 0. Optional ridge penalty on the
// non-intercept coefficients for the data-adaptive mode.
PropensityFit fit_propensity(std::span<const Subject> subjects, const FeatureMap& features,
                             double eps = 0.01, double ridge = 0.0);

double predict_propensity(const PropensityFit& fit, std::span<const double> x);

}  // namespace wcausal
