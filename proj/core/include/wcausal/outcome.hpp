#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "wcausal/features.hpp"
#include "wcausal/grid.hpp"
#include "wcausal/subject.hpp"

namespace wcausal {

// Function-valued outcome regression: independent penalized
// least-squares solves at every grid level with one shared design
// factorization. The joint design is (1, A, phi(X)); the per-arm
// variant fits (1, phi(X)) separately per treatment arm.
struct OutcomeFit {
    FeatureMap features;
    LevelGrid grid;
    double ridge = 0.0;
    bool joint = true;
    // joint: (2 + phi-dim) x M; dropped columns carry zero rows.
    Eigen::MatrixXd coef;
    // per-arm: (1 + phi-dim) x M each.
    Eigen::MatrixXd coef0, coef1;
};

// Ridge penalizes the phi(X) block only, never the intercept or the
// treatment coefficient. Constant non-intercept columns are dropped
// with coefficient zero; a remaining rank deficiency with ridge = 0
// raises SingularDesign.
OutcomeFit fit_outcome(std::span<const Subject> subjects, const FeatureMap& features,
                       double ridge = 0.0, bool joint = true);

std::vector<double> predict_outcome(const OutcomeFit& fit, int a, std::span<const double> x);

// Classical per-level inference for the treatment coefficient of an
// unpenalized joint fit: se[j] is the OLS standard error at level j,
// dof the residual degrees of freedom shared by all levels.
struct TreatmentCoefInference {
    std::vector<double> se;
    double dof = 0.0;
};

// Must be called with the same subjects the fit was computed from.
// Raises InvalidArgument for penalized or per-arm fits and when the
// treatment column was constant, InsufficientData when no residual
// degrees of freedom remain.
TreatmentCoefInference treatment_coef_inference(std::span<const Subject> subjects,
                                                const OutcomeFit& fit);

// Fold-averaged integrated squared prediction error over a deterministic
// index-striped K-fold split; ties break toward the larger penalty.
double select_ridge_cv(std::span<const Subject> subjects, const FeatureMap& features,
                       std::size_t folds, std::span<const double> candidates);

}  // namespace wcausal
