#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wcausal/features.hpp"
#include "wcausal/inference.hpp"
#include "wcausal/outcome.hpp"
#include "wcausal/propensity.hpp"
#include "wcausal/subject.hpp"

namespace wcausal {

enum class EstimatorKind { outcome_regression, ipw, dr, crossfit, crossfit_median };

std::string estimator_name(EstimatorKind kind);
EstimatorKind parse_estimator(const std::string& name);

// Where the effect map is anchored when rendered or transported.
// Estimation itself happens in level coordinates and does not depend
// on the reference; it enters only in per-fold re-referencing and in
// display parametrization.
struct ReferenceSpec {
    enum class Kind { uniform, barycentre0, barycentre1, subject, external };
    Kind kind = Kind::uniform;
    std::string subject_id;               // kind == subject
    std::optional<QuantileCurve> curve;   // kind == external
};

std::string reference_name(const ReferenceSpec& spec);

// The estimated effect map and the two barycentre quantile curves it
// was built from. effect is kept in level coordinates. mu1_raw/mu0_raw
// may dip non-monotone at finite n; mu1/mu0 are their isotonic
// projections clamped into the outcome bounds and are the variants to
// use wherever a curve must act as a quantile function.
struct EffectEstimate {
    LevelGrid grid;
    std::vector<double> effect;
    std::vector<double> mu1_raw;
    std::vector<double> mu0_raw;
    QuantileCurve mu1;
    QuantileCurve mu0;
    ReferenceSpec reference;
    EstimatorKind estimator = EstimatorKind::dr;
    std::size_t n = 0;
};

// Random partition of subject indices into k folds of sizes within
// one of each other. Indices inside a fold are sorted.
struct FoldPlan {
    std::size_t k = 0;
    std::vector<std::vector<std::size_t>> folds;
    std::uint64_t seed = 0;
};

FoldPlan make_fold_plan(std::size_t n, std::size_t k, std::uint64_t seed);

// Nuisance fitting recipe applied inside cross-fitting (and reusable
// by callers fitting on the full sample).
struct NuisanceConfig {
    FeatureKind outcome_features = FeatureKind::identity;
    FeatureKind propensity_features = FeatureKind::identity;
    double ridge = 0.0;
    std::vector<double> ridge_candidates;  // nonempty: pick by CV on the training part
    std::size_t cv_folds = 5;
    double propensity_ridge = 0.0;
    double eps = 0.01;
    bool joint_outcome = true;
};

// Feature map of the requested kind calibrated on these subjects'
// covariates (only the spline kind actually looks at the data).
FeatureMap build_features(FeatureKind kind, std::span<const Subject> subjects);

EffectEstimate estimate_or(std::span<const Subject> subjects, const OutcomeFit& outcome);

EffectEstimate estimate_ipw(std::span<const Subject> subjects, const PropensityFit& propensity);

// Doubly robust estimate. The effect curve is the sample mean of the
// influence curves (bit-for-bit), and the barycentre curves are the
// means of the per-arm augmented terms; the difference of those means
// agrees with the effect curve up to round-off only, which is why the
// effect is not recomputed from them.
EffectEstimate estimate_dr(std::span<const Subject> subjects, const OutcomeFit& outcome,
                           const PropensityFit& propensity);

struct CfFit {
    EffectEstimate estimate;
    CovKernel kernel;  // covariance of the cross-fitted influence curves
};

// Cross-fitting: nuisances are fitted on each fold's complement and
// the doubly robust formula is evaluated on the fold itself. Fold
// curves are carried to the common reference (tau) before the n_k/n
// weighted combination; for a fixed reference the carry is the
// identity. k == 1 degenerates to training and evaluating on the full
// sample, which reproduces estimate_dr exactly.
CfFit estimate_cf(std::span<const Subject> subjects, std::size_t k, const NuisanceConfig& config,
                  const ReferenceSpec& reference, std::uint64_t seed);

// Pointwise lower median: at each position, the ceil(R/2)-th smallest
// of the R values.
std::vector<double> pointwise_lower_median(std::span<const std::vector<double>> curves);

struct CfMedianFit {
    EffectEstimate estimate;
    std::vector<CfFit> repetitions;
    CovKernel selected;  // repetition kernel with lower-median operator norm
};

// Repeats estimate_cf over R independent fold plans and takes the
// pointwise lower median. Repetition estimates and kernels are
// retained; `selected` already carries the outer-product correction.
CfMedianFit estimate_cf_median(std::span<const Subject> subjects, std::size_t k, std::size_t reps,
                               const NuisanceConfig& config, const ReferenceSpec& reference,
                               std::uint64_t seed);

// sqrt((1/M) sum_j d_j^2) over the raw barycentre difference; equal
// bit-for-bit to w2_distance on the raw curves.
double effect_w2_norm(const EffectEstimate& estimate);

// Pairs (reference quantile at u_j, effect at u_j): the effect map in
// the reference's outcome-axis parametrization.
std::vector<std::pair<double, double>> render_effect_map(const EffectEstimate& estimate,
                                                         const QuantileCurve& reference);

struct CounterfactualCurve {
    QuantileCurve curve;
    bool clamped = false;  // true when bounds clamping changed a value
};

// Counterfactual quantile curve for one subject: the observed curve
// plus the effect map signed for the unobserved arm (+ for observed
// controls, - for observed treated), isotonic-projected and clamped to
// the subject's outcome bounds.
CounterfactualCurve counterfactual_subject(const Subject& subject,
                                           const EffectEstimate& estimate);

// Population transport view T(s) = s + effect at level F_{mu0}(s),
// evaluated pointwise. Eval points must lie inside mu0's outcome
// bounds. Individual transports generally differ from this average.
std::vector<std::pair<double, double>> population_transport_map(
    const EffectEstimate& estimate, std::span<const double> eval_points);

// Band and norm test anchored at an estimate. The norm statistic is
// rebuilt from the raw barycentre difference so it matches
// effect_w2_norm bit-for-bit for every estimator.
Band scb(const EffectEstimate& estimate, const CovKernel& kernel, double alpha,
         std::size_t draws, std::uint64_t seed);
NormTestResult norm_test(const EffectEstimate& estimate, const CovKernel& kernel, double alpha,
                         std::size_t draws, std::uint64_t seed);

}  // namespace wcausal
