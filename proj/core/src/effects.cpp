#include "wcausal/effects.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wcausal/errors.hpp"
#include "wcausal/ot.hpp"
#include "wcausal/rng.hpp"

namespace wcausal {

namespace {

constexpr std::uint64_t kFoldStream = 0x666f6c64ull;  // shuffle stream tag

std::pair<double, double> outcome_bounds(std::span<const Subject> subjects) {
    double lo = subjects.front().lifted.lo();
    double hi = subjects.front().lifted.hi();
    for (const auto& s : subjects) {
        lo = std::min(lo, s.lifted.lo());
        hi = std::max(hi, s.lifted.hi());
    }
    return {lo, hi};
}

QuantileCurve project_curve(const LevelGrid& grid, std::span<const double> raw, double lo,
                            double hi) {
    std::vector<double> v = isotonic_project(raw);
    for (auto& x : v) x = std::clamp(x, lo, hi);
    return QuantileCurve(grid, std::move(v), lo, hi);
}

std::vector<double> raw_difference(std::span<const double> a, std::span<const double> b) {
    std::vector<double> d(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) d[j] = a[j] - b[j];
    return d;
}

EffectEstimate assemble(const LevelGrid& grid, std::vector<double> effect,
                        std::vector<double> mu1_raw, std::vector<double> mu0_raw, double lo,
                        double hi, ReferenceSpec reference, EstimatorKind kind, std::size_t n) {
    QuantileCurve mu1 = project_curve(grid, mu1_raw, lo, hi);
    QuantileCurve mu0 = project_curve(grid, mu0_raw, lo, hi);
    return EffectEstimate{grid,           std::move(effect), std::move(mu1_raw),
                          std::move(mu0_raw), std::move(mu1),    std::move(mu0),
                          std::move(reference), kind,          n};
}

void require_subjects(std::span<const Subject> subjects, const LevelGrid& grid) {
    if (subjects.empty()) throw InsufficientData("estimator: no subjects");
    for (const auto& s : subjects)
        if (s.lifted.grid() != grid)
            throw GridMismatch("estimator: subject grid differs from the fit grid");
}

// Barycentre of the lifted curves of one arm.
QuantileCurve arm_barycentre(std::span<const Subject> subjects, int arm) {
    std::vector<QuantileCurve> curves;
    for (const auto& s : subjects)
        if (s.treatment == arm) curves.push_back(s.lifted);
    if (curves.empty()) throw InsufficientData("reference barycentre: arm has no subjects");
    return barycentre(curves);
}

// Fixed reference curve for fold carries; estimated (barycentre)
// references are resolved per call site instead.
QuantileCurve fixed_reference(const ReferenceSpec& ref, std::span<const Subject> subjects,
                              const LevelGrid& grid) {
    switch (ref.kind) {
        case ReferenceSpec::Kind::uniform:
            return QuantileCurve(grid, grid.levels(), 0.0, 1.0);
        case ReferenceSpec::Kind::subject: {
            for (const auto& s : subjects)
                if (s.id == ref.subject_id) return s.lifted;
            throw NotFound("reference subject '" + ref.subject_id + "' not in the sample");
        }
        case ReferenceSpec::Kind::external: {
            if (!ref.curve) throw InvalidArgument("external reference without a curve");
            if (ref.curve->grid() != grid)
                throw GridMismatch("external reference curve is on a different grid");
            return *ref.curve;
        }
        default:
            throw InvalidArgument("fixed_reference: estimated reference kind");
    }
}

// Per-subject augmented arm terms of the doubly robust formula.
struct ArmTerms {
    std::vector<std::vector<double>> t1;
    std::vector<std::vector<double>> t0;
};

ArmTerms dr_arm_terms(std::span<const Subject> subjects, const OutcomeFit& outcome,
                      const PropensityFit& propensity) {
    ArmTerms terms;
    terms.t1.reserve(subjects.size());
    terms.t0.reserve(subjects.size());
    const std::size_t m = outcome.grid.size();
    for (const auto& s : subjects) {
        const double pi = predict_propensity(propensity, s.covariates);
        const std::vector<double> m1 = predict_outcome(outcome, 1, s.covariates);
        const std::vector<double> m0 = predict_outcome(outcome, 0, s.covariates);
        const std::vector<double>& z = s.lifted.values();
        const double a = static_cast<double>(s.treatment);
        std::vector<double> t1(m), t0(m);
        for (std::size_t j = 0; j < m; ++j) {
            t1[j] = a * (z[j] - m1[j]) / pi + m1[j];
            t0[j] = (1.0 - a) * (z[j] - m0[j]) / (1.0 - pi) + m0[j];
        }
        terms.t1.push_back(std::move(t1));
        terms.t0.push_back(std::move(t0));
    }
    return terms;
}

}  // namespace

std::string estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::outcome_regression: return "or";
        case EstimatorKind::ipw: return "ipw";
        case EstimatorKind::dr: return "dr";
        case EstimatorKind::crossfit: return "cf";
        case EstimatorKind::crossfit_median: return "cfmed";
    }
    throw InvalidArgument("estimator_name: unknown kind");
}

EstimatorKind parse_estimator(const std::string& name) {
    if (name == "or") return EstimatorKind::outcome_regression;
    if (name == "ipw") return EstimatorKind::ipw;
    if (name == "dr") return EstimatorKind::dr;
    if (name == "cf") return EstimatorKind::crossfit;
    if (name == "cfmed") return EstimatorKind::crossfit_median;
    throw InvalidArgument("unknown estimator '" + name + "'");
}

std::string reference_name(const ReferenceSpec& spec) {
    switch (spec.kind) {
        case ReferenceSpec::Kind::uniform: return "uniform";
        case ReferenceSpec::Kind::barycentre0: return "barycentre0";
        case ReferenceSpec::Kind::barycentre1: return "barycentre1";
        case ReferenceSpec::Kind::subject: return "subject:" + spec.subject_id;
        case ReferenceSpec::Kind::external: return "external";
    }
    throw InvalidArgument("reference_name: unknown kind");
}

FeatureMap build_features(FeatureKind kind, std::span<const Subject> subjects) {
    if (subjects.empty()) throw InsufficientData("build_features: no subjects");
    const std::size_t dim = subjects.front().covariates.size();
    switch (kind) {
        case FeatureKind::identity: return FeatureMap::identity(dim);
        case FeatureKind::square: return FeatureMap::square(dim);
        case FeatureKind::sine: return FeatureMap::sine(dim);
        case FeatureKind::bspline: {
            std::vector<std::vector<double>> rows;
            rows.reserve(subjects.size());
            for (const auto& s : subjects) rows.push_back(s.covariates);
            return FeatureMap::bspline(rows);
        }
    }
    throw InvalidArgument("build_features: unknown kind");
}

EffectEstimate estimate_or(std::span<const Subject> subjects, const OutcomeFit& outcome) {
    require_subjects(subjects, outcome.grid);
    std::vector<std::vector<double>> p1, p0;
    p1.reserve(subjects.size());
    p0.reserve(subjects.size());
    for (const auto& s : subjects) {
        p1.push_back(predict_outcome(outcome, 1, s.covariates));
        p0.push_back(predict_outcome(outcome, 0, s.covariates));
    }
    std::vector<double> mu1 = mean_curve(p1);
    std::vector<double> mu0 = mean_curve(p0);
    std::vector<double> effect = raw_difference(mu1, mu0);
    const auto [lo, hi] = outcome_bounds(subjects);
    return assemble(outcome.grid, std::move(effect), std::move(mu1), std::move(mu0), lo, hi,
                    ReferenceSpec{}, EstimatorKind::outcome_regression, subjects.size());
}

EffectEstimate estimate_ipw(std::span<const Subject> subjects, const PropensityFit& propensity) {
    if (subjects.empty()) throw InsufficientData("estimator: no subjects");
    const LevelGrid grid = subjects.front().lifted.grid();
    require_subjects(subjects, grid);
    const std::size_t m = grid.size();
    std::vector<std::vector<double>> w1, w0;
    w1.reserve(subjects.size());
    w0.reserve(subjects.size());
    for (const auto& s : subjects) {
        const double pi = predict_propensity(propensity, s.covariates);
        const std::vector<double>& z = s.lifted.values();
        const double a = static_cast<double>(s.treatment);
        std::vector<double> c1(m), c0(m);
        for (std::size_t j = 0; j < m; ++j) {
            c1[j] = a * z[j] / pi;
            c0[j] = (1.0 - a) * z[j] / (1.0 - pi);
        }
        w1.push_back(std::move(c1));
        w0.push_back(std::move(c0));
    }
    std::vector<double> mu1 = mean_curve(w1);
    std::vector<double> mu0 = mean_curve(w0);
    std::vector<double> effect = raw_difference(mu1, mu0);
    const auto [lo, hi] = outcome_bounds(subjects);
    return assemble(grid, std::move(effect), std::move(mu1), std::move(mu0), lo, hi,
                    ReferenceSpec{}, EstimatorKind::ipw, subjects.size());
}

EffectEstimate estimate_dr(std::span<const Subject> subjects, const OutcomeFit& outcome,
                           const PropensityFit& propensity) {
    require_subjects(subjects, outcome.grid);
    // The effect curve is the mean of the influence curves; computing
    // it as mu1 - mu0 instead would agree only up to round-off.
    std::vector<double> effect = mean_curve(influence_curves(subjects, outcome, propensity));
    ArmTerms terms = dr_arm_terms(subjects, outcome, propensity);
    std::vector<double> mu1 = mean_curve(terms.t1);
    std::vector<double> mu0 = mean_curve(terms.t0);
    const auto [lo, hi] = outcome_bounds(subjects);
    return assemble(outcome.grid, std::move(effect), std::move(mu1), std::move(mu0), lo, hi,
                    ReferenceSpec{}, EstimatorKind::dr, subjects.size());
}

FoldPlan make_fold_plan(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k == 0) throw InvalidArgument("make_fold_plan: k must be positive");
    if (n < k) throw InsufficientData("make_fold_plan: fewer subjects than folds");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng = Rng::stream(seed, kFoldStream);
    for (std::size_t i = n; i > 1; --i)
        std::swap(perm[i - 1], perm[rng.below(i)]);
    FoldPlan plan{k, std::vector<std::vector<std::size_t>>(k), seed};
    for (std::size_t p = 0; p < n; ++p) plan.folds[p % k].push_back(perm[p]);
    for (auto& fold : plan.folds) std::sort(fold.begin(), fold.end());
    return plan;
}

CfFit estimate_cf(std::span<const Subject> subjects, std::size_t k, const NuisanceConfig& config,
                  const ReferenceSpec& reference, std::uint64_t seed) {
    if (subjects.empty()) throw InsufficientData("estimate_cf: no subjects");
    const LevelGrid grid = subjects.front().lifted.grid();
    require_subjects(subjects, grid);
    const std::size_t n = subjects.size();
    const std::size_t m = grid.size();
    FoldPlan plan = make_fold_plan(n, k, seed);

    const bool estimated_ref = reference.kind == ReferenceSpec::Kind::barycentre0 ||
                               reference.kind == ReferenceSpec::Kind::barycentre1;
    const int ref_arm = reference.kind == ReferenceSpec::Kind::barycentre1 ? 1 : 0;
    const QuantileCurve common_ref = estimated_ref
                                         ? arm_barycentre(subjects, ref_arm)
                                         : fixed_reference(reference, subjects, grid);

    std::vector<double> acc_effect(m, 0.0), acc_mu1(m, 0.0), acc_mu0(m, 0.0);
    std::vector<std::vector<double>> all_influence(n);

    std::vector<Subject> training;
    std::vector<Subject> evaluation;
    std::vector<char> in_fold(n);
    for (std::size_t f = 0; f < k; ++f) {
        std::fill(in_fold.begin(), in_fold.end(), 0);
        for (std::size_t idx : plan.folds[f]) in_fold[idx] = 1;
        training.clear();
        evaluation.clear();
        // A single fold degenerates to training and evaluating on the
        // full sample.
        for (std::size_t i = 0; i < n; ++i) {
            if (!in_fold[i] || k == 1) training.push_back(subjects[i]);
            if (in_fold[i]) evaluation.push_back(subjects[i]);
        }
        bool has0 = false, has1 = false;
        for (const auto& s : training) (s.treatment == 1 ? has1 : has0) = true;
        if (!has0 || !has1)
            throw FoldDegenerate("estimate_cf: a training complement lost one arm");

        const FeatureMap ofm = build_features(config.outcome_features, training);
        const FeatureMap pfm = build_features(config.propensity_features, training);
        const double ridge =
            config.ridge_candidates.empty()
                ? config.ridge
                : select_ridge_cv(training, ofm, config.cv_folds, config.ridge_candidates);
        const OutcomeFit ofit = fit_outcome(training, ofm, ridge, config.joint_outcome);
        const PropensityFit pfit =
            fit_propensity(training, pfm, config.eps, config.propensity_ridge);

        std::vector<std::vector<double>> infl = influence_curves(evaluation, ofit, pfit);
        std::vector<double> fold_effect = mean_curve(infl);
        ArmTerms terms = dr_arm_terms(evaluation, ofit, pfit);
        std::vector<double> fold_mu1 = mean_curve(terms.t1);
        std::vector<double> fold_mu0 = mean_curve(terms.t0);

        const QuantileCurve fold_ref =
            estimated_ref ? arm_barycentre(training, ref_arm) : common_ref;
        fold_effect = pushforward_compose(fold_effect, fold_ref, common_ref);
        fold_mu1 = pushforward_compose(fold_mu1, fold_ref, common_ref);
        fold_mu0 = pushforward_compose(fold_mu0, fold_ref, common_ref);

        const double w =
            static_cast<double>(plan.folds[f].size()) / static_cast<double>(n);
        for (std::size_t j = 0; j < m; ++j) {
            acc_effect[j] += w * fold_effect[j];
            acc_mu1[j] += w * fold_mu1[j];
            acc_mu0[j] += w * fold_mu0[j];
        }
        for (std::size_t e = 0; e < plan.folds[f].size(); ++e)
            all_influence[plan.folds[f][e]] =
                pushforward_compose(infl[e], fold_ref, common_ref);
    }

    const auto [lo, hi] = outcome_bounds(subjects);
    EffectEstimate est = assemble(grid, std::move(acc_effect), std::move(acc_mu1),
                                  std::move(acc_mu0), lo, hi, reference,
                                  EstimatorKind::crossfit, n);
    CovKernel kernel = covariance_kernel(grid, all_influence);
    return CfFit{std::move(est), std::move(kernel)};
}

std::vector<double> pointwise_lower_median(std::span<const std::vector<double>> curves) {
    if (curves.empty()) throw InsufficientData("pointwise_lower_median: no curves");
    const std::size_t m = curves.front().size();
    const std::size_t reps = curves.size();
    std::vector<double> out(m);
    std::vector<double> column(reps);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t r = 0; r < reps; ++r) {
            if (curves[r].size() != m)
                throw GridMismatch("pointwise_lower_median: curves differ in length");
            column[r] = curves[r][j];
        }
        const auto nth = column.begin() + static_cast<std::ptrdiff_t>((reps + 1) / 2 - 1);
        std::nth_element(column.begin(), nth, column.end());
        out[j] = *nth;
    }
    return out;
}

CfMedianFit estimate_cf_median(std::span<const Subject> subjects, std::size_t k,
                               std::size_t reps, const NuisanceConfig& config,
                               const ReferenceSpec& reference, std::uint64_t seed) {
    if (reps == 0) throw InvalidArgument("estimate_cf_median: need at least one repetition");
    std::vector<CfFit> fits;
    fits.reserve(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        const std::uint64_t rep_seed = Rng::stream(seed, r + 1).next_u64();
        fits.push_back(estimate_cf(subjects, k, config, reference, rep_seed));
    }

    std::vector<std::vector<double>> effects, mu1s, mu0s;
    std::vector<CovKernel> kernels;
    effects.reserve(reps);
    mu1s.reserve(reps);
    mu0s.reserve(reps);
    kernels.reserve(reps);
    for (const auto& f : fits) {
        effects.push_back(f.estimate.effect);
        mu1s.push_back(f.estimate.mu1_raw);
        mu0s.push_back(f.estimate.mu0_raw);
        kernels.push_back(f.kernel);
    }
    std::vector<double> med_effect = pointwise_lower_median(effects);
    std::vector<double> med_mu1 = pointwise_lower_median(mu1s);
    std::vector<double> med_mu0 = pointwise_lower_median(mu0s);

    const auto [lo, hi] = outcome_bounds(subjects);
    const LevelGrid grid = fits.front().estimate.grid;
    CovKernel selected = cf_median_covariance(effects, kernels, med_effect);
    EffectEstimate est = assemble(grid, std::move(med_effect), std::move(med_mu1),
                                  std::move(med_mu0), lo, hi, reference,
                                  EstimatorKind::crossfit_median, subjects.size());
    return CfMedianFit{std::move(est), std::move(fits), std::move(selected)};
}

double effect_w2_norm(const EffectEstimate& estimate) {
    // Rebuilt from the raw barycentre curves so the result equals
    // w2_distance on them bit-for-bit for every estimator, including
    // those whose effect field is an influence mean.
    const std::vector<double> d = raw_difference(estimate.mu1_raw, estimate.mu0_raw);
    return grid_l2_norm(d, estimate.grid);
}

std::vector<std::pair<double, double>> render_effect_map(const EffectEstimate& estimate,
                                                         const QuantileCurve& reference) {
    if (reference.grid() != estimate.grid)
        throw GridMismatch("render_effect_map: reference grid differs");
    std::vector<std::pair<double, double>> out(estimate.grid.size());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = {reference.values()[j], estimate.effect[j]};
    return out;
}

CounterfactualCurve counterfactual_subject(const Subject& subject,
                                           const EffectEstimate& estimate) {
    if (subject.lifted.grid() != estimate.grid)
        throw GridMismatch("counterfactual_subject: grids differ");
    const std::size_t m = estimate.grid.size();
    const double sign = subject.treatment == 0 ? 1.0 : -1.0;
    std::vector<double> raw(m);
    for (std::size_t j = 0; j < m; ++j)
        raw[j] = subject.lifted.values()[j] + sign * estimate.effect[j];
    std::vector<double> v = isotonic_project(raw);
    bool clamped = false;
    for (auto& x : v) {
        const double c = std::clamp(x, subject.lifted.lo(), subject.lifted.hi());
        if (c != x) clamped = true;
        x = c;
    }
    return CounterfactualCurve{
        QuantileCurve(estimate.grid, std::move(v), subject.lifted.lo(), subject.lifted.hi()),
        clamped};
}

std::vector<std::pair<double, double>> population_transport_map(
    const EffectEstimate& estimate, std::span<const double> eval_points) {
    std::vector<std::pair<double, double>> out;
    out.reserve(eval_points.size());
    for (double s : eval_points) {
        if (s < estimate.mu0.lo() || s > estimate.mu0.hi())
            throw DomainViolation("population_transport_map: eval point outside mu0 bounds");
        const double u = cdf_eval(estimate.mu0, s);
        out.emplace_back(s, s + interp_at_level(estimate.grid, estimate.effect, u));
    }
    return out;
}

Band scb(const EffectEstimate& estimate, const CovKernel& kernel, double alpha,
         std::size_t draws, std::uint64_t seed) {
    return scb(estimate.effect, estimate.n, kernel, alpha, draws, seed);
}

NormTestResult norm_test(const EffectEstimate& estimate, const CovKernel& kernel, double alpha,
                         std::size_t draws, std::uint64_t seed) {
    const std::vector<double> d = raw_difference(estimate.mu1_raw, estimate.mu0_raw);
    return norm_test(d, estimate.n, kernel, alpha, draws, seed);
}

}  // namespace wcausal
