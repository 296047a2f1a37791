#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wcausal/effects.hpp"
#include "wcausal/grid.hpp"
#include "wcausal/subject.hpp"

namespace wcausal {

// Synthetic designs for the Monte Carlo studies: the confounder enters
// the treatment and outcome models either linearly or through sin(pi x).
enum class Scenario { linear, sine };

Scenario parse_scenario(const std::string& name);
std::string scenario_name(Scenario scenario);

// How a nuisance model is specified relative to the generating process:
// the correct single-index form, the square-misspecified form (x^2 in
// place of the true term), or the data-adaptive spline fit.
enum class SpecKind { correct, square_misspecified, adaptive };

SpecKind parse_spec(const std::string& name);
std::string spec_name(SpecKind spec);

// Treatment prevalence E(A) of a scenario. The generating quantile
// function centers the treatment indicator at this constant; it is
// computed once by quadrature so every replicate shares one value
// instead of plugging in a sample mean.
double expected_treatment(Scenario scenario);

// One simulated data set plus the oracle quantities estimation never
// sees: the raw confounder, treatment, and noise draws, and through
// them both potential quantile curves of every subject.
struct SimulatedSample {
    std::vector<Subject> subjects;
    std::vector<double> x;
    std::vector<int> a;
    std::vector<double> eps;
    Scenario scenario = Scenario::linear;
    double mean_treatment = 0.0;
};

// Draws n subjects: X ~ U[-1,1], A | X ~ Bernoulli(expit(1 + x~)),
// eps ~ U[-0.5,0.5], then k_obs observations by inverse transform from
// Y^{-1}(u) = (A - E(A) + x~ + eps) sin(pi u)/8 + u, where x~ is X or
// sin(pi X) by scenario. Every such Y^{-1} is strictly increasing with
// Y^{-1}(0) = 0 and Y^{-1}(1) = 1. Lifted curves are the empirical
// quantiles of the draws on `grid` with outcome bounds [0, 1]; raw
// observations are not retained.
SimulatedSample dgp_sample(std::size_t n, std::size_t k_obs, Scenario scenario,
                           std::uint64_t seed, const LevelGrid& grid);

// Exact potential quantile of subject i at level u under arm `arm`,
// reconstructed from the stored draws.
double potential_quantile(const SimulatedSample& sample, std::size_t i, int arm, double u);

QuantileCurve potential_curve(const SimulatedSample& sample, std::size_t i, int arm,
                              const LevelGrid& grid);

// The generating effect map sin(pi u)/8 at the grid nodes; identical in
// both scenarios because the treatment coefficient is one.
std::vector<double> true_effect(const LevelGrid& grid);

// Average of the individual effect maps: the pointwise mean of
// (treated minus control) potential curves. Equals the difference of
// the two arm barycentres at every node.
std::vector<double> mean_potential_difference(std::span<const QuantileCurve> treated,
                                              std::span<const QuantileCurve> control);

// Estimated effect interpolated at the median level, minus the true
// value 1/8.
double metric_bias_median(const EffectEstimate& estimate);

// Grid L2 distance between the estimated effect and the true map.
double metric_rmise(const EffectEstimate& estimate);

struct SimConfig {
    std::size_t n = 200;
    std::size_t k_obs = 1001;
    std::size_t replicates = 1000;
    Scenario scenario = Scenario::linear;
    SpecKind ps_spec = SpecKind::correct;
    SpecKind or_spec = SpecKind::correct;
    std::vector<EstimatorKind> estimators;
    std::size_t folds = 5;        // K in cross-fitting
    std::size_t repeats = 20;     // R in median cross-fitting
    std::size_t grid_size = 201;  // M
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0: all hardware threads
};

// One estimator's aggregate row. Means are over the replicates that
// completed and are absent when none did; standard errors are sample
// standard deviations over sqrt(completed), absent below two
// completions.
struct MCCell {
    EstimatorKind estimator = EstimatorKind::dr;
    std::optional<double> bias_mean;
    std::optional<double> bias_se;
    std::optional<double> rmise_mean;
    std::optional<double> rmise_se;
    std::optional<double> coverage;  // band experiments only
    std::size_t used = 0;
    std::size_t failed = 0;
    std::string first_error;  // message of the earliest failure, if any
};

struct MCResult {
    SimConfig config;
    std::vector<MCCell> cells;  // one per requested estimator, in request order
};

// Monte Carlo study of the requested estimators under one nuisance
// specification pair. Replicate r draws its data from seed xor r. The
// replicate work may run on several threads, but results land in
// per-replicate slots and are aggregated in replicate order, so the
// output is a pure function of the config. Estimator failures inside a
// replicate are counted per cell and excluded from the averages, never
// silently dropped.
MCResult run_mc(const SimConfig& config);

// Same replicate loop, but each estimate also gets its simultaneous
// band, and the cell records how often the band contains the true map
// at every node. Requires both specs correct and band-capable
// estimators (dr, cf, cfmed); failures propagate instead of being
// excluded.
MCResult coverage_experiment(const SimConfig& config, double alpha, std::size_t draws);

// Synthetic activity-intensity panel: binary exposure, age and gender
// covariates, and per-subject intensity samples on [1, 1000] whose
// distribution rises by `shift` units under exposure and with age and
// gender. Sample counts vary over [100, 5000].
struct FixtureSubject {
    std::string id;
    int exposure = 0;
    double age = 0.0;
    int gender = 0;
    std::vector<double> samples;
};

struct Fixture {
    std::vector<FixtureSubject> subjects;
    double shift = 0.0;
    double lo = 1.0;
    double hi = 1000.0;
};

Fixture fixture_nhanes_like(std::size_t n, std::uint64_t seed, double shift = 20.0);

// Lift a fixture into analysis-ready subjects with covariates
// (age, gender) and the fixture's outcome bounds.
std::vector<Subject> fixture_subjects(const Fixture& fixture, const LevelGrid& grid);

// Long-format CSV (subject_id, exposure, age, gender, value), one row
// per sample, written via a temporary file and rename.
void write_fixture_csv(const Fixture& fixture, const std::string& path);

}  // namespace wcausal
