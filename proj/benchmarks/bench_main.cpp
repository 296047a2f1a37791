#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include "wcausal/curve.hpp"
#include "wcausal/effects.hpp"
#include "wcausal/inference.hpp"
#include "wcausal/ot.hpp"
#include "wcausal/rng.hpp"
#include "wcausal/simlab.hpp"

namespace {

using namespace wcausal;

const SimulatedSample& shared_sample() {
    static const SimulatedSample sample =
        dgp_sample(200, 1001, Scenario::linear, 1, LevelGrid(201));
    return sample;
}

void bm_lift(benchmark::State& state) {
    const std::size_t k = static_cast<std::size_t>(state.range(0));
    Rng rng(7);
    std::vector<double> samples(k);
    for (auto& s : samples) s = rng.uniform01();
    const LevelGrid grid(201);
    for (auto _ : state) benchmark::DoNotOptimize(empirical_quantile(samples, grid, 0.0, 1.0));
}
BENCHMARK(bm_lift)->Arg(1001)->Arg(5000);

void bm_w2_distance(benchmark::State& state) {
    const SimulatedSample& sample = shared_sample();
    const QuantileCurve& a = sample.subjects[0].lifted;
    const QuantileCurve& b = sample.subjects[1].lifted;
    for (auto _ : state) benchmark::DoNotOptimize(w2_distance(a, b));
}
BENCHMARK(bm_w2_distance);

void bm_barycentre(benchmark::State& state) {
    const SimulatedSample& sample = shared_sample();
    std::vector<QuantileCurve> curves;
    curves.reserve(sample.subjects.size());
    for (const auto& s : sample.subjects) curves.push_back(s.lifted);
    for (auto _ : state) benchmark::DoNotOptimize(barycentre(curves));
}
BENCHMARK(bm_barycentre);

// Full single-sample pipeline: nuisance fits plus the estimate.
void bm_dr_pipeline(benchmark::State& state) {
    const SimulatedSample& sample = shared_sample();
    for (auto _ : state) {
        const FeatureMap features = build_features(FeatureKind::identity, sample.subjects);
        const OutcomeFit ofit = fit_outcome(sample.subjects, features, 0.0, true);
        const PropensityFit pfit = fit_propensity(sample.subjects, features, 0.01, 0.0);
        benchmark::DoNotOptimize(estimate_dr(sample.subjects, ofit, pfit));
    }
}
BENCHMARK(bm_dr_pipeline);

void bm_scb(benchmark::State& state) {
    const SimulatedSample& sample = shared_sample();
    const FeatureMap features = build_features(FeatureKind::identity, sample.subjects);
    const OutcomeFit ofit = fit_outcome(sample.subjects, features, 0.0, true);
    const PropensityFit pfit = fit_propensity(sample.subjects, features, 0.01, 0.0);
    const EffectEstimate est = estimate_dr(sample.subjects, ofit, pfit);
    const CovKernel kernel =
        covariance_kernel(est.grid, influence_curves(sample.subjects, ofit, pfit));
    for (auto _ : state) benchmark::DoNotOptimize(scb(est, kernel, 0.05, 500, 3));
}
BENCHMARK(bm_scb);

void bm_crossfit(benchmark::State& state) {
    const SimulatedSample& sample = shared_sample();
    const NuisanceConfig ncfg;
    const ReferenceSpec ref;
    for (auto _ : state)
        benchmark::DoNotOptimize(estimate_cf(sample.subjects, 5, ncfg, ref, 42));
}
BENCHMARK(bm_crossfit);

}  // namespace

BENCHMARK_MAIN();
