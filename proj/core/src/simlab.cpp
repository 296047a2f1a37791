#include "wcausal/simlab.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <utility>

#include "wcausal/curve.hpp"
#include "wcausal/errors.hpp"
#include "wcausal/inference.hpp"
#include "wcausal/ot.hpp"
#include "wcausal/parallel.hpp"
#include "wcausal/rng.hpp"

namespace wcausal {

namespace {

constexpr double kPi = std::numbers::pi;

// Ridge grid and propensity penalty for the data-adaptive spline mode.
constexpr std::array<double, 3> kAdaptiveRidge = {1e-4, 1e-2, 1.0};
constexpr double kAdaptivePropensityRidge = 1e-3;

// Stream id separating band resampling from the data-generating draws
// of the same replicate.
constexpr std::uint64_t kBandStream = 0x73636221ull;

double expit(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// Composite Simpson rule on [-1, 1] with compensated summation. The
// integrands are analytic, so this panel count puts the truncation
// error far below double resolution; the compensation keeps the long
// sum from eating the gain back.
template <class F>
double simpson_unit(const F& f) {
    constexpr std::size_t intervals = std::size_t{1} << 16;
    const double h = 2.0 / static_cast<double>(intervals);
    double sum = 0.0;
    double comp = 0.0;
    auto add = [&](double v) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    };
    add(f(-1.0));
    add(f(1.0));
    for (std::size_t k = 1; k < intervals; ++k) {
        const double w = (k % 2 == 1) ? 4.0 : 2.0;
        add(w * f(-1.0 + h * static_cast<double>(k)));
    }
    return sum * h / 3.0;
}

double confounder_term(Scenario scenario, double x) {
    return scenario == Scenario::sine ? std::sin(kPi * x) : x;
}

FeatureKind spec_features(Scenario scenario, SpecKind spec) {
    switch (spec) {
        case SpecKind::correct:
            return scenario == Scenario::sine ? FeatureKind::sine : FeatureKind::identity;
        case SpecKind::square_misspecified:
            return FeatureKind::square;
        case SpecKind::adaptive:
            return FeatureKind::bspline;
    }
    throw InvalidArgument("spec_features: unknown specification");
}

void validate(const SimConfig& config) {
    if (config.n == 0 || config.k_obs == 0 || config.replicates == 0 || config.grid_size == 0)
        throw InvalidArgument("run_mc: all counts must be positive");
    if (config.estimators.empty()) throw InvalidArgument("run_mc: no estimators requested");
    for (EstimatorKind kind : config.estimators) {
        if (kind == EstimatorKind::crossfit || kind == EstimatorKind::crossfit_median) {
            if (config.folds == 0) throw InvalidArgument("run_mc: folds must be positive");
        }
        if (kind == EstimatorKind::crossfit_median && config.repeats == 0)
            throw InvalidArgument("run_mc: repeats must be positive");
    }
}

void summarize(const std::vector<double>& xs, std::optional<double>& mean,
               std::optional<double>& se) {
    if (xs.empty()) return;
    const double n = static_cast<double>(xs.size());
    const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    mean = m;
    if (xs.size() < 2) return;
    double ss = 0.0;
    for (double v : xs) ss += (v - m) * (v - m);
    se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

struct BandRequest {
    double alpha = 0.05;
    std::size_t draws = 0;
};

// Per-replicate slot: bias, rmise, band-covered flag for each cell.
struct RepRecord {
    std::vector<std::optional<std::array<double, 3>>> cells;
    std::vector<std::string> errors;
};

MCResult run_engine(const SimConfig& config, const std::optional<BandRequest>& band) {
    validate(config);
    const LevelGrid grid(config.grid_size);
    const std::vector<double> truth = true_effect(grid);
    const std::size_t ncells = config.estimators.size();
    // Without a band request, estimator failures are excluded per cell;
    // band experiments propagate them instead.
    const bool record_failures = !band.has_value();

    std::vector<RepRecord> records(config.replicates);

    auto one_replicate = [&](std::size_t r) {
        const std::uint64_t rep_seed = config.seed ^ static_cast<std::uint64_t>(r);
        const SimulatedSample sample =
            dgp_sample(config.n, config.k_obs, config.scenario, rep_seed, grid);
        const std::span<const Subject> subjects(sample.subjects);

        const FeatureKind or_kind = spec_features(config.scenario, config.or_spec);
        const FeatureKind ps_kind = spec_features(config.scenario, config.ps_spec);

        // Full-sample fits shared by the non-cross-fitted estimators,
        // built on first use so a cells list without them never fits.
        std::optional<OutcomeFit> ofit;
        std::optional<PropensityFit> pfit;
        auto outcome_fit = [&]() -> const OutcomeFit& {
            if (!ofit) {
                const FeatureMap features = build_features(or_kind, subjects);
                double ridge = 0.0;
                if (config.or_spec == SpecKind::adaptive)
                    ridge = select_ridge_cv(subjects, features, 5, kAdaptiveRidge);
                ofit = fit_outcome(subjects, features, ridge, true);
            }
            return *ofit;
        };
        auto propensity_fit = [&]() -> const PropensityFit& {
            if (!pfit) {
                const FeatureMap features = build_features(ps_kind, subjects);
                const double ridge =
                    config.ps_spec == SpecKind::adaptive ? kAdaptivePropensityRidge : 0.0;
                pfit = fit_propensity(subjects, features, 0.01, ridge);
            }
            return *pfit;
        };

        NuisanceConfig nuisance;
        nuisance.outcome_features = or_kind;
        nuisance.propensity_features = ps_kind;
        if (config.or_spec == SpecKind::adaptive)
            nuisance.ridge_candidates.assign(kAdaptiveRidge.begin(), kAdaptiveRidge.end());
        if (config.ps_spec == SpecKind::adaptive)
            nuisance.propensity_ridge = kAdaptivePropensityRidge;

        const ReferenceSpec reference{ReferenceSpec::Kind::barycentre0, {}, {}};

        RepRecord& rec = records[r];
        rec.cells.resize(ncells);
        rec.errors.resize(ncells);
        for (std::size_t c = 0; c < ncells; ++c) {
            const EstimatorKind kind = config.estimators[c];
            auto evaluate = [&]() {
                std::optional<EffectEstimate> estimate;
                std::optional<CovKernel> kernel;
                switch (kind) {
                    case EstimatorKind::outcome_regression:
                        estimate = estimate_or(subjects, outcome_fit());
                        break;
                    case EstimatorKind::ipw:
                        estimate = estimate_ipw(subjects, propensity_fit());
                        break;
                    case EstimatorKind::dr:
                        estimate = estimate_dr(subjects, outcome_fit(), propensity_fit());
                        if (band)
                            kernel = covariance_kernel(
                                grid, influence_curves(subjects, outcome_fit(), propensity_fit()));
                        break;
                    case EstimatorKind::crossfit: {
                        CfFit fit = estimate_cf(subjects, config.folds, nuisance, reference,
                                                rep_seed);
                        if (band) kernel = std::move(fit.kernel);
                        estimate = std::move(fit.estimate);
                        break;
                    }
                    case EstimatorKind::crossfit_median: {
                        CfMedianFit fit = estimate_cf_median(subjects, config.folds,
                                                             config.repeats, nuisance, reference,
                                                             rep_seed);
                        if (band) kernel = std::move(fit.selected);
                        estimate = std::move(fit.estimate);
                        break;
                    }
                }
                std::array<double, 3> row{metric_bias_median(*estimate), metric_rmise(*estimate),
                                          0.0};
                if (band) {
                    const std::uint64_t band_seed = Rng::stream(rep_seed, kBandStream).next_u64();
                    const Band b = scb(*estimate, *kernel, band->alpha, band->draws, band_seed);
                    bool covered = true;
                    for (std::size_t j = 0; j < truth.size() && covered; ++j)
                        covered = b.lower[j] <= truth[j] && truth[j] <= b.upper[j];
                    row[2] = covered ? 1.0 : 0.0;
                }
                rec.cells[c] = row;
            };
            if (record_failures) {
                try {
                    evaluate();
                } catch (const Error& e) {
                    rec.errors[c] = e.what();
                }
            } else {
                evaluate();
            }
        }
    };

    parallel_for(config.replicates, config.threads, one_replicate);

    MCResult out;
    out.config = config;
    out.cells.resize(ncells);
    for (std::size_t c = 0; c < ncells; ++c) {
        MCCell& cell = out.cells[c];
        cell.estimator = config.estimators[c];
        std::vector<double> bias;
        std::vector<double> rmise;
        double covered = 0.0;
        for (std::size_t r = 0; r < config.replicates; ++r) {
            const auto& slot = records[r].cells[c];
            if (slot) {
                bias.push_back((*slot)[0]);
                rmise.push_back((*slot)[1]);
                covered += (*slot)[2];
            } else {
                ++cell.failed;
                if (cell.first_error.empty()) cell.first_error = records[r].errors[c];
            }
        }
        cell.used = bias.size();
        summarize(bias, cell.bias_mean, cell.bias_se);
        summarize(rmise, cell.rmise_mean, cell.rmise_se);
        if (band && cell.used > 0) cell.coverage = covered / static_cast<double>(cell.used);
    }
    return out;
}

}  // namespace

Scenario parse_scenario(const std::string& name) {
    if (name == "linear") return Scenario::linear;
    if (name == "sine") return Scenario::sine;
    throw InvalidArgument("parse_scenario: unknown scenario '" + name + "'");
}

std::string scenario_name(Scenario scenario) {
    return scenario == Scenario::sine ? "sine" : "linear";
}

SpecKind parse_spec(const std::string& name) {
    if (name == "correct") return SpecKind::correct;
    if (name == "square" || name == "square-misspecified") return SpecKind::square_misspecified;
    if (name == "adaptive") return SpecKind::adaptive;
    throw InvalidArgument("parse_spec: unknown specification '" + name + "'");
}

std::string spec_name(SpecKind spec) {
    switch (spec) {
        case SpecKind::correct: return "correct";
        case SpecKind::square_misspecified: return "square";
        case SpecKind::adaptive: return "adaptive";
    }
    throw InvalidArgument("spec_name: unknown specification");
}

double expected_treatment(Scenario scenario) {
    static const double linear =
        simpson_unit([](double x) { return expit(1.0 + x) / 2.0; });
    static const double sine =
        simpson_unit([](double x) { return expit(1.0 + std::sin(kPi * x)) / 2.0; });
    return scenario == Scenario::sine ? sine : linear;
}

SimulatedSample dgp_sample(std::size_t n, std::size_t k_obs, Scenario scenario,
                           std::uint64_t seed, const LevelGrid& grid) {
    if (n == 0 || k_obs == 0) throw InvalidArgument("dgp_sample: n and k_obs must be positive");
    const double ea = expected_treatment(scenario);

    SimulatedSample out;
    out.scenario = scenario;
    out.mean_treatment = ea;
    out.subjects.reserve(n);
    out.x.reserve(n);
    out.a.reserve(n);
    out.eps.reserve(n);

    Rng rng(seed);
    std::vector<double> draws(k_obs);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.uniform(-1.0, 1.0);
        const double term = confounder_term(scenario, x);
        const int a = rng.bernoulli(expit(1.0 + term)) ? 1 : 0;
        const double eps = rng.uniform(-0.5, 0.5);
        // |slope| < 1/pi, so every generated quantile function is
        // strictly increasing and stays inside [0, 1].
        const double slope = (static_cast<double>(a) - ea + term + eps) / 8.0;
        for (std::size_t t = 0; t < k_obs; ++t) {
            const double u = rng.uniform01();
            draws[t] = slope * std::sin(kPi * u) + u;
        }
        out.subjects.push_back(Subject{"s" + std::to_string(i + 1), a, {x},
                                       empirical_quantile(draws, grid, 0.0, 1.0), {}});
        out.x.push_back(x);
        out.a.push_back(a);
        out.eps.push_back(eps);
    }
    return out;
}

double potential_quantile(const SimulatedSample& sample, std::size_t i, int arm, double u) {
    if (i >= sample.x.size()) throw InvalidArgument("potential_quantile: subject index out of range");
    if (arm != 0 && arm != 1) throw InvalidArgument("potential_quantile: arm must be 0 or 1");
    const double term = confounder_term(sample.scenario, sample.x[i]);
    const double slope = (static_cast<double>(arm) - sample.mean_treatment + term + sample.eps[i]) / 8.0;
    return slope * std::sin(kPi * u) + u;
}

QuantileCurve potential_curve(const SimulatedSample& sample, std::size_t i, int arm,
                              const LevelGrid& grid) {
    std::vector<double> values(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j)
        values[j] = potential_quantile(sample, i, arm, grid.level(j));
    return QuantileCurve(grid, std::move(values), 0.0, 1.0);
}

std::vector<double> true_effect(const LevelGrid& grid) {
    std::vector<double> values(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) values[j] = std::sin(kPi * grid.level(j)) / 8.0;
    return values;
}

std::vector<double> mean_potential_difference(std::span<const QuantileCurve> treated,
                                              std::span<const QuantileCurve> control) {
    if (treated.empty()) throw InsufficientData("mean_potential_difference: no curve pairs");
    if (treated.size() != control.size())
        throw InvalidArgument("mean_potential_difference: arm counts differ");
    const LevelGrid& grid = treated[0].grid();
    for (std::size_t i = 0; i < treated.size(); ++i) {
        if (treated[i].grid() != grid || control[i].grid() != grid)
            throw GridMismatch("mean_potential_difference: curves on different grids");
    }
    std::vector<double> acc(grid.size(), 0.0);
    for (std::size_t i = 0; i < treated.size(); ++i) {
        const auto& t = treated[i].values();
        const auto& c = control[i].values();
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += t[j] - c[j];
    }
    const double n = static_cast<double>(treated.size());
    for (double& v : acc) v /= n;
    return acc;
}

double metric_bias_median(const EffectEstimate& estimate) {
    return interp_at_level(estimate.grid, estimate.effect, 0.5) - 0.125;
}

double metric_rmise(const EffectEstimate& estimate) {
    const std::vector<double> truth = true_effect(estimate.grid);
    std::vector<double> diff(truth.size());
    for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = estimate.effect[j] - truth[j];
    return grid_l2_norm(diff, estimate.grid);
}

MCResult run_mc(const SimConfig& config) { return run_engine(config, std::nullopt); }

MCResult coverage_experiment(const SimConfig& config, double alpha, std::size_t draws) {
    if (config.ps_spec != SpecKind::correct || config.or_spec != SpecKind::correct)
        throw InvalidArgument("coverage_experiment: both nuisance specifications must be correct");
    for (EstimatorKind kind : config.estimators) {
        if (kind == EstimatorKind::outcome_regression || kind == EstimatorKind::ipw)
            throw InvalidArgument("coverage_experiment: " + estimator_name(kind) +
                                  " has no influence-based band");
    }
    if (draws == 0) throw InvalidArgument("coverage_experiment: need at least one resample");
    return run_engine(config, BandRequest{alpha, draws});
}

Fixture fixture_nhanes_like(std::size_t n, std::uint64_t seed, double shift) {
    // Bounds tolerance for the shift keeps every intensity inside
    // [1, 1000]: base range is [37.5, 972.5] before the shift.
    if (!(shift >= -36.0 && shift <= 27.0))
        throw InvalidArgument("fixture_nhanes_like: shift outside [-36, 27]");
    Fixture out;
    out.shift = shift;
    out.subjects.reserve(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        FixtureSubject s;
        s.id = "p" + std::to_string(i + 1);
        s.age = rng.uniform(20.0, 70.0);
        s.gender = rng.bernoulli(0.5) ? 1 : 0;
        const double p = expit(0.8 - 0.03 * (s.age - 45.0) + 0.4 * static_cast<double>(s.gender));
        s.exposure = rng.bernoulli(p) ? 1 : 0;
        const std::size_t count = 100 + static_cast<std::size_t>(rng.below(4901));
        const double base = 60.0 + shift * static_cast<double>(s.exposure) +
                            0.3 * (s.age - 45.0) + 10.0 * static_cast<double>(s.gender) +
                            rng.uniform(-15.0, 15.0);
        s.samples.resize(count);
        for (std::size_t t = 0; t < count; ++t)
            s.samples[t] = base + 880.0 * std::pow(rng.uniform01(), 1.7);
        out.subjects.push_back(std::move(s));
    }
    return out;
}

std::vector<Subject> fixture_subjects(const Fixture& fixture, const LevelGrid& grid) {
    std::vector<Subject> out;
    out.reserve(fixture.subjects.size());
    for (const FixtureSubject& s : fixture.subjects) {
        out.push_back(Subject{s.id, s.exposure,
                              {s.age, static_cast<double>(s.gender)},
                              empirical_quantile(s.samples, grid, fixture.lo, fixture.hi),
                              {}});
    }
    return out;
}

void write_fixture_csv(const Fixture& fixture, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp + "'");
        out.precision(17);
        out << "subject_id,exposure,age,gender,value\n";
        for (const FixtureSubject& s : fixture.subjects) {
            for (const double v : s.samples)
                out << s.id << ',' << s.exposure << ',' << s.age << ',' << s.gender << ',' << v
                    << '\n';
        }
        if (!out) throw Error("write failed on '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
}

}  // namespace wcausal
