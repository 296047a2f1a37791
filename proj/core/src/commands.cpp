#include "wcausal/commands.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <span>
#include <utility>

#include "CLI11.hpp"
#include "json.hpp"
#include "wcausal/dataset.hpp"
#include "wcausal/rng.hpp"

namespace wcausal {

namespace {

using json = nlohmann::ordered_json;

// Band draws come from a dedicated stream so they never overlap the
// fold-plan randomness that already consumed the base seed.
constexpr std::uint64_t kBandStream = 0x73636221ull;

std::string read_file_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("cannot open '" + path + "'");
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

EstimatorKind parse_estimator_flag(const std::string& name) {
    try {
        return parse_estimator(name);
    } catch (const Error&) {
        throw UsageError("--estimator: unknown value '" + name + "'");
    }
}

FeatureKind parse_feature_flag(const std::string& name, const char* flag) {
    try {
        return parse_feature_kind(name);
    } catch (const Error&) {
        throw UsageError(std::string(flag) + ": unknown value '" + name + "'");
    }
}

// External reference file: {"grid": M, "values": [...], "lo": a, "hi": b}.
QuantileCurve read_reference_curve(const std::string& path) {
    const std::string text = read_file_text(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("reference file '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw SchemaError("reference file '" + path + "': expected an object");
    for (const auto& item : j.items()) {
        const std::string& k = item.key();
        if (k != "grid" && k != "values" && k != "lo" && k != "hi")
            throw SchemaError("reference file '" + path + "': unexpected field '" + k + "'");
    }
    if (!j.contains("grid") || !j["grid"].is_number_unsigned())
        throw SchemaError("reference file '" + path + "': 'grid' must be a positive integer");
    if (!j.contains("values") || !j["values"].is_array())
        throw SchemaError("reference file '" + path + "': 'values' must be an array");
    if (!j.contains("lo") || !j["lo"].is_number() || !j.contains("hi") || !j["hi"].is_number())
        throw SchemaError("reference file '" + path + "': 'lo' and 'hi' must be numbers");
    const std::size_t m = j["grid"].get<std::size_t>();
    std::vector<double> values;
    values.reserve(j["values"].size());
    for (const auto& v : j["values"]) {
        if (!v.is_number())
            throw SchemaError("reference file '" + path + "': 'values' must hold numbers");
        values.push_back(v.get<double>());
    }
    if (values.size() != m)
        throw SchemaError("reference file '" + path + "': 'values' length disagrees with 'grid'");
    try {
        return QuantileCurve(LevelGrid(m), std::move(values), j["lo"].get<double>(),
                             j["hi"].get<double>());
    } catch (const Error& e) {
        throw SchemaError("reference file '" + path + "': " + e.what());
    }
}

ReferenceSpec parse_reference_flag(const std::string& token) {
    if (token == "uniform") return ReferenceSpec{ReferenceSpec::Kind::uniform, {}, {}};
    if (token == "bary0") return ReferenceSpec{ReferenceSpec::Kind::barycentre0, {}, {}};
    if (token == "bary1") return ReferenceSpec{ReferenceSpec::Kind::barycentre1, {}, {}};
    if (token.rfind("subject:", 0) == 0) {
        const std::string id = token.substr(8);
        if (id.empty()) throw UsageError("--reference subject: needs an id");
        return ReferenceSpec{ReferenceSpec::Kind::subject, id, {}};
    }
    if (token.rfind("file:", 0) == 0) {
        const std::string path = token.substr(5);
        if (path.empty()) throw UsageError("--reference file: needs a path");
        return ReferenceSpec{ReferenceSpec::Kind::external, {}, read_reference_curve(path)};
    }
    throw UsageError("--reference: unknown value '" + token + "'");
}

const Subject* find_subject(std::span<const Subject> subjects, const std::string& id) {
    for (const auto& s : subjects)
        if (s.id == id) return &s;
    return nullptr;
}

QuantileCurve resolve_reference_curve(const ReferenceSpec& ref, std::span<const Subject> subjects,
                                      const EffectEstimate& est) {
    switch (ref.kind) {
        case ReferenceSpec::Kind::uniform:
            return QuantileCurve(est.grid, est.grid.levels(), 0.0, 1.0);
        case ReferenceSpec::Kind::barycentre0:
            return est.mu0;
        case ReferenceSpec::Kind::barycentre1:
            return est.mu1;
        case ReferenceSpec::Kind::subject: {
            const Subject* s = find_subject(subjects, ref.subject_id);
            if (!s) throw NotFound("subject '" + ref.subject_id + "' not found");
            return s->lifted;
        }
        case ReferenceSpec::Kind::external:
            if (ref.curve->grid() != est.grid)
                throw SchemaError("reference curve has " + std::to_string(ref.curve->size()) +
                                  " nodes but the analysis grid has " +
                                  std::to_string(est.grid.size()));
            return *ref.curve;
    }
    throw InvalidArgument("resolve_reference_curve: unknown kind");
}

std::string csv_sibling(const std::string& out) {
    const std::string suffix = ".json";
    if (out.size() >= suffix.size() &&
        out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0)
        return out.substr(0, out.size() - suffix.size()) + ".csv";
    return out + ".csv";
}

void validate_estimate_flags(const EstimateOptions& opt, EstimatorKind kind) {
    if (!(opt.lo < opt.hi)) throw UsageError("--bounds: LO must be below HI");
    if (opt.grid == 0) throw UsageError("--grid must be positive");
    if (opt.min_obs == 0) throw UsageError("--min-obs must be positive");
    if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
    if (opt.resamples == 0) throw UsageError("--resamples must be positive");
    const bool crossfit =
        kind == EstimatorKind::crossfit || kind == EstimatorKind::crossfit_median;
    if (opt.folds_explicit && !crossfit)
        throw UsageError("--folds requires --estimator cf or cfmed");
    if (crossfit && opt.folds < 2)
        throw UsageError("--estimator " + opt.estimator + " needs K >= 2 folds");
    if (opt.repeats_explicit && kind != EstimatorKind::crossfit_median)
        throw UsageError("--repeats requires --estimator cfmed");
    if (kind == EstimatorKind::crossfit_median && opt.repeats == 0)
        throw UsageError("--repeats must be positive");
    if (!opt.out.empty()) {
        // The JSON output gets a flat CSV written next to it; refuse
        // both paths before they can clobber the input data.
        std::error_code ec;
        const auto data = std::filesystem::weakly_canonical(opt.data, ec);
        if (!ec) {
            for (const std::string& produced : {opt.out, csv_sibling(opt.out)}) {
                std::error_code pec;
                if (std::filesystem::weakly_canonical(produced, pec) == data && !pec)
                    throw UsageError("--out '" + opt.out + "' would overwrite --data '" +
                                     opt.data + "'");
            }
        }
    }
}

ResultDocument run_estimate(const EstimateOptions& opt, bool with_counterfactual) {
    const auto t0 = std::chrono::steady_clock::now();
    const EstimatorKind kind = parse_estimator_flag(opt.estimator);
    validate_estimate_flags(opt, kind);
    const FeatureKind ps_kind = parse_feature_flag(opt.ps_features, "--ps-features");
    const FeatureKind or_kind = parse_feature_flag(opt.or_features, "--or-features");
    const ReferenceSpec ref = parse_reference_flag(opt.reference);

    DatasetOptions dopt;
    dopt.treatment_column = opt.treatment;
    dopt.covariate_columns = opt.covariates;
    dopt.lo = opt.lo;
    dopt.hi = opt.hi;
    dopt.min_obs = opt.min_obs;
    dopt.grid_size = opt.grid;
    Dataset ds = parse_dataset(opt.data, dopt);
    if (ds.quantile_mode && opt.grid_explicit && ds.grid_size != opt.grid)
        throw UsageError("--grid " + std::to_string(opt.grid) + " conflicts with the " +
                         std::to_string(ds.grid_size) + " quantile columns in '" + opt.data + "'");
    const LevelGrid grid(ds.grid_size);
    const std::span<const Subject> subjects(ds.subjects);
    const std::uint64_t band_seed = Rng::stream(opt.seed, kBandStream).next_u64();

    std::optional<EffectEstimate> est;
    std::optional<CovKernel> kernel;
    std::optional<BandRecord> band;
    std::vector<TestRecord> tests;

    switch (kind) {
        case EstimatorKind::outcome_regression: {
            const FeatureMap features = build_features(or_kind, subjects);
            const OutcomeFit fit = fit_outcome(subjects, features, 0.0, true);
            est = estimate_or(subjects, fit);
            const TreatmentCoefInference tci = treatment_coef_inference(subjects, fit);
            const boost::math::students_t_distribution<double> dist(tci.dof);
            const double tq = boost::math::quantile(dist, 1.0 - opt.alpha / 2.0);
            BandRecord rec;
            rec.style = "pointwise-per-level";
            rec.alpha = opt.alpha;
            rec.critical = tq;
            rec.n = est->n;
            rec.resamples = 0;
            rec.center = est->effect;
            rec.lower.resize(grid.size());
            rec.upper.resize(grid.size());
            for (std::size_t j = 0; j < grid.size(); ++j) {
                rec.lower[j] = est->effect[j] - tq * tci.se[j];
                rec.upper[j] = est->effect[j] + tq * tci.se[j];
            }
            band = std::move(rec);
            break;
        }
        case EstimatorKind::ipw: {
            const FeatureMap features = build_features(ps_kind, subjects);
            const PropensityFit fit = fit_propensity(subjects, features, 0.01, 0.0);
            est = estimate_ipw(subjects, fit);
            break;
        }
        case EstimatorKind::dr: {
            const FeatureMap ofeat = build_features(or_kind, subjects);
            const OutcomeFit ofit = fit_outcome(subjects, ofeat, 0.0, true);
            const FeatureMap pfeat = build_features(ps_kind, subjects);
            const PropensityFit pfit = fit_propensity(subjects, pfeat, 0.01, 0.0);
            est = estimate_dr(subjects, ofit, pfit);
            kernel = covariance_kernel(grid, influence_curves(subjects, ofit, pfit));
            break;
        }
        case EstimatorKind::crossfit: {
            NuisanceConfig ncfg;
            ncfg.outcome_features = or_kind;
            ncfg.propensity_features = ps_kind;
            CfFit fit = estimate_cf(subjects, opt.folds, ncfg, ref, opt.seed);
            est = std::move(fit.estimate);
            kernel = std::move(fit.kernel);
            break;
        }
        case EstimatorKind::crossfit_median: {
            NuisanceConfig ncfg;
            ncfg.outcome_features = or_kind;
            ncfg.propensity_features = ps_kind;
            CfMedianFit fit =
                estimate_cf_median(subjects, opt.folds, opt.repeats, ncfg, ref, opt.seed);
            est = std::move(fit.estimate);
            kernel = std::move(fit.selected);
            break;
        }
    }

    if (kernel) {
        const Band b = scb(*est, *kernel, opt.alpha, opt.resamples, band_seed);
        BandRecord rec;
        rec.style = "simultaneous";
        rec.alpha = b.alpha;
        rec.critical = b.critical;
        rec.n = b.n;
        rec.resamples = b.resamples;
        rec.center = b.center;
        rec.lower = b.lower;
        rec.upper = b.upper;
        band = std::move(rec);
        const NormTestResult nt = norm_test(*est, *kernel, opt.alpha, opt.resamples, band_seed);
        tests.push_back(TestRecord{"norm", nt.statistic, nt.critical, opt.alpha, nt.reject});
    }

    const QuantileCurve refcurve = resolve_reference_curve(ref, subjects, *est);
    const auto rendered = render_effect_map(*est, refcurve);

    ResultDocument doc;
    doc.config = RunConfigRecord{opt.data,       opt.treatment, opt.covariates, opt.lo,
                                 opt.hi,         opt.grid,      opt.estimator,  opt.folds,
                                 opt.repeats,    opt.reference, opt.ps_features, opt.or_features,
                                 opt.alpha,      opt.resamples, opt.seed,       opt.min_obs};
    doc.n = est->n;
    doc.grid = grid.size();
    doc.effect = est->effect;
    doc.mu1_raw = est->mu1_raw;
    doc.mu0_raw = est->mu0_raw;
    doc.mu1 = est->mu1.values();
    doc.mu0 = est->mu0.values();
    doc.reference = opt.reference;
    doc.reference_values.reserve(rendered.size());
    for (const auto& [t, effect] : rendered) {
        (void)effect;
        doc.reference_values.push_back(t);
    }
    doc.effect_norm = effect_w2_norm(*est);
    doc.band = std::move(band);
    doc.tests = std::move(tests);

    if (with_counterfactual) {
        const Subject* s = find_subject(subjects, opt.subject);
        if (!s) throw NotFound("subject '" + opt.subject + "' not found in '" + opt.data + "'");
        const CounterfactualCurve cc = counterfactual_subject(*s, *est);
        CounterfactualRecord rec;
        rec.subject = s->id;
        rec.observed_arm = s->treatment;
        rec.observed = s->lifted.values();
        rec.counterfactual = cc.curve.values();
        rec.clamped = cc.clamped;
        rec.transport.reserve(grid.size());
        double acc = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            rec.transport.push_back({rec.observed[j], rec.counterfactual[j]});
            acc += rec.counterfactual[j] - rec.observed[j];
        }
        rec.mean_shift = acc / static_cast<double>(grid.size());
        doc.counterfactuals.push_back(std::move(rec));
    }

    doc.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!opt.out.empty()) {
        write_result_json(doc, opt.out);
        write_result_csv(doc, csv_sibling(opt.out));
    }
    return doc;
}

std::uint64_t cfg_uint(const json& v, const std::string& where) {
    if (!v.is_number_unsigned())
        throw ConfigError(where + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string cfg_string(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where + ": expected a string");
    return v.get<std::string>();
}

}  // namespace

ResultDocument cmd_estimate(const EstimateOptions& options) {
    return run_estimate(options, false);
}

ResultDocument cmd_counterfactual(const EstimateOptions& options) {
    if (options.subject.empty()) throw UsageError("--subject is required");
    return run_estimate(options, true);
}

SimPlan read_sim_plan(const std::string& path) {
    const std::string text = read_file_text(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config '" + path + "': expected an object");
    for (const auto& item : j.items()) {
        const std::string& k = item.key();
        if (k != "n" && k != "k_obs" && k != "replicates" && k != "scenario" && k != "grid" &&
            k != "folds" && k != "repeats" && k != "seed" && k != "threads" && k != "cells")
            throw ConfigError("unknown field '" + k + "'");
    }
    SimPlan plan;
    if (j.contains("n")) plan.base.n = cfg_uint(j["n"], "n");
    if (j.contains("k_obs")) plan.base.k_obs = cfg_uint(j["k_obs"], "k_obs");
    if (j.contains("replicates")) plan.base.replicates = cfg_uint(j["replicates"], "replicates");
    if (j.contains("scenario")) {
        const std::string name = cfg_string(j["scenario"], "scenario");
        try {
            plan.base.scenario = parse_scenario(name);
        } catch (const Error&) {
            throw ConfigError("scenario: unknown value '" + name + "'");
        }
    }
    if (j.contains("grid")) plan.base.grid_size = cfg_uint(j["grid"], "grid");
    if (j.contains("folds")) plan.base.folds = cfg_uint(j["folds"], "folds");
    if (j.contains("repeats")) plan.base.repeats = cfg_uint(j["repeats"], "repeats");
    if (j.contains("seed")) plan.base.seed = cfg_uint(j["seed"], "seed");
    if (j.contains("threads"))
        plan.base.threads = static_cast<unsigned>(cfg_uint(j["threads"], "threads"));
    if (plan.base.n == 0) throw ConfigError("n: must be positive");
    if (plan.base.k_obs == 0) throw ConfigError("k_obs: must be positive");
    if (plan.base.replicates == 0) throw ConfigError("replicates: must be positive");
    if (plan.base.grid_size == 0) throw ConfigError("grid: must be positive");
    if (!j.contains("cells")) throw ConfigError("cells: required");
    const json& cells = j["cells"];
    if (!cells.is_array() || cells.empty())
        throw ConfigError("cells: expected a non-empty array");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const std::string where = "cells[" + std::to_string(i) + "]";
        const json& c = cells[i];
        if (!c.is_object()) throw ConfigError(where + ": expected an object");
        for (const auto& item : c.items()) {
            const std::string& k = item.key();
            if (k != "estimator" && k != "ps_spec" && k != "or_spec")
                throw ConfigError(where + ": unknown field '" + k + "'");
        }
        if (!c.contains("estimator")) throw ConfigError(where + ".estimator: required");
        if (!c.contains("ps_spec")) throw ConfigError(where + ".ps_spec: required");
        if (!c.contains("or_spec")) throw ConfigError(where + ".or_spec: required");
        SimCellSpec cell;
        const std::string ename = cfg_string(c["estimator"], where + ".estimator");
        try {
            cell.estimator = parse_estimator(ename);
        } catch (const Error&) {
            throw ConfigError(where + ".estimator: unknown value '" + ename + "'");
        }
        const std::string pname = cfg_string(c["ps_spec"], where + ".ps_spec");
        try {
            cell.ps_spec = parse_spec(pname);
        } catch (const Error&) {
            throw ConfigError(where + ".ps_spec: unknown value '" + pname + "'");
        }
        const std::string oname = cfg_string(c["or_spec"], where + ".or_spec");
        try {
            cell.or_spec = parse_spec(oname);
        } catch (const Error&) {
            throw ConfigError(where + ".or_spec: unknown value '" + oname + "'");
        }
        const bool crossfit = cell.estimator == EstimatorKind::crossfit ||
                              cell.estimator == EstimatorKind::crossfit_median;
        if (crossfit && plan.base.folds < 2)
            throw ConfigError(where + ": cross-fitting needs folds >= 2");
        plan.cells.push_back(cell);
    }
    return plan;
}

SimTableDocument run_sim_plan(const SimPlan& plan) {
    if (plan.cells.empty()) throw InvalidArgument("run_sim_plan: no cells");
    struct Group {
        SpecKind ps, outcome;
        std::vector<std::size_t> rows;
    };
    std::vector<Group> groups;
    for (std::size_t i = 0; i < plan.cells.size(); ++i) {
        const SimCellSpec& c = plan.cells[i];
        Group* hit = nullptr;
        for (auto& g : groups)
            if (g.ps == c.ps_spec && g.outcome == c.or_spec) hit = &g;
        if (!hit) {
            groups.push_back(Group{c.ps_spec, c.or_spec, {}});
            hit = &groups.back();
        }
        hit->rows.push_back(i);
    }
    std::vector<SimCellRecord> rows(plan.cells.size());
    for (const auto& g : groups) {
        SimConfig cfg = plan.base;
        cfg.ps_spec = g.ps;
        cfg.or_spec = g.outcome;
        cfg.estimators.clear();
        for (const std::size_t idx : g.rows) cfg.estimators.push_back(plan.cells[idx].estimator);
        const MCResult res = run_mc(cfg);
        for (std::size_t k = 0; k < g.rows.size(); ++k) {
            const MCCell& cell = res.cells[k];
            SimCellRecord& row = rows[g.rows[k]];
            row.estimator = estimator_name(cell.estimator);
            row.ps_spec = spec_name(g.ps);
            row.or_spec = spec_name(g.outcome);
            row.n = cfg.n;
            row.bias_mean = cell.bias_mean;
            row.bias_se = cell.bias_se;
            row.rmise_mean = cell.rmise_mean;
            row.rmise_se = cell.rmise_se;
            row.coverage = cell.coverage;
            row.used = cell.used;
            row.failed = cell.failed;
            row.first_error = cell.first_error;
        }
    }
    SimTableDocument doc;
    doc.n = plan.base.n;
    doc.k_obs = plan.base.k_obs;
    doc.replicates = plan.base.replicates;
    doc.grid = plan.base.grid_size;
    doc.folds = plan.base.folds;
    doc.repeats = plan.base.repeats;
    doc.scenario = scenario_name(plan.base.scenario);
    doc.seed = plan.base.seed;
    doc.rows = std::move(rows);
    return doc;
}

SimTableDocument cmd_simulate(const std::string& config_path, const std::string& out_dir) {
    const SimPlan plan = read_sim_plan(config_path);
    const SimTableDocument doc = run_sim_plan(plan);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create directory '" + out_dir + "': " + ec.message());
    write_sim_json(doc, out_dir + "/mc_table.json");
    write_sim_csv(doc, out_dir + "/mc_table.csv");
    return doc;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Distributional treatment effects for quantile-valued outcomes"};
    app.require_subcommand(1);

    EstimateOptions opt;
    std::vector<double> bounds;
    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--data", opt.data, "cohort CSV")->required();
        cmd->add_option("--treatment", opt.treatment, "treatment column name")->required();
        cmd->add_option("--covariates", opt.covariates, "covariate column names")
            ->required()
            ->delimiter(',');
        cmd->add_option("--bounds", bounds, "outcome bounds LO,HI")->required()->delimiter(',');
        cmd->add_option("--grid", opt.grid, "level grid size (default 201)");
        cmd->add_option("--estimator", opt.estimator, "or | ipw | dr | cf | cfmed (default dr)");
        cmd->add_option("--folds", opt.folds, "cross-fitting folds K (cf, cfmed)");
        cmd->add_option("--repeats", opt.repeats, "fold-plan repetitions R (cfmed)");
        cmd->add_option("--reference", opt.reference,
                        "uniform | bary0 | bary1 | subject:ID | file:PATH");
        cmd->add_option("--ps-features", opt.ps_features,
                        "propensity features: identity | square | sine | bspline");
        cmd->add_option("--or-features", opt.or_features,
                        "outcome features: identity | square | sine | bspline");
        cmd->add_option("--alpha", opt.alpha, "band / test level (default 0.05)");
        cmd->add_option("--resamples", opt.resamples, "band resampling draws (default 500)");
        cmd->add_option("--seed", opt.seed, "random seed (default 1)");
        cmd->add_option("--min-obs", opt.min_obs, "minimum observations per subject");
        cmd->add_option("--out", opt.out, "output JSON path (CSV lands next to it)")->required();
    };
    CLI::App* est = app.add_subcommand("estimate", "Estimate the distributional effect");
    add_common(est);
    CLI::App* cfc = app.add_subcommand("counterfactual",
                                       "Estimate, then derive one subject's counterfactual");
    add_common(cfc);
    cfc->add_option("--subject", opt.subject, "subject id")->required();
    std::string config_path, out_dir;
    CLI::App* sim = app.add_subcommand("simulate", "Run a Monte Carlo study from a config");
    sim->add_option("--config", config_path, "study config JSON")->required();
    sim->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) {
            cmd_simulate(config_path, out_dir);
            return 0;
        }
        CLI::App* active = est->parsed() ? est : cfc;
        if (bounds.size() != 2) throw UsageError("--bounds expects LO,HI");
        opt.lo = bounds[0];
        opt.hi = bounds[1];
        opt.grid_explicit = active->count("--grid") > 0;
        opt.folds_explicit = active->count("--folds") > 0;
        opt.repeats_explicit = active->count("--repeats") > 0;
        if (est->parsed())
            cmd_estimate(opt);
        else
            cmd_counterfactual(opt);
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const SeparationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const SingularDesign& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
}

}  // namespace wcausal
