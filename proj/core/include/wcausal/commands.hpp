#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wcausal/effects.hpp"
#include "wcausal/result_io.hpp"
#include "wcausal/simlab.hpp"

namespace wcausal {

// One fully resolved estimate or counterfactual invocation. String
// fields keep the flag spellings so the result document echoes them
// verbatim; the *_explicit flags distinguish a default from the same
// value typed out, which matters for flag-combination checks.
struct EstimateOptions {
    std::string data;
    std::string treatment;
    std::vector<std::string> covariates;
    double lo = 0.0;
    double hi = 1.0;
    std::size_t grid = 201;
    bool grid_explicit = false;
    std::string estimator = "dr";
    std::size_t folds = 5;
    bool folds_explicit = false;
    std::size_t repeats = 20;
    bool repeats_explicit = false;
    std::string reference = "uniform";
    std::string ps_features = "identity";
    std::string or_features = "identity";
    double alpha = 0.05;
    std::size_t resamples = 500;
    std::uint64_t seed = 1;
    std::size_t min_obs = 1;
    std::string out;      // JSON path; a flat CSV lands next to it
    std::string subject;  // counterfactual target, ignored by estimate
};

// Estimate the distributional effect from a cohort CSV and write the
// result document (JSON) plus a flat per-level CSV when `out` is set.
// Simultaneous bands and the norm test come with dr / cf / cfmed; the
// outcome-regression estimator gets per-level t-intervals instead, and
// ipw carries no band.
ResultDocument cmd_estimate(const EstimateOptions& options);

// Same pipeline, then the counterfactual curve, transport samples and
// implied mean shift for one subject.
ResultDocument cmd_counterfactual(const EstimateOptions& options);

// One study cell: estimator plus the two nuisance specifications.
struct SimCellSpec {
    EstimatorKind estimator = EstimatorKind::dr;
    SpecKind ps_spec = SpecKind::correct;
    SpecKind or_spec = SpecKind::correct;
};

// Base settings plus one entry per requested table row. The base
// `estimators` field is ignored; cells drive the runs.
struct SimPlan {
    SimConfig base;
    std::vector<SimCellSpec> cells;
};

// JSON study description: scalar fields n, k_obs, replicates, scenario,
// grid, folds, repeats, seed, threads (all optional, with the SimConfig
// defaults) and a required non-empty array `cells` of
// {estimator, ps_spec, or_spec}. Any problem raises ConfigError naming
// the offending field.
SimPlan read_sim_plan(const std::string& path);

// Runs the plan, grouping cells that share a nuisance-specification
// pair into a single Monte Carlo pass, and returns rows in cell order.
SimTableDocument run_sim_plan(const SimPlan& plan);

// read_sim_plan + run_sim_plan, then writes mc_table.json and
// mc_table.csv into out_dir (created if missing).
SimTableDocument cmd_simulate(const std::string& config_path, const std::string& out_dir);

// Full command-line front end: subcommands estimate, counterfactual,
// simulate. Exit codes: 0 success, 2 usage error, 3 data error,
// 4 numerical failure.
int run_cli(int argc, const char* const* argv);

}  // namespace wcausal
