#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wcausal {

// Confidence band attached to a result. style is "simultaneous" for
// resampled sup-norm bands and "pointwise-per-level" for the per-level
// t-intervals of the outcome-regression estimator, which cover one
// level at a time, not the whole curve.
struct BandRecord {
    std::string style;
    double alpha = 0.0;
    double critical = 0.0;
    std::size_t n = 0;
    std::size_t resamples = 0;
    std::vector<double> center;
    std::vector<double> lower;
    std::vector<double> upper;
    bool operator==(const BandRecord&) const = default;
};

struct TestRecord {
    std::string name;
    double statistic = 0.0;
    double critical = 0.0;
    double alpha = 0.0;
    bool reject = false;
    bool operator==(const TestRecord&) const = default;
};

// One subject's observed quantile curve, its counterfactual under the
// opposite arm, and the induced transport samples (observed value,
// counterfactual value) at the grid levels.
struct CounterfactualRecord {
    std::string subject;
    int observed_arm = 0;
    std::vector<double> observed;
    std::vector<double> counterfactual;
    bool clamped = false;
    double mean_shift = 0.0;
    std::vector<std::array<double, 2>> transport;
    bool operator==(const CounterfactualRecord&) const = default;
};

// Flag-for-flag echo of the run configuration, string values verbatim.
struct RunConfigRecord {
    std::string data;
    std::string treatment;
    std::vector<std::string> covariates;
    double lo = 0.0;
    double hi = 1.0;
    std::size_t grid = 201;
    std::string estimator;
    std::size_t folds = 5;
    std::size_t repeats = 20;
    std::string reference;
    std::string ps_features;
    std::string or_features;
    double alpha = 0.05;
    std::size_t resamples = 500;
    std::uint64_t seed = 1;
    std::size_t min_obs = 1;
    bool operator==(const RunConfigRecord&) const = default;
};

struct ResultDocument {
    int schema_version = 1;
    RunConfigRecord config;
    std::size_t n = 0;     // subjects used
    std::size_t grid = 0;  // level count
    std::vector<double> effect;
    std::vector<double> mu1_raw;
    std::vector<double> mu0_raw;
    std::vector<double> mu1;
    std::vector<double> mu0;
    std::string reference;
    std::vector<double> reference_values;  // outcome-axis anchor at each level
    double effect_norm = 0.0;
    std::optional<BandRecord> band;
    std::vector<TestRecord> tests;
    std::vector<CounterfactualRecord> counterfactuals;
    double elapsed_seconds = 0.0;
    bool operator==(const ResultDocument&) const = default;
};

// Equality with the timing field ignored; everything else must match
// exactly, numbers bit for bit.
bool equal_ignoring_timings(const ResultDocument& a, const ResultDocument& b);

// Writes content to a temporary sibling of path and renames it into
// place, so a reader never observes a half-written file.
void write_file_atomic(const std::string& path, std::string_view content);

// JSON serialization is strict both ways: the reader rejects unknown
// fields and version mismatches with SchemaError, and every number
// survives a write/read cycle bit for bit.
std::string result_to_json(const ResultDocument& doc);
ResultDocument result_from_json(const std::string& text);
void write_result_json(const ResultDocument& doc, const std::string& path);
ResultDocument read_result_json(const std::string& path);

// Plot-ready flat table with one row per level: level, t, effect,
// lower, upper. The band columns stay empty when there is no band.
void write_result_csv(const ResultDocument& doc, const std::string& path);

// One row of a Monte Carlo study table. Mean statistics are absent
// when every replicate of the cell failed; standard errors additionally
// need at least two survivors.
struct SimCellRecord {
    std::string estimator;
    std::string ps_spec;
    std::string or_spec;
    std::size_t n = 0;
    std::optional<double> bias_mean;
    std::optional<double> bias_se;
    std::optional<double> rmise_mean;
    std::optional<double> rmise_se;
    std::optional<double> coverage;
    std::size_t used = 0;
    std::size_t failed = 0;
    std::string first_error;
    bool operator==(const SimCellRecord&) const = default;
};

// Carries no timings on purpose: rerunning the same study must produce
// byte-identical files.
struct SimTableDocument {
    int schema_version = 1;
    std::size_t n = 0;
    std::size_t k_obs = 0;
    std::size_t replicates = 0;
    std::size_t grid = 0;
    std::size_t folds = 0;
    std::size_t repeats = 0;
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<SimCellRecord> rows;
    bool operator==(const SimTableDocument&) const = default;
};

std::string sim_to_json(const SimTableDocument& doc);
SimTableDocument sim_from_json(const std::string& text);
void write_sim_json(const SimTableDocument& doc, const std::string& path);
SimTableDocument read_sim_json(const std::string& path);

// Eight columns per row: estimator, ps_spec, or_spec, n, bias and its
// standard error, rmise and its standard error, the statistics scaled
// by 100. Absent statistics leave empty cells.
void write_sim_csv(const SimTableDocument& doc, const std::string& path);

}  // namespace wcausal
