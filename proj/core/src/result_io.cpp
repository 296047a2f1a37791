#include "wcausal/result_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>

#include "json.hpp"
#include "wcausal/errors.hpp"
#include "wcausal/grid.hpp"

namespace wcausal {

namespace {

// Insertion-ordered so rewriting an unchanged document is byte-stable.
using json = nlohmann::ordered_json;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const json& need(const json& obj, const char* key, const char* where) {
    const auto it = obj.find(key);
    if (it == obj.end())
        throw SchemaError(std::string(where) + ": missing field '" + key + "'");
    return *it;
}

void check_fields(const json& obj, std::initializer_list<std::string_view> allowed,
                  const char* where) {
    if (!obj.is_object()) throw SchemaError(std::string(where) + ": expected an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const auto a : allowed)
            if (item.key() == a) {
                known = true;
                break;
            }
        if (!known)
            throw SchemaError(std::string(where) + ": unexpected field '" + item.key() + "'");
    }
}

double as_double(const json& v, const char* where) {
    if (!v.is_number()) throw SchemaError(std::string(where) + ": expected a number");
    return v.get<double>();
}

std::uint64_t as_uint(const json& v, const char* where) {
    if (!v.is_number_unsigned())
        throw SchemaError(std::string(where) + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

int as_int(const json& v, const char* where) {
    if (!v.is_number_integer() && !v.is_number_unsigned())
        throw SchemaError(std::string(where) + ": expected an integer");
    return v.get<int>();
}

bool as_bool(const json& v, const char* where) {
    if (!v.is_boolean()) throw SchemaError(std::string(where) + ": expected a boolean");
    return v.get<bool>();
}

std::string as_string(const json& v, const char* where) {
    if (!v.is_string()) throw SchemaError(std::string(where) + ": expected a string");
    return v.get<std::string>();
}

std::vector<double> as_double_vec(const json& v, const char* where) {
    if (!v.is_array()) throw SchemaError(std::string(where) + ": expected an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(as_double(e, where));
    return out;
}

std::vector<std::string> as_string_vec(const json& v, const char* where) {
    if (!v.is_array()) throw SchemaError(std::string(where) + ": expected an array");
    std::vector<std::string> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(as_string(e, where));
    return out;
}

json band_to_json(const BandRecord& b) {
    json j;
    j["style"] = b.style;
    j["alpha"] = b.alpha;
    j["critical"] = b.critical;
    j["n"] = b.n;
    j["resamples"] = b.resamples;
    j["center"] = b.center;
    j["lower"] = b.lower;
    j["upper"] = b.upper;
    return j;
}

BandRecord band_from_json(const json& j) {
    check_fields(j, {"style", "alpha", "critical", "n", "resamples", "center", "lower", "upper"},
                 "band");
    BandRecord b;
    b.style = as_string(need(j, "style", "band"), "band.style");
    b.alpha = as_double(need(j, "alpha", "band"), "band.alpha");
    b.critical = as_double(need(j, "critical", "band"), "band.critical");
    b.n = as_uint(need(j, "n", "band"), "band.n");
    b.resamples = as_uint(need(j, "resamples", "band"), "band.resamples");
    b.center = as_double_vec(need(j, "center", "band"), "band.center");
    b.lower = as_double_vec(need(j, "lower", "band"), "band.lower");
    b.upper = as_double_vec(need(j, "upper", "band"), "band.upper");
    return b;
}

json test_to_json(const TestRecord& t) {
    json j;
    j["name"] = t.name;
    j["statistic"] = t.statistic;
    j["critical"] = t.critical;
    j["alpha"] = t.alpha;
    j["reject"] = t.reject;
    return j;
}

TestRecord test_from_json(const json& j) {
    check_fields(j, {"name", "statistic", "critical", "alpha", "reject"}, "test");
    TestRecord t;
    t.name = as_string(need(j, "name", "test"), "test.name");
    t.statistic = as_double(need(j, "statistic", "test"), "test.statistic");
    t.critical = as_double(need(j, "critical", "test"), "test.critical");
    t.alpha = as_double(need(j, "alpha", "test"), "test.alpha");
    t.reject = as_bool(need(j, "reject", "test"), "test.reject");
    return t;
}

json counterfactual_to_json(const CounterfactualRecord& c) {
    json j;
    j["subject"] = c.subject;
    j["observed_arm"] = c.observed_arm;
    j["observed"] = c.observed;
    j["counterfactual"] = c.counterfactual;
    j["clamped"] = c.clamped;
    j["mean_shift"] = c.mean_shift;
    json tr = json::array();
    for (const auto& p : c.transport) tr.push_back(json::array({p[0], p[1]}));
    j["transport"] = std::move(tr);
    return j;
}

CounterfactualRecord counterfactual_from_json(const json& j) {
    check_fields(j,
                 {"subject", "observed_arm", "observed", "counterfactual", "clamped", "mean_shift",
                  "transport"},
                 "counterfactual");
    CounterfactualRecord c;
    c.subject = as_string(need(j, "subject", "counterfactual"), "counterfactual.subject");
    c.observed_arm = as_int(need(j, "observed_arm", "counterfactual"), "counterfactual.observed_arm");
    c.observed = as_double_vec(need(j, "observed", "counterfactual"), "counterfactual.observed");
    c.counterfactual =
        as_double_vec(need(j, "counterfactual", "counterfactual"), "counterfactual.counterfactual");
    c.clamped = as_bool(need(j, "clamped", "counterfactual"), "counterfactual.clamped");
    c.mean_shift = as_double(need(j, "mean_shift", "counterfactual"), "counterfactual.mean_shift");
    const json& tr = need(j, "transport", "counterfactual");
    if (!tr.is_array()) throw SchemaError("counterfactual.transport: expected an array");
    for (const auto& e : tr) {
        if (!e.is_array() || e.size() != 2)
            throw SchemaError("counterfactual.transport: expected pairs");
        c.transport.push_back({as_double(e[0], "counterfactual.transport"),
                               as_double(e[1], "counterfactual.transport")});
    }
    return c;
}

json config_to_json(const RunConfigRecord& c) {
    json j;
    j["data"] = c.data;
    j["treatment"] = c.treatment;
    j["covariates"] = c.covariates;
    j["bounds"] = json::array({c.lo, c.hi});
    j["grid"] = c.grid;
    j["estimator"] = c.estimator;
    j["folds"] = c.folds;
    j["repeats"] = c.repeats;
    j["reference"] = c.reference;
    j["ps_features"] = c.ps_features;
    j["or_features"] = c.or_features;
    j["alpha"] = c.alpha;
    j["resamples"] = c.resamples;
    j["seed"] = c.seed;
    j["min_obs"] = c.min_obs;
    return j;
}

RunConfigRecord config_from_json(const json& j) {
    check_fields(j,
                 {"data", "treatment", "covariates", "bounds", "grid", "estimator", "folds",
                  "repeats", "reference", "ps_features", "or_features", "alpha", "resamples",
                  "seed", "min_obs"},
                 "config");
    RunConfigRecord c;
    c.data = as_string(need(j, "data", "config"), "config.data");
    c.treatment = as_string(need(j, "treatment", "config"), "config.treatment");
    c.covariates = as_string_vec(need(j, "covariates", "config"), "config.covariates");
    const json& b = need(j, "bounds", "config");
    if (!b.is_array() || b.size() != 2)
        throw SchemaError("config.bounds: expected an array of two numbers");
    c.lo = as_double(b[0], "config.bounds");
    c.hi = as_double(b[1], "config.bounds");
    c.grid = as_uint(need(j, "grid", "config"), "config.grid");
    c.estimator = as_string(need(j, "estimator", "config"), "config.estimator");
    c.folds = as_uint(need(j, "folds", "config"), "config.folds");
    c.repeats = as_uint(need(j, "repeats", "config"), "config.repeats");
    c.reference = as_string(need(j, "reference", "config"), "config.reference");
    c.ps_features = as_string(need(j, "ps_features", "config"), "config.ps_features");
    c.or_features = as_string(need(j, "or_features", "config"), "config.or_features");
    c.alpha = as_double(need(j, "alpha", "config"), "config.alpha");
    c.resamples = as_uint(need(j, "resamples", "config"), "config.resamples");
    c.seed = as_uint(need(j, "seed", "config"), "config.seed");
    c.min_obs = as_uint(need(j, "min_obs", "config"), "config.min_obs");
    return c;
}

json sim_row_to_json(const SimCellRecord& r) {
    json j;
    j["estimator"] = r.estimator;
    j["ps_spec"] = r.ps_spec;
    j["or_spec"] = r.or_spec;
    j["n"] = r.n;
    if (r.bias_mean) j["bias_mean"] = *r.bias_mean;
    if (r.bias_se) j["bias_se"] = *r.bias_se;
    if (r.rmise_mean) j["rmise_mean"] = *r.rmise_mean;
    if (r.rmise_se) j["rmise_se"] = *r.rmise_se;
    if (r.coverage) j["coverage"] = *r.coverage;
    j["used"] = r.used;
    j["failed"] = r.failed;
    j["first_error"] = r.first_error;
    return j;
}

SimCellRecord sim_row_from_json(const json& j) {
    check_fields(j,
                 {"estimator", "ps_spec", "or_spec", "n", "bias_mean", "bias_se", "rmise_mean",
                  "rmise_se", "coverage", "used", "failed", "first_error"},
                 "row");
    SimCellRecord r;
    r.estimator = as_string(need(j, "estimator", "row"), "row.estimator");
    r.ps_spec = as_string(need(j, "ps_spec", "row"), "row.ps_spec");
    r.or_spec = as_string(need(j, "or_spec", "row"), "row.or_spec");
    r.n = as_uint(need(j, "n", "row"), "row.n");
    if (j.contains("bias_mean")) r.bias_mean = as_double(j["bias_mean"], "row.bias_mean");
    if (j.contains("bias_se")) r.bias_se = as_double(j["bias_se"], "row.bias_se");
    if (j.contains("rmise_mean")) r.rmise_mean = as_double(j["rmise_mean"], "row.rmise_mean");
    if (j.contains("rmise_se")) r.rmise_se = as_double(j["rmise_se"], "row.rmise_se");
    if (j.contains("coverage")) r.coverage = as_double(j["coverage"], "row.coverage");
    r.used = as_uint(need(j, "used", "row"), "row.used");
    r.failed = as_uint(need(j, "failed", "row"), "row.failed");
    r.first_error = as_string(need(j, "first_error", "row"), "row.first_error");
    return r;
}

json parse_strict(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

}  // namespace

bool equal_ignoring_timings(const ResultDocument& a, const ResultDocument& b) {
    ResultDocument x = a;
    ResultDocument y = b;
    x.elapsed_seconds = 0.0;
    y.elapsed_seconds = 0.0;
    return x == y;
}

void write_file_atomic(const std::string& path, std::string_view content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) throw Error("cannot write '" + tmp + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("write failed on '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
}

std::string result_to_json(const ResultDocument& doc) {
    json j;
    j["schema_version"] = doc.schema_version;
    j["config"] = config_to_json(doc.config);
    j["n"] = doc.n;
    j["grid"] = doc.grid;
    j["effect"] = doc.effect;
    j["mu1_raw"] = doc.mu1_raw;
    j["mu0_raw"] = doc.mu0_raw;
    j["mu1"] = doc.mu1;
    j["mu0"] = doc.mu0;
    j["reference"] = doc.reference;
    j["reference_values"] = doc.reference_values;
    j["effect_norm"] = doc.effect_norm;
    if (doc.band) j["band"] = band_to_json(*doc.band);
    json tests = json::array();
    for (const auto& t : doc.tests) tests.push_back(test_to_json(t));
    j["tests"] = std::move(tests);
    json cfs = json::array();
    for (const auto& c : doc.counterfactuals) cfs.push_back(counterfactual_to_json(c));
    j["counterfactuals"] = std::move(cfs);
    j["elapsed_seconds"] = doc.elapsed_seconds;
    return j.dump(2) + "\n";
}

ResultDocument result_from_json(const std::string& text) {
    const json j = parse_strict(text);
    check_fields(j,
                 {"schema_version", "config", "n", "grid", "effect", "mu1_raw", "mu0_raw", "mu1",
                  "mu0", "reference", "reference_values", "effect_norm", "band", "tests",
                  "counterfactuals", "elapsed_seconds"},
                 "document");
    ResultDocument doc;
    doc.schema_version = as_int(need(j, "schema_version", "document"), "schema_version");
    if (doc.schema_version != 1)
        throw SchemaError("unsupported schema_version " + std::to_string(doc.schema_version));
    doc.config = config_from_json(need(j, "config", "document"));
    doc.n = as_uint(need(j, "n", "document"), "n");
    doc.grid = as_uint(need(j, "grid", "document"), "grid");
    doc.effect = as_double_vec(need(j, "effect", "document"), "effect");
    doc.mu1_raw = as_double_vec(need(j, "mu1_raw", "document"), "mu1_raw");
    doc.mu0_raw = as_double_vec(need(j, "mu0_raw", "document"), "mu0_raw");
    doc.mu1 = as_double_vec(need(j, "mu1", "document"), "mu1");
    doc.mu0 = as_double_vec(need(j, "mu0", "document"), "mu0");
    doc.reference = as_string(need(j, "reference", "document"), "reference");
    doc.reference_values = as_double_vec(need(j, "reference_values", "document"), "reference_values");
    doc.effect_norm = as_double(need(j, "effect_norm", "document"), "effect_norm");
    if (j.contains("band")) doc.band = band_from_json(j["band"]);
    const json& tests = need(j, "tests", "document");
    if (!tests.is_array()) throw SchemaError("tests: expected an array");
    for (const auto& t : tests) doc.tests.push_back(test_from_json(t));
    const json& cfs = need(j, "counterfactuals", "document");
    if (!cfs.is_array()) throw SchemaError("counterfactuals: expected an array");
    for (const auto& c : cfs) doc.counterfactuals.push_back(counterfactual_from_json(c));
    doc.elapsed_seconds = as_double(need(j, "elapsed_seconds", "document"), "elapsed_seconds");
    return doc;
}

void write_result_json(const ResultDocument& doc, const std::string& path) {
    write_file_atomic(path, result_to_json(doc));
}

ResultDocument read_result_json(const std::string& path) {
    return result_from_json(read_file(path));
}

void write_result_csv(const ResultDocument& doc, const std::string& path) {
    if (doc.effect.size() != doc.grid || doc.reference_values.size() != doc.grid)
        throw InvalidArgument("write_result_csv: curve lengths disagree with the grid");
    if (doc.band && (doc.band->lower.size() != doc.grid || doc.band->upper.size() != doc.grid))
        throw InvalidArgument("write_result_csv: band lengths disagree with the grid");
    const LevelGrid grid(doc.grid);
    std::string out = "level,t,effect,lower,upper\n";
    for (std::size_t jn = 0; jn < doc.grid; ++jn) {
        out += fmt17(grid.level(jn));
        out += ',';
        out += fmt17(doc.reference_values[jn]);
        out += ',';
        out += fmt17(doc.effect[jn]);
        out += ',';
        if (doc.band) {
            out += fmt17(doc.band->lower[jn]);
            out += ',';
            out += fmt17(doc.band->upper[jn]);
        } else {
            out += ',';
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

std::string sim_to_json(const SimTableDocument& doc) {
    json j;
    j["schema_version"] = doc.schema_version;
    j["n"] = doc.n;
    j["k_obs"] = doc.k_obs;
    j["replicates"] = doc.replicates;
    j["grid"] = doc.grid;
    j["folds"] = doc.folds;
    j["repeats"] = doc.repeats;
    j["scenario"] = doc.scenario;
    j["seed"] = doc.seed;
    json rows = json::array();
    for (const auto& r : doc.rows) rows.push_back(sim_row_to_json(r));
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
}

SimTableDocument sim_from_json(const std::string& text) {
    const json j = parse_strict(text);
    check_fields(j,
                 {"schema_version", "n", "k_obs", "replicates", "grid", "folds", "repeats",
                  "scenario", "seed", "rows"},
                 "document");
    SimTableDocument doc;
    doc.schema_version = as_int(need(j, "schema_version", "document"), "schema_version");
    if (doc.schema_version != 1)
        throw SchemaError("unsupported schema_version " + std::to_string(doc.schema_version));
    doc.n = as_uint(need(j, "n", "document"), "n");
    doc.k_obs = as_uint(need(j, "k_obs", "document"), "k_obs");
    doc.replicates = as_uint(need(j, "replicates", "document"), "replicates");
    doc.grid = as_uint(need(j, "grid", "document"), "grid");
    doc.folds = as_uint(need(j, "folds", "document"), "folds");
    doc.repeats = as_uint(need(j, "repeats", "document"), "repeats");
    doc.scenario = as_string(need(j, "scenario", "document"), "scenario");
    doc.seed = as_uint(need(j, "seed", "document"), "seed");
    const json& rows = need(j, "rows", "document");
    if (!rows.is_array()) throw SchemaError("rows: expected an array");
    for (const auto& r : rows) doc.rows.push_back(sim_row_from_json(r));
    return doc;
}

void write_sim_json(const SimTableDocument& doc, const std::string& path) {
    write_file_atomic(path, sim_to_json(doc));
}

SimTableDocument read_sim_json(const std::string& path) {
    return sim_from_json(read_file(path));
}

void write_sim_csv(const SimTableDocument& doc, const std::string& path) {
    std::string out = "estimator,ps_spec,or_spec,n,bias100,bias_se100,rmise100,rmise_se100\n";
    const auto cell = [&](const std::optional<double>& v) {
        if (v) out += fmt17(*v * 100.0);
        out += ',';
    };
    for (const auto& r : doc.rows) {
        out += r.estimator;
        out += ',';
        out += r.ps_spec;
        out += ',';
        out += r.or_spec;
        out += ',';
        out += std::to_string(r.n);
        out += ',';
        cell(r.bias_mean);
        cell(r.bias_se);
        cell(r.rmise_mean);
        if (r.rmise_se) out += fmt17(*r.rmise_se * 100.0);
        out += '\n';
    }
    write_file_atomic(path, out);
}

}  // namespace wcausal
