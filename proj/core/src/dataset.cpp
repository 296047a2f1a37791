#include "wcausal/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "wcausal/errors.hpp"
#include "wcausal/grid.hpp"

namespace wcausal {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

double parse_number(std::string_view field, const char* what, std::size_t line_no) {
    double v = 0.0;
    const char* last = field.data() + field.size();
    const auto res = std::from_chars(field.data(), last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw SchemaError("line " + std::to_string(line_no) + ": cannot parse " + what + " '" +
                          std::string(field) + "'");
    return v;
}

bool missing_field(std::string_view field) { return field.empty() || field == "NA"; }

int parse_treatment(std::string_view field, std::size_t line_no) {
    const double v = parse_number(field, "treatment", line_no);
    if (v == 0.0) return 0;
    if (v == 1.0) return 1;
    throw SchemaError("line " + std::to_string(line_no) + ": treatment must be 0 or 1, got '" +
                      std::string(field) + "'");
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                         const std::string& path) {
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == name) return j;
    throw SchemaError(path + ": missing column '" + name + "'");
}

// q_<digits> with a positive index; writes the index on success.
bool quantile_column(const std::string& name, std::size_t& k) {
    if (name.size() < 3 || name[0] != 'q' || name[1] != '_') return false;
    std::size_t v = 0;
    const char* last = name.data() + name.size();
    const auto res = std::from_chars(name.data() + 2, last, v);
    if (res.ec != std::errc() || res.ptr != last || v == 0) return false;
    k = v;
    return true;
}

struct RowGroup {
    std::string id;
    int treatment = 0;
    std::vector<double> covariates;
    std::vector<double> samples;
};

}  // namespace

Dataset parse_dataset(const std::string& path, const DatasetOptions& options) {
    if (!(options.lo < options.hi))
        throw InvalidArgument("parse_dataset: bounds must satisfy lo < hi");
    if (options.grid_size == 0) throw InvalidArgument("parse_dataset: grid_size must be positive");
    std::ifstream in(path);
    if (!in) throw NotFound("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path + ": empty file");
    strip_cr(line);
    const std::vector<std::string> header = split_csv(line);
    {
        std::unordered_set<std::string> seen;
        for (const auto& name : header)
            if (!seen.insert(name).second)
                throw SchemaError(path + ": duplicate column '" + name + "'");
    }

    std::vector<std::size_t> qcols;  // position of q_k at index k-1
    {
        std::vector<std::pair<std::size_t, std::size_t>> found;
        for (std::size_t j = 0; j < header.size(); ++j) {
            std::size_t k = 0;
            if (quantile_column(header[j], k)) found.emplace_back(k, j);
        }
        if (!found.empty()) {
            std::sort(found.begin(), found.end());
            for (std::size_t i = 0; i < found.size(); ++i)
                if (found[i].first != i + 1)
                    throw SchemaError(path + ": quantile columns must be q_1..q_M without gaps");
            qcols.reserve(found.size());
            for (const auto& [k, j] : found) qcols.push_back(j);
        }
    }

    const std::size_t sid = column_index(header, "subject_id", path);
    const std::size_t tcol = column_index(header, options.treatment_column, path);
    std::vector<std::size_t> ccols;
    ccols.reserve(options.covariate_columns.size());
    for (const auto& name : options.covariate_columns)
        ccols.push_back(column_index(header, name, path));

    Dataset ds;
    ds.file = path;
    ds.treatment_column = options.treatment_column;
    ds.covariate_columns = options.covariate_columns;
    ds.lo = options.lo;
    ds.hi = options.hi;
    ds.quantile_mode = !qcols.empty();
    ds.grid_size = ds.quantile_mode ? qcols.size() : options.grid_size;
    const LevelGrid grid(ds.grid_size);
    const std::size_t min_obs = std::max<std::size_t>(options.min_obs, 1);

    if (ds.quantile_mode) {
        std::unordered_set<std::string> seen_ids;
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            strip_cr(line);
            if (line.empty()) continue;
            const auto fields = split_csv(line);
            if (fields.size() != header.size())
                throw SchemaError("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " fields, got " +
                                  std::to_string(fields.size()));
            ++ds.rows_read;
            const std::string& id = fields[sid];
            if (id.empty())
                throw SchemaError("line " + std::to_string(line_no) + ": empty subject_id");
            if (!seen_ids.insert(id).second)
                throw SchemaError("line " + std::to_string(line_no) + ": duplicate subject '" +
                                  id + "'");
            if (missing_field(fields[tcol])) {
                ++ds.rows_missing_treatment;
                continue;
            }
            const int a = parse_treatment(fields[tcol], line_no);
            std::vector<double> cov(ccols.size());
            for (std::size_t c = 0; c < ccols.size(); ++c)
                cov[c] = parse_number(fields[ccols[c]], header[ccols[c]].c_str(), line_no);
            std::vector<double> values(qcols.size());
            for (std::size_t k = 0; k < qcols.size(); ++k)
                values[k] = parse_number(fields[qcols[k]], header[qcols[k]].c_str(), line_no);
            try {
                ds.subjects.push_back(Subject{
                    id, a, std::move(cov),
                    QuantileCurve(grid, std::move(values), options.lo, options.hi), {}});
            } catch (const Error& e) {
                throw SchemaError("subject '" + id + "': " + e.what());
            }
        }
        return ds;
    }

    const std::size_t vcol = column_index(header, "value", path);
    std::vector<RowGroup> groups;
    std::unordered_map<std::string, std::size_t> index;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != header.size())
            throw SchemaError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " fields, got " +
                              std::to_string(fields.size()));
        ++ds.rows_read;
        const std::string& id = fields[sid];
        if (id.empty()) throw SchemaError("line " + std::to_string(line_no) + ": empty subject_id");
        if (missing_field(fields[tcol])) {
            ++ds.rows_missing_treatment;
            continue;
        }
        const int a = parse_treatment(fields[tcol], line_no);
        std::vector<double> cov(ccols.size());
        for (std::size_t c = 0; c < ccols.size(); ++c)
            cov[c] = parse_number(fields[ccols[c]], header[ccols[c]].c_str(), line_no);
        const auto [it, fresh] = index.try_emplace(id, groups.size());
        if (fresh) {
            groups.push_back(RowGroup{id, a, std::move(cov), {}});
        } else {
            RowGroup& g = groups[it->second];
            if (g.treatment != a)
                throw SchemaError("subject '" + id + "': inconsistent treatment across rows");
            for (std::size_t c = 0; c < ccols.size(); ++c)
                if (g.covariates[c] != cov[c])
                    throw SchemaError("subject '" + id + "': inconsistent value in column '" +
                                      header[ccols[c]] + "'");
        }
        const double v = parse_number(fields[vcol], "value", line_no);
        if (!(v >= options.lo && v <= options.hi)) {
            ++ds.values_out_of_bounds;
            continue;
        }
        groups[it->second].samples.push_back(v);
    }

    for (auto& g : groups) {
        if (g.samples.size() < min_obs) {
            ++ds.subjects_excluded;
            continue;
        }
        QuantileCurve lifted = empirical_quantile(g.samples, grid, options.lo, options.hi);
        ds.subjects.push_back(Subject{std::move(g.id), g.treatment, std::move(g.covariates),
                                      std::move(lifted),
                                      options.keep_observations ? std::move(g.samples)
                                                                : std::vector<double>{}});
    }
    return ds;
}

}  // namespace wcausal
