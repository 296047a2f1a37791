#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wcausal/subject.hpp"

namespace wcausal {

// Column selection and screening rules for a cohort CSV read. The
// subject identifier column is always "subject_id"; the outcome column
// in long format is always "value".
struct DatasetOptions {
    std::string treatment_column;
    std::vector<std::string> covariate_columns;
    double lo = 0.0;
    double hi = 1.0;
    std::size_t min_obs = 1;
    std::size_t grid_size = 201;
    bool keep_observations = false;  // retain raw samples on each subject
};

// Parsed cohort plus provenance counts for every screening step.
struct Dataset {
    std::vector<Subject> subjects;
    std::string file;
    std::string treatment_column;
    std::vector<std::string> covariate_columns;
    double lo = 0.0;
    double hi = 1.0;
    std::size_t grid_size = 0;
    bool quantile_mode = false;
    std::size_t rows_read = 0;  // data rows seen, header excluded
    std::size_t rows_missing_treatment = 0;
    std::size_t values_out_of_bounds = 0;
    std::size_t subjects_excluded = 0;  // fell below min_obs after screening
};

// Two layouts share one entry point, told apart by the header.
//
// Long format: one observation per row, columns subject_id, the
// treatment column, the covariate columns, value (order free, extras
// rejected by name only when referenced). Rows with an empty or "NA"
// treatment are dropped and counted; values outside [lo, hi] are
// dropped and counted; subjects left with fewer than min_obs
// observations are excluded and counted. Each surviving subject is
// lifted onto a grid of grid_size levels.
//
// Precomputed-quantile format: detected by columns q_1..q_M, one row
// per subject carrying the quantile curve directly; grid_size is then
// M regardless of the option. Curves violating monotonicity or the
// bounds are schema errors, not droppable rows.
//
// Inconsistent treatment or covariates within a subject, a non-binary
// treatment value, a missing column, or an unparseable number raise
// SchemaError; an unreadable file raises NotFound.
Dataset parse_dataset(const std::string& path, const DatasetOptions& options);

}  // namespace wcausal
