#pragma once

#include <string>
#include <vector>

#include "wcausal/curve.hpp"

namespace wcausal {

// One observational unit: treatment label, covariates, and the
// subject's outcome distribution lifted onto the shared level grid.
// Raw observations are kept only when the caller wants them (individual
// transport maps); estimation reads the lifted curve.
struct Subject {
    std::string id;
    int treatment = 0;  // 0 or 1
    std::vector<double> covariates;
    QuantileCurve lifted;
    std::vector<double> observations;  // may be empty
};

}  // namespace wcausal
