#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wcausal/errors.hpp"

namespace wcausal {

enum class FeatureKind { identity, square, sine, bspline };

FeatureKind parse_feature_kind(const std::string& name);
std::string feature_kind_name(FeatureKind kind);

// Maps a covariate vector to a regression feature vector with a leading
// intercept. identity/square/sine transform each covariate elementwise;
// bspline expands each covariate in a clamped cubic B-spline basis with
// interior knots at covariate quantiles of the calibration data (first
// basis column dropped against the intercept).
class FeatureMap {
  public:
    static FeatureMap identity(std::size_t dim);
    static FeatureMap square(std::size_t dim);
    static FeatureMap sine(std::size_t dim);
    static FeatureMap bspline(const std::vector<std::vector<double>>& calibration_rows,
                              std::size_t interior_knots = 10, int degree = 3);

    FeatureKind kind() const { return kind_; }
    std::size_t in_dim() const { return in_dim_; }
    std::size_t out_dim() const { return out_dim_; }  // includes the intercept

    std::vector<double> operator()(std::span<const double> x) const;

  private:
    FeatureMap(FeatureKind kind, std::size_t in_dim, std::size_t out_dim)
        : kind_(kind), in_dim_(in_dim), out_dim_(out_dim) {}

    FeatureKind kind_;
    std::size_t in_dim_;
    std::size_t out_dim_;
    int degree_ = 3;
    std::vector<std::vector<double>> knots_;  // per-covariate clamped knot vectors
};

}  // namespace wcausal
