#include "wcausal/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wcausal {

FeatureKind parse_feature_kind(const std::string& name) {
    if (name == "identity") return FeatureKind::identity;
    if (name == "square") return FeatureKind::square;
    if (name == "sine") return FeatureKind::sine;
    if (name == "bspline") return FeatureKind::bspline;
    throw InvalidArgument("unknown feature map '" + name + "'");
}

std::string feature_kind_name(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::identity: return "identity";
        case FeatureKind::square: return "square";
        case FeatureKind::sine: return "sine";
        case FeatureKind::bspline: return "bspline";
    }
    return "identity";
}

FeatureMap FeatureMap::identity(std::size_t dim) {
    return FeatureMap(FeatureKind::identity, dim, dim + 1);
}

FeatureMap FeatureMap::square(std::size_t dim) {
    return FeatureMap(FeatureKind::square, dim, dim + 1);
}

FeatureMap FeatureMap::sine(std::size_t dim) {
    return FeatureMap(FeatureKind::sine, dim, dim + 1);
}

FeatureMap FeatureMap::bspline(const std::vector<std::vector<double>>& calibration_rows,
                               std::size_t interior_knots, int degree) {
    if (calibration_rows.empty()) throw InsufficientData("FeatureMap::bspline: no calibration data");
    if (degree < 1) throw InvalidArgument("FeatureMap::bspline: degree must be positive");
    const std::size_t dim = calibration_rows.front().size();
    const std::size_t per_dim = interior_knots + static_cast<std::size_t>(degree);  // after drop
    FeatureMap fm(FeatureKind::bspline, dim, 1 + dim * per_dim);
    fm.degree_ = degree;
    for (std::size_t d = 0; d < dim; ++d) {
        std::vector<double> col;
        col.reserve(calibration_rows.size());
        for (const auto& row : calibration_rows) col.push_back(row[d]);
        std::sort(col.begin(), col.end());
        const double lo = col.front();
        const double hi = col.back();
        if (!(hi > lo))
            throw DomainViolation("FeatureMap::bspline: covariate has no spread");
        std::vector<double> knots;
        for (int r = 0; r <= degree; ++r) knots.push_back(lo);
        for (std::size_t q = 1; q <= interior_knots; ++q) {
            const double p = static_cast<double>(q) / static_cast<double>(interior_knots + 1);
            const double pos = p * static_cast<double>(col.size() - 1);
            const std::size_t i = static_cast<std::size_t>(pos);
            const double frac = pos - static_cast<double>(i);
            const double v = (i + 1 < col.size()) ? col[i] + frac * (col[i + 1] - col[i]) : col[i];
            knots.push_back(v);
        }
        for (int r = 0; r <= degree; ++r) knots.push_back(hi);
        fm.knots_.push_back(std::move(knots));
    }
    return fm;
}

namespace {

// Cox-de Boor evaluation of all basis functions at x for a clamped
// knot vector; the right boundary is closed so the last basis is 1 at
// the upper knot.
void bspline_row(const std::vector<double>& t, int degree, double x, std::vector<double>& out) {
    const std::size_t nb = t.size() - static_cast<std::size_t>(degree) - 1;
    out.assign(nb, 0.0);
    const double lo = t.front();
    const double hi = t.back();
    if (x < lo) x = lo;
    if (x > hi) x = hi;
    if (x == hi) {
        out[nb - 1] = 1.0;
        return;
    }
    // Degree-0 seed.
    std::vector<double> b(t.size() - 1, 0.0);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        if (t[i] <= x && x < t[i + 1]) b[i] = 1.0;
    }
    for (int d = 1; d <= degree; ++d) {
        for (std::size_t i = 0; i + static_cast<std::size_t>(d) + 1 < t.size(); ++i) {
            double left = 0.0, right = 0.0;
            const double den_l = t[i + static_cast<std::size_t>(d)] - t[i];
            if (den_l > 0.0) left = (x - t[i]) / den_l * b[i];
            const double den_r = t[i + static_cast<std::size_t>(d) + 1] - t[i + 1];
            if (den_r > 0.0) right = (t[i + static_cast<std::size_t>(d) + 1] - x) / den_r * b[i + 1];
            b[i] = left + right;
        }
    }
    for (std::size_t i = 0; i < nb; ++i) out[i] = b[i];
}

}  // namespace

std::vector<double> FeatureMap::operator()(std::span<const double> x) const {
    if (x.size() != in_dim_) throw InvalidArgument("FeatureMap: covariate dimension mismatch");
    std::vector<double> out;
    out.reserve(out_dim_);
    out.push_back(1.0);
    switch (kind_) {
        case FeatureKind::identity:
            for (double v : x) out.push_back(v);
            break;
        case FeatureKind::square:
            for (double v : x) out.push_back(v * v);
            break;
        case FeatureKind::sine:
            for (double v : x) out.push_back(std::sin(std::numbers::pi * v));
            break;
        case FeatureKind::bspline: {
            std::vector<double> row;
            for (std::size_t d = 0; d < in_dim_; ++d) {
                bspline_row(knots_[d], degree_, x[d], row);
                // first basis column absorbed by the intercept
                for (std::size_t i = 1; i < row.size(); ++i) out.push_back(row[i]);
            }
            break;
        }
    }
    return out;
}

}  // namespace wcausal
