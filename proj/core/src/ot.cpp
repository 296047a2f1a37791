#include "wcausal/ot.hpp"

#include <algorithm>
#include <cmath>

namespace wcausal {

double grid_l2_norm(std::span<const double> values, const LevelGrid& grid) {
    if (values.size() != grid.size())
        throw GridMismatch("grid_l2_norm: value count does not match grid");
    double acc = 0.0;
    for (double v : values) acc += v * v;
    return std::sqrt(acc / static_cast<double>(grid.size()));
}

double w2_distance(std::span<const double> a, std::span<const double> b, const LevelGrid& grid) {
    if (a.size() != grid.size() || b.size() != grid.size())
        throw GridMismatch("w2_distance: value count does not match grid");
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(grid.size()));
}

double w2_distance(const QuantileCurve& a, const QuantileCurve& b) {
    if (a.grid() != b.grid()) throw GridMismatch("w2_distance: curves on different grids");
    return w2_distance(a.values(), b.values(), a.grid());
}

QuantileCurve barycentre(std::span<const QuantileCurve> curves, std::span<const double> weights) {
    if (curves.empty()) throw InsufficientData("barycentre: empty curve set");
    if (!weights.empty() && weights.size() != curves.size())
        throw InvalidArgument("barycentre: weight count does not match curve count");
    const LevelGrid& grid = curves[0].grid();
    for (const auto& c : curves) {
        if (c.grid() != grid) throw GridMismatch("barycentre: curves on different grids");
    }
    double wsum = 0.0;
    if (weights.empty()) {
        wsum = static_cast<double>(curves.size());
    } else {
        for (double w : weights) {
            if (!(w >= 0.0)) throw InvalidArgument("barycentre: weights must be nonnegative");
            wsum += w;
        }
        if (wsum <= 0.0) throw InvalidArgument("barycentre: weights must have positive sum");
    }
    std::vector<double> values(grid.size(), 0.0);
    double lo = curves[0].lo();
    double hi = curves[0].hi();
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const double w = (weights.empty() ? 1.0 : weights[i]) / wsum;
        const auto& v = curves[i].values();
        for (std::size_t j = 0; j < v.size(); ++j) values[j] += w * v[j];
        lo = std::min(lo, curves[i].lo());
        hi = std::max(hi, curves[i].hi());
    }
    return QuantileCurve(grid, std::move(values), lo, hi);
}

std::vector<double> transport_map(const QuantileCurve& src, const QuantileCurve& dst,
                                  std::span<const double> pts) {
    std::vector<double> out;
    out.reserve(pts.size());
    for (double s : pts) {
        if (s < src.lo() || s > src.hi())
            throw DomainViolation("transport_map: eval point outside source bounds");
        out.push_back(interp_at_level(dst.grid(), dst.values(), cdf_eval(src, s)));
    }
    return out;
}

std::vector<double> transport_map(const StepCdf& src, const QuantileCurve& dst,
                                  std::span<const double> pts) {
    // Discrete source: the honest monotone coupling pairs the atoms'
    // exact CDF levels with the step quantile of dst (its values read
    // as equally weighted atoms), not with the interpolated curve.
    const auto& v = dst.values();
    const std::size_t m = v.size();
    std::vector<double> out;
    out.reserve(pts.size());
    for (double s : pts) {
        if (s < src.atoms().front() || s > src.atoms().back())
            throw DomainViolation("transport_map: eval point outside source support");
        const double u = src.eval(s);
        double idx = std::ceil(static_cast<double>(m) * u - 1e-9 * (static_cast<double>(m) * u + 1.0));
        if (idx < 1.0) idx = 1.0;
        if (idx > static_cast<double>(m)) idx = static_cast<double>(m);
        out.push_back(v[static_cast<std::size_t>(idx) - 1]);
    }
    return out;
}

std::vector<double> pushforward_compose(std::span<const double> g,
                                        const QuantileCurve& lambda_src,
                                        const QuantileCurve& lambda_dst) {
    if (lambda_src.grid() != lambda_dst.grid())
        throw GridMismatch("pushforward_compose: references on different grids");
    const LevelGrid& grid = lambda_src.grid();
    if (g.size() != grid.size())
        throw GridMismatch("pushforward_compose: curve length does not match grid");
    // Matching references: the re-referencing operator is the identity;
    // short-circuit to avoid needless interpolation round-off.
    if (lambda_src.values() == lambda_dst.values())
        return std::vector<double>(g.begin(), g.end());
    std::vector<double> out(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double u = cdf_eval(lambda_src, lambda_dst.values()[j]);
        out[j] = interp_at_level(grid, g, u);
    }
    return out;
}

}  // namespace wcausal
