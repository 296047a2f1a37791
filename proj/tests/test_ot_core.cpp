#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "wcausal/curve.hpp"
#include "wcausal/ot.hpp"
#include "wcausal/rng.hpp"

using namespace wcausal;

namespace {

QuantileCurve constant_curve(const LevelGrid& grid, double c, double lo, double hi) {
    return QuantileCurve(grid, std::vector<double>(grid.size(), c), lo, hi);
}

QuantileCurve uniform_curve(const LevelGrid& grid, double scale) {
    std::vector<double> v(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) v[j] = scale * grid.level(j);
    return QuantileCurve(grid, std::move(v), 0.0, scale);
}

// Lift a weighted discrete measure onto the grid through its step
// quantile; exact for the grid integrals when all cumulative weights
// sit on grid-cell edges.
QuantileCurve lift_atoms(const LevelGrid& grid, const std::vector<double>& atoms,
                         const std::vector<double>& weights, double lo, double hi) {
    std::vector<double> cum(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        cum[i] = acc;
    }
    std::vector<double> v(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double u = grid.level(j);
        std::size_t i = 0;
        while (i + 1 < cum.size() && cum[i] < u) ++i;
        v[j] = atoms[i];
    }
    return QuantileCurve(grid, std::move(v), lo, hi);
}

}  // namespace

TEST_CASE("level grid nodes are strictly interior and evenly spaced") {
    LevelGrid g(201);
    CHECK(g.size() == 201);
    CHECK(g.level(0) > 0.0);
    CHECK(g.level(200) < 1.0);
    CHECK(g.level(100) == 0.5);  // odd size puts a node exactly at the median
    for (std::size_t j = 0; j + 1 < g.size(); ++j) CHECK(g.level(j) < g.level(j + 1));
    CHECK_THROWS_AS(LevelGrid(0), InvalidArgument);
}

TEST_CASE("empirical quantile returns left-continuous order statistics") {
    const std::vector<double> samples{1.0, 2.0, 3.0};
    LevelGrid g1(1);
    CHECK(empirical_quantile(samples, g1, 0.0, 5.0).values()[0] == 2.0);
    LevelGrid g3(3);
    auto q = empirical_quantile(samples, g3, 0.0, 5.0);
    CHECK(q.values() == std::vector<double>{1.0, 2.0, 3.0});

    auto cdf = StepCdf::from_samples(samples);
    CHECK(cdf.quantile(1.0 / 3.0) == 1.0);
    CHECK(cdf.quantile(0.5) == 2.0);
    CHECK(cdf.quantile(1.0) == 3.0);
}

TEST_CASE("empirical quantile is permutation invariant and validates input") {
    LevelGrid g(17);
    std::vector<double> xs{5.0, 1.0, 3.0, 2.0, 4.0, 2.5};
    std::vector<double> shuffled{2.5, 4.0, 1.0, 5.0, 3.0, 2.0};
    CHECK(empirical_quantile(xs, g, 0.0, 6.0).values() ==
          empirical_quantile(shuffled, g, 0.0, 6.0).values());

    CHECK_THROWS_AS(empirical_quantile(std::vector<double>{}, g, 0.0, 1.0), InsufficientData);
    CHECK_THROWS_AS(empirical_quantile(std::vector<double>{2.0}, g, 0.0, 1.0), DomainViolation);
}

TEST_CASE("empirical quantile of many uniform draws stays close to the identity") {
    // Dvoretzky-Kiefer-Wolfowitz: at k=1001 the sup gap exceeds 0.06
    // with probability < 2*exp(-2*1001*0.06^2) ~ 1.5e-3; the seed is
    // fixed, so this is a deterministic check of a high-probability event.
    Rng rng(20240816);
    std::vector<double> xs(1001);
    for (auto& x : xs) x = rng.uniform01();
    LevelGrid g(201);
    auto q = empirical_quantile(xs, g, 0.0, 1.0);
    double sup = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
        sup = std::max(sup, std::abs(q.values()[j] - g.level(j)));
    CHECK(sup <= 0.06);
}

TEST_CASE("step cdf merges ties and is right-continuous") {
    auto cdf = StepCdf::from_samples(std::vector<double>{2.0, 1.0, 2.0, 3.0});
    CHECK(cdf.atoms() == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(cdf.cum_weights().back() == 1.0);
    CHECK(cdf.eval(0.5) == 0.0);
    CHECK(cdf.eval(1.0) == doctest::Approx(0.25));
    CHECK(cdf.eval(2.0) == doctest::Approx(0.75));
    CHECK(cdf.eval(1.5) == doctest::Approx(0.25));
    CHECK(cdf.eval(9.0) == 1.0);
}

TEST_CASE("quantile curve validates shape, bounds, and monotonicity") {
    LevelGrid g(3);
    CHECK_THROWS_AS(QuantileCurve(g, {1.0, 0.5, 2.0}, 0.0, 3.0), DomainViolation);
    CHECK_THROWS_AS(QuantileCurve(g, {1.0, 2.0}, 0.0, 3.0), GridMismatch);
    CHECK_THROWS_AS(QuantileCurve(g, {1.0, 2.0, 4.0}, 0.0, 3.0), DomainViolation);
    CHECK_NOTHROW(QuantileCurve(g, {1.0, 1.0, 2.0}, 0.0, 3.0));
}

TEST_CASE("w2 distance: identity, point masses, grid mismatch") {
    LevelGrid g(60);
    auto a = uniform_curve(g, 1.0);
    CHECK(w2_distance(a, a) == 0.0);
    auto d2 = constant_curve(g, 2.0, 0.0, 10.0);
    auto d5 = constant_curve(g, 5.0, 0.0, 10.0);
    CHECK(w2_distance(d2, d5) == 3.0);
    CHECK(w2_distance(d5, d2) == 3.0);
    LevelGrid other(61);
    CHECK_THROWS_AS(w2_distance(d2, constant_curve(other, 5.0, 0.0, 10.0)), GridMismatch);
}

TEST_CASE("w2 distance matches brute-force assignment on uniform atom sets") {
    // Atom counts divide the grid size, so lifting is exact and the
    // grid quadrature reproduces the discrete transport cost.
    LevelGrid g(60);
    Rng rng(7);
    for (std::size_t n : {2, 3, 4, 5, 6}) {
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<double> a(n), b(n), w(n, 1.0 / static_cast<double>(n));
            for (auto& x : a) x = rng.uniform(0.0, 10.0);
            for (auto& x : b) x = rng.uniform(0.0, 10.0);
            std::vector<double> sa = a, sb = b;
            std::sort(sa.begin(), sa.end());
            std::sort(sb.begin(), sb.end());
            auto qa = lift_atoms(g, sa, w, 0.0, 10.0);
            auto qb = lift_atoms(g, sb, w, 0.0, 10.0);
            const double got = w2_distance(qa, qb);
            const double want = oracle::w2_assignment(a, b);
            CHECK(got == doctest::Approx(want).epsilon(1e-9));
        }
    }
}

TEST_CASE("w2 distance matches the exact integral for weighted atoms") {
    // Weights in multiples of 1/12 put every quantile breakpoint on a
    // cell edge of the 60-node grid, making the midpoint rule exact.
    LevelGrid g(60);
    const std::vector<double> atoms_a{0.5, 2.0, 7.0};
    const std::vector<double> wa{3.0 / 12, 4.0 / 12, 5.0 / 12};
    const std::vector<double> atoms_b{1.0, 4.5};
    const std::vector<double> wb{5.0 / 12, 7.0 / 12};
    auto qa = lift_atoms(g, atoms_a, wa, 0.0, 10.0);
    auto qb = lift_atoms(g, atoms_b, wb, 0.0, 10.0);
    const double want = oracle::w2_weighted(atoms_a, wa, atoms_b, wb);
    CHECK(w2_distance(qa, qb) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("barycentre of two point masses is the midpoint mass") {
    LevelGrid g(31);
    std::vector<QuantileCurve> curves{constant_curve(g, 1.0, 0.0, 4.0),
                                      constant_curve(g, 3.0, 0.0, 4.0)};
    auto bary = barycentre(curves);
    for (double v : bary.values()) CHECK(v == 2.0);
}

TEST_CASE("barycentre of a single curve is that curve") {
    LevelGrid g(11);
    auto c = uniform_curve(g, 3.0);
    std::vector<QuantileCurve> one{c};
    CHECK(barycentre(one).values() == c.values());
}

TEST_CASE("barycentre equals the pointwise weighted mean at every node") {
    LevelGrid g(41);
    Rng rng(99);
    std::vector<QuantileCurve> curves;
    std::vector<double> weights;
    for (int i = 0; i < 10; ++i) {
        std::vector<double> v(g.size());
        double acc = rng.uniform(0.0, 1.0);
        for (auto& x : v) {
            x = acc;
            acc += rng.uniform(0.0, 0.2);
        }
        curves.emplace_back(g, std::move(v), 0.0, 20.0);
        weights.push_back(rng.uniform(0.1, 2.0));
    }
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    auto bary = barycentre(curves, weights);
    for (std::size_t j = 0; j < g.size(); ++j) {
        double manual = 0.0;
        for (std::size_t i = 0; i < curves.size(); ++i)
            manual += (weights[i] / wsum) * curves[i].values()[j];
        CHECK(bary.values()[j] == manual);
    }
}

TEST_CASE("barycentre of point masses with dyadic atoms hits the mean exactly") {
    LevelGrid g(5);
    std::vector<QuantileCurve> curves;
    std::vector<double> atoms{0.25, 1.5, 2.75, 0.5};  // dyadic, n = 4
    for (double c : atoms) curves.push_back(constant_curve(g, c, 0.0, 4.0));
    auto bary = barycentre(curves);
    const double mean = (0.25 + 1.5 + 2.75 + 0.5) / 4.0;
    for (double v : bary.values()) CHECK(v == mean);
}

TEST_CASE("barycentre minimizes the Frechet sum against random perturbations") {
    LevelGrid g(25);
    Rng rng(1234);
    std::vector<QuantileCurve> curves;
    std::vector<double> weights;
    std::vector<std::vector<double>> raw;
    for (int i = 0; i < 10; ++i) {
        std::vector<double> v(g.size());
        double acc = rng.uniform(0.0, 1.0);
        for (auto& x : v) {
            x = acc;
            acc += rng.uniform(0.0, 0.3);
        }
        raw.push_back(v);
        curves.emplace_back(g, std::move(v), -1.0, 20.0);
        weights.push_back(rng.uniform(0.2, 1.0));
    }
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    std::vector<double> wn = weights;
    for (auto& w : wn) w /= wsum;
    auto bary = barycentre(curves, weights);
    const double best = oracle::frechet_sum(bary.values(), raw, wn);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> cand = bary.values();
        for (auto& x : cand) x += rng.uniform(-0.05, 0.05);
        CHECK(oracle::frechet_sum(cand, raw, wn) >= best);
    }
}

TEST_CASE("transport map between matching curves is the identity") {
    LevelGrid g(101);
    auto src = uniform_curve(g, 2.0);
    std::vector<double> pts{0.2, 0.5, 0.9, 1.3, 1.8};
    auto t = transport_map(src, src, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(t[i] == doctest::Approx(pts[i]).epsilon(1e-12));
}

TEST_CASE("transport map doubles points when pushing U[0,1] onto U[0,2]") {
    LevelGrid g(201);
    auto src = uniform_curve(g, 1.0);
    auto dst = uniform_curve(g, 2.0);
    std::vector<double> pts{0.1, 0.25, 0.5, 0.75, 0.9};
    auto t = transport_map(src, dst, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(t[i] == doctest::Approx(2.0 * pts[i]).epsilon(1e-12));
}

TEST_CASE("transport map on discrete atoms uses the monotone coupling") {
    auto src = StepCdf::from_samples(std::vector<double>{1.0, 2.0});
    LevelGrid g(2);
    QuantileCurve dst(g, {3.0, 5.0}, 0.0, 6.0);
    auto t = transport_map(src, dst, std::vector<double>{1.0, 2.0});
    CHECK(t == std::vector<double>{3.0, 5.0});

    QuantileCurve self(g, {1.0, 2.0}, 0.0, 6.0);
    auto id = transport_map(src, self, std::vector<double>{1.0, 2.0});
    CHECK(id == std::vector<double>{1.0, 2.0});

    CHECK_THROWS_AS(transport_map(src, dst, std::vector<double>{0.5}), DomainViolation);
}

TEST_CASE("transport map is nondecreasing in its argument") {
    LevelGrid g(60);
    Rng rng(5);
    std::vector<double> v(g.size());
    double acc = 0.0;
    for (auto& x : v) {
        x = acc;
        acc += rng.uniform(0.0, 0.5);
    }
    QuantileCurve src = uniform_curve(g, 3.0);
    QuantileCurve dst(g, std::move(v), 0.0, 40.0);
    std::vector<double> pts;
    for (int i = 0; i <= 50; ++i) pts.push_back(3.0 * i / 50.0);
    auto t = transport_map(src, dst, pts);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) CHECK(t[i] <= t[i + 1] + 1e-12);
}

TEST_CASE("pushforward with matching references is the identity") {
    LevelGrid g(201);
    Rng rng(42);
    std::vector<double> gvals(g.size());
    for (auto& x : gvals) x = rng.uniform(-1.0, 1.0);
    auto lam = uniform_curve(g, 1.5);
    auto lam_copy = uniform_curve(g, 1.5);
    auto out = pushforward_compose(gvals, lam, lam_copy);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(out[j] == gvals[j]);
}

TEST_CASE("pushforward re-references a curve through the source cdf") {
    LevelGrid g(201);
    std::vector<double> gvals = g.levels();
    auto lam_src = uniform_curve(g, 2.0);
    auto lam_dst = uniform_curve(g, 1.0);
    auto out = pushforward_compose(gvals, lam_src, lam_dst);
    // Interior nodes land at half their level; the first node sits in
    // the clamped region below the source's smallest value.
    for (std::size_t j = 1; j < g.size(); ++j)
        CHECK(out[j] == doctest::Approx(g.level(j) / 2.0).epsilon(1e-12));
}

TEST_CASE("pushforward of a linear curve between identical uniforms is unchanged") {
    LevelGrid g(101);
    std::vector<double> gvals(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) gvals[j] = 3.0 * g.level(j) - 1.0;
    auto a = uniform_curve(g, 1.0);
    auto b = uniform_curve(g, 1.0);
    auto out = pushforward_compose(gvals, a, b);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(out[j] == doctest::Approx(gvals[j]).epsilon(1e-12));
}

TEST_CASE("cdf_eval inverts the interpolated curve and clamps at the ends") {
    LevelGrid g(201);
    auto ident = uniform_curve(g, 1.0);
    CHECK(cdf_eval(ident, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
    auto dirac = constant_curve(g, 2.0, 0.0, 4.0);
    CHECK(cdf_eval(dirac, 2.0) == g.level(200));
    CHECK(cdf_eval(dirac, 3.0) == g.level(200));
    CHECK(cdf_eval(dirac, 1.0) == g.level(0));
    auto twice = uniform_curve(g, 2.0);
    CHECK(cdf_eval(twice, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("cdf_eval resolves flat stretches to their right end") {
    LevelGrid g(4);
    QuantileCurve c(g, {1.0, 1.0, 1.0, 2.0}, 0.0, 3.0);
    CHECK(cdf_eval(c, 1.0) == g.level(2));
    for (std::size_t j = 0; j < g.size(); ++j) {
        CHECK(cdf_eval(c, c.values()[j]) >= g.level(j));
    }
}

TEST_CASE("isotonic projection pools adjacent violators") {
    CHECK(isotonic_project(std::vector<double>{1.0, 2.0, 3.0}) ==
          std::vector<double>{1.0, 2.0, 3.0});
    CHECK(isotonic_project(std::vector<double>{2.0, 1.0}) == std::vector<double>{1.5, 1.5});
    CHECK(isotonic_project(std::vector<double>{3.0, 1.0, 2.0}) == std::vector<double>{2.0, 2.0, 2.0});
}

TEST_CASE("isotonic projection matches the brute-force 3-point solution") {
    Rng rng(31);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> y{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                              rng.uniform(-2.0, 2.0)};
        auto got = isotonic_project(y);
        auto want = oracle::isotonic3(y);
        for (int i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
}

TEST_CASE("isotonic projection is idempotent and mean preserving") {
    Rng rng(77);
    std::vector<double> y(50);
    for (auto& x : y) x = rng.uniform(-1.0, 1.0);
    auto p = isotonic_project(y);
    CHECK(isotonic_project(p) == p);
    for (std::size_t j = 0; j + 1 < p.size(); ++j) CHECK(p[j] <= p[j + 1]);
    double my = 0.0, mp = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        my += y[j];
        mp += p[j];
    }
    CHECK(mp == doctest::Approx(my).epsilon(1e-12));
}

TEST_CASE("grid norms use the flat quadrature weight") {
    LevelGrid g(50);
    CHECK(grid_l2_norm(std::vector<double>(50, 1.0), g) == doctest::Approx(1.0));
    CHECK(grid_l2_norm(std::vector<double>(50, -2.0), g) == doctest::Approx(2.0));
    CHECK_THROWS_AS(grid_l2_norm(std::vector<double>(49, 1.0), g), GridMismatch);
}

TEST_CASE("norm of value differences equals the curve distance bit for bit") {
    LevelGrid g(201);
    Rng rng(2024);
    std::vector<double> a(g.size()), b(g.size());
    double xa = 0.0, xb = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        xa += rng.uniform(0.0, 0.1);
        xb += rng.uniform(0.0, 0.1);
        a[j] = xa;
        b[j] = xb;
    }
    QuantileCurve qa(g, a, 0.0, 100.0), qb(g, b, 0.0, 100.0);
    std::vector<double> diff(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) diff[j] = a[j] - b[j];
    CHECK(w2_distance(qa, qb) == grid_l2_norm(diff, g));
}

TEST_CASE("seeded generator streams are reproducible and distinct") {
    Rng a = Rng::stream(9, 4);
    Rng b = Rng::stream(9, 4);
    Rng c = Rng::stream(9, 5);
    bool all_equal = true;
    bool any_diff_stream = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        all_equal = all_equal && (x == b.next_u64());
        any_diff_stream = any_diff_stream || (x != c.next_u64());
    }
    CHECK(all_equal);
    CHECK(any_diff_stream);
}
