#include "wcausal/outcome.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace wcausal {

namespace {

struct Design {
    Eigen::MatrixXd X;                  // n x kept
    std::vector<std::size_t> keep;      // kept column indices in the full design
    std::size_t full_dim;
};

// Assemble the design matrix, dropping constant non-intercept columns.
Design build_design(std::span<const Subject> subjects, const FeatureMap& features,
                    bool with_treatment) {
    const std::size_t n = subjects.size();
    const std::size_t pf = features.out_dim();
    const std::size_t p = with_treatment ? pf + 1 : pf;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = features(subjects[i].covariates);
        X(static_cast<Eigen::Index>(i), 0) = 1.0;
        std::size_t c = 1;
        if (with_treatment) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c++)) = static_cast<double>(subjects[i].treatment);
        for (std::size_t j = 1; j < pf; ++j)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c++)) = row[j];
    }
    Design d{Eigen::MatrixXd(), {}, p};
    d.keep.push_back(0);
    for (std::size_t j = 1; j < p; ++j) {
        const auto col = X.col(static_cast<Eigen::Index>(j));
        if (col.maxCoeff() > col.minCoeff()) d.keep.push_back(j);
    }
    d.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d.keep.size()));
    for (std::size_t j = 0; j < d.keep.size(); ++j)
        d.X.col(static_cast<Eigen::Index>(j)) = X.col(static_cast<Eigen::Index>(d.keep[j]));
    return d;
}

// Penalized normal-equation solve shared by every grid level; the phi
// block starts at `penalty_from` in full-design coordinates.
Eigen::MatrixXd solve_levels(const Design& d, const Eigen::MatrixXd& Z, double ridge,
                             std::size_t penalty_from) {
    const std::size_t q = d.keep.size();
    Eigen::MatrixXd gram = d.X.transpose() * d.X;
    for (std::size_t j = 0; j < q; ++j) {
        if (d.keep[j] >= penalty_from) gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += ridge;
    }
    if (ridge == 0.0) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
        if (static_cast<std::size_t>(lu.rank()) < q)
            throw SingularDesign("fit_outcome: rank-deficient design");
    }
    const Eigen::MatrixXd rhs = d.X.transpose() * Z;
    const Eigen::MatrixXd sol = gram.ldlt().solve(rhs);  // q x M
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.full_dim), Z.cols());
    for (std::size_t j = 0; j < q; ++j) full.row(static_cast<Eigen::Index>(d.keep[j])) = sol.row(static_cast<Eigen::Index>(j));
    return full;
}

Eigen::MatrixXd lifted_matrix(std::span<const Subject> subjects, const LevelGrid& grid) {
    Eigen::MatrixXd Z(static_cast<Eigen::Index>(subjects.size()), static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < subjects.size(); ++i) {
        if (subjects[i].lifted.grid() != grid)
            throw GridMismatch("outcome design: subjects on different grids");
        const auto& v = subjects[i].lifted.values();
        for (std::size_t j = 0; j < v.size(); ++j)
            Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j];
    }
    return Z;
}

}  // namespace

OutcomeFit fit_outcome(std::span<const Subject> subjects, const FeatureMap& features,
                       double ridge, bool joint) {
    if (subjects.empty()) throw InsufficientData("fit_outcome: no subjects");
    const LevelGrid grid = subjects[0].lifted.grid();
    OutcomeFit fit{features, grid, ridge, joint, {}, {}, {}};
    if (joint) {
        const Design d = build_design(subjects, features, true);
        const Eigen::MatrixXd Z = lifted_matrix(subjects, grid);
        fit.coef = solve_levels(d, Z, ridge, 2);
    } else {
        for (int arm = 0; arm <= 1; ++arm) {
            std::vector<Subject> part;
            for (const auto& s : subjects)
                if (s.treatment == arm) part.push_back(s);
            if (part.empty()) throw InsufficientData("fit_outcome: empty treatment arm");
            const Design d = build_design(part, features, false);
            const Eigen::MatrixXd Z = lifted_matrix(part, grid);
            (arm == 0 ? fit.coef0 : fit.coef1) = solve_levels(d, Z, ridge, 1);
        }
    }
    return fit;
}

std::vector<double> predict_outcome(const OutcomeFit& fit, int a, std::span<const double> x) {
    const auto row = fit.features(x);
    const std::size_t m = fit.grid.size();
    std::vector<double> out(m, 0.0);
    if (fit.joint) {
        Eigen::VectorXd f(static_cast<Eigen::Index>(row.size() + 1));
        f(0) = 1.0;
        f(1) = static_cast<double>(a);
        for (std::size_t j = 1; j < row.size(); ++j) f(static_cast<Eigen::Index>(j + 1)) = row[j];
        const Eigen::RowVectorXd pred = f.transpose() * fit.coef;
        for (std::size_t j = 0; j < m; ++j) out[j] = pred(static_cast<Eigen::Index>(j));
    } else {
        const auto& coef = (a == 0) ? fit.coef0 : fit.coef1;
        Eigen::VectorXd f(static_cast<Eigen::Index>(row.size()));
        for (std::size_t j = 0; j < row.size(); ++j) f(static_cast<Eigen::Index>(j)) = row[j];
        const Eigen::RowVectorXd pred = f.transpose() * coef;
        for (std::size_t j = 0; j < m; ++j) out[j] = pred(static_cast<Eigen::Index>(j));
    }
    return out;
}

TreatmentCoefInference treatment_coef_inference(std::span<const Subject> subjects,
                                                const OutcomeFit& fit) {
    if (!fit.joint) throw InvalidArgument("treatment_coef_inference: per-arm fit");
    if (fit.ridge != 0.0) throw InvalidArgument("treatment_coef_inference: penalized fit");
    if (subjects.empty()) throw InsufficientData("treatment_coef_inference: no subjects");
    const Design d = build_design(subjects, fit.features, true);
    // Column 1 of the full design is the treatment indicator.
    std::size_t tpos = d.keep.size();
    for (std::size_t j = 0; j < d.keep.size(); ++j)
        if (d.keep[j] == 1) tpos = j;
    if (tpos == d.keep.size())
        throw InvalidArgument("treatment_coef_inference: treatment arm is constant");
    const std::size_t n = subjects.size();
    const std::size_t q = d.keep.size();
    if (n <= q) throw InsufficientData("treatment_coef_inference: no residual degrees of freedom");
    const Eigen::MatrixXd gram = d.X.transpose() * d.X;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (static_cast<std::size_t>(lu.rank()) < q)
        throw SingularDesign("treatment_coef_inference: rank-deficient design");
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q));
    unit(static_cast<Eigen::Index>(tpos)) = 1.0;
    const double inv_tt = lu.solve(unit)(static_cast<Eigen::Index>(tpos));
    const Eigen::MatrixXd Z = lifted_matrix(subjects, fit.grid);
    Eigen::MatrixXd kept(static_cast<Eigen::Index>(q), Z.cols());
    for (std::size_t j = 0; j < q; ++j)
        kept.row(static_cast<Eigen::Index>(j)) = fit.coef.row(static_cast<Eigen::Index>(d.keep[j]));
    const Eigen::MatrixXd resid = Z - d.X * kept;
    TreatmentCoefInference out;
    out.dof = static_cast<double>(n - q);
    out.se.resize(static_cast<std::size_t>(Z.cols()));
    for (Eigen::Index j = 0; j < Z.cols(); ++j)
        out.se[static_cast<std::size_t>(j)] =
            std::sqrt(resid.col(j).squaredNorm() / out.dof * inv_tt);
    return out;
}

double select_ridge_cv(std::span<const Subject> subjects, const FeatureMap& features,
                       std::size_t folds, std::span<const double> candidates) {
    if (folds < 2) throw InvalidArgument("select_ridge_cv: need at least 2 folds");
    if (candidates.empty()) throw InvalidArgument("select_ridge_cv: empty candidate list");
    const std::size_t n = subjects.size();
    if (n < folds) throw InsufficientData("select_ridge_cv: fewer subjects than folds");
    std::vector<double> errs(candidates.size(), 0.0);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        double total = 0.0;
        bool failed = false;
        for (std::size_t f = 0; f < folds && !failed; ++f) {
            std::vector<Subject> train, test;
            for (std::size_t i = 0; i < n; ++i)
                ((i % folds == f) ? test : train).push_back(subjects[i]);
            try {
                const OutcomeFit fit = fit_outcome(train, features, candidates[c], true);
                double fold_err = 0.0;
                for (const auto& s : test) {
                    const auto pred = predict_outcome(fit, s.treatment, s.covariates);
                    const auto& z = s.lifted.values();
                    double ise = 0.0;
                    for (std::size_t j = 0; j < z.size(); ++j) {
                        const double d = z[j] - pred[j];
                        ise += d * d;
                    }
                    fold_err += ise / static_cast<double>(z.size());
                }
                total += fold_err / static_cast<double>(test.size());
            } catch (const Error&) {
                failed = true;
            }
        }
        errs[c] = failed ? std::numeric_limits<double>::infinity()
                         : total / static_cast<double>(folds);
    }
    std::size_t bi = 0;
    for (std::size_t c = 1; c < candidates.size(); ++c)
        if (errs[c] < errs[bi]) bi = c;
    // Ties break toward the larger penalty.
    double best = candidates[bi];
    const double tol = 1e-12 * (1.0 + std::abs(errs[bi]));
    for (std::size_t c = 0; c < candidates.size(); ++c)
        if (errs[c] <= errs[bi] + tol && candidates[c] > best) best = candidates[c];
    return best;
}

}  // namespace wcausal
