#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fdmean/dataset.hpp"
#include "fdmean/errors.hpp"
#include "fdmean/estimate.hpp"
#include "fdmean/kernel.hpp"
#include "fdmean/metrics.hpp"
#include "fdmean/solver.hpp"

namespace fdmean {

/// Which pooled estimator a tuning loop drives.
enum class FitMode { common, independent };

inline const char* to_string(FitMode m) {
    return m == FitMode::common ? "common" : "independent";
}

/// Result of a grid search over lambda.  `ise` is filled by the oracle
/// selector, `score` by GCV; warnings record degenerate GCV traces and
/// knot thinning.
struct LambdaSelection {
    double lambda = 0.0;
    SplineEstimate estimate;
    double ise = std::numeric_limits<double>::quiet_NaN();
    double score = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> warnings;
};

/// The default 17-point tuning grid, log-spaced over [1e-8, 1].
inline std::vector<double> default_lambda_grid() {
    std::vector<double> g(17);
    for (int i = 0; i < 17; ++i)
        g[static_cast<std::size_t>(i)] = std::pow(10.0, -8.0 + 0.5 * i);
    return g;
}

namespace detail {

inline std::vector<double> checked_grid(std::span<const double> grid, FitMode mode,
                                        const char* who) {
    if (grid.empty())
        throw config_error(std::string(who) + ": empty lambda grid");
    std::vector<double> lams(grid.begin(), grid.end());
    std::sort(lams.begin(), lams.end());
    for (double l : lams) {
        if (!std::isfinite(l) || l < 0.0)
            throw config_error(std::string(who) +
                               ": grid values must be finite and >= 0");
        if (mode == FitMode::independent && l == 0.0)
            throw config_error(std::string(who) +
                               ": lambda 0 is not defined for the independent "
                               "estimator; use a common design");
    }
    return lams;
}

inline RowSet build_rows(const FunctionalDataset& data, FitMode mode,
                         const SobolevKernel& kernel) {
    return mode == FitMode::common ? build_common_rows(data, kernel)
                                   : build_independent_rows(data, kernel);
}

inline void note_thinning(const PenalizedSystem& sys, LambdaSelection& sel) {
    if (sys.thinned())
        sel.warnings.push_back("knots thinned to " +
                               std::to_string(sys.knots().size()) + " of " +
                               std::to_string(sys.rows()) + " pooled rows");
}

} // namespace detail

/// Pick the grid lambda minimizing the exact ISE against a known truth
/// (simulation device).  Ties and equal minima resolve toward the
/// larger lambda.  Gram and cross-kernel blocks are computed once and
/// shared across the grid.
inline LambdaSelection select_lambda_oracle(
    const FunctionalDataset& data, std::span<const double> grid,
    const std::function<double(double)>& truth, FitMode mode,
    const SolveOptions& opts, const SobolevKernel& kernel,
    int ise_grid_size = 4097) {
    opts.validate();
    if (!truth)
        throw precondition_error("select_lambda_oracle: truth function required");
    std::vector<double> lams =
        detail::checked_grid(grid, mode, "select_lambda_oracle");

    detail::PenalizedSystem sys(detail::build_rows(data, mode, kernel), kernel,
                                opts.max_knots);
    std::vector<double> tgrid = simpson_grid(ise_grid_size);
    std::vector<double> weights = simpson_weights(ise_grid_size);
    std::vector<double> truth_vals(tgrid.size());
    for (std::size_t i = 0; i < tgrid.size(); ++i) truth_vals[i] = truth(tgrid[i]);
    GridEvaluator geval(tgrid, sys.knots(), kernel);

    LambdaSelection best;
    best.ise = std::numeric_limits<double>::infinity();
    detail::PenalizedSystem::Fit best_fit;
    for (double lam : lams) {
        double lam_eff = (mode == FitMode::common)
                             ? std::max(lam, opts.interpolation_floor)
                             : lam;
        auto fit = sys.solve(lam_eff);
        Eigen::VectorXd vals = geval.values(fit.c, fit.d);
        double e = 0.0;
        for (std::size_t i = 0; i < tgrid.size(); ++i) {
            double dv = vals(static_cast<Eigen::Index>(i)) - truth_vals[i];
            e += weights[i] * dv * dv;
        }
        if (e <= best.ise) {
            best.ise = e;
            best.lambda = lam;
            best_fit = std::move(fit);
        }
    }
    best.estimate = detail::assemble_estimate(sys, best_fit, best.lambda);
    detail::note_thinning(sys, best);
    return best;
}

/// Generalized cross-validation: pick the grid lambda minimizing
/// rss_w / (1 - edf/N)^2.  Grid points whose trace is non-finite or
/// whose denominator vanishes are skipped with a warning; if every
/// point degenerates, the largest grid lambda is returned (flagged).
inline LambdaSelection select_lambda_gcv(const FunctionalDataset& data,
                                         std::span<const double> grid,
                                         FitMode mode, const SolveOptions& opts,
                                         const SobolevKernel& kernel) {
    opts.validate();
    std::vector<double> lams = detail::checked_grid(grid, mode, "select_lambda_gcv");

    detail::PenalizedSystem sys(detail::build_rows(data, mode, kernel), kernel,
                                opts.max_knots);
    const double n = static_cast<double>(sys.rows());

    LambdaSelection best;
    best.score = std::numeric_limits<double>::infinity();
    detail::PenalizedSystem::Fit best_fit;
    bool any_valid = false;
    int degenerate = 0;
    for (double lam : lams) {
        double lam_eff = (mode == FitMode::common)
                             ? std::max(lam, opts.interpolation_floor)
                             : lam;
        auto fit = sys.solve(lam_eff, /*want_edf=*/true);
        double denom = 1.0 - fit.edf / n;
        if (!std::isfinite(fit.edf) || denom <= 1e-12) {
            ++degenerate;
            continue;
        }
        double score = fit.rss_w / (denom * denom);
        if (score <= best.score) {
            best.score = score;
            best.lambda = lam;
            best_fit = std::move(fit);
            any_valid = true;
        }
    }
    if (degenerate > 0)
        best.warnings.push_back("gcv: " + std::to_string(degenerate) +
                                " grid point(s) had a degenerate trace");
    if (!any_valid) {
        best.lambda = lams.back();
        double lam_eff = (mode == FitMode::common)
                             ? std::max(best.lambda, opts.interpolation_floor)
                             : best.lambda;
        best_fit = sys.solve(lam_eff);
        best.score = std::numeric_limits<double>::quiet_NaN();
        best.warnings.push_back(
            "gcv: all grid points degenerate; fell back to largest lambda");
    }
    best.estimate = detail::assemble_estimate(sys, best_fit, best.lambda);
    detail::note_thinning(sys, best);
    return best;
}

} // namespace fdmean
