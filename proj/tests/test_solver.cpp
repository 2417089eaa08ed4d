#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "fdmean/design.hpp"
#include "fdmean/errors.hpp"
#include "fdmean/estimate.hpp"
#include "fdmean/kernel.hpp"
#include "fdmean/metrics.hpp"
#include "fdmean/process.hpp"
#include "fdmean/solver.hpp"

namespace {

fdmean::FunctionalDataset make_common(int n, int m, std::uint64_t seed) {
    fdmean::DesignSpec design;
    design.kind = fdmean::DesignTag::common_fixed;
    design.n = n;
    design.freq = fdmean::FrequencyRule::fixed(m);
    design.seed = seed;
    return fdmean::generate(design, fdmean::ProcessSpec{});
}

fdmean::FunctionalDataset make_independent(int n, int mlo, int mhi,
                                           std::uint64_t seed) {
    fdmean::DesignSpec design;
    design.kind = fdmean::DesignTag::independent;
    design.n = n;
    design.freq = fdmean::FrequencyRule::uniform(mlo, mhi);
    design.seed = seed;
    return fdmean::generate(design, fdmean::ProcessSpec{});
}

// Pointwise averages of a common-design dataset.
std::vector<double> column_means(const fdmean::FunctionalDataset& data) {
    std::vector<double> ybar(data.curves[0].size(), 0.0);
    for (const auto& c : data.curves)
        for (std::size_t j = 0; j < ybar.size(); ++j) ybar[j] += c.values[j];
    for (double& v : ybar) v /= static_cast<double>(data.num_curves());
    return ybar;
}

// The penalized objective computed independently of the solver: the
// weighted residual sum plus lambda_eff times the squared seminorm.
double objective(const fdmean::SplineEstimate& est,
                 const std::vector<double>& t, const std::vector<double>& y,
                 const std::vector<double>& winv,
                 const fdmean::SobolevKernel& kernel) {
    double acc = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        double r = y[k] - fdmean::evaluate(est, t[k], kernel);
        acc += r * r / winv[k];
    }
    return acc + est.lambda_eff * fdmean::roughness(est, kernel);
}

void expect_knots_sorted_distinct(const fdmean::SplineEstimate& est) {
    for (std::size_t j = 1; j < est.knots.size(); ++j)
        EXPECT_LT(est.knots[j - 1], est.knots[j]);
    EXPECT_EQ(est.kernel_coeffs.size(), est.knots.size());
    EXPECT_EQ(est.poly_coeffs.size(), static_cast<std::size_t>(est.r));
}

TEST(Solver, CommonInterpolatesAveragesAtZeroLambda) {
    auto data = make_common(20, 10, 7);
    fdmean::SobolevKernel kernel(2);
    fdmean::SolveOptions opts;  // lambda = 0 -> interpolation floor
    auto est = fdmean::fit_common(data, opts, kernel);
    auto ybar = column_means(data);
    const auto& pts = data.curves[0].points;
    for (std::size_t j = 0; j < pts.size(); ++j) {
        EXPECT_NEAR(fdmean::evaluate(est, pts[j], kernel), ybar[j], 1e-6)
            << "point " << pts[j];
    }
    expect_knots_sorted_distinct(est);
    EXPECT_EQ(est.lambda, 0.0);
    EXPECT_EQ(est.lambda_eff, opts.interpolation_floor);
    EXPECT_FALSE(est.thinned);
}

TEST(Solver, KernelCoefficientsOrthogonalToPolynomials) {
    fdmean::SobolevKernel kernel(2);
    for (double lambda : {1e-6, 1e-3, 1.0}) {
        auto data = make_common(8, 12, 3);
        fdmean::SolveOptions opts;
        opts.lambda = lambda;
        auto est = fdmean::fit_common(data, opts, kernel);
        // sum_j c_j t_j^k = 0 for k < r.
        double scale = 1.0;
        for (double c : est.kernel_coeffs) scale = std::max(scale, std::abs(c));
        for (int k = 0; k < est.r; ++k) {
            double dot = 0.0;
            for (std::size_t j = 0; j < est.knots.size(); ++j)
                dot += est.kernel_coeffs[j] * std::pow(est.knots[j], k);
            EXPECT_NEAR(dot, 0.0, 1e-6 * scale) << "lambda " << lambda
                                                << " degree " << k;
        }
    }
}

TEST(Solver, SolutionIsVariationalMinimizerCommon) {
    fdmean::SobolevKernel kernel(2);
    int idx = 0;
    for (double lambda : {1e-6, 1e-3, 0.5}) {
        auto data = make_common(7, 9, 100 + idx++);
        fdmean::SolveOptions opts;
        opts.lambda = lambda;
        auto est = fdmean::fit_common(data, opts, kernel);

        auto rows = fdmean::detail::build_common_rows(data, kernel);
        double base = objective(est, rows.t, rows.y, rows.winv, kernel);
        for (std::size_t j = 0; j < est.kernel_coeffs.size(); ++j) {
            for (double eps : {1e-5, -1e-5, 1e-7, -1e-7}) {
                auto bumped = est;
                bumped.kernel_coeffs[j] += eps;
                double obj = objective(bumped, rows.t, rows.y, rows.winv, kernel);
                EXPECT_GE(obj, base - 1e-9 * std::max(1.0, std::abs(base)))
                    << "lambda " << lambda << " kernel coeff " << j;
            }
        }
        for (std::size_t k = 0; k < est.poly_coeffs.size(); ++k) {
            for (double eps : {1e-5, -1e-5}) {
                auto bumped = est;
                bumped.poly_coeffs[k] += eps;
                double obj = objective(bumped, rows.t, rows.y, rows.winv, kernel);
                EXPECT_GE(obj, base - 1e-9 * std::max(1.0, std::abs(base)))
                    << "lambda " << lambda << " poly coeff " << k;
            }
        }
    }
}

TEST(Solver, SolutionIsVariationalMinimizerIndependent) {
    fdmean::SobolevKernel kernel(2);
    int idx = 0;
    for (double lambda : {1e-4, 1e-2}) {
        auto data = make_independent(6, 3, 7, 200 + idx++);
        fdmean::SolveOptions opts;
        opts.lambda = lambda;
        auto est = fdmean::fit_independent(data, opts, kernel);

        auto rows = fdmean::detail::build_independent_rows(data, kernel);
        double base = objective(est, rows.t, rows.y, rows.winv, kernel);
        for (std::size_t j = 0; j < est.kernel_coeffs.size(); ++j) {
            for (double eps : {1e-5, -1e-5}) {
                auto bumped = est;
                bumped.kernel_coeffs[j] += eps;
                double obj = objective(bumped, rows.t, rows.y, rows.winv, kernel);
                EXPECT_GE(obj, base - 1e-9 * std::max(1.0, std::abs(base)))
                    << "lambda " << lambda << " kernel coeff " << j;
            }
        }
        expect_knots_sorted_distinct(est);
    }
}

TEST(Solver, FitIsLinearInObservations) {
    fdmean::SobolevKernel kernel(2);
    auto a = make_common(5, 8, 11);
    auto b = make_common(5, 8, 12);  // same deterministic points, new values
    ASSERT_EQ(a.curves[0].points, b.curves[0].points);

    auto combo = a;
    for (std::size_t i = 0; i < combo.curves.size(); ++i)
        for (std::size_t j = 0; j < combo.curves[i].values.size(); ++j)
            combo.curves[i].values[j] = 0.7 * a.curves[i].values[j] -
                                        1.3 * b.curves[i].values[j];

    fdmean::SolveOptions opts;
    opts.lambda = 1e-3;
    auto ea = fdmean::fit_common(a, opts, kernel);
    auto eb = fdmean::fit_common(b, opts, kernel);
    auto ec = fdmean::fit_common(combo, opts, kernel);
    for (double t : fdmean::simpson_grid(101)) {
        double expected = 0.7 * fdmean::evaluate(ea, t, kernel) -
                          1.3 * fdmean::evaluate(eb, t, kernel);
        EXPECT_NEAR(fdmean::evaluate(ec, t, kernel), expected,
                    1e-8 * std::max(1.0, std::abs(expected)));
    }
}

TEST(Solver, LargeLambdaRecoversPolynomialRegression) {
    fdmean::SobolevKernel kernel(2);
    auto data = make_common(10, 15, 21);
    fdmean::SolveOptions opts;
    opts.lambda = 1e6;
    auto est = fdmean::fit_common(data, opts, kernel);
    EXPECT_NEAR(fdmean::roughness(est, kernel), 0.0, 1e-10);

    // Weighted least squares on 1, t (all weights equal here).
    auto ybar = column_means(data);
    const auto& pts = data.curves[0].points;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(pts.size()), 2);
    Eigen::VectorXd y(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t j = 0; j < pts.size(); ++j) {
        x(static_cast<Eigen::Index>(j), 0) = 1.0;
        x(static_cast<Eigen::Index>(j), 1) = pts[j];
        y(static_cast<Eigen::Index>(j)) = ybar[j];
    }
    Eigen::Vector2d beta =
        (x.transpose() * x).ldlt().solve(x.transpose() * y);
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        EXPECT_NEAR(fdmean::evaluate(est, t, kernel), beta(0) + beta(1) * t,
                    1e-4);
    }
}

TEST(Solver, RoughnessDecreasesWithLambda) {
    fdmean::SobolevKernel kernel(2);
    auto data = make_common(12, 14, 31);
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {1e-8, 1e-6, 1e-4, 1e-2, 1.0}) {
        fdmean::SolveOptions opts;
        opts.lambda = lambda;
        auto est = fdmean::fit_common(data, opts, kernel);
        double rough = fdmean::roughness(est, kernel);
        EXPECT_LE(rough, prev * (1.0 + 1e-10)) << "lambda " << lambda;
        prev = rough;
    }
}

TEST(Solver, TwoStageEqualsPooledOnCommonDesign) {
    fdmean::SobolevKernel kernel(2);
    auto data = make_common(6, 9, 41);
    for (double lambda : {0.0, 1e-4, 1e-1}) {
        fdmean::SolveOptions opts;
        opts.lambda = lambda;
        auto pooled = fdmean::fit_common(data, opts, kernel);
        auto averaged = fdmean::two_stage(data, opts, kernel);
        for (double t : fdmean::simpson_grid(201)) {
            double a = fdmean::evaluate(averaged, t, kernel);
            double b = fdmean::evaluate(pooled, t, kernel);
            EXPECT_NEAR(a, b, 1e-8 * std::max(1.0, std::abs(b)))
                << "lambda " << lambda << " t " << t;
        }
    }
}

TEST(Solver, TwoStageAveragesPerCurveFitsUnderIndependentDesign) {
    fdmean::SobolevKernel kernel(2);
    auto data = make_independent(4, 4, 8, 53);
    fdmean::SolveOptions opts;
    opts.lambda = 1e-3;
    auto avg = fdmean::two_stage(data, opts, kernel);
    expect_knots_sorted_distinct(avg);

    // Per-curve smoothing of curve i is exactly a one-curve common fit.
    std::vector<fdmean::SplineEstimate> singles;
    for (const auto& c : data.curves) {
        fdmean::FunctionalDataset one;
        one.design = fdmean::DesignTag::common_fixed;
        one.curves = {c};
        singles.push_back(fdmean::fit_common(one, opts, kernel));
    }
    for (double t : fdmean::simpson_grid(101)) {
        double mean = 0.0;
        for (const auto& s : singles) mean += fdmean::evaluate(s, t, kernel);
        mean /= static_cast<double>(singles.size());
        EXPECT_NEAR(fdmean::evaluate(avg, t, kernel), mean,
                    1e-10 * std::max(1.0, std::abs(mean)));
    }
}

TEST(Solver, ThinnedPathMatchesExactWhenKnotsCoverDistinctPoints) {
    // 30 curves sharing 10 points, labeled independent: 300 pooled rows.
    // With max_knots = 50 the thinned basis keeps all 10 distinct points,
    // so both code paths minimize over the same function space.
    fdmean::SobolevKernel kernel(2);
    auto shared = make_common(30, 10, 61);
    fdmean::FunctionalDataset data;
    data.design = fdmean::DesignTag::independent;
    data.curves = shared.curves;

    fdmean::SolveOptions exact;
    exact.lambda = 1e-3;
    exact.max_knots = 2000;
    fdmean::SolveOptions thin = exact;
    thin.max_knots = 50;

    auto e1 = fdmean::fit_independent(data, exact, kernel);
    auto e2 = fdmean::fit_independent(data, thin, kernel);
    EXPECT_FALSE(e1.thinned);
    EXPECT_TRUE(e2.thinned);
    EXPECT_EQ(e1.knots.size(), 10u);  // merged duplicates
    EXPECT_EQ(e2.knots.size(), 10u);
    for (double t : fdmean::simpson_grid(201)) {
        double a = fdmean::evaluate(e1, t, kernel);
        double b = fdmean::evaluate(e2, t, kernel);
        EXPECT_NEAR(a, b, 1e-8 * std::max(1.0, std::abs(a))) << "t " << t;
    }
}

TEST(Solver, ThinnedSubsamplingStaysAccurate) {
    fdmean::SobolevKernel kernel(2);
    auto data = make_independent(60, 4, 6, 71);  // ~300 distinct points
    fdmean::SolveOptions opts;
    opts.lambda = 1e-4;
    opts.max_knots = 80;
    auto est = fdmean::fit_independent(data, opts, kernel);
    EXPECT_TRUE(est.thinned);
    EXPECT_LE(est.knots.size(), 80u);
    ASSERT_TRUE(static_cast<bool>(data.truth));
    double err = fdmean::ise(est, data.truth, kernel, 1025);
    EXPECT_TRUE(std::isfinite(err));
    EXPECT_LT(err, 1.0);
    expect_knots_sorted_distinct(est);
}

TEST(Solver, WeightedResidualIdentityExactPath) {
    fdmean::SobolevKernel kernel(2);
    auto data = make_common(9, 11, 83);
    auto rows = fdmean::detail::build_common_rows(data, kernel);
    fdmean::detail::PenalizedSystem sys(rows, kernel, 2000);
    for (double lambda : {1e-5, 1e-2}) {
        auto fit = sys.solve(lambda);
        auto est = fdmean::detail::assemble_estimate(sys, fit, lambda);
        double rss = 0.0;
        for (std::size_t k = 0; k < rows.t.size(); ++k) {
            double r = rows.y[k] - fdmean::evaluate(est, rows.t[k], kernel);
            rss += r * r / rows.winv[k];
        }
        EXPECT_NEAR(fit.rss_w, rss, 1e-10 * std::max(1.0, rss))
            << "lambda " << lambda;
    }
}

TEST(Solver, EffectiveDegreesOfFreedomLimits) {
    fdmean::SobolevKernel kernel(2);
    auto data = make_common(10, 12, 97);
    auto rows = fdmean::detail::build_common_rows(data, kernel);
    fdmean::detail::PenalizedSystem sys(rows, kernel, 2000);

    // Interpolation limit: the hat matrix approaches the identity
    // (approach is gradual because the small Gram eigenvalues compete
    // with lambda, hence the loose lower bound).
    auto low = sys.solve(1e-12, /*want_edf=*/true);
    EXPECT_GT(low.edf, 11.0);
    EXPECT_LT(low.edf, 12.0 + 1e-6);

    // Heavy smoothing: only the r polynomial directions survive.
    auto high = sys.solve(1e8, /*want_edf=*/true);
    EXPECT_NEAR(high.edf, 2.0, 1e-3);

    // Monotone in between.
    double prev = 13.0;
    for (double lambda : {1e-8, 1e-5, 1e-2, 10.0}) {
        auto fit = sys.solve(lambda, /*want_edf=*/true);
        EXPECT_LT(fit.edf, prev + 1e-9) << "lambda " << lambda;
        EXPECT_GT(fit.edf, 2.0 - 1e-9) << "lambda " << lambda;
        prev = fit.edf;
    }
}

TEST(Solver, ThinnedEdfTracksExactEdf) {
    fdmean::SobolevKernel kernel(2);
    auto shared = make_common(25, 9, 19);
    fdmean::FunctionalDataset data;
    data.design = fdmean::DesignTag::independent;
    data.curves = shared.curves;

    auto rows = fdmean::detail::build_independent_rows(data, kernel);
    fdmean::detail::PenalizedSystem exact(rows, kernel, 2000);
    fdmean::detail::PenalizedSystem thin(rows, kernel, 40);
    ASSERT_FALSE(exact.thinned());
    ASSERT_TRUE(thin.thinned());
    for (double lambda : {1e-4, 1e-2}) {
        auto fe = exact.solve(lambda, true);
        auto ft = thin.solve(lambda, true);
        EXPECT_NEAR(fe.edf, ft.edf, 1e-6 * std::max(1.0, fe.edf))
            << "lambda " << lambda;
    }
}

TEST(Solver, PreconditionAndConfigErrors) {
    fdmean::SobolevKernel kernel(2);
    fdmean::SolveOptions opts;

    fdmean::FunctionalDataset empty;
    EXPECT_THROW(fdmean::fit_common(empty, opts, kernel),
                 fdmean::precondition_error);

    // Too few distinct points for r = 2.
    fdmean::FunctionalDataset tiny;
    tiny.design = fdmean::DesignTag::common_fixed;
    tiny.curves = {{{0.5}, {1.0}}};
    EXPECT_THROW(fdmean::fit_common(tiny, opts, kernel),
                 fdmean::precondition_error);
    EXPECT_THROW(fdmean::two_stage(tiny, opts, kernel),
                 fdmean::precondition_error);

    // Independent estimator needs a positive penalty.
    auto indep = make_independent(4, 3, 5, 1);
    EXPECT_THROW(fdmean::fit_independent(indep, opts, kernel),
                 fdmean::precondition_error);

    // Mismatched point lists under a common tag.
    auto bad = make_independent(3, 4, 6, 2);
    bad.design = fdmean::DesignTag::common_random;
    EXPECT_THROW(fdmean::fit_common(bad, opts, kernel),
                 fdmean::precondition_error);

    // Duplicate sampling points cannot be interpolated.
    fdmean::FunctionalDataset dup;
    dup.design = fdmean::DesignTag::common_fixed;
    dup.curves = {{{0.2, 0.2, 0.8}, {1.0, 2.0, 3.0}}};
    EXPECT_THROW(fdmean::fit_common(dup, opts, kernel),
                 fdmean::precondition_error);
    fdmean::SolveOptions smooth;
    smooth.lambda = 1e-3;
    EXPECT_NO_THROW(fdmean::fit_common(dup, smooth, kernel));

    fdmean::SolveOptions negative;
    negative.lambda = -1.0;
    auto data = make_common(4, 6, 3);
    EXPECT_THROW(fdmean::fit_common(data, negative, kernel),
                 fdmean::config_error);

    fdmean::SolveOptions zero_floor;
    zero_floor.interpolation_floor = 0.0;
    EXPECT_THROW(fdmean::fit_common(data, zero_floor, kernel),
                 fdmean::config_error);
}

}  // namespace
