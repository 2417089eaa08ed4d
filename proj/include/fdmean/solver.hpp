#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fdmean/dataset.hpp"
#include "fdmean/errors.hpp"
#include "fdmean/estimate.hpp"
#include "fdmean/kernel.hpp"

namespace fdmean {

/// Options shared by the fitting routines.  `interpolation_floor` is
/// the smallest effective penalty ever placed in a common-design or
/// two-stage system (requesting lambda below it means "interpolate").
/// `max_knots` bounds the size of the linear system; pooled problems
/// with more rows switch to a thinned knot basis solved via normal
/// equations.
struct SolveOptions {
    double lambda = 0.0;
    double interpolation_floor = 1e-12;
    std::size_t max_knots = 2000;

    void validate() const {
        if (!std::isfinite(lambda) || lambda < 0.0)
            throw config_error("SolveOptions: lambda must be a finite nonnegative real");
        if (!std::isfinite(interpolation_floor) || interpolation_floor <= 0.0)
            throw config_error("SolveOptions: interpolation_floor must be positive");
        if (max_knots < 1)
            throw config_error("SolveOptions: max_knots must be >= 1");
    }
};

namespace detail {

/// Weighted regression rows: minimize sum_k (y_k - g(t_k))^2 / winv_k
/// + lambda * |g|^2, i.e. winv_k is the reciprocal row weight that
/// appears on the diagonal of the exact-representer system.
struct RowSet {
    std::vector<double> t, y, winv;
    std::size_t size() const { return t.size(); }
};

/// One dataset's penalized least-squares problem with every
/// lambda-independent quantity (Gram blocks, polynomial columns,
/// normal-equation accumulations) cached, so tuning loops pay only a
/// factorization per lambda.
class PenalizedSystem {
public:
    struct Fit {
        Eigen::VectorXd c;  // kernel coefficients, one per knot
        Eigen::VectorXd d;  // polynomial coefficients, size r
        double lambda_eff = 0.0;
        double rss_w = 0.0;  // weighted residual sum of squares
        double edf = std::numeric_limits<double>::quiet_NaN();
    };

    PenalizedSystem(RowSet rows, const SobolevKernel& kernel, std::size_t max_knots)
        : kernel_(&kernel), r_(kernel.order()), rows_(std::move(rows)) {
        const std::size_t n = rows_.size();
        if (n == 0) throw precondition_error("solver: empty row set");
        y_ = Eigen::Map<const Eigen::VectorXd>(rows_.y.data(),
                                               static_cast<Eigen::Index>(n));
        winv_ = Eigen::Map<const Eigen::VectorXd>(rows_.winv.data(),
                                                  static_cast<Eigen::Index>(n));
        thinned_ = n > max_knots;
        if (!thinned_) {
            knots_ = rows_.t;
            Q_ = kernel.gram(knots_);
            phi_ = vandermonde(rows_.t);
        } else {
            pick_knots(max_knots);
            Q_ = kernel.gram(knots_);
            accumulate_normal_equations();
        }
    }

    Fit solve(double lambda_eff, bool want_edf = false) const {
        if (!std::isfinite(lambda_eff) || lambda_eff < 0.0)
            throw config_error("solver: effective lambda must be finite and >= 0");
        return thinned_ ? solve_thinned(lambda_eff, want_edf)
                        : solve_exact(lambda_eff, want_edf);
    }

    const std::vector<double>& knots() const { return knots_; }
    bool thinned() const { return thinned_; }
    std::size_t rows() const { return rows_.size(); }
    int order() const { return r_; }

private:
    Eigen::MatrixXd vandermonde(const std::vector<double>& pts) const {
        Eigen::MatrixXd v(static_cast<Eigen::Index>(pts.size()), r_);
        for (Eigen::Index i = 0; i < v.rows(); ++i) {
            double p = 1.0;
            for (int k = 0; k < r_; ++k) {
                v(i, k) = p;
                p *= pts[static_cast<std::size_t>(i)];
            }
        }
        return v;
    }

    /// Distinct sorted sampling points, rank-subsampled to the cap.
    void pick_knots(std::size_t max_knots) {
        std::vector<double> distinct = rows_.t;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        if (distinct.size() <= max_knots) {
            knots_ = std::move(distinct);
            return;
        }
        knots_.resize(max_knots);
        const double step = static_cast<double>(distinct.size() - 1) /
                            static_cast<double>(max_knots - 1);
        for (std::size_t j = 0; j < max_knots; ++j) {
            std::size_t idx = static_cast<std::size_t>(
                std::llround(static_cast<double>(j) * step));
            knots_[j] = distinct[std::min(idx, distinct.size() - 1)];
        }
    }

    /// G = B' W B, gy = B' W y, yWy over the thinned basis
    /// B = [K(t_row, knot) | t_row^0..t_row^{r-1}], accumulated in row
    /// blocks so memory stays bounded for large pooled designs.
    void accumulate_normal_equations() {
        const Eigen::Index k = static_cast<Eigen::Index>(knots_.size());
        const Eigen::Index p = k + r_;
        const Eigen::Index n = static_cast<Eigen::Index>(rows_.size());
        G_.setZero(p, p);
        gy_.setZero(p);
        yWy_ = 0.0;
        const Eigen::Index chunk = 1024;
        Eigen::MatrixXd b(std::min(chunk, n), p);
        for (Eigen::Index lo = 0; lo < n; lo += chunk) {
            const Eigen::Index rows = std::min(chunk, n - lo);
            b.resize(rows, p);
            for (Eigen::Index i = 0; i < rows; ++i) {
                const double t = rows_.t[static_cast<std::size_t>(lo + i)];
                for (Eigen::Index j = 0; j < k; ++j)
                    b(i, j) = kernel_->eval_unchecked(
                        t, knots_[static_cast<std::size_t>(j)]);
                double pw = 1.0;
                for (int q = 0; q < r_; ++q) {
                    b(i, k + q) = pw;
                    pw *= t;
                }
            }
            Eigen::VectorXd w =
                winv_.segment(lo, rows).cwiseInverse();  // actual row weights
            Eigen::MatrixXd bw = w.asDiagonal() * b;
            G_.noalias() += b.transpose() * bw;
            gy_.noalias() += bw.transpose() * y_.segment(lo, rows);
            yWy_ += y_.segment(lo, rows).dot(w.asDiagonal() * y_.segment(lo, rows));
        }
    }

    [[noreturn]] void fail(const char* what, double lambda_eff) const {
        throw numerical_error(std::string(what) +
                              ": factorization failed after jitter retry (rows=" +
                              std::to_string(rows_.size()) +
                              ", knots=" + std::to_string(knots_.size()) +
                              ", lambda_eff=" + std::to_string(lambda_eff) + ")");
    }

    Fit solve_exact(double lambda_eff, bool want_edf) const {
        const Eigen::Index n = static_cast<Eigen::Index>(rows_.size());
        Fit fit;
        fit.lambda_eff = lambda_eff;
        Eigen::LDLT<Eigen::MatrixXd> mfac;
        Eigen::LDLT<Eigen::MatrixXd> sfac;
        bool ok = false;
        for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
            Eigen::MatrixXd m = Q_;
            m.diagonal() += lambda_eff * winv_;
            if (attempt > 0) m.diagonal().array() += 1e-10;
            mfac.compute(m);
            if (mfac.info() != Eigen::Success) continue;
            Eigen::VectorXd minv_y = mfac.solve(y_);
            Eigen::MatrixXd minv_p = mfac.solve(phi_);
            Eigen::MatrixXd s = phi_.transpose() * minv_p;
            sfac.compute(s);
            if (sfac.info() != Eigen::Success) continue;
            fit.d = sfac.solve(phi_.transpose() * minv_y);
            fit.c = minv_y - minv_p * fit.d;
            ok = fit.c.allFinite() && fit.d.allFinite();
            if (ok && want_edf) {
                // edf = tr(H) = n - lambda * sum_k winv_k * C_kk with
                // C = dc/dy = M^{-1} - M^{-1} Phi S^{-1} Phi' M^{-1}.
                Eigen::MatrixXd minv =
                    mfac.solve(Eigen::MatrixXd::Identity(n, n));
                double acc = 0.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    Eigen::VectorXd hi = minv_p.row(i).transpose();
                    double corr = hi.dot(sfac.solve(hi));
                    acc += winv_(i) * (minv(i, i) - corr);
                }
                fit.edf = static_cast<double>(n) - lambda_eff * acc;
            }
        }
        if (!ok) fail("solver(exact)", lambda_eff);
        // Residual identity for the exact system: y - yhat = lambda W^{-1} c.
        fit.rss_w = lambda_eff * lambda_eff *
                    fit.c.array().square().matrix().dot(winv_);
        return fit;
    }

    Fit solve_thinned(double lambda_eff, bool want_edf) const {
        const Eigen::Index k = static_cast<Eigen::Index>(knots_.size());
        const Eigen::Index p = k + r_;
        Fit fit;
        fit.lambda_eff = lambda_eff;
        Eigen::LDLT<Eigen::MatrixXd> pfac;
        Eigen::VectorXd theta;
        bool ok = false;
        for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
            Eigen::MatrixXd pm = G_;
            pm.topLeftCorner(k, k) += lambda_eff * Q_;
            if (attempt > 0) pm.diagonal().array() += 1e-10;
            pfac.compute(pm);
            if (pfac.info() != Eigen::Success) continue;
            theta = pfac.solve(gy_);
            ok = theta.allFinite();
        }
        if (!ok) fail("solver(thinned)", lambda_eff);
        fit.c = theta.head(k);
        fit.d = theta.tail(r_);
        fit.rss_w = std::max(
            0.0, yWy_ - 2.0 * theta.dot(gy_) + theta.dot(G_ * theta));
        if (want_edf) {
            // tr(H) = p - lambda * tr((G + lambda Qt)^{-1} Qt) with
            // Qt = blkdiag(Q, 0); only the first k columns contribute.
            Eigen::MatrixXd qpad = Eigen::MatrixXd::Zero(p, k);
            qpad.topRows(k) = Q_;
            Eigen::MatrixXd x = pfac.solve(qpad);
            fit.edf = static_cast<double>(p) -
                      lambda_eff * x.diagonal().head(k).sum();
        }
        return fit;
    }

    const SobolevKernel* kernel_;
    int r_;
    RowSet rows_;
    Eigen::VectorXd y_, winv_;
    std::vector<double> knots_;
    bool thinned_ = false;
    Eigen::MatrixXd Q_;    // Gram matrix on the knots
    Eigen::MatrixXd phi_;  // polynomial columns on the rows (exact path)
    Eigen::MatrixXd G_;    // B' W B           (thinned path)
    Eigen::VectorXd gy_;   // B' W y           (thinned path)
    double yWy_ = 0.0;     // y' W y           (thinned path)
};

/// Turn a solve into a SplineEstimate: exactly-equal knots are merged
/// (summing their coefficients, which leaves evaluation, roughness and
/// the orthogonality constraint unchanged) so the knot list is sorted
/// and distinct.
inline SplineEstimate assemble_estimate(const PenalizedSystem& sys,
                                        const PenalizedSystem::Fit& fit,
                                        double lambda_requested) {
    SplineEstimate est;
    est.r = sys.order();
    est.lambda = lambda_requested;
    est.lambda_eff = fit.lambda_eff;
    est.thinned = sys.thinned();
    est.poly_coeffs.assign(fit.d.data(), fit.d.data() + fit.d.size());

    const std::vector<double>& raw = sys.knots();
    std::vector<std::size_t> idx(raw.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
    est.knots.reserve(raw.size());
    est.kernel_coeffs.reserve(raw.size());
    for (std::size_t i : idx) {
        if (!est.knots.empty() && est.knots.back() == raw[i]) {
            est.kernel_coeffs.back() += fit.c(static_cast<Eigen::Index>(i));
        } else {
            est.knots.push_back(raw[i]);
            est.kernel_coeffs.push_back(fit.c(static_cast<Eigen::Index>(i)));
        }
    }
    return est;
}

inline std::size_t count_distinct_sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return static_cast<std::size_t>(
        std::distance(v.begin(), std::unique(v.begin(), v.end())));
}

/// Rows for the common-design pooled estimator: one row per shared
/// sampling point carrying the across-curve average, reciprocal
/// weight m.  Performs the structural checks shared by fitting and
/// tuning.
inline RowSet build_common_rows(const FunctionalDataset& data,
                                const SobolevKernel& kernel) {
    data.validate();
    if (!data.has_common_points())
        throw precondition_error(
            "fit_common: curves do not share one sampling point list");
    const std::vector<double>& pts = data.curves[0].points;
    const std::size_t m = pts.size();
    if (count_distinct_sorted(pts) < static_cast<std::size_t>(kernel.order()))
        throw precondition_error(
            "fit_common: identifiability needs at least r=" +
            std::to_string(kernel.order()) + " distinct sampling points");
    RowSet rows;
    rows.t = pts;
    rows.y.assign(m, 0.0);
    for (const Curve& c : data.curves)
        for (std::size_t j = 0; j < m; ++j) rows.y[j] += c.values[j];
    const double n = static_cast<double>(data.num_curves());
    for (double& v : rows.y) v /= n;
    rows.winv.assign(m, static_cast<double>(m));
    return rows;
}

/// Rows for the independent-design pooled estimator: every observation
/// of curve i enters with reciprocal weight n * m_i.
inline RowSet build_independent_rows(const FunctionalDataset& data,
                                     const SobolevKernel& kernel) {
    data.validate();
    RowSet rows;
    const std::size_t total = data.total_observations();
    rows.t.reserve(total);
    rows.y.reserve(total);
    rows.winv.reserve(total);
    const double n = static_cast<double>(data.num_curves());
    for (const Curve& c : data.curves) {
        const double winv = n * static_cast<double>(c.size());
        for (std::size_t j = 0; j < c.size(); ++j) {
            rows.t.push_back(c.points[j]);
            rows.y.push_back(c.values[j]);
            rows.winv.push_back(winv);
        }
    }
    if (count_distinct_sorted(rows.t) < static_cast<std::size_t>(kernel.order()))
        throw precondition_error(
            "fit_independent: identifiability needs at least r=" +
            std::to_string(kernel.order()) + " distinct pooled sampling points");
    return rows;
}

} // namespace detail

/// Pooled estimator for a common design: smooth the pointwise averages
/// (Ybar_j at the shared points) with effective penalty
/// max(lambda, interpolation_floor).
inline SplineEstimate fit_common(const FunctionalDataset& data,
                                 const SolveOptions& opts,
                                 const SobolevKernel& kernel) {
    opts.validate();
    detail::RowSet rows = detail::build_common_rows(data, kernel);
    if (opts.lambda < opts.interpolation_floor &&
        detail::count_distinct_sorted(rows.t) < rows.size())
        throw precondition_error(
            "fit_common: duplicate sampling points make interpolation degenerate");
    detail::PenalizedSystem sys(std::move(rows), kernel, opts.max_knots);
    auto fit = sys.solve(std::max(opts.lambda, opts.interpolation_floor));
    return detail::assemble_estimate(sys, fit, opts.lambda);
}

/// Pooled estimator for independent designs: every observation enters
/// as a weighted row with reciprocal weight n * m_i.  Requires a
/// strictly positive penalty; the interpolation limit only exists for
/// common designs.
inline SplineEstimate fit_independent(const FunctionalDataset& data,
                                      const SolveOptions& opts,
                                      const SobolevKernel& kernel) {
    opts.validate();
    if (opts.lambda == 0.0)
        throw precondition_error(
            "fit_independent: lambda must be positive (interpolation is only "
            "defined for common designs; use fit_common)");
    detail::RowSet rows = detail::build_independent_rows(data, kernel);
    detail::PenalizedSystem sys(std::move(rows), kernel, opts.max_knots);
    auto fit = sys.solve(opts.lambda);
    return detail::assemble_estimate(sys, fit, opts.lambda);
}

/// Two-stage estimator: smooth each curve separately at the same
/// penalty, then average the fitted curves.  Under a common design the
/// per-curve systems share their matrix, and the average reproduces
/// fit_common; under independent designs the result lives on the union
/// of the per-curve knots.
inline SplineEstimate two_stage(const FunctionalDataset& data,
                                const SolveOptions& opts,
                                const SobolevKernel& kernel) {
    data.validate();
    opts.validate();
    const double lambda_eff = std::max(opts.lambda, opts.interpolation_floor);
    const std::size_t n = data.num_curves();
    const int r = kernel.order();

    SplineEstimate out;
    out.r = r;
    out.lambda = opts.lambda;
    out.lambda_eff = lambda_eff;
    Eigen::VectorXd dsum = Eigen::VectorXd::Zero(r);
    std::vector<double> union_knots;
    std::vector<double> union_coeffs;

    for (std::size_t i = 0; i < n; ++i) {
        const Curve& c = data.curves[i];
        const std::size_t distinct = detail::count_distinct_sorted(c.points);
        if (distinct < static_cast<std::size_t>(r))
            throw precondition_error("two_stage: curve " + std::to_string(i) +
                                     " has fewer than r=" + std::to_string(r) +
                                     " distinct sampling points");
        if (opts.lambda < opts.interpolation_floor && distinct < c.size())
            throw precondition_error("two_stage: curve " + std::to_string(i) +
                                     " has duplicate points in interpolation mode");
        detail::RowSet rows;
        rows.t = c.points;
        rows.y = c.values;
        rows.winv.assign(c.size(), static_cast<double>(c.size()));
        detail::PenalizedSystem sys(std::move(rows), kernel, opts.max_knots);
        auto fit = sys.solve(lambda_eff);
        out.thinned = out.thinned || sys.thinned();
        dsum += fit.d;
        const auto& knots = sys.knots();
        for (std::size_t j = 0; j < knots.size(); ++j) {
            union_knots.push_back(knots[j]);
            union_coeffs.push_back(fit.c(static_cast<Eigen::Index>(j)) /
                                   static_cast<double>(n));
        }
    }

    out.poly_coeffs.resize(static_cast<std::size_t>(r));
    for (int k = 0; k < r; ++k)
        out.poly_coeffs[static_cast<std::size_t>(k)] =
            dsum(k) / static_cast<double>(n);

    // Merge exactly-equal knots across curves (always true under a
    // common design, occasional under independent sampling).
    std::vector<std::size_t> idx(union_knots.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return union_knots[a] < union_knots[b];
    });
    for (std::size_t i : idx) {
        if (!out.knots.empty() && out.knots.back() == union_knots[i]) {
            out.kernel_coeffs.back() += union_coeffs[i];
        } else {
            out.knots.push_back(union_knots[i]);
            out.kernel_coeffs.push_back(union_coeffs[i]);
        }
    }
    return out;
}

} // namespace fdmean
