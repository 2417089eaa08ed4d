#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdmean/errors.hpp"
#include "fdmean/kernel.hpp"

namespace fdmean {

/// Fitted mean curve in representer form,
///   ghat(t) = sum_k poly_coeffs[k] t^k + sum_j kernel_coeffs[j] K(t, knots[j]).
/// `lambda` is the penalty the caller requested; `lambda_eff` the value
/// actually placed in the linear system after the interpolation floor.
/// `thinned` marks fits whose knot set was subsampled for size (the
/// exact-representer orthogonality constraint then no longer binds).
struct SplineEstimate {
    int r = 2;
    double lambda = 0.0;
    double lambda_eff = 0.0;
    std::vector<double> knots;
    std::vector<double> poly_coeffs;
    std::vector<double> kernel_coeffs;
    bool thinned = false;
};

/// Evaluate the fitted curve at t in [0,1].
inline double evaluate(const SplineEstimate& est, double t,
                       const SobolevKernel& kernel) {
    if (!(t >= 0.0 && t <= 1.0))
        throw domain_error("evaluate: argument " + std::to_string(t) +
                           " outside [0,1]");
    if (kernel.order() != est.r)
        throw precondition_error("evaluate: kernel order " +
                                 std::to_string(kernel.order()) +
                                 " does not match estimate order " +
                                 std::to_string(est.r));
    double acc = 0.0;
    for (std::size_t k = est.poly_coeffs.size(); k-- > 0;)
        acc = acc * t + est.poly_coeffs[k];
    for (std::size_t j = 0; j < est.knots.size(); ++j)
        acc += est.kernel_coeffs[j] * kernel.eval_unchecked(t, est.knots[j]);
    return acc;
}

/// Evaluate the fitted curve over a whole grid.
inline std::vector<double> evaluate(const SplineEstimate& est,
                                    std::span<const double> grid,
                                    const SobolevKernel& kernel) {
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        out[i] = evaluate(est, grid[i], kernel);
    return out;
}

/// Squared Sobolev seminorm of the kernel part, c' Sigma c with
/// Sigma the Gram matrix on the knots.  Zero for pure-polynomial fits.
inline double roughness(const SplineEstimate& est, const SobolevKernel& kernel) {
    if (kernel.order() != est.r)
        throw precondition_error("roughness: kernel order does not match estimate");
    if (est.knots.empty()) return 0.0;
    Eigen::Map<const Eigen::VectorXd> c(est.kernel_coeffs.data(),
                                        static_cast<Eigen::Index>(
                                            est.kernel_coeffs.size()));
    Eigen::MatrixXd sigma = kernel.gram(est.knots);
    return c.dot(sigma * c);
}

/// Precomputed cross-kernel rows for repeatedly evaluating estimates
/// that share one knot list over one fixed grid (tuning loops, ISE
/// scoring inside sweeps).
class GridEvaluator {
public:
    GridEvaluator(std::span<const double> grid, std::span<const double> knots,
                  const SobolevKernel& kernel)
        : r_(kernel.order()),
          grid_(grid.begin(), grid.end()),
          cross_(static_cast<Eigen::Index>(grid.size()),
                 static_cast<Eigen::Index>(knots.size())) {
        for (std::size_t i = 0; i < grid.size(); ++i)
            for (std::size_t j = 0; j < knots.size(); ++j)
                cross_(static_cast<Eigen::Index>(i),
                       static_cast<Eigen::Index>(j)) =
                    kernel.eval_unchecked(grid[i], knots[j]);
    }

    /// Values of poly(d) + K_grid * c on the stored grid.
    Eigen::VectorXd values(const Eigen::VectorXd& kernel_coeffs,
                           const Eigen::VectorXd& poly_coeffs) const {
        Eigen::VectorXd out = cross_ * kernel_coeffs;
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            double t = grid_[i], acc = 0.0;
            for (Eigen::Index k = poly_coeffs.size(); k-- > 0;)
                acc = acc * t + poly_coeffs[k];
            out(static_cast<Eigen::Index>(i)) += acc;
        }
        return out;
    }

    const std::vector<double>& grid() const { return grid_; }
    int order() const { return r_; }

private:
    int r_;
    std::vector<double> grid_;
    Eigen::MatrixXd cross_;
};

} // namespace fdmean
