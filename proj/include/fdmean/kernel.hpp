#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdmean/bernoulli.hpp"
#include "fdmean/errors.hpp"

namespace fdmean {

/// Reproducing kernel of the order-r Sobolev space on [0,1],
///   K(s,t) = B_r(s) B_r(t) / (r!)^2 - B_{2r}(|s-t|) / (2r)!.
/// Holds the polynomial order r together with a Bernoulli evaluator
/// tabulated at least up to order 2r.
class SobolevKernel {
public:
    static constexpr int kMaxOrder = BernoulliEvaluator::kMaxSupportedOrder / 2;

    explicit SobolevKernel(int r)
        : SobolevKernel(r, BernoulliEvaluator(check_r(r) * 2)) {}

    SobolevKernel(int r, BernoulliEvaluator bernoulli)
        : r_(check_r(r)), bern_(std::move(bernoulli)) {
        if (bern_.max_order() < 2 * r_)
            throw config_error("SobolevKernel: evaluator tabulated to order " +
                               std::to_string(bern_.max_order()) +
                               ", needs at least " + std::to_string(2 * r_));
        double rfact = 1.0, r2fact = 1.0;
        for (int k = 2; k <= r_; ++k) rfact *= k;
        for (int k = 2; k <= 2 * r_; ++k) r2fact *= k;
        // Pre-scale the coefficient arrays so the hot path is two Horner
        // evaluations and a multiply-subtract.
        low_ = bern_.coefficients(r_);
        for (double& c : low_) c /= rfact;
        high_ = bern_.coefficients(2 * r_);
        for (double& c : high_) c /= r2fact;
    }

    int order() const { return r_; }
    const BernoulliEvaluator& bernoulli() const { return bern_; }

    /// K(s,t) with s,t validated to lie in [0,1].
    double operator()(double s, double t) const {
        if (!(s >= 0.0 && s <= 1.0) || !(t >= 0.0 && t <= 1.0))
            throw domain_error("SobolevKernel: arguments (" + std::to_string(s) +
                               ", " + std::to_string(t) + ") outside [0,1]^2");
        return eval_unchecked(s, t);
    }

    /// Same kernel without the domain check; inner loops call this after
    /// the containing dataset has been validated once.
    double eval_unchecked(double s, double t) const {
        return horner(low_, s) * horner(low_, t) -
               horner(high_, s < t ? t - s : s - t);
    }

    /// Dense symmetric Gram matrix K(p_i, p_j); points must be nonempty
    /// and inside [0,1].
    Eigen::MatrixXd gram(std::span<const double> points) const {
        if (points.empty())
            throw domain_error("SobolevKernel::gram: empty point list");
        for (double p : points)
            if (!(p >= 0.0 && p <= 1.0))
                throw domain_error("SobolevKernel::gram: point " +
                                   std::to_string(p) + " outside [0,1]");
        const Eigen::Index n = static_cast<Eigen::Index>(points.size());
        Eigen::MatrixXd g(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j <= i; ++j) {
                double v = eval_unchecked(points[static_cast<std::size_t>(i)],
                                          points[static_cast<std::size_t>(j)]);
                g(i, j) = v;
                g(j, i) = v;
            }
        }
        return g;
    }

private:
    static int check_r(int r) {
        if (r < 1 || r > kMaxOrder)
            throw config_error("SobolevKernel: order r must be in [1," +
                               std::to_string(kMaxOrder) + "], got " +
                               std::to_string(r));
        return r;
    }

    static double horner(const std::vector<double>& c, double t) {
        double acc = 0.0;
        for (std::size_t j = c.size(); j-- > 0;) acc = acc * t + c[j];
        return acc;
    }

    int r_;
    BernoulliEvaluator bern_;
    std::vector<double> low_;   // coefficients of B_r / r!
    std::vector<double> high_;  // coefficients of B_{2r} / (2r)!
};

} // namespace fdmean
