#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fdmean/bernoulli.hpp"
#include "fdmean/errors.hpp"

namespace {

// Reference construction along a different route than the implementation:
// integrate B_{n-1} (times n) and fix the constant so the polynomial has
// zero mean on [0, 1].  Coefficients are ascending in t.
std::vector<std::vector<double>> reference_coefficients(int max_order) {
    std::vector<std::vector<double>> coeffs(max_order + 1);
    coeffs[0] = {1.0};
    for (int n = 1; n <= max_order; ++n) {
        std::vector<double> c(n + 1, 0.0);
        for (int j = 0; j < n; ++j) {
            c[j + 1] = static_cast<double>(n) * coeffs[n - 1][j] /
                       static_cast<double>(j + 1);
        }
        double mean = 0.0;
        for (int j = 1; j <= n; ++j) mean += c[j] / static_cast<double>(j + 1);
        c[0] = -mean;
        coeffs[n] = c;
    }
    return coeffs;
}

double horner(const std::vector<double>& c, double t) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
    return acc;
}

TEST(Bernoulli, PinnedValues) {
    fdmean::BernoulliEvaluator bern(8);
    EXPECT_NEAR(bern(1, 0.25), -0.25, 1e-15);
    EXPECT_NEAR(bern(2, 0.0), 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(bern(3, 0.3), 0.042, 1e-15);
    EXPECT_NEAR(bern(4, 0.0), -1.0 / 30.0, 1e-15);
    EXPECT_NEAR(bern(4, 0.7), 0.010766666666666667, 1e-15);
    EXPECT_NEAR(bern(6, 0.25), -0.0003603980654761905, 1e-16);
}

TEST(Bernoulli, MatchesIntegrationRecurrence) {
    const int max_order = 12;
    fdmean::BernoulliEvaluator bern(max_order);
    auto ref = reference_coefficients(max_order);
    for (int n = 0; n <= max_order; ++n) {
        for (int i = 0; i <= 40; ++i) {
            double t = static_cast<double>(i) / 40.0;
            EXPECT_NEAR(bern(n, t), horner(ref[n], t), 1e-12)
                << "order " << n << " t " << t;
        }
    }
}

TEST(Bernoulli, CoefficientsMatchReference) {
    const int max_order = 10;
    fdmean::BernoulliEvaluator bern(max_order);
    auto ref = reference_coefficients(max_order);
    for (int n = 0; n <= max_order; ++n) {
        auto got = bern.coefficients(n);
        ASSERT_EQ(got.size(), ref[n].size());
        for (std::size_t j = 0; j < got.size(); ++j) {
            EXPECT_NEAR(got[j], ref[n][j], 1e-12) << "order " << n << " coeff "
                                                  << j;
        }
    }
}

TEST(Bernoulli, DifferenceProperty) {
    // B_n(t + 1) - B_n(t) = n t^{n-1}; eval_unchecked allows t outside [0, 1].
    fdmean::BernoulliEvaluator bern(10);
    for (int n = 1; n <= 10; ++n) {
        for (double t : {0.0, 0.17, 0.5, 0.93}) {
            double lhs = bern.eval_unchecked(n, t + 1.0) -
                         bern.eval_unchecked(n, t);
            double rhs = n * std::pow(t, n - 1);
            EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(rhs)))
                << "order " << n << " t " << t;
        }
    }
}

TEST(Bernoulli, ReflectionSymmetry) {
    fdmean::BernoulliEvaluator bern(12);
    for (int n = 0; n <= 12; ++n) {
        double sign = (n % 2 == 0) ? 1.0 : -1.0;
        for (double t : {0.0, 0.2, 0.41, 0.77, 1.0}) {
            EXPECT_NEAR(bern(n, 1.0 - t), sign * bern(n, t), 1e-13)
                << "order " << n << " t " << t;
        }
    }
}

TEST(Bernoulli, ZeroMeanOnUnitInterval) {
    // Exact integral from the coefficients: sum c_j / (j + 1).
    fdmean::BernoulliEvaluator bern(12);
    for (int n = 1; n <= 12; ++n) {
        auto c = bern.coefficients(n);
        double integral = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) {
            integral += c[j] / static_cast<double>(j + 1);
        }
        EXPECT_NEAR(integral, 0.0, 1e-14) << "order " << n;
    }
}

TEST(Bernoulli, DerivativeProperty) {
    // d/dt B_n = n B_{n-1}, checked on coefficients.
    fdmean::BernoulliEvaluator bern(9);
    for (int n = 1; n <= 9; ++n) {
        auto cn = bern.coefficients(n);
        auto cm = bern.coefficients(n - 1);
        for (std::size_t j = 0; j + 1 < cn.size(); ++j) {
            double deriv = static_cast<double>(j + 1) * cn[j + 1];
            EXPECT_NEAR(deriv, n * cm[j], 1e-12) << "order " << n << " coeff "
                                                 << j;
        }
    }
}

TEST(Bernoulli, Errors) {
    EXPECT_THROW(fdmean::BernoulliEvaluator(-1), fdmean::config_error);
    EXPECT_THROW(fdmean::BernoulliEvaluator(25), fdmean::config_error);
    EXPECT_NO_THROW(fdmean::BernoulliEvaluator(24));

    fdmean::BernoulliEvaluator bern(4);
    EXPECT_THROW(bern(5, 0.5), fdmean::config_error);
    EXPECT_THROW(bern(-1, 0.5), fdmean::config_error);
    EXPECT_THROW(bern(2, 1.5), fdmean::domain_error);
    EXPECT_THROW(bern(2, -0.1), fdmean::domain_error);
    EXPECT_THROW(bern.coefficients(5), fdmean::config_error);
}

}  // namespace
