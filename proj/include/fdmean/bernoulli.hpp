#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "fdmean/errors.hpp"

namespace fdmean {

namespace detail {

/// Reduced fraction over 128-bit integers, used only while tabulating
/// Bernoulli polynomial coefficients exactly at construction time.
struct Rational128 {
    __int128 num = 0;
    __int128 den = 1;

    Rational128() = default;
    Rational128(__int128 n, __int128 d) : num(n), den(d) { reduce(); }

    static __int128 abs128(__int128 v) { return v < 0 ? -v : v; }

    void reduce() {
        if (den == 0) throw numerical_error("rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        __int128 a = abs128(num), b = den;
        while (b != 0) { __int128 t = a % b; a = b; b = t; }
        if (a > 1) { num /= a; den /= a; }
    }

    Rational128 operator+(const Rational128& o) const {
        return Rational128(num * o.den + o.num * den, den * o.den);
    }
    Rational128 operator*(const Rational128& o) const {
        return Rational128(num * o.num, den * o.den);
    }
    double to_double() const {
        return static_cast<double>(num) / static_cast<double>(den);
    }
};

} // namespace detail

/// Tabulates the Bernoulli polynomials B_0..B_max_order once (exact
/// rational recurrence, rounded to double at the end) and evaluates
/// them by Horner's rule.  Convention: B_1(t) = t - 1/2.
class BernoulliEvaluator {
public:
    /// Largest polynomial order the exact 128-bit tabulation supports.
    static constexpr int kMaxSupportedOrder = 24;

    explicit BernoulliEvaluator(int max_order) : max_order_(max_order) {
        if (max_order < 1 || max_order > kMaxSupportedOrder)
            throw config_error("BernoulliEvaluator: max_order must be in [1," +
                               std::to_string(kMaxSupportedOrder) + "], got " +
                               std::to_string(max_order));
        tabulate();
    }

    int max_order() const { return max_order_; }

    /// Monomial coefficients of B_k, lowest degree first (size k+1).
    const std::vector<double>& coefficients(int order) const {
        check_order(order);
        return coeff_[static_cast<std::size_t>(order)];
    }

    /// Evaluate B_order(t) for t in [0,1].
    double operator()(int order, double t) const {
        check_order(order);
        if (!(t >= 0.0 && t <= 1.0))
            throw domain_error("BernoulliEvaluator: argument " + std::to_string(t) +
                               " outside [0,1]");
        return horner(coeff_[static_cast<std::size_t>(order)], t);
    }

    /// Evaluate B_order(t) without the domain restriction; used by
    /// property checks on the whole real line (difference identity).
    double eval_unchecked(int order, double t) const {
        check_order(order);
        return horner(coeff_[static_cast<std::size_t>(order)], t);
    }

private:
    void check_order(int order) const {
        if (order < 0 || order > max_order_)
            throw config_error("BernoulliEvaluator: order " + std::to_string(order) +
                               " outside tabulated range [0," +
                               std::to_string(max_order_) + "]");
    }

    static double horner(const std::vector<double>& c, double t) {
        double acc = 0.0;
        for (std::size_t j = c.size(); j-- > 0;) acc = acc * t + c[j];
        return acc;
    }

    void tabulate() {
        using detail::Rational128;
        const int kmax = max_order_;
        // Pascal's triangle in 128-bit integers; C(25,12) fits easily.
        std::vector<std::vector<__int128>> binom(static_cast<std::size_t>(kmax) + 2);
        for (std::size_t i = 0; i < binom.size(); ++i) {
            binom[i].assign(i + 1, 1);
            for (std::size_t j = 1; j < i; ++j)
                binom[i][j] = binom[i - 1][j - 1] + binom[i - 1][j];
        }
        // Bernoulli numbers b_k via b_k = -1/(k+1) * sum_{j<k} C(k+1,j) b_j.
        std::vector<Rational128> b(static_cast<std::size_t>(kmax) + 1);
        b[0] = Rational128(1, 1);
        for (int k = 1; k <= kmax; ++k) {
            Rational128 acc(0, 1);
            for (int j = 0; j < k; ++j)
                acc = acc + Rational128(binom[static_cast<std::size_t>(k) + 1]
                                             [static_cast<std::size_t>(j)], 1) *
                                b[static_cast<std::size_t>(j)];
            b[static_cast<std::size_t>(k)] = acc * Rational128(-1, k + 1);
        }
        // B_k(t) = sum_j C(k,j) b_{k-j} t^j, stored lowest degree first.
        coeff_.assign(static_cast<std::size_t>(kmax) + 1, {});
        for (int k = 0; k <= kmax; ++k) {
            auto& row = coeff_[static_cast<std::size_t>(k)];
            row.resize(static_cast<std::size_t>(k) + 1);
            for (int j = 0; j <= k; ++j) {
                Rational128 c = Rational128(binom[static_cast<std::size_t>(k)]
                                                 [static_cast<std::size_t>(j)], 1) *
                                b[static_cast<std::size_t>(k - j)];
                row[static_cast<std::size_t>(j)] = c.to_double();
            }
        }
    }

    int max_order_;
    std::vector<std::vector<double>> coeff_;
};

} // namespace fdmean
