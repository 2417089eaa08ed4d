#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fdmean/errors.hpp"
#include "fdmean/rng.hpp"

namespace fdmean {

namespace detail {

/// Sum of coeffs[k] * phi_{k+1}(t) over the cosine basis
/// phi_1 = 1, phi_{k+1}(t) = sqrt(2) cos(k pi t), evaluated with the
/// Chebyshev three-term recurrence (one std::cos call per point).
inline double cosine_series(const std::vector<double>& coeffs, double t) {
    if (coeffs.empty()) return 0.0;
    double acc = coeffs[0];
    if (coeffs.size() == 1) return acc;
    const double c1 = std::cos(M_PI * t);
    const double sq2 = std::sqrt(2.0);
    double prev = 1.0, cur = c1;
    for (std::size_t k = 1; k < coeffs.size(); ++k) {
        acc += coeffs[k] * sq2 * cur;
        double nxt = 2.0 * c1 * cur - prev;
        prev = cur;
        cur = nxt;
    }
    return acc;
}

} // namespace detail

/// Random-function model: X = sum_k (mean_coeffs[k] + score_scales[k] Z_k) phi_k
/// with Z_k ~ U[-sqrt3, sqrt3] i.i.d. (unit variance), observed with
/// N(0, noise_sd^2) measurement noise.  Defaults follow the simulation
/// protocol: mean_coeffs[k-1] = 4 (-1)^{k+1} k^{-2} and
/// score_scales[k-1] = (-1)^{k+1} k^{-0.55}, k = 1..50.
struct ProcessSpec {
    int num_terms = 50;
    std::vector<double> mean_coeffs;
    std::vector<double> score_scales;
    double noise_sd = 0.5;

    ProcessSpec() : ProcessSpec(50) {}

    explicit ProcessSpec(int terms) : num_terms(terms) {
        if (terms < 1)
            throw config_error("ProcessSpec: num_terms must be >= 1");
        mean_coeffs.resize(static_cast<std::size_t>(terms));
        score_scales.resize(static_cast<std::size_t>(terms));
        for (int k = 1; k <= terms; ++k) {
            double sgn = (k % 2 == 1) ? 1.0 : -1.0;
            mean_coeffs[static_cast<std::size_t>(k - 1)] = 4.0 * sgn / (k * k);
            score_scales[static_cast<std::size_t>(k - 1)] =
                sgn * std::pow(static_cast<double>(k), -0.55);
        }
    }

    void validate() const {
        if (num_terms < 1 ||
            mean_coeffs.size() != static_cast<std::size_t>(num_terms) ||
            score_scales.size() != static_cast<std::size_t>(num_terms))
            throw config_error("ProcessSpec: coefficient lengths do not match num_terms");
        if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd))
            throw config_error("ProcessSpec: noise_sd must be a finite nonnegative real");
    }

    /// Mean function g0(t) for t in [0,1].
    double mean_at(double t) const {
        if (!(t >= 0.0 && t <= 1.0))
            throw domain_error("ProcessSpec::mean_at: argument " +
                               std::to_string(t) + " outside [0,1]");
        return detail::cosine_series(mean_coeffs, t);
    }
};

/// One realized curve: the combined basis coefficients of mean plus
/// scaled scores, evaluable anywhere on [0,1].
struct CurveSample {
    std::vector<double> coeffs;

    double operator()(double t) const {
        if (!(t >= 0.0 && t <= 1.0))
            throw domain_error("CurveSample: argument " + std::to_string(t) +
                               " outside [0,1]");
        return detail::cosine_series(coeffs, t);
    }
};

/// Draw the Karhunen-Loeve scores for one curve from `scores` and
/// assemble the realized coefficient vector.
inline CurveSample draw_curve(const ProcessSpec& spec, SplitMix64& scores) {
    spec.validate();
    CurveSample out;
    out.coeffs.resize(static_cast<std::size_t>(spec.num_terms));
    const double s3 = std::sqrt(3.0);
    for (std::size_t k = 0; k < out.coeffs.size(); ++k)
        out.coeffs[k] = spec.mean_coeffs[k] +
                        spec.score_scales[k] * scores.uniform(-s3, s3);
    return out;
}

} // namespace fdmean
