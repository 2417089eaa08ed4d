#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace fdmean {

namespace detail {

/// SplitMix64 finalizer (Vigna); also used as the mixing step when
/// deriving stream keys.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Inverse standard-normal CDF: Acklam's rational approximation
/// followed by one Halley refinement against erfc, good to ~1e-15
/// over (0,1).  Pure arithmetic, so results are identical for a
/// given input everywhere.
inline double norm_inv_cdf(double p) {
    constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
    constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
    constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
    constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley step: e = Phi(x) - p, u = e / phi(x).
    double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

} // namespace detail

/// Counter-based SplitMix64 generator.  Cheap to construct, so every
/// (seed, path) pair gets its own stream and draws never depend on
/// scheduling or worker count.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return detail::mix64(state_);
    }

    /// Uniform on [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on [a,b).
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Uniform integer in {lo, ..., hi} inclusive.
    int uniform_int(int lo, int hi) {
        double u = uniform01();
        int v = lo + static_cast<int>(u * (static_cast<double>(hi) - lo + 1.0));
        return v > hi ? hi : v;
    }

    /// Gaussian draw via the inverse CDF on a strictly interior uniform.
    double normal(double mean = 0.0, double sd = 1.0) {
        double u = (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
        return mean + sd * detail::norm_inv_cdf(u);
    }

private:
    std::uint64_t state_;
};

/// Streams drawn inside dataset generation, one per role.
enum class StreamTag : std::uint64_t {
    frequency = 1,  // per-curve sampling frequency draws
    points = 2,     // sampling locations (curve word 0 for shared draws)
    scores = 3,     // Karhunen-Loeve scores
    noise = 4,      // additive observation noise
};

/// Hash a seed and a path of words (cell, replicate, curve, tag, ...)
/// into a stream key.  hash_combine-style chaining with a strong
/// finalizer at each step.
inline std::uint64_t derive_key(std::uint64_t seed,
                                std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = detail::mix64(seed ^ 0x6a09e667f3bcc909ULL);
    for (std::uint64_t w : path)
        s = detail::mix64(s ^ (w + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2)));
    return s;
}

inline SplitMix64 derive_stream(std::uint64_t seed,
                                std::initializer_list<std::uint64_t> path) {
    return SplitMix64(derive_key(seed, path));
}

} // namespace fdmean
