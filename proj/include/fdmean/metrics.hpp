#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fdmean/errors.hpp"
#include "fdmean/estimate.hpp"
#include "fdmean/kernel.hpp"

namespace fdmean {

/// Uniform grid of `size` nodes on [0,1] for composite Simpson
/// quadrature; `size` must be odd and at least 3.
inline std::vector<double> simpson_grid(int size) {
    if (size < 3 || size % 2 == 0)
        throw config_error("simpson_grid: size must be odd and >= 3, got " +
                           std::to_string(size));
    std::vector<double> g(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i)
        g[static_cast<std::size_t>(i)] = static_cast<double>(i) / (size - 1);
    return g;
}

/// Matching composite Simpson weights (h/3) * {1,4,2,...,2,4,1}.
inline std::vector<double> simpson_weights(int size) {
    if (size < 3 || size % 2 == 0)
        throw config_error("simpson_weights: size must be odd and >= 3, got " +
                           std::to_string(size));
    const double h3 = 1.0 / (size - 1) / 3.0;
    std::vector<double> w(static_cast<std::size_t>(size), 0.0);
    w.front() = w.back() = h3;
    for (int i = 1; i + 1 < size; ++i)
        w[static_cast<std::size_t>(i)] = (i % 2 == 1) ? 4.0 * h3 : 2.0 * h3;
    return w;
}

/// Integrated squared difference of two functions given by their
/// values on the Simpson grid of matching size.
inline double ise_on_grid(std::span<const double> fitted,
                          std::span<const double> truth) {
    if (fitted.size() != truth.size())
        throw precondition_error("ise_on_grid: length mismatch");
    std::vector<double> w = simpson_weights(static_cast<int>(fitted.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < fitted.size(); ++i) {
        double d = fitted[i] - truth[i];
        acc += w[i] * d * d;
    }
    return acc;
}

/// Integrated squared error of a fitted curve against a truth
/// function, by composite Simpson quadrature.
inline double ise(const SplineEstimate& est,
                  const std::function<double(double)>& truth,
                  const SobolevKernel& kernel, int grid_size = 4097) {
    if (!truth)
        throw precondition_error("ise: no truth function supplied");
    std::vector<double> grid = simpson_grid(grid_size);
    std::vector<double> w = simpson_weights(grid_size);
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double d = evaluate(est, grid[i], kernel) - truth(grid[i]);
        acc += w[i] * d * d;
    }
    return acc;
}

/// Harmonic mean of positive sampling frequencies, the effective m
/// reported for varying-frequency designs.
inline double harmonic_mean(std::span<const int> ms) {
    if (ms.empty()) throw domain_error("harmonic_mean: empty input");
    double acc = 0.0;
    for (int m : ms) {
        if (m <= 0) throw domain_error("harmonic_mean: nonpositive entry");
        acc += 1.0 / static_cast<double>(m);
    }
    return static_cast<double>(ms.size()) / acc;
}

/// Least-squares line through (log x, log y), used to read convergence
/// rates off Monte Carlo cells.
struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double std_err = 0.0;  // standard error of the slope
    int points_used = 0;
};

inline SlopeFit fit_rate_slope(std::span<const std::pair<double, double>> xy) {
    if (xy.size() < 3)
        throw precondition_error("fit_rate_slope: need at least 3 points, got " +
                                 std::to_string(xy.size()));
    std::vector<double> lx(xy.size()), ly(xy.size());
    for (std::size_t i = 0; i < xy.size(); ++i) {
        if (!(xy[i].first > 0.0) || !(xy[i].second > 0.0))
            throw domain_error("fit_rate_slope: inputs must be positive");
        if (i > 0 && !(xy[i].first > xy[i - 1].first))
            throw precondition_error(
                "fit_rate_slope: predictor values must be strictly increasing");
        lx[i] = std::log(xy[i].first);
        ly[i] = std::log(xy[i].second);
    }
    const double n = static_cast<double>(xy.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xy.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xy.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    SlopeFit out;
    out.points_used = static_cast<int>(xy.size());
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xy.size(); ++i) {
        double r = ly[i] - (out.intercept + out.slope * lx[i]);
        ss_res += r * r;
    }
    out.r_squared = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
    if (xy.size() > 2)
        out.std_err = std::sqrt(ss_res / (n - 2.0) / sxx);
    return out;
}

} // namespace fdmean
