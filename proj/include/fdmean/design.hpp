#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "fdmean/dataset.hpp"
#include "fdmean/errors.hpp"
#include "fdmean/process.hpp"
#include "fdmean/rng.hpp"

namespace fdmean {

/// How many observations each curve receives: one fixed count, an
/// explicit per-curve list (cycled), or i.i.d. uniform draws from an
/// integer range.
struct FrequencyRule {
    enum class Kind { fixed, list, uniform_range };

    Kind kind = Kind::fixed;
    int fixed_m = 10;
    std::vector<int> per_curve;
    int lo = 0, hi = 0;

    static FrequencyRule fixed(int m) {
        FrequencyRule r;
        r.kind = Kind::fixed;
        r.fixed_m = m;
        return r;
    }
    static FrequencyRule list(std::vector<int> ms) {
        FrequencyRule r;
        r.kind = Kind::list;
        r.per_curve = std::move(ms);
        return r;
    }
    static FrequencyRule uniform(int lo, int hi) {
        FrequencyRule r;
        r.kind = Kind::uniform_range;
        r.lo = lo;
        r.hi = hi;
        return r;
    }

    void validate() const {
        switch (kind) {
            case Kind::fixed:
                if (fixed_m < 1)
                    throw config_error("FrequencyRule: fixed m must be >= 1");
                break;
            case Kind::list:
                if (per_curve.empty())
                    throw config_error("FrequencyRule: empty frequency list");
                for (int m : per_curve)
                    if (m < 1)
                        throw config_error("FrequencyRule: list entries must be >= 1");
                break;
            case Kind::uniform_range:
                if (lo < 1 || hi < lo)
                    throw config_error("FrequencyRule: need 1 <= lo <= hi");
                break;
        }
    }

    /// Realized per-curve frequencies for n curves.  Random draws use
    /// the (seed, tag=frequency, curve) streams.
    std::vector<int> materialize(int n, std::uint64_t seed) const {
        validate();
        std::vector<int> ms(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            switch (kind) {
                case Kind::fixed:
                    ms[static_cast<std::size_t>(i)] = fixed_m;
                    break;
                case Kind::list:
                    ms[static_cast<std::size_t>(i)] =
                        per_curve[static_cast<std::size_t>(i) % per_curve.size()];
                    break;
                case Kind::uniform_range: {
                    auto g = derive_stream(
                        seed, {static_cast<std::uint64_t>(StreamTag::frequency),
                               static_cast<std::uint64_t>(i)});
                    ms[static_cast<std::size_t>(i)] = g.uniform_int(lo, hi);
                    break;
                }
            }
        }
        return ms;
    }
};

/// Full description of one simulated dataset.
struct DesignSpec {
    DesignTag kind = DesignTag::common_fixed;
    int n = 1;
    FrequencyRule freq;
    std::uint64_t seed = 0;

    void validate() const {
        if (n < 1) throw config_error("DesignSpec: n must be >= 1");
        freq.validate();
        if (kind != DesignTag::independent && freq.kind != FrequencyRule::Kind::fixed)
            throw config_error(
                "DesignSpec: common designs need a fixed sampling frequency");
    }
};

/// Simulate a dataset: draw sampling points per the design, realize n
/// curves from the process, add observation noise.  Every random
/// quantity comes from a stream keyed by (seed, tag, curve), so the
/// result is a pure function of (design, process).
inline FunctionalDataset generate(const DesignSpec& design, const ProcessSpec& process) {
    design.validate();
    process.validate();
    const int n = design.n;
    std::vector<int> ms = design.freq.materialize(n, design.seed);

    FunctionalDataset data;
    data.design = design.kind;
    data.curves.resize(static_cast<std::size_t>(n));

    std::vector<double> shared;
    if (design.kind == DesignTag::common_fixed) {
        int m = design.freq.fixed_m;
        shared.resize(static_cast<std::size_t>(m));
        for (int j = 1; j <= m; ++j)
            shared[static_cast<std::size_t>(j - 1)] = 2.0 * j / (2.0 * m + 1.0);
    } else if (design.kind == DesignTag::common_random) {
        int m = design.freq.fixed_m;
        auto g = derive_stream(design.seed,
                               {static_cast<std::uint64_t>(StreamTag::points), 0});
        shared.resize(static_cast<std::size_t>(m));
        for (double& t : shared) t = g.uniform01();
        std::sort(shared.begin(), shared.end());
    }

    for (int i = 0; i < n; ++i) {
        Curve& c = data.curves[static_cast<std::size_t>(i)];
        if (design.kind == DesignTag::independent) {
            auto g = derive_stream(design.seed,
                                   {static_cast<std::uint64_t>(StreamTag::points),
                                    static_cast<std::uint64_t>(i) + 1});
            c.points.resize(static_cast<std::size_t>(ms[static_cast<std::size_t>(i)]));
            for (double& t : c.points) t = g.uniform01();
            std::sort(c.points.begin(), c.points.end());
        } else {
            c.points = shared;
        }
        auto gs = derive_stream(design.seed,
                                {static_cast<std::uint64_t>(StreamTag::scores),
                                 static_cast<std::uint64_t>(i)});
        CurveSample x = draw_curve(process, gs);
        auto gn = derive_stream(design.seed,
                                {static_cast<std::uint64_t>(StreamTag::noise),
                                 static_cast<std::uint64_t>(i)});
        c.values.resize(c.points.size());
        for (std::size_t j = 0; j < c.points.size(); ++j)
            c.values[j] = x(c.points[j]) + gn.normal(0.0, process.noise_sd);
    }

    data.truth = [process](double t) { return process.mean_at(t); };
    return data;
}

} // namespace fdmean
