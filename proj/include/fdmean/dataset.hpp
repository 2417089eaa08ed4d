#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "fdmean/errors.hpp"

namespace fdmean {

/// Sampling design of a functional dataset.
enum class DesignTag { common_fixed, common_random, independent };

inline const char* to_string(DesignTag d) {
    switch (d) {
        case DesignTag::common_fixed: return "common_fixed";
        case DesignTag::common_random: return "common_random";
        case DesignTag::independent: return "independent";
    }
    return "?";
}

/// One sampled curve: sorted points in [0,1] and the observed values.
struct Curve {
    std::vector<double> points;
    std::vector<double> values;

    std::size_t size() const { return points.size(); }
};

/// A collection of discretely observed random curves.  `truth` is the
/// generating mean function when the data were simulated (empty handle
/// otherwise) and is what oracle tuning and ISE scoring integrate
/// against.
struct FunctionalDataset {
    std::vector<Curve> curves;
    DesignTag design = DesignTag::independent;
    std::function<double(double)> truth;

    std::size_t num_curves() const { return curves.size(); }

    std::size_t total_observations() const {
        std::size_t n = 0;
        for (const auto& c : curves) n += c.size();
        return n;
    }

    /// True when every curve carries the identical point list.
    bool has_common_points() const {
        for (std::size_t i = 1; i < curves.size(); ++i)
            if (curves[i].points != curves[0].points) return false;
        return true;
    }

    /// Enforces the structural invariants: at least one curve, every
    /// curve nonempty with sorted points in [0,1] and finite values,
    /// and identical point lists under the common designs.
    void validate() const {
        if (curves.empty())
            throw precondition_error("dataset: no curves");
        for (std::size_t i = 0; i < curves.size(); ++i) {
            const Curve& c = curves[i];
            if (c.points.empty())
                throw precondition_error("dataset: curve " + std::to_string(i) +
                                         " has no observations");
            if (c.points.size() != c.values.size())
                throw precondition_error("dataset: curve " + std::to_string(i) +
                                         " has mismatched point/value lengths");
            for (std::size_t j = 0; j < c.points.size(); ++j) {
                double t = c.points[j];
                if (!(t >= 0.0 && t <= 1.0))
                    throw domain_error("dataset: curve " + std::to_string(i) +
                                       " point " + std::to_string(t) +
                                       " outside [0,1]");
                if (j > 0 && t < c.points[j - 1])
                    throw precondition_error("dataset: curve " + std::to_string(i) +
                                             " points not sorted");
                if (!std::isfinite(c.values[j]))
                    throw domain_error("dataset: curve " + std::to_string(i) +
                                       " has a non-finite value");
            }
        }
        if (design != DesignTag::independent && !has_common_points())
            throw precondition_error(
                "dataset: design tagged " + std::string(to_string(design)) +
                " but curves carry different point lists");
    }
};

} // namespace fdmean
