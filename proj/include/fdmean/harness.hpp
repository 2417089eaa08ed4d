#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fdmean/dataset.hpp"
#include "fdmean/design.hpp"
#include "fdmean/errors.hpp"
#include "fdmean/metrics.hpp"
#include "fdmean/process.hpp"
#include "fdmean/rng.hpp"
#include "fdmean/solver.hpp"
#include "fdmean/tuning.hpp"

namespace fdmean {

/// How the penalty is chosen inside a sweep.
enum class SelectionMode { oracle, gcv, fixed };

inline const char* to_string(SelectionMode s) {
    switch (s) {
        case SelectionMode::oracle: return "oracle";
        case SelectionMode::gcv: return "gcv";
        case SelectionMode::fixed: return "fixed";
    }
    return "?";
}

/// One Monte Carlo cell: a design crossed with sample sizes.
struct SweepCell {
    DesignTag design = DesignTag::common_fixed;
    int n = 1;
    FrequencyRule freq;
};

/// Declarative description of a Monte Carlo sweep.  `solve.lambda` is
/// ignored (the penalty comes from `selection`); the floor and knot
/// cap are honored.
struct SweepPlan {
    std::vector<SweepCell> cells;
    int replicates = 50;
    SelectionMode selection = SelectionMode::oracle;
    double fixed_lambda = 1e-4;
    std::vector<double> lambda_grid = default_lambda_grid();
    std::uint64_t seed = 0;
    int r = 2;
    ProcessSpec process;
    SolveOptions solve;
    int ise_grid_size = 4097;
    std::string slope_predictor;  // "", "m", "n" or "nm"

    void validate() const {
        if (cells.empty()) throw config_error("sweep plan: no cells");
        if (replicates < 1) throw config_error("sweep plan: replicates must be >= 1");
        if (r < 1) throw config_error("sweep plan: r must be >= 1");
        if (ise_grid_size < 3 || ise_grid_size % 2 == 0)
            throw config_error("sweep plan: grid_size must be odd and >= 3");
        if (selection == SelectionMode::fixed &&
            (!std::isfinite(fixed_lambda) || fixed_lambda < 0.0))
            throw config_error("sweep plan: fixed lambda must be >= 0");
        if (selection != SelectionMode::fixed && lambda_grid.empty())
            throw config_error("sweep plan: empty lambda grid");
        if (!slope_predictor.empty() && slope_predictor != "m" &&
            slope_predictor != "n" && slope_predictor != "nm")
            throw config_error("sweep plan: slope predictor must be m, n or nm");
        for (const SweepCell& c : cells) {
            if (c.n < 1) throw config_error("sweep plan: cell n must be >= 1");
            c.freq.validate();
            if (c.design != DesignTag::independent &&
                c.freq.kind != FrequencyRule::Kind::fixed)
                throw config_error(
                    "sweep plan: common-design cells need a fixed m");
        }
        process.validate();
        solve.validate();
    }
};

/// One replicate's outcome.
struct IseRecord {
    std::size_t cell = 0;
    DesignTag design = DesignTag::common_fixed;
    int n = 0;
    double m = 0.0;  // realized harmonic-mean sampling frequency
    int replicate = 0;
    double lambda = 0.0;
    SelectionMode selection = SelectionMode::oracle;
    double ise = 0.0;
};

/// Per-cell aggregates; `error` is the first failure message when any
/// replicate of the cell failed.
struct CellSummary {
    SweepCell cell;
    int completed = 0;
    double mean_m = std::numeric_limits<double>::quiet_NaN();
    double mean_ise = std::numeric_limits<double>::quiet_NaN();
    double se_ise = std::numeric_limits<double>::quiet_NaN();
    double mean_lambda = std::numeric_limits<double>::quiet_NaN();
    std::string error;
};

struct SweepResult {
    std::vector<IseRecord> records;  // ordered by (cell, replicate)
    std::vector<CellSummary> cells;
    std::optional<SlopeFit> slope;
    std::vector<std::string> warnings;

    bool all_cells_failed() const {
        for (const CellSummary& c : cells)
            if (c.completed > 0) return false;
        return true;
    }
};

namespace detail {

struct TaskOutcome {
    std::optional<IseRecord> record;
    std::vector<std::string> warnings;
    std::string error;
};

inline TaskOutcome run_replicate(const SweepPlan& plan, std::size_t cell_idx,
                                 int rep, const SobolevKernel& kernel) {
    TaskOutcome out;
    try {
        const SweepCell& cell = plan.cells[cell_idx];
        DesignSpec ds;
        ds.kind = cell.design;
        ds.n = cell.n;
        ds.freq = cell.freq;
        ds.seed = derive_key(plan.seed, {static_cast<std::uint64_t>(cell_idx),
                                         static_cast<std::uint64_t>(rep)});
        FunctionalDataset data = generate(ds, plan.process);

        std::vector<int> ms(data.curves.size());
        for (std::size_t i = 0; i < data.curves.size(); ++i)
            ms[i] = static_cast<int>(data.curves[i].size());

        const FitMode mode = (cell.design == DesignTag::independent)
                                 ? FitMode::independent
                                 : FitMode::common;
        IseRecord rec;
        rec.cell = cell_idx;
        rec.design = cell.design;
        rec.n = cell.n;
        rec.m = harmonic_mean(ms);
        rec.replicate = rep;
        rec.selection = plan.selection;
        switch (plan.selection) {
            case SelectionMode::oracle: {
                LambdaSelection sel = select_lambda_oracle(
                    data, plan.lambda_grid, data.truth, mode, plan.solve, kernel,
                    plan.ise_grid_size);
                rec.lambda = sel.lambda;
                rec.ise = sel.ise;
                out.warnings = std::move(sel.warnings);
                break;
            }
            case SelectionMode::gcv: {
                LambdaSelection sel = select_lambda_gcv(data, plan.lambda_grid,
                                                        mode, plan.solve, kernel);
                rec.lambda = sel.lambda;
                rec.ise = ise(sel.estimate, data.truth, kernel, plan.ise_grid_size);
                out.warnings = std::move(sel.warnings);
                break;
            }
            case SelectionMode::fixed: {
                SolveOptions opts = plan.solve;
                opts.lambda = plan.fixed_lambda;
                SplineEstimate est = (mode == FitMode::common)
                                         ? fit_common(data, opts, kernel)
                                         : fit_independent(data, opts, kernel);
                rec.lambda = plan.fixed_lambda;
                rec.ise = ise(est, data.truth, kernel, plan.ise_grid_size);
                if (est.thinned)
                    out.warnings.push_back("knots thinned to cap " +
                                           std::to_string(opts.max_knots));
                break;
            }
        }
        out.record = rec;
    } catch (const std::exception& ex) {
        out.error = ex.what();
    }
    return out;
}

} // namespace detail

/// Run every (cell, replicate) task, optionally across worker threads.
/// Replicate seeds derive from (master seed, cell index, replicate), so
/// records are byte-identical for any worker count; output order is
/// (cell, replicate).  Cells whose replicates throw are reported failed
/// and the sweep continues.
inline SweepResult run_sweep(const SweepPlan& plan, int workers = 1) {
    plan.validate();
    const SobolevKernel kernel(plan.r);
    const std::size_t ncells = plan.cells.size();
    const std::size_t reps = static_cast<std::size_t>(plan.replicates);
    const std::size_t total = ncells * reps;

    std::vector<detail::TaskOutcome> outcomes(total);
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t k = cursor.fetch_add(1);
            if (k >= total) break;
            outcomes[k] = detail::run_replicate(plan, k / reps,
                                                static_cast<int>(k % reps), kernel);
        }
    };
    if (workers <= 1 || total <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const std::size_t nthreads =
            std::min<std::size_t>(static_cast<std::size_t>(workers), total);
        pool.reserve(nthreads);
        for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    SweepResult result;
    result.records.reserve(total);
    std::set<std::string> seen_warnings;
    result.cells.resize(ncells);
    for (std::size_t ci = 0; ci < ncells; ++ci) {
        CellSummary& cs = result.cells[ci];
        cs.cell = plan.cells[ci];
        double sum = 0.0, sum2 = 0.0, msum = 0.0, lsum = 0.0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            detail::TaskOutcome& out = outcomes[ci * reps + rep];
            for (std::string& w : out.warnings) {
                std::string tagged = "cell " + std::to_string(ci) + ": " + w;
                if (seen_warnings.insert(tagged).second)
                    result.warnings.push_back(std::move(tagged));
            }
            if (out.record) {
                result.records.push_back(*out.record);
                ++cs.completed;
                sum += out.record->ise;
                sum2 += out.record->ise * out.record->ise;
                msum += out.record->m;
                lsum += out.record->lambda;
            } else if (cs.error.empty()) {
                cs.error = out.error;
            }
        }
        if (cs.completed > 0) {
            cs.mean_ise = sum / cs.completed;
            cs.mean_m = msum / cs.completed;
            cs.mean_lambda = lsum / cs.completed;
            if (cs.completed > 1) {
                double var = (sum2 - sum * sum / cs.completed) / (cs.completed - 1);
                cs.se_ise = std::sqrt(std::max(0.0, var) / cs.completed);
            }
        }
    }

    if (!plan.slope_predictor.empty()) {
        std::vector<std::pair<double, double>> xy;
        bool usable = true;
        for (const CellSummary& cs : result.cells) {
            if (cs.completed == 0) {
                usable = false;
                break;
            }
            double x = 0.0;
            if (plan.slope_predictor == "m") x = cs.mean_m;
            else if (plan.slope_predictor == "n") x = static_cast<double>(cs.cell.n);
            else x = static_cast<double>(cs.cell.n) * cs.mean_m;
            xy.emplace_back(x, cs.mean_ise);
        }
        if (usable) {
            std::sort(xy.begin(), xy.end());
            try {
                result.slope = fit_rate_slope(xy);
            } catch (const error& ex) {
                result.warnings.push_back(std::string("slope omitted: ") +
                                          ex.what());
            }
        } else {
            result.warnings.push_back(
                "slope omitted: at least one cell completed no replicates");
        }
    }
    return result;
}

/// The four phase-transition regimes with their default grids.
enum class Regime {
    common_sparse,
    common_dense,
    independent_sparse,
    independent_dense
};

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::common_sparse: return "common_sparse";
        case Regime::common_dense: return "common_dense";
        case Regime::independent_sparse: return "independent_sparse";
        case Regime::independent_dense: return "independent_dense";
    }
    return "?";
}

struct TransitionOptions {
    int replicates = 50;
    std::uint64_t seed = 0;
    int r = 2;
    std::vector<int> n_values;  // empty: regime default
    std::vector<int> m_values;  // empty: regime default
    SelectionMode selection = SelectionMode::oracle;
    std::vector<double> lambda_grid = default_lambda_grid();
    double fixed_lambda = 1e-4;
    ProcessSpec process;
    SolveOptions solve;
    int ise_grid_size = 4097;
    int workers = 1;
};

struct TransitionResult {
    Regime regime = Regime::common_sparse;
    SweepResult sweep;
    SlopeFit slope;
};

/// Build and run the sweep for one rate regime, then read the
/// convergence rate off the cells.  Cells clearly on the wrong side of
/// the phase transition m* = n^{1/2r} (by more than a factor of 2) are
/// rejected; milder violations of the intended-regime margins only
/// warn, since standard rate grids run right up to the transition.
inline TransitionResult run_transition_sweep(Regime regime,
                                             const TransitionOptions& opt = {}) {
    const bool common = (regime == Regime::common_sparse ||
                         regime == Regime::common_dense);
    const bool sparse = (regime == Regime::common_sparse ||
                         regime == Regime::independent_sparse);

    std::vector<int> ns = opt.n_values;
    std::vector<int> ms = opt.m_values;
    if (ns.empty())
        ns = sparse ? (common ? std::vector<int>{4096}
                              : std::vector<int>{64, 128, 256, 512, 1024})
                    : std::vector<int>{50, 100, 200, 400};
    if (ms.empty())
        ms = sparse ? (common ? std::vector<int>{4, 6, 8, 12, 16}
                              : std::vector<int>{2})
                    : std::vector<int>{64};

    SweepPlan plan;
    plan.replicates = opt.replicates;
    plan.seed = opt.seed;
    plan.r = opt.r;
    plan.selection = opt.selection;
    plan.lambda_grid = opt.lambda_grid;
    plan.fixed_lambda = opt.fixed_lambda;
    plan.process = opt.process;
    plan.solve = opt.solve;
    plan.ise_grid_size = opt.ise_grid_size;
    plan.slope_predictor = sparse ? (common ? "m" : "nm") : "n";

    std::vector<std::string> regime_warnings;
    for (int n : ns) {
        for (int m : ms) {
            const double mstar = std::pow(static_cast<double>(n),
                                          1.0 / (2.0 * opt.r));
            if (sparse && m > 2.0 * mstar)
                throw config_error(to_string(regime) +
                                   std::string(": cell n=") + std::to_string(n) +
                                   " m=" + std::to_string(m) +
                                   " lies beyond twice the transition m*=" +
                                   std::to_string(mstar));
            if (!sparse && m < 0.5 * mstar)
                throw config_error(to_string(regime) +
                                   std::string(": cell n=") + std::to_string(n) +
                                   " m=" + std::to_string(m) +
                                   " lies below half the transition m*=" +
                                   std::to_string(mstar));
            if (sparse && m > 0.5 * mstar)
                regime_warnings.push_back(
                    std::string(to_string(regime)) + ": cell n=" +
                    std::to_string(n) + " m=" + std::to_string(m) +
                    " is within a factor 2 of the transition");
            if (!sparse && m < 2.0 * mstar)
                regime_warnings.push_back(
                    std::string(to_string(regime)) + ": cell n=" +
                    std::to_string(n) + " m=" + std::to_string(m) +
                    " is within a factor 2 of the transition");
            SweepCell cell;
            cell.design = common ? DesignTag::common_fixed : DesignTag::independent;
            cell.n = n;
            cell.freq = FrequencyRule::fixed(m);
            plan.cells.push_back(cell);
        }
    }

    TransitionResult result;
    result.regime = regime;
    result.sweep = run_sweep(plan, opt.workers);
    result.sweep.warnings.insert(result.sweep.warnings.begin(),
                                 regime_warnings.begin(), regime_warnings.end());
    if (!result.sweep.slope)
        throw numerical_error(std::string(to_string(regime)) +
                              ": no slope could be fitted (all cells failed?)");
    result.slope = *result.sweep.slope;
    return result;
}

/// ISE as a function of lambda on one seeded dataset (the smoothing-
/// versus-interpolation picture).  Grid entries at or below the floor
/// are solved at the floor for common designs; independent designs
/// require strictly positive grid values.
struct ProfilePoint {
    double lambda = 0.0;
    double ise = 0.0;
};

struct ProfileOptions {
    DesignTag design = DesignTag::common_fixed;
    int n = 50;
    FrequencyRule freq = FrequencyRule::fixed(10);
    std::uint64_t seed = 0;
    int r = 2;
    std::vector<double> grid;  // empty: {0} followed by the default grid
    ProcessSpec process;
    SolveOptions solve;
    int ise_grid_size = 4097;
};

inline std::vector<ProfilePoint> run_lambda_profile(const ProfileOptions& opt) {
    opt.solve.validate();
    const SobolevKernel kernel(opt.r);
    const FitMode mode = (opt.design == DesignTag::independent)
                             ? FitMode::independent
                             : FitMode::common;
    std::vector<double> grid = opt.grid;
    if (grid.empty()) {
        grid = default_lambda_grid();
        if (mode == FitMode::common) grid.insert(grid.begin(), 0.0);
    }
    grid = detail::checked_grid(grid, mode, "run_lambda_profile");

    DesignSpec ds;
    ds.kind = opt.design;
    ds.n = opt.n;
    ds.freq = opt.freq;
    ds.seed = opt.seed;
    FunctionalDataset data = generate(ds, opt.process);

    detail::PenalizedSystem sys(detail::build_rows(data, mode, kernel), kernel,
                                opt.solve.max_knots);
    std::vector<double> tgrid = simpson_grid(opt.ise_grid_size);
    std::vector<double> weights = simpson_weights(opt.ise_grid_size);
    std::vector<double> truth_vals(tgrid.size());
    for (std::size_t i = 0; i < tgrid.size(); ++i)
        truth_vals[i] = data.truth(tgrid[i]);
    GridEvaluator geval(tgrid, sys.knots(), kernel);

    std::vector<ProfilePoint> out;
    out.reserve(grid.size());
    for (double lam : grid) {
        double lam_eff = (mode == FitMode::common)
                             ? std::max(lam, opt.solve.interpolation_floor)
                             : lam;
        auto fit = sys.solve(lam_eff);
        Eigen::VectorXd vals = geval.values(fit.c, fit.d);
        double e = 0.0;
        for (std::size_t i = 0; i < tgrid.size(); ++i) {
            double dv = vals(static_cast<Eigen::Index>(i)) - truth_vals[i];
            e += weights[i] * dv * dv;
        }
        out.push_back({lam, e});
    }
    return out;
}

} // namespace fdmean
