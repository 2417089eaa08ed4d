// Command-line front end: simulate datasets, fit mean curves, run
// Monte Carlo sweeps and lambda profiles.
//
// Exit codes: 0 success, 2 input/parse failure, 3 violated
// precondition or bad configuration, 4 numerical failure or a sweep
// with no surviving cells.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdmean/fdmean.hpp"

namespace {

using nlohmann::json;

fdmean::DesignTag parse_design(const std::string& v) {
    if (v == "common" || v == "common_fixed") return fdmean::DesignTag::common_fixed;
    if (v == "common_random") return fdmean::DesignTag::common_random;
    if (v == "independent") return fdmean::DesignTag::independent;
    throw fdmean::parse_error(
        "bad design '" + v +
        "' (want common_fixed, common_random or independent)");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw fdmean::parse_error("cannot open '" + path + "' for writing");
    return os;
}

struct EstimateArgs {
    std::string input, design_str = "common_fixed", select = "fixed";
    std::string grid_str, out;
    int r = 2;
    double lambda = 1e-4;
};

int cmd_estimate(const EstimateArgs& a) {
    fdmean::DesignTag design = parse_design(a.design_str);
    fdmean::FunctionalDataset data = fdmean::load_dataset_csv(a.input, design);
    fdmean::SobolevKernel kernel(a.r);
    fdmean::FitMode mode = (design == fdmean::DesignTag::independent)
                               ? fdmean::FitMode::independent
                               : fdmean::FitMode::common;
    fdmean::SolveOptions opts;
    opts.lambda = a.lambda;

    fdmean::SplineEstimate est;
    std::vector<std::string> warnings;
    double gcv_score = std::numeric_limits<double>::quiet_NaN();
    std::string selection = a.select;
    if (a.select == "gcv") {
        std::vector<double> grid = a.grid_str.empty()
                                       ? fdmean::default_lambda_grid()
                                       : fdmean::parse_grid_field(a.grid_str);
        fdmean::LambdaSelection sel =
            fdmean::select_lambda_gcv(data, grid, mode, opts, kernel);
        est = std::move(sel.estimate);
        warnings = std::move(sel.warnings);
        gcv_score = sel.score;
    } else if (a.select == "fixed") {
        est = (mode == fdmean::FitMode::common)
                  ? fdmean::fit_common(data, opts, kernel)
                  : fdmean::fit_independent(data, opts, kernel);
    } else {
        throw fdmean::config_error("--select must be fixed or gcv");
    }

    std::vector<double> tgrid(1001);
    for (std::size_t i = 0; i < tgrid.size(); ++i)
        tgrid[i] = static_cast<double>(i) / 1000.0;
    std::vector<double> ghat = fdmean::evaluate(est, tgrid, kernel);

    if (a.out.empty()) {
        fdmean::write_curve_csv(std::cout, tgrid, ghat);
    } else {
        auto os = open_out(a.out);
        fdmean::write_curve_csv(os, tgrid, ghat);
        std::vector<int> ms(data.curves.size());
        for (std::size_t i = 0; i < ms.size(); ++i)
            ms[i] = static_cast<int>(data.curves[i].size());
        json meta;
        meta["input"] = a.input;
        meta["design"] = fdmean::to_string(design);
        meta["n"] = data.num_curves();
        meta["m_harmonic"] = fdmean::harmonic_mean(ms);
        meta["r"] = est.r;
        meta["selection"] = selection;
        meta["lambda"] = est.lambda;
        meta["lambda_eff"] = est.lambda_eff;
        meta["knots"] = est.knots.size();
        meta["thinned"] = est.thinned;
        meta["roughness"] = fdmean::roughness(est, kernel);
        if (a.select == "gcv" && std::isfinite(gcv_score))
            meta["gcv_score"] = gcv_score;
        meta["warnings"] = warnings;
        auto ms_out = open_out(a.out + ".meta.json");
        ms_out << meta.dump(2) << '\n';
    }
    for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';
    return 0;
}

struct SimulateArgs {
    std::string design_str = "common_fixed", m_str = "10", out;
    int n = 20;
    std::uint64_t seed = 0;
};

int cmd_simulate(const SimulateArgs& a) {
    fdmean::DesignSpec ds;
    ds.kind = parse_design(a.design_str);
    ds.n = a.n;
    ds.freq = fdmean::parse_frequency_field(a.m_str);
    ds.seed = a.seed;
    fdmean::FunctionalDataset data = fdmean::generate(ds, fdmean::ProcessSpec{});
    if (a.out.empty()) {
        fdmean::write_dataset_csv(std::cout, data);
    } else {
        auto os = open_out(a.out);
        fdmean::write_dataset_csv(os, data);
    }
    return 0;
}

struct SweepArgs {
    std::string plan, out;
    int workers = 1;
};

int cmd_sweep(const SweepArgs& a) {
    fdmean::SweepPlan plan = fdmean::load_sweep_plan(a.plan);
    auto t0 = std::chrono::steady_clock::now();
    fdmean::SweepResult result = fdmean::run_sweep(plan, a.workers);
    auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);

    auto os = open_out(a.out);
    fdmean::write_sweep_csv(os, result.records);

    json summary;
    summary["plan"] = a.plan;
    summary["replicates"] = plan.replicates;
    summary["selection"] = fdmean::to_string(plan.selection);
    summary["cells"] = json::array();
    for (std::size_t ci = 0; ci < result.cells.size(); ++ci) {
        const fdmean::CellSummary& cs = result.cells[ci];
        json jc;
        jc["cell"] = ci;
        jc["design"] = fdmean::to_string(cs.cell.design);
        jc["n"] = cs.cell.n;
        jc["completed"] = cs.completed;
        if (cs.completed > 0) {
            jc["mean_m"] = cs.mean_m;
            jc["mean_ise"] = cs.mean_ise;
            jc["se_ise"] = cs.se_ise;
            jc["mean_lambda"] = cs.mean_lambda;
        }
        if (!cs.error.empty()) jc["error"] = cs.error;
        summary["cells"].push_back(jc);
    }
    if (result.slope) {
        summary["slope"] = {{"predictor", plan.slope_predictor},
                            {"slope", result.slope->slope},
                            {"intercept", result.slope->intercept},
                            {"r_squared", result.slope->r_squared},
                            {"std_err", result.slope->std_err},
                            {"points_used", result.slope->points_used}};
    }
    summary["warnings"] = result.warnings;
    auto js = open_out(a.out + ".summary.json");
    js << summary.dump(2) << '\n';

    for (std::size_t ci = 0; ci < result.cells.size(); ++ci) {
        const fdmean::CellSummary& cs = result.cells[ci];
        std::cout << "cell " << ci << " " << fdmean::to_string(cs.cell.design)
                  << " n=" << cs.cell.n;
        if (cs.completed > 0)
            std::cout << " m=" << cs.mean_m << " mean_ise=" << cs.mean_ise
                      << " se=" << cs.se_ise << " (" << cs.completed << "/"
                      << plan.replicates << ")";
        if (!cs.error.empty()) std::cout << " FAILED: " << cs.error;
        std::cout << '\n';
    }
    if (result.slope)
        std::cout << "slope vs log " << plan.slope_predictor << ": "
                  << result.slope->slope << " (r^2=" << result.slope->r_squared
                  << ")\n";
    for (const std::string& w : result.warnings)
        std::cerr << "warning: " << w << '\n';
    std::cerr << "sweep finished in " << dt.count() << " s\n";
    if (result.all_cells_failed()) {
        std::cerr << "error: every cell failed\n";
        return 4;
    }
    return 0;
}

struct ProfileArgs {
    std::string design_str = "common_fixed", m_str = "10", grid_str, out;
    int n = 50, r = 2;
    std::uint64_t seed = 0;
};

int cmd_lambda_profile(const ProfileArgs& a) {
    fdmean::ProfileOptions opt;
    opt.design = parse_design(a.design_str);
    opt.n = a.n;
    opt.freq = fdmean::parse_frequency_field(a.m_str);
    opt.seed = a.seed;
    opt.r = a.r;
    if (!a.grid_str.empty()) opt.grid = fdmean::parse_grid_field(a.grid_str);
    std::vector<fdmean::ProfilePoint> points = fdmean::run_lambda_profile(opt);
    if (a.out.empty()) {
        fdmean::write_profile_csv(std::cout, points);
    } else {
        auto os = open_out(a.out);
        fdmean::write_profile_csv(os, points);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean-curve estimation for discretely sampled random curves"};
    app.require_subcommand(1);

    EstimateArgs ea;
    CLI::App* est = app.add_subcommand(
        "estimate", "Fit the mean curve of a curve_id,t,y dataset");
    est->add_option("input", ea.input, "dataset CSV path")->required();
    est->add_option("--design", ea.design_str,
                    "common_fixed | common_random | independent");
    est->add_option("--r", ea.r, "Sobolev order (default 2)");
    est->add_option("--lambda", ea.lambda, "penalty for --select fixed");
    est->add_option("--select", ea.select, "fixed | gcv");
    est->add_option("--grid", ea.grid_str, "tuning grid lo:hi:count for gcv");
    est->add_option("--out", ea.out,
                    "fitted-curve CSV (sidecar <out>.meta.json); stdout if absent");

    SimulateArgs sa;
    CLI::App* sim = app.add_subcommand(
        "simulate", "Draw a dataset from the random-curve model");
    sim->add_option("--design", sa.design_str,
                    "common_fixed | common_random | independent");
    sim->add_option("--n", sa.n, "number of curves");
    sim->add_option("--m", sa.m_str, "frequency: int, list, or uniform:lo:hi");
    sim->add_option("--seed", sa.seed, "master seed");
    sim->add_option("--out", sa.out, "dataset CSV path; stdout if absent");

    SweepArgs wa;
    CLI::App* swp = app.add_subcommand(
        "sweep", "Run a Monte Carlo sweep described by a plan file");
    swp->add_option("plan", wa.plan, "plan file path")->required();
    swp->add_option("--out", wa.out, "records CSV (sidecar <out>.summary.json)")
        ->required();
    swp->add_option("--workers", wa.workers, "worker threads (default 1)");

    ProfileArgs pa;
    CLI::App* prof = app.add_subcommand(
        "lambda-profile", "ISE as a function of lambda on one seeded dataset");
    prof->add_option("--design", pa.design_str,
                     "common_fixed | common_random | independent");
    prof->add_option("--n", pa.n, "number of curves");
    prof->add_option("--m", pa.m_str, "frequency: int, list, or uniform:lo:hi");
    prof->add_option("--r", pa.r, "Sobolev order (default 2)");
    prof->add_option("--seed", pa.seed, "master seed");
    prof->add_option("--grid", pa.grid_str, "lambda grid lo:hi:count");
    prof->add_option("--out", pa.out, "profile CSV path; stdout if absent");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (est->parsed()) return cmd_estimate(ea);
        if (sim->parsed()) return cmd_simulate(sa);
        if (swp->parsed()) return cmd_sweep(wa);
        if (prof->parsed()) return cmd_lambda_profile(pa);
        return 2;
    } catch (const fdmean::parse_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const fdmean::config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const fdmean::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const fdmean::precondition_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
}
