#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "fdmean/errors.hpp"
#include "fdmean/harness.hpp"

namespace fdmean {

namespace detail {

inline std::string plan_trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] inline void plan_fail(std::size_t line, const std::string& msg) {
    throw parse_error("plan line " + std::to_string(line) + ": " + msg);
}

inline long long plan_int(const std::string& v, std::size_t line) {
    long long out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        plan_fail(line, "bad integer '" + v + "'");
    return out;
}

inline std::uint64_t plan_uint(const std::string& v, std::size_t line) {
    std::uint64_t out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        plan_fail(line, "bad unsigned integer '" + v + "'");
    return out;
}

inline double plan_double(const std::string& v, std::size_t line) {
    try {
        std::size_t used = 0;
        double out = std::stod(v, &used);
        if (used != v.size()) plan_fail(line, "bad number '" + v + "'");
        return out;
    } catch (const std::exception&) {
        plan_fail(line, "bad number '" + v + "'");
    }
}

inline std::vector<std::string> plan_split(const std::string& v, char sep) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = v.find(sep, pos);
        parts.push_back(plan_trim(v.substr(pos, next - pos)));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return parts;
}

/// "lo:hi:count" -> count log-spaced values from lo to hi; a single
/// number is a one-point grid.
inline std::vector<double> plan_grid(const std::string& v, std::size_t line) {
    std::vector<std::string> parts = plan_split(v, ':');
    if (parts.size() == 1) return {plan_double(parts[0], line)};
    if (parts.size() != 3)
        plan_fail(line, "grid must be 'lo:hi:count' or a single value");
    double lo = plan_double(parts[0], line);
    double hi = plan_double(parts[1], line);
    long long count = plan_int(parts[2], line);
    if (!(lo > 0.0) || !(hi >= lo) || count < 1)
        plan_fail(line, "grid needs 0 < lo <= hi and count >= 1");
    std::vector<double> grid(static_cast<std::size_t>(count));
    if (count == 1) {
        grid[0] = lo;
        return grid;
    }
    double llo = std::log10(lo), lhi = std::log10(hi);
    for (long long i = 0; i < count; ++i)
        grid[static_cast<std::size_t>(i)] =
            std::pow(10.0, llo + (lhi - llo) * static_cast<double>(i) /
                               static_cast<double>(count - 1));
    return grid;
}

/// Frequency field: "10", "3,5,7" (cycled) or "uniform:lo:hi".
inline FrequencyRule plan_freq(const std::string& v, std::size_t line) {
    if (v.rfind("uniform:", 0) == 0) {
        std::vector<std::string> parts = plan_split(v, ':');
        if (parts.size() != 3) plan_fail(line, "m: expected 'uniform:lo:hi'");
        return FrequencyRule::uniform(
            static_cast<int>(plan_int(parts[1], line)),
            static_cast<int>(plan_int(parts[2], line)));
    }
    if (v.find(',') != std::string::npos) {
        std::vector<int> ms;
        for (const std::string& p : plan_split(v, ','))
            ms.push_back(static_cast<int>(plan_int(p, line)));
        return FrequencyRule::list(std::move(ms));
    }
    return FrequencyRule::fixed(static_cast<int>(plan_int(v, line)));
}

inline DesignTag plan_design(const std::string& v, std::size_t line) {
    if (v == "common_fixed") return DesignTag::common_fixed;
    if (v == "common_random") return DesignTag::common_random;
    if (v == "independent") return DesignTag::independent;
    plan_fail(line, "design must be common_fixed, common_random or independent");
}

inline SelectionMode plan_selection(const std::string& v, std::size_t line) {
    if (v == "oracle") return SelectionMode::oracle;
    if (v == "gcv") return SelectionMode::gcv;
    if (v == "fixed") return SelectionMode::fixed;
    plan_fail(line, "selection must be oracle, gcv or fixed");
}

} // namespace detail

/// Parse the plain-text sweep plan format:
///
///   # global keys first
///   replicates = 50
///   seed = 42
///   selection = oracle        # oracle | gcv | fixed
///   lambda = 1e-4             # penalty when selection = fixed
///   grid = 1e-8:1:17          # log-spaced tuning grid lo:hi:count
///   r = 2
///   noise_sd = 0.5
///   grid_size = 4097          # Simpson nodes for ISE
///   max_knots = 2000
///   interpolation_floor = 1e-12
///   slope = none              # none | m | n | nm
///
///   [cell]                    # one section per Monte Carlo cell
///   design = common_fixed     # common_fixed | common_random | independent
///   n = 100
///   m = 10                    # int, comma list, or uniform:lo:hi
///
/// The parsed plan is validated before returning.
inline SweepPlan parse_sweep_plan(std::istream& is) {
    SweepPlan plan;
    bool in_cell = false;
    bool have_design = false, have_n = false, have_m = false;
    std::size_t lineno = 0, cell_line = 0;
    std::string raw;

    auto finish_cell = [&]() {
        if (!in_cell) return;
        if (!have_design || !have_n || !have_m)
            detail::plan_fail(cell_line,
                              "cell is missing one of design, n, m");
    };

    while (std::getline(is, raw)) {
        ++lineno;
        std::string line = detail::plan_trim(raw);
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = detail::plan_trim(line.substr(0, hash));
        if (line.empty()) continue;
        if (line == "[cell]") {
            finish_cell();
            plan.cells.emplace_back();
            in_cell = true;
            have_design = have_n = have_m = false;
            cell_line = lineno;
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            detail::plan_fail(lineno, "expected 'key = value' or '[cell]'");
        std::string key = detail::plan_trim(line.substr(0, eq));
        std::string val = detail::plan_trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            detail::plan_fail(lineno, "expected 'key = value'");

        if (in_cell) {
            SweepCell& cell = plan.cells.back();
            if (key == "design") {
                cell.design = detail::plan_design(val, lineno);
                have_design = true;
            } else if (key == "n") {
                cell.n = static_cast<int>(detail::plan_int(val, lineno));
                have_n = true;
            } else if (key == "m") {
                cell.freq = detail::plan_freq(val, lineno);
                have_m = true;
            } else {
                detail::plan_fail(lineno, "unknown cell key '" + key + "'");
            }
        } else {
            if (key == "replicates")
                plan.replicates = static_cast<int>(detail::plan_int(val, lineno));
            else if (key == "seed")
                plan.seed = detail::plan_uint(val, lineno);
            else if (key == "selection")
                plan.selection = detail::plan_selection(val, lineno);
            else if (key == "lambda")
                plan.fixed_lambda = detail::plan_double(val, lineno);
            else if (key == "grid")
                plan.lambda_grid = detail::plan_grid(val, lineno);
            else if (key == "r")
                plan.r = static_cast<int>(detail::plan_int(val, lineno));
            else if (key == "noise_sd")
                plan.process.noise_sd = detail::plan_double(val, lineno);
            else if (key == "grid_size")
                plan.ise_grid_size = static_cast<int>(detail::plan_int(val, lineno));
            else if (key == "max_knots")
                plan.solve.max_knots =
                    static_cast<std::size_t>(detail::plan_int(val, lineno));
            else if (key == "interpolation_floor")
                plan.solve.interpolation_floor = detail::plan_double(val, lineno);
            else if (key == "slope")
                plan.slope_predictor = (val == "none") ? "" : val;
            else
                detail::plan_fail(lineno, "unknown key '" + key + "'");
        }
    }
    finish_cell();
    try {
        plan.validate();
    } catch (const error& ex) {
        throw parse_error(std::string("plan: ") + ex.what());
    }
    return plan;
}

inline SweepPlan load_sweep_plan(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw parse_error("cannot open '" + path + "'");
    return parse_sweep_plan(is);
}

/// Frequency field in the plan-file syntax, reused by command-line
/// flags ("10", "3,5,7", "uniform:2:8").
inline FrequencyRule parse_frequency_field(const std::string& v) {
    try {
        return detail::plan_freq(v, 0);
    } catch (const parse_error&) {
        throw parse_error("bad frequency '" + v +
                          "' (want an integer, a comma list, or uniform:lo:hi)");
    }
}

/// Grid field in the plan-file syntax ("lo:hi:count" or one value).
inline std::vector<double> parse_grid_field(const std::string& v) {
    try {
        return detail::plan_grid(v, 0);
    } catch (const parse_error&) {
        throw parse_error("bad grid '" + v +
                          "' (want 'lo:hi:count' with 0 < lo <= hi, or one value)");
    }
}

} // namespace fdmean
