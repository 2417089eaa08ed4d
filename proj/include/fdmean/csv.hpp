#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <system_error>
#include <vector>

#include "fdmean/dataset.hpp"
#include "fdmean/errors.hpp"
#include "fdmean/harness.hpp"

namespace fdmean {

/// Shortest decimal string that round-trips the double (dataset and
/// curve files).
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Fixed 17-significant-digit form used by sweep and profile outputs.
inline std::string format_double17(double v) {
    char buf[64];
    int len = std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

inline void write_dataset_csv(std::ostream& os, const FunctionalDataset& data) {
    os << "curve_id,t,y\n";
    for (std::size_t i = 0; i < data.curves.size(); ++i) {
        const Curve& c = data.curves[i];
        for (std::size_t j = 0; j < c.size(); ++j)
            os << i << ',' << format_double(c.points[j]) << ','
               << format_double(c.values[j]) << '\n';
    }
}

namespace detail {

inline double parse_csv_double(const std::string& field, std::size_t line) {
    double v = 0.0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw parse_error("csv line " + std::to_string(line) +
                          ": bad number '" + field + "'");
    return v;
}

inline long long parse_csv_int(const std::string& field, std::size_t line) {
    long long v = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw parse_error("csv line " + std::to_string(line) +
                          ": bad integer '" + field + "'");
    return v;
}

} // namespace detail

/// Read a `curve_id,t,y` file.  Rows must be sorted by (curve_id, t);
/// the design tag is supplied by the caller and the assembled dataset
/// is validated before returning.  All failures raise parse_error with
/// the offending line number.
inline FunctionalDataset read_dataset_csv(std::istream& is, DesignTag design) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(is, line))
        throw parse_error("csv: empty input");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "curve_id,t,y")
        throw parse_error("csv line 1: expected header 'curve_id,t,y', got '" +
                          line + "'");

    FunctionalDataset data;
    data.design = design;
    long long cur_id = -1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t c1 = line.find(',');
        std::size_t c2 = (c1 == std::string::npos) ? std::string::npos
                                                   : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos ||
            line.find(',', c2 + 1) != std::string::npos)
            throw parse_error("csv line " + std::to_string(lineno) +
                              ": expected 3 fields");
        long long id = detail::parse_csv_int(line.substr(0, c1), lineno);
        double t = detail::parse_csv_double(line.substr(c1 + 1, c2 - c1 - 1), lineno);
        double y = detail::parse_csv_double(line.substr(c2 + 1), lineno);
        if (id < cur_id)
            throw parse_error("csv line " + std::to_string(lineno) +
                              ": curve_id decreases; rows must be sorted by "
                              "(curve_id, t)");
        if (id > cur_id) {
            cur_id = id;
            data.curves.emplace_back();
        }
        Curve& c = data.curves.back();
        if (!c.points.empty() && t < c.points.back())
            throw parse_error("csv line " + std::to_string(lineno) +
                              ": t decreases within curve " + std::to_string(id));
        c.points.push_back(t);
        c.values.push_back(y);
    }
    try {
        data.validate();
    } catch (const error& ex) {
        throw parse_error(std::string("csv: ") + ex.what());
    }
    return data;
}

inline FunctionalDataset load_dataset_csv(const std::string& path,
                                          DesignTag design) {
    std::ifstream is(path);
    if (!is) throw parse_error("cannot open '" + path + "'");
    return read_dataset_csv(is, design);
}

inline void save_dataset_csv(const std::string& path,
                             const FunctionalDataset& data) {
    std::ofstream os(path);
    if (!os) throw parse_error("cannot open '" + path + "' for writing");
    write_dataset_csv(os, data);
}

/// Sweep records: one row per completed replicate, doubles at 17
/// significant digits.
inline void write_sweep_csv(std::ostream& os, std::span<const IseRecord> records) {
    os << "design,n,m,replicate,lambda,selection,ise\n";
    for (const IseRecord& r : records)
        os << to_string(r.design) << ',' << r.n << ',' << format_double17(r.m)
           << ',' << r.replicate << ',' << format_double17(r.lambda) << ','
           << to_string(r.selection) << ',' << format_double17(r.ise) << '\n';
}

inline void write_profile_csv(std::ostream& os,
                              std::span<const ProfilePoint> points) {
    os << "lambda,ise\n";
    for (const ProfilePoint& p : points)
        os << format_double17(p.lambda) << ',' << format_double17(p.ise) << '\n';
}

/// Fitted curve on an evaluation grid.
inline void write_curve_csv(std::ostream& os, std::span<const double> t,
                            std::span<const double> ghat) {
    if (t.size() != ghat.size())
        throw precondition_error("write_curve_csv: length mismatch");
    os << "t,ghat\n";
    for (std::size_t i = 0; i < t.size(); ++i)
        os << format_double(t[i]) << ',' << format_double(ghat[i]) << '\n';
}

} // namespace fdmean
