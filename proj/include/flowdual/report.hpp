#pragma once

// CSV and JSON verdict reports with bundled readers.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "flowdual/error.hpp"
#include "flowdual/harness.hpp"

namespace flowdual {

enum class ReportFormat { csv, json };

inline const char* report_header() {
    return "experiment,lhs,lhs_se,rhs,rhs_se,discrepancy_se_units,tolerance,pass,runtime_s,seed";
}

inline ReportFormat parse_report_format(const std::string& s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    throw Error(errc::invalid_config, "unknown report format '" + s + "'");
}

namespace detail {

inline std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double read_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw Error(errc::io, "bad number '" + s + "' in report");
    return v;
}

inline nlohmann::json json_number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return nullptr;
    return v > 0 ? "inf" : "-inf";
}

inline double json_double(const nlohmann::json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (j.is_string()) return read_double(j.get<std::string>());
    return j.get<double>();
}

inline void require_rows(const std::vector<VerdictReport>& rows) {
    if (rows.empty()) throw Error(errc::io, "no verdicts to report");
}

}  // namespace detail

inline void write_csv(const std::vector<VerdictReport>& rows, std::ostream& os) {
    detail::require_rows(rows);
    os << report_header() << '\n';
    for (const auto& r : rows) {
        if (r.experiment.find_first_of(",\"\n") != std::string::npos) {
            throw Error(errc::io, "experiment id '" + r.experiment + "' is not CSV-safe");
        }
        os << r.experiment << ',' << detail::fmt_double(r.lhs) << ',' << detail::fmt_double(r.lhs_se)
           << ',' << detail::fmt_double(r.rhs) << ',' << detail::fmt_double(r.rhs_se) << ','
           << detail::fmt_double(r.discrepancy_se_units) << ',' << detail::fmt_double(r.tolerance)
           << ',' << (r.pass ? "true" : "false") << ',' << detail::fmt_double(r.runtime_s) << ','
           << r.seed << '\n';
    }
}

inline std::vector<VerdictReport> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != report_header()) {
        throw Error(errc::io, "missing or unexpected report header");
    }
    std::vector<VerdictReport> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 10) throw Error(errc::io, "report row has " + std::to_string(f.size()) + " fields");
        VerdictReport r;
        r.experiment = f[0];
        r.lhs = detail::read_double(f[1]);
        r.lhs_se = detail::read_double(f[2]);
        r.rhs = detail::read_double(f[3]);
        r.rhs_se = detail::read_double(f[4]);
        r.discrepancy_se_units = detail::read_double(f[5]);
        r.tolerance = detail::read_double(f[6]);
        if (f[7] != "true" && f[7] != "false") throw Error(errc::io, "bad pass field '" + f[7] + "'");
        r.pass = f[7] == "true";
        r.runtime_s = detail::read_double(f[8]);
        r.seed = std::stoull(f[9]);
        rows.push_back(r);
    }
    return rows;
}

inline nlohmann::json to_json(const std::vector<VerdictReport>& rows) {
    detail::require_rows(rows);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
        out.push_back({{"experiment", r.experiment},
                       {"lhs", detail::json_number(r.lhs)},
                       {"lhs_se", detail::json_number(r.lhs_se)},
                       {"rhs", detail::json_number(r.rhs)},
                       {"rhs_se", detail::json_number(r.rhs_se)},
                       {"discrepancy_se_units", detail::json_number(r.discrepancy_se_units)},
                       {"tolerance", detail::json_number(r.tolerance)},
                       {"pass", r.pass},
                       {"runtime_s", detail::json_number(r.runtime_s)},
                       {"seed", r.seed},
                       {"config", r.config},
                       {"note", r.note}});
    }
    return out;
}

inline void write_json(const std::vector<VerdictReport>& rows, std::ostream& os) {
    os << to_json(rows).dump(2) << '\n';
}

inline std::vector<VerdictReport> read_json(std::istream& is) {
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(errc::io, std::string("malformed JSON report: ") + e.what());
    }
    if (!j.is_array()) throw Error(errc::io, "JSON report must be an array");
    std::vector<VerdictReport> rows;
    for (const auto& o : j) {
        VerdictReport r;
        r.experiment = o.at("experiment").get<std::string>();
        r.lhs = detail::json_double(o.at("lhs"));
        r.lhs_se = detail::json_double(o.at("lhs_se"));
        r.rhs = detail::json_double(o.at("rhs"));
        r.rhs_se = detail::json_double(o.at("rhs_se"));
        r.discrepancy_se_units = detail::json_double(o.at("discrepancy_se_units"));
        r.tolerance = detail::json_double(o.at("tolerance"));
        r.pass = o.at("pass").get<bool>();
        r.runtime_s = detail::json_double(o.at("runtime_s"));
        r.seed = o.at("seed").get<std::uint64_t>();
        r.config = o.value("config", "");
        r.note = o.value("note", "");
        rows.push_back(r);
    }
    return rows;
}

inline void write_report(const std::vector<VerdictReport>& rows, ReportFormat format,
                         std::ostream& os) {
    if (format == ReportFormat::csv) {
        write_csv(rows, os);
    } else {
        write_json(rows, os);
    }
}

/// Writes a report file, replacing any previous contents.
inline void write_report(const std::vector<VerdictReport>& rows, ReportFormat format,
                         const std::string& path) {
    detail::require_rows(rows);
    std::ofstream os(path);
    if (!os) throw Error(errc::io, "cannot open '" + path + "' for writing");
    write_report(rows, format, os);
    if (!os) throw Error(errc::io, "write to '" + path + "' failed");
}

inline std::vector<VerdictReport> read_report(ReportFormat format, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(errc::io, "cannot open '" + path + "'");
    return format == ReportFormat::csv ? read_csv(is) : read_json(is);
}

}  // namespace flowdual
