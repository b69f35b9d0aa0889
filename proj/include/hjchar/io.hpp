#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "hjchar/analysis.hpp"
#include "hjchar/charflow.hpp"
#include "hjchar/errors.hpp"
#include "hjchar/field.hpp"
#include "hjchar/oracle.hpp"

namespace hjchar {

/// Shortest representation that round-trips a double (17 significant digits).
inline std::string format_real(double v) {
    if (!std::isfinite(v)) throw SolverError("format_real: non-finite value reached an emitter");
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SolverError("cannot open for writing: " + path);
    out << text;
    if (!out) throw SolverError("write failed: " + path);
}

} // namespace detail

/// Trajectory CSV: one row per stored node, `tau,x,u,p`.
inline std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "tau,x,u,p\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const PhasePoint& s = traj.states[i];
        out += format_real(traj.times[i]);
        out += ',';
        out += format_real(s.x);
        out += ',';
        out += format_real(s.u);
        out += ',';
        out += format_real(s.p);
        out += '\n';
    }
    return out;
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    detail::write_text(path, trajectory_csv(traj));
}

/// Field CSV: `x,t,u`, row-major by t then x.
inline std::string field_csv(const SolutionField& field) {
    std::string out = "x,t,u\n";
    for (int j = 0; j < field.nt(); ++j)
        for (int i = 0; i < field.nx(); ++i) {
            out += format_real(field.x_nodes[static_cast<std::size_t>(i)]);
            out += ',';
            out += format_real(field.t_nodes[static_cast<std::size_t>(j)]);
            out += ',';
            out += format_real(field.at(i, j));
            out += '\n';
        }
    return out;
}

inline void write_field_csv(const std::string& path, const SolutionField& field) {
    detail::write_text(path, field_csv(field));
}

/// Truncation experiment CSV: `query_x,query_t,R,value`; the untruncated
/// column is emitted with R=inf excluded (it is a diagnostic, not a row).
inline std::string truncation_csv(const TruncationTable& table) {
    std::string out = "query_x,query_t,R,value\n";
    for (const TruncationRow& row : table.rows) {
        if (!std::isfinite(row.R)) continue;
        out += format_real(row.query_x);
        out += ',';
        out += format_real(row.query_t);
        out += ',';
        out += format_real(row.R);
        out += ',';
        out += format_real(row.value);
        out += '\n';
    }
    return out;
}

inline void write_truncation_csv(const std::string& path, const TruncationTable& table) {
    detail::write_text(path, truncation_csv(table));
}

/// Query-value CSV for scattered evaluations: `x,t,u`.
inline std::string queries_csv(const std::vector<FieldQuery>& queries,
                               const std::vector<double>& values) {
    if (queries.size() != values.size())
        throw SolverError("queries_csv: size mismatch");
    std::string out = "x,t,u\n";
    for (std::size_t i = 0; i < queries.size(); ++i) {
        out += format_real(queries[i].x);
        out += ',';
        out += format_real(queries[i].t);
        out += ',';
        out += format_real(values[i]);
        out += '\n';
    }
    return out;
}

} // namespace hjchar
