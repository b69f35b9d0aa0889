#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "hjchar/errors.hpp"
#include "hjchar/field.hpp"
#include "hjchar/fundamental.hpp"
#include "hjchar/initial_data.hpp"
#include "hjchar/models.hpp"
#include "hjchar/numerics.hpp"

namespace hjchar {

// ---------------------------------------------------------------------------
// Truncation stabilization
// ---------------------------------------------------------------------------

struct TruncationConfig {
    double x0 = 0.0; // anchor of the fundamental solution
    double u0 = 0.0;
    ShootingConfig shooting;
    double stabilization_tol = 1e-6;
};

struct TruncationRow {
    double query_x = 0.0;
    double query_t = 0.0;
    double R = 0.0; // infinity row carries the untruncated value
    double value = 0.0;
    double A_star = 0.0; // max |U| along that run's minimizer
    double K_star = 0.0; // max |X'| likewise
};

struct TruncationTable {
    std::vector<double> R_list;
    std::vector<TruncationRow> rows; // sorted by query, then R (untruncated last)
    double A_star_observed = 0.0;    // from the untruncated minimizers
    double K_star_observed = 0.0;
    double R_hat = 0.0;              // max(A*, K*): stabilization threshold
    double max_stabilized_diff = 0.0;
    bool stabilized = false;         // all pairwise diffs <= tol above R_hat
};

/// Runs the fundamental solution at each query for every plateau radius in
/// R_list plus the untruncated model, measures the a-priori bounds A*/K* on
/// the untruncated minimizers, and checks that values agree across all
/// R >= R_hat = max(A*, K*).
inline TruncationTable truncation_experiment(const HamiltonianModel& m,
                                             const std::vector<FieldQuery>& queries,
                                             const std::vector<double>& R_list,
                                             const TruncationConfig& cfg = {}) {
    if (R_list.size() < 3)
        throw SolverError("truncation_experiment: need at least 3 truncation radii");
    for (std::size_t i = 1; i < R_list.size(); ++i)
        if (R_list[i] <= R_list[i - 1])
            throw SolverError("truncation_experiment: R_list must be increasing");
    if (queries.empty()) throw SolverError("truncation_experiment: no queries");

    TruncationTable table;
    table.R_list = R_list;

    std::vector<TruncatedModel> truncated;
    truncated.reserve(R_list.size());
    for (double R : R_list) truncated.push_back(truncate_model(m, R));

    const double inf = std::numeric_limits<double>::infinity();
    for (const FieldQuery& q : queries) {
        std::vector<double> values;
        for (const TruncatedModel& tm : truncated) {
            const FundamentalValue fv =
                fundamental_solution(tm.model, cfg.x0, cfg.u0, q.x, q.t, cfg.shooting);
            TruncationRow row;
            row.query_x = q.x;
            row.query_t = q.t;
            row.R = tm.R;
            row.value = fv.value;
            row.A_star = fv.trajectory.max_abs_u;
            row.K_star = fv.trajectory.max_abs_xdot;
            table.rows.push_back(row);
            values.push_back(fv.value);
        }
        const FundamentalValue fv =
            fundamental_solution(m, cfg.x0, cfg.u0, q.x, q.t, cfg.shooting);
        TruncationRow row;
        row.query_x = q.x;
        row.query_t = q.t;
        row.R = inf;
        row.value = fv.value;
        row.A_star = fv.trajectory.max_abs_u;
        row.K_star = fv.trajectory.max_abs_xdot;
        table.rows.push_back(row);
        table.A_star_observed = std::max(table.A_star_observed, row.A_star);
        table.K_star_observed = std::max(table.K_star_observed, row.K_star);
    }

    table.R_hat = std::max(table.A_star_observed, table.K_star_observed);

    // Pairwise diffs per query over radii at or above the threshold; the
    // untruncated value joins the comparison set (it is the R -> inf column).
    table.max_stabilized_diff = 0.0;
    const std::size_t ncols = R_list.size() + 1;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        double lo = inf, hi = -inf;
        for (std::size_t ri = 0; ri < ncols; ++ri) {
            const TruncationRow& row = table.rows[qi * ncols + ri];
            if (row.R < table.R_hat) continue;
            lo = std::min(lo, row.value);
            hi = std::max(hi, row.value);
        }
        if (hi >= lo)
            table.max_stabilized_diff = std::max(table.max_stabilized_diff, hi - lo);
    }
    table.stabilized = table.max_stabilized_diff <= cfg.stabilization_tol;
    return table;
}

// ---------------------------------------------------------------------------
// A-priori bound monitor
// ---------------------------------------------------------------------------

struct BoundRow {
    double R = 0.0;
    double A_star = 0.0;
    double K_star = 0.0;
};

struct BoundReport {
    double A_star_observed = 0.0;
    double K_star_observed = 0.0;
    std::vector<BoundRow> per_R; // ascending R, untruncated (R = inf) last
    double max_drift = 0.0;      // spread of per-R maxima above the threshold
    bool constant_above_threshold = false;
};

/// Per-R maxima of the minimizer monitors from a truncation experiment;
/// above the stabilization threshold the maxima must not drift.
inline BoundReport bound_monitor(const TruncationTable& table, double tol = 1e-6) {
    BoundReport rep;
    rep.A_star_observed = table.A_star_observed;
    rep.K_star_observed = table.K_star_observed;

    const std::size_t ncols = table.R_list.size() + 1;
    const std::size_t nq = table.rows.size() / ncols;
    for (std::size_t ri = 0; ri < ncols; ++ri) {
        BoundRow row;
        row.R = table.rows[ri].R;
        for (std::size_t qi = 0; qi < nq; ++qi) {
            const TruncationRow& r = table.rows[qi * ncols + ri];
            row.A_star = std::max(row.A_star, r.A_star);
            row.K_star = std::max(row.K_star, r.K_star);
        }
        rep.per_R.push_back(row);
    }

    double a_lo = std::numeric_limits<double>::infinity(), a_hi = -a_lo;
    double k_lo = a_lo, k_hi = -a_lo;
    for (const BoundRow& row : rep.per_R) {
        if (row.R < table.R_hat) continue;
        a_lo = std::min(a_lo, row.A_star);
        a_hi = std::max(a_hi, row.A_star);
        k_lo = std::min(k_lo, row.K_star);
        k_hi = std::max(k_hi, row.K_star);
    }
    if (a_hi >= a_lo) rep.max_drift = std::max(a_hi - a_lo, k_hi - k_lo);
    rep.constant_above_threshold = rep.max_drift <= tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Semiconcavity / Lipschitz probe
// ---------------------------------------------------------------------------

struct SemiconcavityRow {
    double t = 0.0;
    double max_second_diff = 0.0; // signed max of centered second differences
    double max_lipschitz = 0.0;   // max |forward difference quotient|
};

struct SemiconcavityReport {
    double max_second_diff = -std::numeric_limits<double>::infinity();
    double max_lipschitz = 0.0;
    std::vector<SemiconcavityRow> rows; // one per retained output time
};

/// Centered second differences and forward difference quotients over all
/// grid nodes at times >= delta. The second-difference max estimates the
/// semiconcavity constant; the quotient max estimates the Lipschitz bound.
inline SemiconcavityReport semiconcavity_probe(const SolutionField& field, double delta) {
    const int nx = field.nx();
    if (nx < 3) throw SolverError("semiconcavity_probe: grid too small");
    for (double v : field.values)
        if (!std::isfinite(v)) throw UnfilledFieldError("semiconcavity_probe: unfilled cell");

    const double h = field.period / nx;
    SemiconcavityReport rep;
    for (int j = 0; j < field.nt(); ++j) {
        if (field.t_nodes[static_cast<std::size_t>(j)] < delta) continue;
        SemiconcavityRow row;
        row.t = field.t_nodes[static_cast<std::size_t>(j)];
        row.max_second_diff = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < nx; ++i) {
            const double um = field.at((i + nx - 1) % nx, j);
            const double uc = field.at(i, j);
            const double up = field.at((i + 1) % nx, j);
            row.max_second_diff = std::max(row.max_second_diff, (up - 2.0 * uc + um) / (h * h));
            row.max_lipschitz = std::max(row.max_lipschitz, std::abs(up - uc) / h);
        }
        rep.rows.push_back(row);
        rep.max_second_diff = std::max(rep.max_second_diff, row.max_second_diff);
        rep.max_lipschitz = std::max(rep.max_lipschitz, row.max_lipschitz);
    }
    if (rep.rows.empty())
        throw SolverError("semiconcavity_probe: no output times at or above delta");
    return rep;
}

// ---------------------------------------------------------------------------
// Triangle inequality of the minimal action
// ---------------------------------------------------------------------------

struct TriangleSample {
    double x = 0.0, y = 0.0, z = 0.0;
    double t1 = 0.0, t2 = 0.0;
    double lhs = 0.0; // h_{t1+t2}(x -> z)
    double rhs = 0.0; // h_{t1}(x -> y) + h_{t2}(y -> z)
    double slack = 0.0;
};

struct TriangleReport {
    double worst_slack = std::numeric_limits<double>::infinity();
    std::vector<TriangleSample> samples;
};

/// Random-triple check of h_{t+t'}(x,z) <= h_t(x,y) + h_{t'}(y,z) for
/// u-independent models (u0 = 0 convention, times in [0.2, 1.0]).
inline TriangleReport triangle_check(const HamiltonianModel& m, int n_samples,
                                     std::uint64_t seed = 42,
                                     const ShootingConfig& cfg = {}) {
    for (int i = 0; i < 8; ++i) {
        const double x = m.period * i / 8.0;
        if (std::abs(m.dH(x, 1.7, 0.9).hu) > 1e-14)
            throw SolverError("triangle_check: model must be u-independent");
    }
    if (n_samples < 1) throw SolverError("triangle_check: need at least one sample");

    std::mt19937_64 rng(seed);
    TriangleReport rep;
    for (int s = 0; s < n_samples; ++s) {
        TriangleSample ts;
        ts.x = m.period * uniform01(rng);
        ts.y = m.period * uniform01(rng);
        ts.z = m.period * uniform01(rng);
        ts.t1 = 0.2 + 0.8 * uniform01(rng);
        ts.t2 = 0.2 + 0.8 * uniform01(rng);
        ts.lhs = fundamental_solution(m, ts.x, 0.0, ts.z, ts.t1 + ts.t2, cfg).value;
        const double leg1 = fundamental_solution(m, ts.x, 0.0, ts.y, ts.t1, cfg).value;
        const double leg2 = fundamental_solution(m, ts.y, 0.0, ts.z, ts.t2, cfg).value;
        ts.rhs = leg1 + leg2;
        ts.slack = ts.rhs - ts.lhs;
        rep.worst_slack = std::min(rep.worst_slack, ts.slack);
        rep.samples.push_back(ts);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Sensitivity of solved values to numerical knobs
// ---------------------------------------------------------------------------

struct SensitivityRow {
    double level = 0.0;
    std::vector<double> values; // per query
    double drift = 0.0;         // max |value - reference| over queries
};

struct SensitivityTable {
    std::string knob;
    std::vector<SensitivityRow> rows; // reference level (last entry) has drift 0
    double max_drift = 0.0;           // worst non-reference drift
};

/// Re-solves the query set at each knob level and reports drift against the
/// final (finest) level. Knobs: integrator_tol, N_p, ny, K_max.
inline SensitivityTable sensitivity_study(const HamiltonianModel& m, const InitialData& phi,
                                          const std::vector<FieldQuery>& queries,
                                          const std::string& knob,
                                          const std::vector<double>& levels,
                                          const ShootingFieldConfig& base = {}) {
    if (levels.size() < 3) throw SolverError("sensitivity_study: need at least 3 levels");
    if (queries.empty()) throw SolverError("sensitivity_study: no queries");

    auto solve_at = [&](double level) {
        ShootingFieldConfig cfg = base;
        if (knob == "integrator_tol") {
            cfg.shooting.tol = level;
        } else if (knob == "N_p") {
            cfg.shooting.n_p = static_cast<int>(level);
        } else if (knob == "ny") {
            cfg.ny = static_cast<int>(level);
        } else if (knob == "K_max") {
            cfg.shooting.k_max = static_cast<int>(level);
        } else {
            throw SolverError("sensitivity_study: unknown knob '" + knob + "'");
        }
        return solve_via_shooting(m, phi, queries, cfg);
    };

    SensitivityTable table;
    table.knob = knob;
    const std::vector<double> reference = solve_at(levels.back());
    for (double level : levels) {
        SensitivityRow row;
        row.level = level;
        row.values = solve_at(level);
        for (std::size_t i = 0; i < queries.size(); ++i)
            row.drift = std::max(row.drift, std::abs(row.values[i] - reference[i]));
        table.rows.push_back(row);
    }
    for (std::size_t i = 0; i + 1 < table.rows.size(); ++i)
        table.max_drift = std::max(table.max_drift, table.rows[i].drift);
    return table;
}

} // namespace hjchar
