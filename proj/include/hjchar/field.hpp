#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "hjchar/charflow.hpp"
#include "hjchar/errors.hpp"
#include "hjchar/fundamental.hpp"
#include "hjchar/initial_data.hpp"
#include "hjchar/models.hpp"
#include "hjchar/numerics.hpp"

namespace hjchar {

struct GridSpec {
    int nx = 200;                      // spatial nodes over one period
    std::vector<double> t_nodes = {1.0}; // ascending output times, all > 0
    double period = 1.0;
    double x_node(int i) const { return period * i / static_cast<double>(nx); }
};

struct SeedSpec {
    int ny = 400;      // seed positions per period
    int np = 401;      // seed momenta per position
    double p_max = 8.0;
};

struct FloodConfig {
    double tol = 1e-10;
    bool polish = true;
    int arrival_iters = 28; // golden iterations over p0 (arrival residual)
    int seed_iters = 12;    // golden iterations over the seed position
    int inner_iters = 20;   // arrival iterations inside the seed polish
    double fill_requirement = 0.99;
    int fallback_ny = 24;   // seed lattice for cells flooding never hit
    ShootingConfig fallback = make_fallback();

    static ShootingConfig make_fallback() {
        ShootingConfig c;
        c.n_p = 201;
        return c;
    }
};

struct SolutionField {
    enum class Provenance { characteristics, lax_friedrichs, hopf_lax };
    Provenance provenance = Provenance::characteristics;
    double period = 1.0;
    std::vector<double> x_nodes;
    std::vector<double> t_nodes;
    std::vector<double> values;              // time-major: values[j*nx + i]
    std::vector<std::uint8_t> fallback_mask; // 1 where direct shooting filled in
    double fill_fraction = 1.0;              // final coverage (1.0 on success)
    double flood_fraction = 1.0;             // coverage before the fallback pass
    int fallback_cells = 0;
    int blown_seeds = 0;
    double max_abs_u = 0.0;    // sup |u| over contributing characteristics
    double max_abs_xdot = 0.0; // sup |x'| over contributing characteristics

    int nx() const { return static_cast<int>(x_nodes.size()); }
    int nt() const { return static_cast<int>(t_nodes.size()); }
    double at(int i, int j) const {
        return values[static_cast<std::size_t>(j) * x_nodes.size() + static_cast<std::size_t>(i)];
    }
    double& at(int i, int j) {
        return values[static_cast<std::size_t>(j) * x_nodes.size() + static_cast<std::size_t>(i)];
    }
};

struct FieldQuery {
    double x = 0.0;
    double t = 1.0;
};

struct ShootingFieldConfig {
    int ny = 24;            // seed positions scanned per query
    ShootingConfig shooting = make_scan();
    int polish_iters = 25;  // golden iterations over the seed position
    int window_n = 41;      // momentum lattice of the polish window

    static ShootingConfig make_scan() {
        ShootingConfig c;
        c.n_p = 151;
        return c;
    }
};

namespace detail {

inline std::optional<PhasePoint> single_shot(const HamiltonianModel& m, double y, double u0,
                                             double p0, double t, double tol) {
    FlowOptions opts;
    opts.keep_nodes = false;
    FlowProbe probe = flow_probe(m, {y, u0, p0}, t, tol, opts);
    if (probe.status != FlowStatus::ok) return std::nullopt;
    return probe.traj.endpoint();
}

/// Minimum terminal u over all two-point roots visible in `scan` for one
/// query point; +inf when the scan shows none. Reports the winning root's
/// momentum and lifted target for later polish.
inline double min_root_value(const HamiltonianModel& m, double y, double u0, double t,
                             const std::vector<ScanPoint>& scan, double x, int k_max,
                             double root_tol, double tol, double& best_p0,
                             double& best_target) {
    std::vector<ShootingResult> roots;
    const double d0 = wrap_signed(x - y, m.period);
    for (int k = -k_max; k <= k_max; ++k)
        roots_for_target(m, y, u0, t, scan, y + d0 + k * m.period, k, root_tol, tol, roots);
    double v = std::numeric_limits<double>::infinity();
    for (const auto& r : roots) {
        if (r.terminal.u < v) {
            v = r.terminal.u;
            best_p0 = r.p0;
            best_target = y + d0 + r.winding * m.period;
        }
    }
    return v;
}

} // namespace detail

/// Evaluate the variational solution at scattered query points by scanning
/// seed positions: for each seed y the two-point problem y -> x is solved
/// and the terminal u of the cheapest arrival competes. A golden-section
/// pass over the seed position refines the winning seed's neighborhood
/// using a narrow momentum window around the incumbent root.
inline std::vector<double> solve_via_shooting(const HamiltonianModel& m, const InitialData& phi,
                                              const std::vector<FieldQuery>& queries,
                                              const ShootingFieldConfig& cfg = {}) {
    const double period = m.period;
    const double inf = std::numeric_limits<double>::infinity();

    struct Best {
        double value = std::numeric_limits<double>::infinity();
        double y = 0.0;
        double p0 = 0.0;
        double target = 0.0;
    };
    std::vector<Best> best(queries.size());

    // Group queries by horizon: one momentum scan per (seed, horizon) pair
    // serves every query point at that horizon.
    std::map<double, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        if (queries[i].t < 1e-3)
            throw DegenerateTimeError("solve_via_shooting: horizon below 1e-3");
        groups[queries[i].t].push_back(i);
    }

    const ShootingConfig& sc = cfg.shooting;
    for (const auto& [t, idxs] : groups) {
        for (int j = 0; j < cfg.ny; ++j) {
            const double y = period * j / static_cast<double>(cfg.ny);
            const double u0 = phi(y);
            const auto scan =
                detail::scan_momenta(m, y, u0, t, -sc.p_max, sc.p_max, sc.n_p, sc.tol);
            for (std::size_t qi : idxs) {
                double p0 = 0.0, target = 0.0;
                const double v = detail::min_root_value(m, y, u0, t, scan, queries[qi].x,
                                                        sc.k_max, sc.root_tol, sc.tol, p0, target);
                if (v < best[qi].value) best[qi] = {v, y, p0, target};
            }
        }
    }

    // Polish each query around its winning seed.
    const double dy = period / static_cast<double>(cfg.ny);
    const double window = 3.0 * 2.0 * sc.p_max / static_cast<double>(sc.n_p - 1);
    std::vector<double> out(queries.size());
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        if (!(best[qi].value < inf))
            throw EmptyRootSetError("solve_via_shooting: no arrival found for a query point");
        const double t = queries[qi].t;
        const Best b = best[qi];

        auto value_from_seed = [&](double y) {
            const auto scan = detail::scan_momenta(m, y, phi(y), t, b.p0 - window,
                                                   b.p0 + window, cfg.window_n, sc.tol);
            std::vector<ShootingResult> roots;
            detail::roots_for_target(m, y, phi(y), t, scan, b.target, 0, sc.root_tol, sc.tol,
                                     roots);
            double v = inf;
            for (const auto& r : roots) v = std::min(v, r.terminal.u);
            return v;
        };
        const ScalarMin polished =
            golden_section_min(value_from_seed, b.y - dy, b.y + dy, cfg.polish_iters);
        out[qi] = std::min(b.value, polished.value);
    }
    return out;
}

/// Forward characteristic flooding: launch a (position, momentum) seed
/// lattice, integrate each characteristic through all output times, and
/// min-reduce arrivals into the nearest grid cell with the first-order
/// momentum correction v = u + p (x_cell - x_arrival). Optional polish
/// lands characteristics exactly on the winning cells; unhit cells fall
/// back to direct shooting.
inline SolutionField solve_forward_flood(const HamiltonianModel& m, const InitialData& phi,
                                         const GridSpec& grid, const SeedSpec& seeds,
                                         const FloodConfig& cfg = {}) {
    if (grid.nx < 16) throw SolverError("solve_forward_flood: nx must be >= 16");
    if (grid.t_nodes.empty()) throw SolverError("solve_forward_flood: no output times");
    for (std::size_t j = 0; j < grid.t_nodes.size(); ++j) {
        const bool ordered = j == 0 || grid.t_nodes[j] > grid.t_nodes[j - 1];
        if (grid.t_nodes[j] <= 0.0 || !ordered)
            throw SolverError("solve_forward_flood: output times must be ascending and > 0");
    }
    if (seeds.ny < 4 || seeds.np < 3)
        throw SolverError("solve_forward_flood: seed lattice too small");

    const int nx = grid.nx;
    const int nt = static_cast<int>(grid.t_nodes.size());
    const double period = grid.period;
    const double dx = period / nx;
    const double T = grid.t_nodes.back();
    const double dp = 2.0 * seeds.p_max / static_cast<double>(seeds.np - 1);
    const double dy = period / static_cast<double>(seeds.ny);

    struct CellBest {
        double value = 0.0;
        double y = 0.0, p0 = 0.0;
        long order = -1; // seed rank, breaks exact value ties first-come
        bool filled = false;
    };
    std::vector<CellBest> best(static_cast<std::size_t>(nx) * static_cast<std::size_t>(nt));
    auto cell = [&](int i, int s) -> CellBest& {
        return best[static_cast<std::size_t>(s) * nx + static_cast<std::size_t>(i)];
    };

    SolutionField field;
    field.provenance = SolutionField::Provenance::characteristics;
    field.period = period;
    field.x_nodes.resize(static_cast<std::size_t>(nx));
    for (int i = 0; i < nx; ++i) field.x_nodes[static_cast<std::size_t>(i)] = grid.x_node(i);
    field.t_nodes = grid.t_nodes;
    field.values.assign(static_cast<std::size_t>(nx) * static_cast<std::size_t>(nt),
                        std::numeric_limits<double>::quiet_NaN());
    field.fallback_mask.assign(field.values.size(), 0);

    // Seed pass.
    FlowOptions opts;
    opts.keep_nodes = false;
    opts.sample_times = grid.t_nodes;
    long order = 0;
    for (int j = 0; j < seeds.ny; ++j) {
        const double y = period * j / static_cast<double>(seeds.ny);
        const double u0 = phi(y);
        for (int k = 0; k < seeds.np; ++k, ++order) {
            const double p0 = -seeds.p_max + dp * k;
            FlowProbe probe = flow_probe(m, {y, u0, p0}, T, cfg.tol, opts);
            if (probe.status != FlowStatus::ok) {
                ++field.blown_seeds;
            } else {
                field.max_abs_u = std::max(field.max_abs_u, probe.traj.max_abs_u);
                field.max_abs_xdot = std::max(field.max_abs_xdot, probe.traj.max_abs_xdot);
            }
            for (int s = 0; s < probe.samples_done; ++s) {
                const PhasePoint& a = probe.traj.samples[static_cast<std::size_t>(s)];
                const double xa = wrap_period(a.x, period);
                const int i = static_cast<int>(std::lround(xa / dx)) % nx;
                const double delta = wrap_signed(grid.x_node(i) - a.x, period);
                const double v = a.u + a.p * delta;
                CellBest& cb = cell(i, s);
                if (!cb.filled || v < cb.value) {
                    cb.value = v;
                    cb.y = y;
                    cb.p0 = p0;
                    cb.order = order;
                    cb.filled = true;
                }
            }
        }
    }

    int filled = 0;
    for (const auto& cb : best)
        if (cb.filled) ++filled;
    field.flood_fraction = static_cast<double>(filled) / static_cast<double>(best.size());
    if (field.flood_fraction < cfg.fill_requirement) {
        throw UnderResolvedError("solve_forward_flood: seed lattice reached only " +
                                 std::to_string(field.flood_fraction * 100.0) +
                                 "% of cells; refine ny/np");
    }

    // Polish pass: the binned estimate u + p (x_cell - x) is biased to
    // second order in the seed spacing and the bias can be negative, so a
    // min against it would systematically undershoot. Instead the polish
    // re-lands the winning seed's characteristic exactly on the cell and
    // REPLACES the binned estimate with the landed value (phase A), then
    // minimizes the landed value over nearby seed positions (phase B).
    // The binned estimate survives only where no landing succeeds.
    if (cfg.polish) {
        for (int s = 0; s < nt; ++s) {
            const double tj = grid.t_nodes[static_cast<std::size_t>(s)];
            const double accept = 0.25 * dx; // residual gate for a trusted landing
            for (int i = 0; i < nx; ++i) {
                CellBest& cb = cell(i, s);
                if (!cb.filled) continue;
                const double xc = grid.x_node(i);

                auto corrected_value = [&](const PhasePoint& a) {
                    return a.u + a.p * wrap_signed(xc - a.x, period);
                };

                // Land on the cell: golden section on the arrival residual
                // over p0 near the incumbent momentum.
                auto land = [&](double y, double u0, double p_center, int iters) {
                    std::optional<PhasePoint> hit;
                    double hit_resid = std::numeric_limits<double>::infinity();
                    auto resid = [&](double p0) {
                        auto end = detail::single_shot(m, y, u0, p0, tj, cfg.tol);
                        if (!end) return std::numeric_limits<double>::infinity();
                        const double r = std::abs(wrap_signed(end->x - xc, period));
                        if (r < hit_resid) {
                            hit_resid = r;
                            hit = end;
                        }
                        return r;
                    };
                    golden_section_min(resid, p_center - dp, p_center + dp, iters);
                    if (hit && hit_resid > accept) hit.reset();
                    return hit;
                };

                // Phase A: re-land the incumbent seed.
                double landed = std::numeric_limits<double>::infinity();
                if (auto hit = land(cb.y, phi(cb.y), cb.p0, cfg.arrival_iters))
                    landed = corrected_value(*hit);

                // Phase B: move the seed position, re-landing each time.
                auto seed_value = [&](double y) {
                    auto hit = land(y, phi(y), cb.p0, cfg.inner_iters);
                    if (!hit) return std::numeric_limits<double>::infinity();
                    return corrected_value(*hit);
                };
                const ScalarMin moved =
                    golden_section_min(seed_value, cb.y - dy, cb.y + dy, cfg.seed_iters);
                landed = std::min(landed, moved.value);

                if (std::isfinite(landed)) cb.value = landed;
            }
        }
    }

    // Fallback pass for cells that no characteristic reached.
    ShootingFieldConfig fb;
    fb.ny = cfg.fallback_ny;
    fb.shooting = cfg.fallback;
    for (int s = 0; s < nt; ++s) {
        for (int i = 0; i < nx; ++i) {
            CellBest& cb = cell(i, s);
            if (cb.filled) {
                field.at(i, s) = cb.value;
                continue;
            }
            const std::vector<FieldQuery> q = {
                {grid.x_node(i), grid.t_nodes[static_cast<std::size_t>(s)]}};
            field.at(i, s) = solve_via_shooting(m, phi, q, fb)[0];
            field.fallback_mask[static_cast<std::size_t>(s) * nx + static_cast<std::size_t>(i)] = 1;
            ++field.fallback_cells;
        }
    }

    int have = 0;
    for (double v : field.values)
        if (std::isfinite(v)) ++have;
    field.fill_fraction = static_cast<double>(have) / static_cast<double>(field.values.size());
    return field;
}

} // namespace hjchar
