#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hjchar/errors.hpp"
#include "hjchar/field.hpp"
#include "hjchar/initial_data.hpp"
#include "hjchar/models.hpp"
#include "hjchar/numerics.hpp"

namespace hjchar {

struct LFConfig {
    int nx = 400;
    double cfl = 0.45;
    double alpha = 0.0; // artificial-viscosity speed; <= 0 requests auto-calibration
    std::vector<double> t_nodes = {1.0};
};

namespace detail {

/// One explicit monotone step for every cell; returns the max |H_p| seen
/// at the stencil arguments (the quantity alpha must dominate).
inline double lf_step(const HamiltonianModel& m, std::vector<double>& u,
                      std::vector<double>& next, double dx, double dt, double alpha) {
    const int n = static_cast<int>(u.size());
    double max_hp = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = dx * i;
        const double ul = u[static_cast<std::size_t>((i + n - 1) % n)];
        const double ur = u[static_cast<std::size_t>((i + 1) % n)];
        const double uc = u[static_cast<std::size_t>(i)];
        const double central = (ur - ul) / (2.0 * dx);
        const double second = (ur - 2.0 * uc + ul) / dx;
        const ModelEval e = m.eval(x, uc, central);
        max_hp = std::max(max_hp, std::abs(e.hp));
        next[static_cast<std::size_t>(i)] = uc - dt * (e.h - 0.5 * alpha * second);
    }
    return max_hp;
}

/// Advance u from t_from to t_to with steps of at most dt_max, landing
/// exactly on t_to. Returns max |H_p| over the whole span.
inline double lf_advance(const HamiltonianModel& m, std::vector<double>& u, double dx,
                         double t_from, double t_to, double dt_max, double alpha) {
    const double span = t_to - t_from;
    const int steps = std::max(1, static_cast<int>(std::ceil(span / dt_max - 1e-12)));
    const double dt = span / steps;
    std::vector<double> next(u.size());
    double max_hp = 0.0;
    for (int s = 0; s < steps; ++s) {
        max_hp = std::max(max_hp, lf_step(m, u, next, dx, dt, alpha));
        u.swap(next);
    }
    return max_hp;
}

} // namespace detail

/// Monotone Lax-Friedrichs reference solver for u_t + H(x,u,u_x) = 0 with
/// periodic boundary. alpha <= 0 runs a coarse pilot first and sets
/// alpha = 1.5 * (max |H_p| observed). The monotonicity restriction
/// dt (alpha/dx + max|H_u|) <= 1 is checked against box estimates up
/// front, and alpha >= |H_p| is monitored at every step.
inline SolutionField solve_lf(const HamiltonianModel& m, const InitialData& phi,
                              const LFConfig& cfg, double* alpha_used = nullptr) {
    if (cfg.nx < 16) throw SolverError("solve_lf: nx must be >= 16");
    if (cfg.cfl <= 0.0 || cfg.cfl > 1.0) throw SolverError("solve_lf: cfl must be in (0,1]");
    if (cfg.t_nodes.empty()) throw SolverError("solve_lf: no output times");
    for (std::size_t j = 0; j < cfg.t_nodes.size(); ++j) {
        const bool ordered = j == 0 || cfg.t_nodes[j] > cfg.t_nodes[j - 1];
        if (cfg.t_nodes[j] <= 0.0 || !ordered)
            throw SolverError("solve_lf: output times must be ascending and > 0");
    }

    const double period = m.period;
    const double T = cfg.t_nodes.back();

    // Sample phi once for grid setup and box estimates.
    auto sample_phi = [&](int n) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = phi(period * i / static_cast<double>(n));
        return v;
    };

    double alpha = cfg.alpha;
    if (alpha <= 0.0) {
        // Pilot run on a coarse grid with a generous speed, tracking the
        // gradient speeds actually realized.
        const int pnx = std::min(cfg.nx, 128);
        std::vector<double> pu = sample_phi(pnx);
        const double pdx = period / pnx;
        double pilot_alpha = 1.0;
        for (int i = 0; i < pnx; ++i) {
            const double ul = pu[static_cast<std::size_t>((i + pnx - 1) % pnx)];
            const double ur = pu[static_cast<std::size_t>((i + 1) % pnx)];
            const double central = (ur - ul) / (2.0 * pdx);
            pilot_alpha = std::max(pilot_alpha,
                                   std::abs(m.dH(pdx * i, pu[static_cast<std::size_t>(i)], central).hp));
        }
        pilot_alpha = 2.0 * pilot_alpha + 2.0;
        const double pdt = cfg.cfl * pdx / pilot_alpha;
        const double seen = detail::lf_advance(m, pu, pdx, 0.0, T, pdt, pilot_alpha);
        alpha = 1.5 * seen;
    }

    if (alpha_used) *alpha_used = alpha;

    const double dx = period / cfg.nx;
    const double dt_max = cfg.cfl * dx / alpha;

    // Monotonicity restriction against box estimates: u within the phi
    // range widened by 2, gradients up to the speed alpha covers.
    {
        const auto u_samples = sample_phi(std::min(cfg.nx, 256));
        const double u_lo = *std::min_element(u_samples.begin(), u_samples.end()) - 2.0;
        const double u_hi = *std::max_element(u_samples.begin(), u_samples.end()) + 2.0;
        double max_hu = 0.0;
        for (int ix = 0; ix < 64; ++ix)
            for (int iu = 0; iu <= 32; ++iu)
                for (int ip = 0; ip <= 16; ++ip) {
                    const double x = period * ix / 64.0;
                    const double u = u_lo + (u_hi - u_lo) * iu / 32.0;
                    const double p = -alpha + 2.0 * alpha * ip / 16.0;
                    max_hu = std::max(max_hu, std::abs(m.dH(x, u, p).hu));
                }
        if (dt_max * (alpha / dx + max_hu) > 1.0 + 1e-12)
            throw CflViolationError("solve_lf: dt (alpha/dx + max|H_u|) > 1; lower cfl");
    }

    SolutionField field;
    field.provenance = SolutionField::Provenance::lax_friedrichs;
    field.period = period;
    field.x_nodes.resize(static_cast<std::size_t>(cfg.nx));
    for (int i = 0; i < cfg.nx; ++i) field.x_nodes[static_cast<std::size_t>(i)] = dx * i;
    field.t_nodes = cfg.t_nodes;
    field.values.reserve(static_cast<std::size_t>(cfg.nx) * cfg.t_nodes.size());

    std::vector<double> u = sample_phi(cfg.nx);
    double t_prev = 0.0;
    for (double t : cfg.t_nodes) {
        const double seen = detail::lf_advance(m, u, dx, t_prev, t, dt_max, alpha);
        if (seen > alpha)
            throw CflViolationError("solve_lf: runtime max |H_p| exceeded alpha; raise alpha");
        field.values.insert(field.values.end(), u.begin(), u.end());
        t_prev = t;
    }
    field.fallback_mask.assign(field.values.size(), 0);
    field.fill_fraction = 1.0;
    field.flood_fraction = 1.0;
    return field;
}

/// Exact evaluation of the inf-convolution for the quadratic Hamiltonian
/// p^2/2: min over a dense seed lattice and winding copies of
/// phi(y) + (x - y + k period)^2 / (2t), then golden-section polish around
/// the winning seed (free model only).
inline double hopf_lax_exact(const InitialData& phi, double x, double t, int ny_dense = 4001,
                             int k_max = 2, int polish_iters = 40) {
    if (t <= 0.0) throw SolverError("hopf_lax_exact: t must be > 0");
    const double period = 1.0;

    double best = std::numeric_limits<double>::infinity();
    double best_y = 0.0;
    double best_k = 0.0;
    for (int j = 0; j < ny_dense; ++j) {
        const double y = period * j / static_cast<double>(ny_dense);
        const double fy = phi(y);
        for (int k = -k_max; k <= k_max; ++k) {
            const double d = x - y + k * period;
            const double c = fy + d * d / (2.0 * t);
            if (c < best) {
                best = c;
                best_y = y;
                best_k = k;
            }
        }
    }

    const double dy = period / static_cast<double>(ny_dense);
    auto cost = [&](double y) {
        const double d = x - y + best_k * period;
        return phi(y) + d * d / (2.0 * t);
    };
    const ScalarMin polished = golden_section_min(cost, best_y - dy, best_y + dy, polish_iters);
    return std::min(best, polished.value);
}

/// Hopf-Lax values assembled on a grid, for field-level comparisons.
inline SolutionField hopf_lax_field(const InitialData& phi, int nx,
                                    const std::vector<double>& t_nodes, int ny_dense = 4001,
                                    int k_max = 2) {
    SolutionField field;
    field.provenance = SolutionField::Provenance::hopf_lax;
    field.period = 1.0;
    field.x_nodes.resize(static_cast<std::size_t>(nx));
    for (int i = 0; i < nx; ++i) field.x_nodes[static_cast<std::size_t>(i)] = static_cast<double>(i) / nx;
    field.t_nodes = t_nodes;
    field.values.reserve(static_cast<std::size_t>(nx) * t_nodes.size());
    for (double t : t_nodes)
        for (int i = 0; i < nx; ++i)
            field.values.push_back(hopf_lax_exact(phi, field.x_nodes[static_cast<std::size_t>(i)], t,
                                                  ny_dense, k_max));
    field.fallback_mask.assign(field.values.size(), 0);
    return field;
}

struct ErrorRow {
    double t = 0.0;
    double sup = 0.0;
    double l1 = 0.0;
};

struct ErrorReport {
    double sup = 0.0;
    double l1 = 0.0; // mean absolute difference over all cells
    std::vector<ErrorRow> rows;
};

/// Cellwise difference of two fields on identical grids.
inline ErrorReport compare_fields(const SolutionField& a, const SolutionField& b) {
    if (a.x_nodes.size() != b.x_nodes.size() || a.t_nodes.size() != b.t_nodes.size())
        throw GridMismatchError("compare_fields: grid sizes differ");
    for (std::size_t i = 0; i < a.x_nodes.size(); ++i)
        if (std::abs(a.x_nodes[i] - b.x_nodes[i]) > 1e-12)
            throw GridMismatchError("compare_fields: x-grids differ");
    for (std::size_t j = 0; j < a.t_nodes.size(); ++j)
        if (std::abs(a.t_nodes[j] - b.t_nodes[j]) > 1e-12)
            throw GridMismatchError("compare_fields: t-nodes differ");

    ErrorReport rep;
    const int nx = a.nx();
    double total = 0.0;
    for (int j = 0; j < a.nt(); ++j) {
        ErrorRow row;
        row.t = a.t_nodes[static_cast<std::size_t>(j)];
        double sum = 0.0;
        for (int i = 0; i < nx; ++i) {
            const double da = a.at(i, j);
            const double db = b.at(i, j);
            if (!std::isfinite(da) || !std::isfinite(db))
                throw UnfilledFieldError("compare_fields: unfilled cell");
            const double d = std::abs(da - db);
            row.sup = std::max(row.sup, d);
            sum += d;
        }
        row.l1 = sum / nx;
        total += sum;
        rep.sup = std::max(rep.sup, row.sup);
        rep.rows.push_back(row);
    }
    rep.l1 = total / static_cast<double>(a.values.size());
    return rep;
}

} // namespace hjchar
