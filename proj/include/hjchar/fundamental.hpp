#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "hjchar/charflow.hpp"
#include "hjchar/errors.hpp"
#include "hjchar/models.hpp"
#include "hjchar/numerics.hpp"

namespace hjchar {

struct ShootingConfig {
    double p_max = 8.0;      // initial momentum scan window [-p_max, p_max]
    int n_p = 801;           // scan lattice size
    int k_max = 2;           // winding numbers searched: -k_max..k_max
    double tol = 1e-10;      // integrator tolerance
    double root_tol = 1e-10; // accepted |X(t) - target|
    int max_widenings = 3;   // window doublings before giving up
};

struct ShootingResult {
    double p0 = 0.0;
    int winding = 0;
    PhasePoint terminal;
    double residual = 0.0; // |X(t) - lifted target|; 0 for plain shots
    bool converged = false;
    double max_abs_u = 0.0;
    double max_abs_xdot = 0.0;
};

/// One characteristic shot: integrate from (x0, u0, p0) to time t and
/// report the endpoint with its path monitors.
inline ShootingResult shoot(const HamiltonianModel& m, double x0, double u0, double p0,
                            double t, double tol = 1e-10) {
    FlowOptions opts;
    opts.keep_nodes = false;
    const Trajectory traj = flow(m, {x0, u0, p0}, t, tol, opts);
    ShootingResult r;
    r.p0 = p0;
    r.terminal = traj.endpoint();
    r.converged = true;
    r.max_abs_u = traj.max_abs_u;
    r.max_abs_xdot = traj.max_abs_xdot;
    return r;
}

namespace detail {

struct ScanPoint {
    double p0 = 0.0;
    bool ok = false;
    PhasePoint terminal;
    double max_abs_u = 0.0;
    double max_abs_xdot = 0.0;
};

inline std::optional<ScanPoint> endpoint_shot(const HamiltonianModel& m, double x0,
                                              double u0, double p0, double t, double tol) {
    FlowOptions opts;
    opts.keep_nodes = false;
    FlowProbe probe = flow_probe(m, {x0, u0, p0}, t, tol, opts);
    if (probe.status != FlowStatus::ok) return std::nullopt;
    ScanPoint sp;
    sp.p0 = p0;
    sp.ok = true;
    sp.terminal = probe.traj.endpoint();
    sp.max_abs_u = probe.traj.max_abs_u;
    sp.max_abs_xdot = probe.traj.max_abs_xdot;
    return sp;
}

/// Endpoint shots over an evenly spaced momentum lattice. Seeds whose
/// characteristic cannot be integrated to t are kept as dead entries so
/// the lattice spacing stays uniform for bracketing.
inline std::vector<ScanPoint> scan_momenta(const HamiltonianModel& m, double x0, double u0,
                                           double t, double p_lo, double p_hi, int n,
                                           double tol) {
    std::vector<ScanPoint> scan(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double p0 = p_lo + (p_hi - p_lo) * i / static_cast<double>(n - 1);
        auto sp = endpoint_shot(m, x0, u0, p0, t, tol);
        scan[static_cast<std::size_t>(i)] = sp.value_or(ScanPoint{p0, false, {}, 0.0, 0.0});
        scan[static_cast<std::size_t>(i)].p0 = p0;
    }
    return scan;
}

/// Append every solution of X(t) = target visible in the scan: lattice
/// points already within tolerance plus bisection-refined sign changes of
/// the arrival residual.
inline void roots_for_target(const HamiltonianModel& m, double x0, double u0, double t,
                             const std::vector<ScanPoint>& scan, double target, int winding,
                             double root_tol, double tol, std::vector<ShootingResult>& out) {
    const int n = static_cast<int>(scan.size());

    auto accept = [&](const ScanPoint& sp) {
        ShootingResult r;
        r.p0 = sp.p0;
        r.winding = winding;
        r.terminal = sp.terminal;
        r.residual = std::abs(sp.terminal.x - target);
        r.converged = true;
        r.max_abs_u = sp.max_abs_u;
        r.max_abs_xdot = sp.max_abs_xdot;
        out.push_back(r);
    };

    for (int i = 0; i < n; ++i) {
        const auto& a = scan[static_cast<std::size_t>(i)];
        if (!a.ok) continue;
        const double ra = a.terminal.x - target;
        if (std::abs(ra) <= root_tol) {
            accept(a);
            continue;
        }
        if (i + 1 >= n) continue;
        const auto& b = scan[static_cast<std::size_t>(i + 1)];
        if (!b.ok || std::abs(b.terminal.x - target) <= root_tol) continue;
        const double rb = b.terminal.x - target;
        if (ra * rb >= 0.0) continue;

        double lo = a.p0, hi = b.p0, rlo = ra;
        std::optional<ScanPoint> hit;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            auto sp = endpoint_shot(m, x0, u0, mid, t, tol);
            if (!sp) break; // lost the characteristic inside the bracket
            const double rm = sp->terminal.x - target;
            if (std::abs(rm) <= root_tol) {
                hit = sp;
                break;
            }
            if (rlo * rm < 0.0) {
                hi = mid;
            } else {
                lo = mid;
                rlo = rm;
            }
            if (hi - lo < 1e-15 * std::max(1.0, std::abs(mid))) break;
        }
        if (hit) accept(*hit);
    }
}

} // namespace detail

/// All transversal solutions of the two-point problem X(0) = x0, X(t) on the
/// lift of x_target: scan a momentum lattice, bracket sign changes of the
/// arrival residual for every winding, and bisect each bracket. Roots are
/// deduplicated (1e-6 in p0, smaller terminal u wins) and sorted by
/// (winding, p0). The scan window doubles when no root is found at all.
inline std::vector<ShootingResult> solve_bvp(const HamiltonianModel& m, double x0, double u0,
                                             double x_target, double t,
                                             const ShootingConfig& cfg = {}) {
    if (t < 1e-3)
        throw DegenerateTimeError("solve_bvp: horizon below 1e-3; arrival map degenerates");

    const double period = m.period;
    const double d0 = wrap_signed(x_target - x0, period);

    std::vector<ShootingResult> roots;
    for (int widen = 0; widen <= cfg.max_widenings; ++widen) {
        const double P = cfg.p_max * std::pow(2.0, widen);
        const int n = (cfg.n_p - 1) * (1 << widen) + 1; // spacing kept constant

        const auto scan = detail::scan_momenta(m, x0, u0, t, -P, P, n, cfg.tol);
        for (int k = -cfg.k_max; k <= cfg.k_max; ++k)
            detail::roots_for_target(m, x0, u0, t, scan, x0 + d0 + k * period, k,
                                     cfg.root_tol, cfg.tol, roots);
        if (!roots.empty()) break;
    }
    if (roots.empty())
        throw EmptyRootSetError("solve_bvp: no arrival roots inside the widened scan window");

    // Deduplicate near-identical momenta; prefer the cheaper arrival.
    std::sort(roots.begin(), roots.end(), [](const ShootingResult& a, const ShootingResult& b) {
        return a.p0 < b.p0;
    });
    std::vector<ShootingResult> unique;
    for (const auto& r : roots) {
        if (!unique.empty() && std::abs(r.p0 - unique.back().p0) < 1e-6) {
            if (r.terminal.u < unique.back().terminal.u) unique.back() = r;
            continue;
        }
        unique.push_back(r);
    }
    std::sort(unique.begin(), unique.end(), [](const ShootingResult& a, const ShootingResult& b) {
        if (a.winding != b.winding) return a.winding < b.winding;
        return a.p0 < b.p0;
    });
    return unique;
}

struct FundamentalValue {
    double value = 0.0;
    ShootingResult minimizer;
    Trajectory trajectory; // dense re-flow of the minimizer
    std::vector<ShootingResult> candidates;
};

/// Fundamental solution h_{x0,u0}(x_target, t): minimum of the terminal u
/// over all two-point roots. Near-minimal candidates are re-flowed with a
/// dense node budget so the reported value, minimizer, and retained
/// trajectory are consistent; exact value ties break by smaller |p0|.
inline FundamentalValue fundamental_solution(const HamiltonianModel& m, double x0, double u0,
                                             double x_target, double t,
                                             const ShootingConfig& cfg = {}) {
    std::vector<ShootingResult> candidates = solve_bvp(m, x0, u0, x_target, t, cfg);

    double scan_min = candidates.front().terminal.u;
    for (const auto& c : candidates) scan_min = std::min(scan_min, c.terminal.u);

    FlowOptions dense;
    dense.max_step = t / 100.0;
    std::vector<Trajectory> tie_trajs(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].terminal.u > scan_min + 1e-12) continue;
        Trajectory traj = flow(m, {x0, u0, candidates[i].p0}, t, cfg.tol, dense);
        candidates[i].terminal = traj.endpoint();
        candidates[i].residual = std::abs(traj.endpoint().x -
                                          (x0 + wrap_signed(x_target - x0, m.period) +
                                           candidates[i].winding * m.period));
        candidates[i].max_abs_u = traj.max_abs_u;
        candidates[i].max_abs_xdot = traj.max_abs_xdot;
        tie_trajs[i] = std::move(traj);
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double ub = candidates[best].terminal.u;
        const double ui = candidates[i].terminal.u;
        if (ui < ub ||
            (ui == ub && (std::abs(candidates[i].p0) < std::abs(candidates[best].p0) ||
                          (std::abs(candidates[i].p0) == std::abs(candidates[best].p0) &&
                           candidates[i].p0 < candidates[best].p0))))
            best = i;
    }

    FundamentalValue fv;
    fv.minimizer = candidates[best];
    fv.value = candidates[best].terminal.u;
    fv.candidates = candidates;
    if (!tie_trajs[best].times.empty()) {
        fv.trajectory = std::move(tie_trajs[best]);
    } else {
        fv.trajectory = flow(m, {x0, u0, candidates[best].p0}, t, cfg.tol, dense);
    }
    return fv;
}

/// Action defect of the retained minimizer: the terminal-value increment
/// must equal the integral of the running cost along the path.
inline double verify_calibration(const HamiltonianModel& m, const FundamentalValue& fv) {
    const Trajectory& traj = fv.trajectory;
    if (traj.times.size() < 3)
        throw SolverError("verify_calibration: trajectory too sparse");
    std::vector<double> cost(traj.times.size());
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const PhasePoint& s = traj.states[i];
        const double v = m.dH(s.x, s.u, s.p).hp;
        cost[i] = lagrangian(m, s.x, s.u, v);
    }
    const double action = simpson_nonuniform(traj.times, cost);
    const double increment = traj.states.back().u - traj.states.front().u;
    return std::abs(increment - action);
}

/// Dynamic-programming consistency along the minimizer: at interior times
/// s the running value must itself be the fundamental solution at the
/// point the path passes through. Returns the worst defect.
inline double interior_consistency(const HamiltonianModel& m, double x0, double u0,
                                   const FundamentalValue& fv, double t,
                                   const ShootingConfig& cfg = {}) {
    FlowOptions opts;
    opts.keep_nodes = false;
    opts.sample_times = {0.25 * t, 0.5 * t, 0.75 * t};
    const Trajectory traj = flow(m, {x0, u0, fv.minimizer.p0}, t, cfg.tol, opts);

    double worst = 0.0;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const PhasePoint& s = traj.samples[i];
        const double h = fundamental_solution(m, x0, u0, s.x, opts.sample_times[i], cfg).value;
        worst = std::max(worst, std::abs(s.u - h));
    }
    return worst;
}

} // namespace hjchar
