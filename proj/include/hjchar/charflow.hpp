#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hjchar/errors.hpp"
#include "hjchar/models.hpp"

namespace hjchar {

struct PhasePoint {
    double x = 0.0;
    double u = 0.0;
    double p = 0.0;
};

struct CharDeriv {
    double dx = 0.0;
    double du = 0.0;
    double dp = 0.0;
};

/// Right-hand side of the characteristic system
///   x' = H_p,  u' = H_p p - H,  p' = -(H_x + H_u p).
inline CharDeriv char_rhs(const HamiltonianModel& m, const PhasePoint& s) {
    const ModelEval e = m.eval(s.x, s.u, s.p);
    return CharDeriv{e.hp, e.hp * s.p - e.h, -(e.hx + e.hu * s.p)};
}

struct FlowOptions {
    double max_step = 0.0;            // <= 0 selects |t_final| / 20
    std::vector<double> sample_times; // monotone toward t_final, each in (0, t_final]
    bool keep_nodes = true;           // retain every accepted step
};

struct Trajectory {
    std::vector<double> times;        // accepted nodes, starts at 0
    std::vector<PhasePoint> states;
    std::vector<double> sample_times; // requested interior landings
    std::vector<PhasePoint> samples;
    std::string model_name;
    double tolerance_used = 0.0;
    double max_abs_u = 0.0;           // running sup of |u| over accepted nodes
    double max_abs_xdot = 0.0;        // running sup of |H_p| over accepted nodes
    const PhasePoint& endpoint() const { return states.back(); }
};

enum class FlowStatus { ok, blow_up, step_underflow, step_budget };

/// Non-throwing integration result; `samples_done` counts sample times that
/// were reached before any failure.
struct FlowProbe {
    Trajectory traj;
    FlowStatus status = FlowStatus::ok;
    int samples_done = 0;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double dp_a21 = 1.0 / 5;
constexpr double dp_a31 = 3.0 / 40, dp_a32 = 9.0 / 40;
constexpr double dp_a41 = 44.0 / 45, dp_a42 = -56.0 / 15, dp_a43 = 32.0 / 9;
constexpr double dp_a51 = 19372.0 / 6561, dp_a52 = -25360.0 / 2187,
                 dp_a53 = 64448.0 / 6561, dp_a54 = -212.0 / 729;
constexpr double dp_a61 = 9017.0 / 3168, dp_a62 = -355.0 / 33, dp_a63 = 46732.0 / 5247,
                 dp_a64 = 49.0 / 176, dp_a65 = -5103.0 / 18656;
constexpr double dp_b1 = 35.0 / 384, dp_b3 = 500.0 / 1113, dp_b4 = 125.0 / 192,
                 dp_b5 = -2187.0 / 6784, dp_b6 = 11.0 / 84;
constexpr double dp_e1 = 71.0 / 57600, dp_e3 = -71.0 / 16695, dp_e4 = 71.0 / 1920,
                 dp_e5 = -17253.0 / 339200, dp_e6 = 22.0 / 525, dp_e7 = -1.0 / 40;

inline std::array<double, 3> rhs(const HamiltonianModel& m, const std::array<double, 3>& y) {
    const ModelEval e = m.eval(y[0], y[1], y[2]);
    return {e.hp, e.hp * y[2] - e.h, -(e.hx + e.hu * y[2])};
}

} // namespace detail

/// Integrate the characteristic system from `start` over [0, t_final]
/// (t_final may be negative) with an adaptive embedded 5(4) pair. Lands
/// exactly on every requested sample time. Never throws; inspect `status`.
inline FlowProbe flow_probe(const HamiltonianModel& m, const PhasePoint& start,
                            double t_final, double tol, const FlowOptions& opts = {}) {
    constexpr double blow_guard = 1e8;
    constexpr std::size_t step_budget = 1000000;

    FlowProbe out;
    Trajectory& traj = out.traj;
    traj.model_name = m.name;
    traj.tolerance_used = tol;
    traj.sample_times = opts.sample_times;

    const double dir = (t_final >= 0.0) ? 1.0 : -1.0;
    const double span = std::abs(t_final);
    const double end_eps = 1e-14 * std::max(1.0, span);

    // Landing schedule: sample times in flow order, then the horizon.
    std::vector<double> boundaries = opts.sample_times;
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        const double s = boundaries[i];
        const bool in_range = dir * s > 0.0 && dir * s <= span + end_eps;
        const bool ordered = i == 0 || dir * s > dir * boundaries[i - 1];
        if (!in_range || !ordered)
            throw SolverError("flow: sample times must be monotone and inside (0, t_final]");
    }
    if (boundaries.empty() || std::abs(boundaries.back() - t_final) > end_eps)
        boundaries.push_back(t_final);

    std::array<double, 3> y = {start.x, start.u, start.p};
    double t = 0.0;

    auto record_node = [&](double tn, const std::array<double, 3>& yn, double xdot) {
        if (opts.keep_nodes || traj.times.empty()) {
            traj.times.push_back(tn);
            traj.states.push_back({yn[0], yn[1], yn[2]});
        } else {
            traj.times.back() = tn;
            traj.states.back() = {yn[0], yn[1], yn[2]};
        }
        traj.max_abs_u = std::max(traj.max_abs_u, std::abs(yn[1]));
        traj.max_abs_xdot = std::max(traj.max_abs_xdot, std::abs(xdot));
    };

    {
        const auto d0 = detail::rhs(m, y);
        record_node(0.0, y, d0[0]);
    }
    if (span <= end_eps) return out;

    const double max_step = (opts.max_step > 0.0) ? opts.max_step : span / 20.0;
    double h_ctrl = std::min(span / 100.0, max_step);
    std::array<double, 3> k1 = detail::rhs(m, y);

    std::size_t bi = 0;
    std::size_t steps = 0;
    while (dir * (t_final - t) > end_eps) {
        if (++steps > step_budget) {
            out.status = FlowStatus::step_budget;
            return out;
        }
        if (h_ctrl < 1e-14 * std::max(1.0, std::abs(t))) {
            out.status = FlowStatus::step_underflow;
            return out;
        }

        const double to_boundary = dir * (boundaries[bi] - t);
        const bool landing = h_ctrl >= to_boundary;
        const double h = dir * (landing ? to_boundary : h_ctrl);

        std::array<double, 3> k2, k3, k4, k5, k6, k7, yt, y5;
        for (int i = 0; i < 3; ++i) yt[i] = y[i] + h * detail::dp_a21 * k1[i];
        k2 = detail::rhs(m, yt);
        for (int i = 0; i < 3; ++i)
            yt[i] = y[i] + h * (detail::dp_a31 * k1[i] + detail::dp_a32 * k2[i]);
        k3 = detail::rhs(m, yt);
        for (int i = 0; i < 3; ++i)
            yt[i] = y[i] + h * (detail::dp_a41 * k1[i] + detail::dp_a42 * k2[i] +
                                detail::dp_a43 * k3[i]);
        k4 = detail::rhs(m, yt);
        for (int i = 0; i < 3; ++i)
            yt[i] = y[i] + h * (detail::dp_a51 * k1[i] + detail::dp_a52 * k2[i] +
                                detail::dp_a53 * k3[i] + detail::dp_a54 * k4[i]);
        k5 = detail::rhs(m, yt);
        for (int i = 0; i < 3; ++i)
            yt[i] = y[i] + h * (detail::dp_a61 * k1[i] + detail::dp_a62 * k2[i] +
                                detail::dp_a63 * k3[i] + detail::dp_a64 * k4[i] +
                                detail::dp_a65 * k5[i]);
        k6 = detail::rhs(m, yt);
        for (int i = 0; i < 3; ++i)
            y5[i] = y[i] + h * (detail::dp_b1 * k1[i] + detail::dp_b3 * k3[i] +
                                detail::dp_b4 * k4[i] + detail::dp_b5 * k5[i] +
                                detail::dp_b6 * k6[i]);
        k7 = detail::rhs(m, y5);

        double err_sq = 0.0;
        bool finite = true;
        for (int i = 0; i < 3; ++i) {
            const double ei = h * (detail::dp_e1 * k1[i] + detail::dp_e3 * k3[i] +
                                   detail::dp_e4 * k4[i] + detail::dp_e5 * k5[i] +
                                   detail::dp_e6 * k6[i] + detail::dp_e7 * k7[i]);
            const double scale = tol + tol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err_sq += (ei / scale) * (ei / scale);
            finite = finite && std::isfinite(y5[i]);
        }
        const double err = std::sqrt(err_sq / 3.0);

        if (!finite || err > 1.0) {
            if (!finite) {
                h_ctrl = std::abs(h) * 0.2;
            } else {
                h_ctrl = std::abs(h) * std::max(0.2, 0.9 * std::pow(err, -0.2));
            }
            continue;
        }

        t = landing ? boundaries[bi] : t + h;
        y = y5;
        k1 = k7;
        record_node(t, y, k7[0]);

        const double factor = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
        h_ctrl = std::min(std::abs(h) * factor, max_step);

        if (landing) {
            if (out.samples_done < static_cast<int>(opts.sample_times.size()) &&
                std::abs(opts.sample_times[static_cast<std::size_t>(out.samples_done)] - t) <= end_eps) {
                traj.samples.push_back({y[0], y[1], y[2]});
                ++out.samples_done;
            }
            ++bi;
        }

        if (std::abs(y[1]) > blow_guard || std::abs(y[2]) > blow_guard) {
            out.status = FlowStatus::blow_up;
            return out;
        }
    }
    return out;
}

/// Throwing wrapper around flow_probe.
inline Trajectory flow(const HamiltonianModel& m, const PhasePoint& start, double t_final,
                       double tol, const FlowOptions& opts = {}) {
    FlowProbe probe = flow_probe(m, start, t_final, tol, opts);
    switch (probe.status) {
        case FlowStatus::ok:
            return std::move(probe.traj);
        case FlowStatus::blow_up:
            throw BlowUpError("characteristic left the trusted region (|u| or |p| > 1e8)");
        case FlowStatus::step_underflow:
            throw NoConvergenceError("flow: step size underflow");
        case FlowStatus::step_budget:
            throw NoConvergenceError("flow: step budget exhausted");
    }
    throw SolverError("flow: unreachable");
}

/// Integrate forward over [0,t], then backward from the endpoint; returns
/// the max-norm distance between the returned point and the start. The
/// system is autonomous, so the backward leg reuses the same vector field.
inline double flow_roundtrip_error(const HamiltonianModel& m, const PhasePoint& start,
                                   double t, double tol) {
    FlowOptions opts;
    opts.keep_nodes = false;
    const PhasePoint fwd = flow(m, start, t, tol, opts).endpoint();
    const PhasePoint back = flow(m, fwd, -t, tol, opts).endpoint();
    return std::max({std::abs(back.x - start.x), std::abs(back.u - start.u),
                     std::abs(back.p - start.p)});
}

} // namespace hjchar
