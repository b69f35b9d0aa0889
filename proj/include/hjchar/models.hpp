#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "hjchar/errors.hpp"
#include "hjchar/numerics.hpp"

namespace hjchar {

struct Partials {
    double hx = 0.0;
    double hu = 0.0;
    double hp = 0.0;
};

/// Hamiltonian value together with all three first partials; the flow
/// evaluates this once per stage, so the fused form is the hot path.
struct ModelEval {
    double h = 0.0;
    double hx = 0.0;
    double hu = 0.0;
    double hp = 0.0;
};

/// Box in (u,p) over which structural checks sample; x always runs over a
/// full period.
struct CompactBox {
    double u_lo = -5.0;
    double u_hi = 5.0;
    double p_lo = -8.0;
    double p_hi = 8.0;
};

/// Growth majorant f on [0, inf): H(x,u,p) >= H_p.p - f(u) must hold for
/// u >= 0 and p inside box's p-range (x runs over the full torus). f must
/// be positive with 1/f non-integrable at infinity (growth slow enough
/// that comparison arguments close).
struct OsgoodEnvelope {
    std::function<double(double)> f;
    CompactBox box{-10.0, 10.0, -10.0, 10.0}; // claimed validity region
};

struct HamiltonianModel {
    std::string name;
    double period = 1.0;
    std::function<double(double, double, double)> H;        // (x,u,p)
    std::function<Partials(double, double, double)> dH;     // (x,u,p)
    std::function<ModelEval(double, double, double)> eval;  // fused H + dH
    std::function<double(double, double, double)> L;        // (x,u,v); empty -> numeric
    std::optional<OsgoodEnvelope> envelope;
};

inline const std::vector<std::string>& model_names() {
    static const std::vector<std::string> names = {
        "free", "mechanical", "discounted", "antidiscounted", "osgood"};
    return names;
}

/// Build a catalog model. `potential` scales the cos(2 pi x) well,
/// `lambda` the linear u-coupling where the model has one.
inline HamiltonianModel make_model(const std::string& name, double lambda = 1.0,
                                   double potential = 1.0) {
    constexpr double tau = 2.0 * std::numbers::pi;
    const double a = potential;

    // All catalog members are p^2/2 + g(x,u); only g varies. The builder
    // takes g and its partials and wires every interface field.
    auto separable = [&](std::function<double(double, double)> g,
                         std::function<double(double, double)> gx,
                         std::function<double(double, double)> gu,
                         std::function<double(double)> envelope_tail) {
        HamiltonianModel m;
        m.name = name;
        m.period = 1.0;
        m.H = [g](double x, double u, double p) { return 0.5 * p * p + g(x, u); };
        m.dH = [gx, gu](double x, double u, double p) {
            return Partials{gx(x, u), gu(x, u), p};
        };
        m.eval = [g, gx, gu](double x, double u, double p) {
            return ModelEval{0.5 * p * p + g(x, u), gx(x, u), gu(x, u), p};
        };
        m.L = [g](double x, double u, double v) { return 0.5 * v * v - g(x, u); };
        // H_p.p - H = p^2/2 - g <= P^2/2 + |a| + tail(u) on |p| <= P, u >= 0.
        const double abs_a = std::abs(a);
        m.envelope = OsgoodEnvelope{
            [abs_a, envelope_tail](double u) {
                return 0.5 * 10.0 * 10.0 + abs_a + 1.0 + envelope_tail(u);
            },
            CompactBox{-10.0, 10.0, -10.0, 10.0}};
        return m;
    };

    auto zero_tail = [](double) { return 0.0; };

    if (name == "free") {
        return separable([](double, double) { return 0.0; },
                         [](double, double) { return 0.0; },
                         [](double, double) { return 0.0; }, zero_tail);
    }
    if (name == "mechanical") {
        return separable([a, tau](double x, double) { return a * std::cos(tau * x); },
                         [a, tau](double x, double) { return -a * tau * std::sin(tau * x); },
                         [](double, double) { return 0.0; }, zero_tail);
    }
    if (name == "discounted") {
        return separable([a, tau, lambda](double x, double u) { return a * std::cos(tau * x) + lambda * u; },
                         [a, tau](double x, double) { return -a * tau * std::sin(tau * x); },
                         [lambda](double, double) { return lambda; },
                         [lambda](double u) { return lambda * u; });
    }
    if (name == "antidiscounted") {
        return separable([a, tau, lambda](double x, double u) { return a * std::cos(tau * x) - lambda * u; },
                         [a, tau](double x, double) { return -a * tau * std::sin(tau * x); },
                         [lambda](double, double) { return -lambda; },
                         [lambda](double u) { return lambda * u; });
    }
    if (name == "osgood") {
        // g = a cos(2 pi x) - u log(1+u^2): superlinear in u but still below
        // every power u^{1+eps}, so growth comparisons stay integr-borderline.
        auto g = [a, tau](double x, double u) {
            return a * std::cos(tau * x) - u * std::log1p(u * u);
        };
        auto gx = [a, tau](double x, double) { return -a * tau * std::sin(tau * x); };
        auto gu = [](double, double u) {
            return -(std::log1p(u * u) + 2.0 * u * u / (1.0 + u * u));
        };
        return separable(g, gx, gu,
                         [](double u) { return u * std::log1p(u * u); });
    }
    throw SolverError("unknown model '" + name + "'");
}

struct LegendreResult {
    double value = 0.0;
    double p_star = 0.0;
};

/// Legendre transform L(x,u,v) = sup_p [v p - H(x,u,p)] by solving
/// H_p(x,u,p*) = v with a bracketed Newton iteration (H_p is increasing
/// in p under strict convexity).
inline LegendreResult legendre_transform(const HamiltonianModel& m, double x, double u,
                                         double v) {
    auto slope = [&](double p) { return m.dH(x, u, p).hp; };

    double lo = -1.0, hi = 1.0;
    while (slope(lo) > v) {
        lo *= 2.0;
        if (lo < -1e6) throw NoConvergenceError("legendre_transform: no bracket below p = -1e6");
    }
    while (slope(hi) < v) {
        hi *= 2.0;
        if (hi > 1e6) throw NoConvergenceError("legendre_transform: no bracket above p = +1e6");
    }

    const double tol = 1e-11 * std::max(1.0, std::abs(v));
    double p = 0.5 * (lo + hi);
    double r = slope(p) - v;
    for (int it = 0; it < 200 && std::abs(r) > tol; ++it) {
        if (r > 0.0) hi = p; else lo = p;
        const double dp = 1e-6 * std::max(1.0, std::abs(p));
        const double dr = (slope(p + dp) - slope(p - dp)) / (2.0 * dp);
        double next = (dr > 0.0) ? p - r / dr : p;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        p = next;
        r = slope(p) - v;
    }
    if (std::abs(r) > tol) throw NoConvergenceError("legendre_transform: slope residual stalled");
    return LegendreResult{v * p - m.H(x, u, p), p};
}

/// Running cost along a characteristic; closed form if the model carries
/// one, otherwise the transform above.
inline double lagrangian(const HamiltonianModel& m, double x, double u, double v) {
    if (m.L) return m.L(x, u, v);
    return legendre_transform(m, x, u, v).value;
}

struct AssumptionReport {
    double min_p_curvature = 0.0;
    bool curvature_ok = false;
    std::vector<double> superlinearity_gaps; // growth of min H(.,.,±P)/P per doubling
    bool superlinear_ok = false;
    double periodicity_residual = 0.0;
    bool periodic_ok = false;
    double derivative_residual = 0.0;
    bool derivatives_ok = false;
    bool pass() const {
        return curvature_ok && superlinear_ok && periodic_ok && derivatives_ok;
    }
};

/// Sampled verification of the standing structural assumptions: strict
/// convexity in p, superlinear growth in p, spatial periodicity, and
/// consistency of the declared partials with finite differences.
inline AssumptionReport check_assumptions(const HamiltonianModel& m,
                                          const CompactBox& box = {}, int n = 41) {
    AssumptionReport rep;
    const auto xs = periodic_nodes(n, m.period);
    const auto us = linspace(box.u_lo, box.u_hi, n);
    const auto ps = linspace(box.p_lo, box.p_hi, n);

    // Strict convexity: second difference in p must stay positive.
    const double dp = 1e-4 * std::max(1.0, 0.5 * (box.p_hi - box.p_lo));
    double min_curv = std::numeric_limits<double>::infinity();
    for (double x : xs)
        for (double u : us)
            for (double p : ps) {
                const double c =
                    (m.H(x, u, p + dp) - 2.0 * m.H(x, u, p) + m.H(x, u, p - dp)) / (dp * dp);
                min_curv = std::min(min_curv, c);
            }
    rep.min_p_curvature = min_curv;
    rep.curvature_ok = min_curv > 1e-8;

    // Superlinearity: min over (x,u) of H(x,u,±P)/P must grow as P doubles.
    const double p0 = std::max(std::abs(box.p_lo), std::abs(box.p_hi));
    double prev_ratio = 0.0;
    rep.superlinear_ok = true;
    for (int k = 0; k <= 3; ++k) {
        const double P = p0 * std::pow(2.0, k);
        double worst = std::numeric_limits<double>::infinity();
        for (double x : xs)
            for (double u : us)
                worst = std::min(worst, std::min(m.H(x, u, P), m.H(x, u, -P)) / P);
        if (k > 0) {
            rep.superlinearity_gaps.push_back(worst - prev_ratio);
            if (worst <= prev_ratio) rep.superlinear_ok = false;
        }
        prev_ratio = worst;
    }

    // Periodicity in x.
    double per_res = 0.0;
    for (double x : xs)
        for (double u : us)
            for (double p : ps)
                per_res = std::max(per_res, std::abs(m.H(x + m.period, u, p) - m.H(x, u, p)));
    rep.periodicity_residual = per_res;
    rep.periodic_ok = per_res <= 1e-9;

    // Declared partials against central differences.
    const double fd = 1e-5;
    double worst_rel = 0.0;
    for (double x : xs)
        for (double u : us)
            for (double p : ps) {
                const Partials d = m.dH(x, u, p);
                const double fx = (m.H(x + fd, u, p) - m.H(x - fd, u, p)) / (2.0 * fd);
                const double fu = (m.H(x, u + fd, p) - m.H(x, u - fd, p)) / (2.0 * fd);
                const double fp = (m.H(x, u, p + fd) - m.H(x, u, p - fd)) / (2.0 * fd);
                worst_rel = std::max(worst_rel, std::abs(d.hx - fx) / std::max(1.0, std::abs(fx)));
                worst_rel = std::max(worst_rel, std::abs(d.hu - fu) / std::max(1.0, std::abs(fu)));
                worst_rel = std::max(worst_rel, std::abs(d.hp - fp) / std::max(1.0, std::abs(fp)));
            }
    rep.derivative_residual = worst_rel;
    rep.derivatives_ok = worst_rel <= 1e-5;

    return rep;
}

struct OsgoodProbePoint {
    double u_max = 0.0;
    double integral = 0.0; // int_0^{u_max} du / f(u)
};

struct OsgoodReport {
    double worst_margin = 0.0; // min over samples of H - (H_p.p - f)
    bool margin_ok = false;
    std::vector<OsgoodProbePoint> probe; // divergence indicator of 1/f
    bool pass() const { return margin_ok; }
};

/// Check the declared growth envelope pointwise on a sample box and probe
/// the divergence of int du/f(u) over growing ranges.
inline OsgoodReport osgood_pointwise_check(const HamiltonianModel& m,
                                           const CompactBox& box = {},
                                           double u_max = 10.0, int n = 41) {
    if (!m.envelope) throw MissingEnvelopeError("model '" + m.name + "' declares no growth envelope");
    const OsgoodEnvelope& env = *m.envelope;
    if (box.p_lo < env.box.p_lo || box.p_hi > env.box.p_hi)
        throw SolverError("osgood_pointwise_check: box exceeds the envelope's claimed p-range");
    const double p_lo = box.p_lo;
    const double p_hi = box.p_hi;

    OsgoodReport rep;
    const auto xs = periodic_nodes(n, m.period);
    const auto ps = linspace(p_lo, p_hi, n);
    const auto us = linspace(0.0, u_max, n);

    double worst = std::numeric_limits<double>::infinity();
    for (double x : xs)
        for (double u : us)
            for (double p : ps) {
                const ModelEval e = m.eval(x, u, p);
                worst = std::min(worst, e.h - (e.hp * p - env.f(u)));
            }
    rep.worst_margin = worst;
    rep.margin_ok = worst >= -1e-9;

    // Composite Simpson of 1/f per decade; cumulative sums reported so a
    // reader can see whether the integral keeps growing.
    double acc = 0.0;
    double lo = 0.0;
    for (double hi : {10.0, 100.0, 1000.0, 10000.0}) {
        const int intervals = 4096;
        const double h = (hi - lo) / intervals;
        double seg = 1.0 / env.f(lo) + 1.0 / env.f(hi);
        for (int i = 1; i < intervals; ++i)
            seg += (i % 2 == 1 ? 4.0 : 2.0) / env.f(lo + h * i);
        acc += seg * h / 3.0;
        rep.probe.push_back({hi, acc});
        lo = hi;
    }
    return rep;
}

/// C^2 window equal to 1 on [-R, R], 0 outside (-R-1, R+1), with
/// |d/du| <= 15/8 in between (quintic smoothstep profile).
inline double plateau_window(double R, double u) {
    const double au = std::abs(u);
    if (au <= R) return 1.0;
    if (au >= R + 1.0) return 0.0;
    const double w = au - R;
    return 1.0 - w * w * w * (10.0 + w * (-15.0 + 6.0 * w));
}

inline double plateau_window_du(double R, double u) {
    const double au = std::abs(u);
    if (au <= R || au >= R + 1.0) return 0.0;
    const double w = au - R;
    const double d = -30.0 * w * w * (1.0 - w) * (1.0 - w);
    return u < 0.0 ? -d : d;
}

struct TruncatedModel {
    HamiltonianModel base;             // the model that was truncated
    HamiltonianModel model;            // drop-in replacement with frozen tails
    double R = 0.0;
    std::function<double(double)> rho; // the window actually used
};

/// Freeze the u-dependence of H outside |u| <= R: the truncated model
/// blends H(x,u,p) into H(x,0,p) across R <= |u| <= R+1 and is exactly H
/// on the plateau. Plateau and tail branches are evaluated directly so the
/// identity "H_R == H for |u| <= R" holds to the last bit.
inline TruncatedModel truncate_model(const HamiltonianModel& base, double R) {
    if (!(R >= 0.0)) throw SolverError("truncate_model: R must be >= 0");

    TruncatedModel tm;
    tm.base = base;
    tm.R = R;
    tm.rho = [R](double u) { return plateau_window(R, u); };

    auto base_eval = base.eval;
    auto fused = [base_eval, R](double x, double u, double p) -> ModelEval {
        if (std::abs(u) <= R) return base_eval(x, u, p);
        const ModelEval e0 = base_eval(x, 0.0, p);
        if (std::abs(u) >= R + 1.0) return ModelEval{e0.h, e0.hx, 0.0, e0.hp};
        const ModelEval e = base_eval(x, u, p);
        const double rho = plateau_window(R, u);
        const double drho = plateau_window_du(R, u);
        return ModelEval{e0.h + rho * (e.h - e0.h),
                         e0.hx + rho * (e.hx - e0.hx),
                         rho * e.hu + drho * (e.h - e0.h),
                         e0.hp + rho * (e.hp - e0.hp)};
    };

    char suffix[32];
    std::snprintf(suffix, sizeof suffix, "_R%g", R);
    tm.model.name = base.name + suffix;
    tm.model.period = base.period;
    tm.model.eval = fused;
    tm.model.H = [fused](double x, double u, double p) { return fused(x, u, p).h; };
    tm.model.dH = [fused](double x, double u, double p) {
        const ModelEval e = fused(x, u, p);
        return Partials{e.hx, e.hu, e.hp};
    };
    // L deliberately left empty: the blend has no closed-form transform.
    // The envelope is dropped too; the truncation is exactly what removes
    // the need for one (u-dependence is compactly supported).
    return tm;
}

} // namespace hjchar
