#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hjchar/errors.hpp"

namespace hjchar {

/// Wrap x into the fundamental domain [0, period).
inline double wrap_period(double x, double period) {
    double w = x - std::floor(x / period) * period;
    if (w >= period) w -= period; // rounding can land exactly on the seam
    if (w < 0.0) w += period;
    return w;
}

/// Wrap a displacement into [-period/2, period/2].
inline double wrap_signed(double d, double period) {
    return d - std::round(d / period) * period;
}

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    if (n == 1) {
        v[0] = a;
        return v;
    }
    const double h = (b - a) / static_cast<double>(n - 1);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + h * i;
    v.back() = b;
    return v;
}

/// Evenly spaced nodes over one period with the right endpoint omitted.
inline std::vector<double> periodic_nodes(int n, double period) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = period * i / static_cast<double>(n);
    return v;
}

/// Portable uniform draw in [0,1); derived from the engine's specified
/// output so runs are reproducible across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct ScalarMin {
    double x = 0.0;
    double value = 0.0;
};

/// Golden-section minimization on [a,b]. Returns the best point seen,
/// including the endpoints, so a boundary minimum is never missed.
template <class F>
ScalarMin golden_section_min(F&& f, double a, double b, int iters) {
    constexpr double invphi = 0.6180339887498948482;
    ScalarMin best{a, f(a)};
    const double fb = f(b);
    if (fb < best.value) best = {b, fb};

    double c = b - (b - a) * invphi;
    double d = a + (b - a) * invphi;
    double fc = f(c);
    double fd = f(d);
    if (fc < best.value) best = {c, fc};
    if (fd < best.value) best = {d, fd};

    for (int i = 0; i < iters; ++i) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * invphi;
            fc = f(c);
            if (fc < best.value) best = {c, fc};
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * invphi;
            fd = f(d);
            if (fd < best.value) best = {d, fd};
        }
    }
    return best;
}

namespace detail {

/// Integral over [lo,hi] of the quadratic interpolating (x0,f0),(x1,f1),(x2,f2).
inline double quadratic_segment_integral(double x0, double x1, double x2,
                                         double f0, double f1, double f2,
                                         double lo, double hi) {
    // Integrate each Lagrange basis polynomial exactly.
    auto basis_integral = [lo, hi](double xi, double xj, double xk) {
        // l(t) = (t - xj)(t - xk) / ((xi - xj)(xi - xk))
        const double denom = (xi - xj) * (xi - xk);
        auto prim = [xj, xk](double t) {
            return t * t * t / 3.0 - (xj + xk) * t * t / 2.0 + xj * xk * t;
        };
        return (prim(hi) - prim(lo)) / denom;
    };
    return f0 * basis_integral(x0, x1, x2) + f1 * basis_integral(x1, x0, x2) +
           f2 * basis_integral(x2, x0, x1);
}

} // namespace detail

/// Composite Simpson rule on arbitrarily spaced nodes. Consecutive interval
/// pairs get the exact quadratic-interpolant integral; a trailing odd
/// interval is covered by the quadratic through the last three nodes.
inline double simpson_nonuniform(const std::vector<double>& t, const std::vector<double>& f) {
    const std::size_t n = t.size();
    if (n != f.size() || n < 2) throw SolverError("simpson_nonuniform: need matching nodes, >= 2");
    if (n == 2) return 0.5 * (f[0] + f[1]) * (t[1] - t[0]);

    double integral = 0.0;
    std::size_t i = 0;
    for (; i + 2 < n; i += 2) {
        integral += detail::quadratic_segment_integral(t[i], t[i + 1], t[i + 2],
                                                       f[i], f[i + 1], f[i + 2],
                                                       t[i], t[i + 2]);
    }
    if (i + 2 == n) { // one interval left over
        integral += detail::quadratic_segment_integral(t[n - 3], t[n - 2], t[n - 1],
                                                       f[n - 3], f[n - 2], f[n - 1],
                                                       t[n - 2], t[n - 1]);
    }
    return integral;
}

} // namespace hjchar
