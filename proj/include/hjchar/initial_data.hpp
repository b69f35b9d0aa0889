#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "hjchar/errors.hpp"
#include "hjchar/numerics.hpp"

namespace hjchar {

/// Periodic initial condition phi on the unit circle. Analytic families
/// evaluate in closed form; tabulated data interpolates linearly between
/// knots (continuous and periodic, adequate for Lipschitz initial data).
class InitialData {
public:
    static InitialData constant(double c) {
        InitialData d;
        d.kind_ = Kind::constant;
        d.a_ = c;
        return d;
    }
    static InitialData cosine(double amplitude, int harmonics, double offset) {
        InitialData d;
        d.kind_ = Kind::cosine;
        d.a_ = amplitude;
        d.m_ = harmonics;
        d.b_ = offset;
        return d;
    }
    static InitialData sine(double amplitude, int harmonics, double offset) {
        InitialData d;
        d.kind_ = Kind::sine;
        d.a_ = amplitude;
        d.m_ = harmonics;
        d.b_ = offset;
        return d;
    }
    static InitialData table(std::vector<std::pair<double, double>> knots) {
        if (knots.size() < 2) throw SolverError("InitialData::table: need at least 2 knots");
        std::sort(knots.begin(), knots.end());
        for (std::size_t i = 0; i + 1 < knots.size(); ++i)
            if (knots[i + 1].first - knots[i].first <= 0.0)
                throw SolverError("InitialData::table: knot abscissae must be distinct");
        if (knots.front().first < 0.0 || knots.back().first >= 1.0)
            throw SolverError("InitialData::table: knots must lie in [0,1)");
        InitialData d;
        d.kind_ = Kind::table;
        d.knots_ = std::move(knots);
        return d;
    }

    double operator()(double x) const {
        constexpr double tau = 2.0 * std::numbers::pi;
        switch (kind_) {
            case Kind::constant:
                return a_;
            case Kind::cosine:
                return a_ * std::cos(tau * m_ * x) + b_;
            case Kind::sine:
                return a_ * std::sin(tau * m_ * x) + b_;
            case Kind::table: {
                const double w = wrap_period(x, 1.0);
                // Closing segment wraps from the last knot back to the first.
                auto it = std::upper_bound(knots_.begin(), knots_.end(),
                                           std::make_pair(w, std::numeric_limits<double>::max()));
                if (it == knots_.begin() || it == knots_.end()) {
                    const auto& l = knots_.back();
                    const auto& r = knots_.front();
                    const double span = 1.0 - l.first + r.first;
                    const double s = (w >= l.first) ? (w - l.first) : (w + 1.0 - l.first);
                    return l.second + (r.second - l.second) * s / span;
                }
                const auto& r = *it;
                const auto& l = *std::prev(it);
                return l.second + (r.second - l.second) * (w - l.first) / (r.first - l.first);
            }
        }
        throw SolverError("InitialData: unreachable");
    }

private:
    enum class Kind { constant, cosine, sine, table };
    InitialData() = default;
    Kind kind_ = Kind::constant;
    double a_ = 0.0;
    double b_ = 0.0;
    int m_ = 1;
    std::vector<std::pair<double, double>> knots_;
};

} // namespace hjchar
