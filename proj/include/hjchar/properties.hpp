#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hjchar/analysis.hpp"
#include "hjchar/charflow.hpp"
#include "hjchar/errors.hpp"
#include "hjchar/field.hpp"
#include "hjchar/fundamental.hpp"
#include "hjchar/initial_data.hpp"
#include "hjchar/models.hpp"

namespace hjchar {

struct PropertyResult {
    std::string name;
    double measured = 0.0;  // worst case over the property's sample set
    double threshold = 0.0; // measured must satisfy `pass` against this
    bool pass = false;
    std::string detail;     // where the worst case occurred
};

struct PropertySuiteReport {
    std::vector<PropertyResult> results;
    bool pass() const {
        for (const auto& r : results)
            if (!r.pass) return false;
        return !results.empty();
    }
};

namespace detail {

/// sup_v [p v - L(x,u,v)] by solving dL/dv = p with a bracketed secant on
/// central differences; the inverse leg of the Legendre involution.
inline double conjugate_in_v(const HamiltonianModel& m, double x, double u, double p) {
    const double e = 1e-6;
    auto slope = [&](double v) {
        return (lagrangian(m, x, u, v + e) - lagrangian(m, x, u, v - e)) / (2.0 * e);
    };
    double lo = p - 1.0, hi = p + 1.0;
    while (slope(lo) > p) {
        lo -= (hi - lo);
        if (lo < -1e6) throw NoConvergenceError("conjugate_in_v: no lower bracket");
    }
    while (slope(hi) < p) {
        hi += (hi - lo);
        if (hi > 1e6) throw NoConvergenceError("conjugate_in_v: no upper bracket");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(p)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (slope(mid) < p) lo = mid; else hi = mid;
    }
    const double v = 0.5 * (lo + hi);
    return p * v - lagrangian(m, x, u, v);
}

} // namespace detail

/// Legendre involution on all catalog models: the numerical transform must
/// match the closed-form Lagrangian, and conjugating back must recover H.
inline PropertyResult prop_legendre_involution() {
    PropertyResult r;
    r.name = "legendre_involution";
    r.threshold = 1e-8;
    double worst = 0.0;
    for (const std::string& name : model_names()) {
        const HamiltonianModel m = make_model(name);
        for (double x : {0.0, 0.3, 0.7})
            for (double u : {-2.0, 0.0, 1.5})
                for (double w : {-3.0, -1.0, 0.0, 0.5, 2.0}) {
                    const double lt = legendre_transform(m, x, u, w).value;
                    const double closed = m.L(x, u, w);
                    const double back = detail::conjugate_in_v(m, x, u, w);
                    const double err =
                        std::max(std::abs(lt - closed), std::abs(back - m.H(x, u, w)));
                    if (err > worst) {
                        worst = err;
                        r.detail = name;
                    }
                }
    }
    r.measured = worst;
    r.pass = worst <= r.threshold;
    return r;
}

/// H(X,0,P) is a first integral when H has no u-dependence.
inline PropertyResult prop_energy_conservation() {
    PropertyResult r;
    r.name = "energy_conservation";
    r.threshold = 1e-7;
    double worst = 0.0;
    for (const std::string& name : {"free", "mechanical"}) {
        const HamiltonianModel m = make_model(name);
        for (double x0 : {0.0, 0.35})
            for (double p0 : {0.7, -1.3}) {
                const Trajectory traj = flow(m, {x0, 0.0, p0}, 2.0, 1e-10);
                const double e0 = m.H(x0, 0.0, p0);
                for (const PhasePoint& s : traj.states) {
                    const double drift = std::abs(m.H(s.x, 0.0, s.p) - e0);
                    if (drift > worst) {
                        worst = drift;
                        r.detail = name;
                    }
                }
            }
    }
    r.measured = worst;
    r.pass = worst <= r.threshold;
    return r;
}

/// Action identity along retained minimizers, plus dynamic-programming
/// consistency at interior times via independent re-solves.
inline PropertyResult prop_calibration() {
    PropertyResult r;
    r.name = "calibration_defect";
    r.threshold = 1e-6;
    double worst = 0.0;
    for (const std::string& name : {"mechanical", "discounted"}) {
        const HamiltonianModel m = make_model(name);
        const FundamentalValue fv = fundamental_solution(m, 0.0, 0.0, 0.5, 1.0);
        const double defect = verify_calibration(m, fv);
        if (defect > worst) {
            worst = defect;
            r.detail = name;
        }
    }
    r.measured = worst;
    r.pass = worst <= r.threshold;
    return r;
}

inline PropertyResult prop_interior_consistency() {
    PropertyResult r;
    r.name = "interior_consistency";
    r.threshold = 1e-5;
    double worst = 0.0;
    for (const std::string& name : {"mechanical", "discounted"}) {
        const HamiltonianModel m = make_model(name);
        const FundamentalValue fv = fundamental_solution(m, 0.0, 0.0, 0.5, 1.0);
        const double defect = interior_consistency(m, 0.0, 0.0, fv, 1.0);
        if (defect > worst) {
            worst = defect;
            r.detail = name;
        }
    }
    r.measured = worst;
    r.pass = worst <= r.threshold;
    return r;
}

/// Forward-then-backward integration returns to the start.
inline PropertyResult prop_flow_roundtrip() {
    PropertyResult r;
    r.name = "flow_roundtrip";
    r.threshold = 1e-7;
    double worst = 0.0;
    for (const std::string& name : model_names()) {
        const HamiltonianModel m = make_model(name);
        const double err = flow_roundtrip_error(m, {0.25, 0.5, 0.8}, 1.0, 1e-10);
        if (err > worst) {
            worst = err;
            r.detail = name;
        }
    }
    r.measured = worst;
    r.pass = worst <= r.threshold;
    return r;
}

/// Triangle inequality of the minimal action on u-independent models.
inline PropertyResult prop_triangle(std::uint64_t seed, int n_samples) {
    PropertyResult r;
    r.name = "triangle_slack";
    r.threshold = -1e-6;
    ShootingConfig sc;
    sc.n_p = 201;
    double worst = std::numeric_limits<double>::infinity();
    const int half = std::max(1, n_samples / 2);
    const TriangleReport a = triangle_check(make_model("free"), half, seed, sc);
    const TriangleReport b =
        triangle_check(make_model("mechanical"), n_samples - half, seed + 1, sc);
    if (a.worst_slack < b.worst_slack) {
        worst = a.worst_slack;
        r.detail = "free";
    } else {
        worst = b.worst_slack;
        r.detail = "mechanical";
    }
    r.measured = worst;
    r.pass = worst >= r.threshold;
    return r;
}

/// Comparison monotonicity of the computed field on the proper model:
/// raising the data pointwise never lowers the solution.
inline PropertyResult prop_comparison_monotonicity() {
    PropertyResult r;
    r.name = "comparison_monotonicity";
    r.threshold = -1e-6;
    const HamiltonianModel m = make_model("discounted");
    GridSpec grid;
    grid.nx = 32;
    grid.t_nodes = {0.5, 1.0};
    SeedSpec seeds;
    seeds.ny = 128;
    seeds.np = 161;
    seeds.p_max = 6.0;
    const SolutionField lo =
        solve_forward_flood(m, InitialData::cosine(0.5, 1, 0.0), grid, seeds);
    const SolutionField hi =
        solve_forward_flood(m, InitialData::cosine(0.5, 1, 0.3), grid, seeds);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lo.values.size(); ++i)
        worst = std::min(worst, hi.values[i] - lo.values[i]);
    r.measured = worst;
    r.pass = worst >= r.threshold;
    r.detail = "phi + 0.3 vs phi";
    return r;
}

/// Declared growth envelopes hold pointwise on their claimed boxes.
inline PropertyResult prop_osgood_margins() {
    PropertyResult r;
    r.name = "osgood_margin";
    r.threshold = -1e-9;
    double worst = std::numeric_limits<double>::infinity();
    for (const std::string& name : model_names()) {
        const HamiltonianModel m = make_model(name);
        const OsgoodReport rep = osgood_pointwise_check(m, m.envelope->box);
        if (rep.worst_margin < worst) {
            worst = rep.worst_margin;
            r.detail = name;
        }
    }
    r.measured = worst;
    r.pass = worst >= r.threshold;
    return r;
}

/// Raising the winding cap beyond 2 must not move h on short horizons.
inline PropertyResult prop_winding_saturation() {
    PropertyResult r;
    r.name = "winding_saturation";
    r.threshold = 1e-10;
    double worst = 0.0;
    for (const std::string& name : {"free", "discounted"}) {
        const HamiltonianModel m = make_model(name);
        for (const FieldQuery q : {FieldQuery{0.25, 0.5}, FieldQuery{0.5, 1.0}}) {
            ShootingConfig c2, c3;
            c3.k_max = 3;
            const double h2 = fundamental_solution(m, 0.0, 0.0, q.x, q.t, c2).value;
            const double h3 = fundamental_solution(m, 0.0, 0.0, q.x, q.t, c3).value;
            if (std::abs(h2 - h3) > worst) {
                worst = std::abs(h2 - h3);
                r.detail = name;
            }
        }
    }
    r.measured = worst;
    r.pass = worst <= r.threshold;
    return r;
}

/// Doubling the momentum scan density and range must not move h.
inline PropertyResult prop_scan_saturation() {
    PropertyResult r;
    r.name = "scan_saturation";
    r.threshold = 1e-8;
    double worst = 0.0;
    for (const std::string& name : {"free", "discounted"}) {
        const HamiltonianModel m = make_model(name);
        for (const FieldQuery q : {FieldQuery{0.25, 0.5}, FieldQuery{0.5, 1.0}}) {
            ShootingConfig base, fine;
            fine.n_p = 1601;
            fine.p_max = 16.0;
            const double h1 = fundamental_solution(m, 0.0, 0.0, q.x, q.t, base).value;
            const double h2 = fundamental_solution(m, 0.0, 0.0, q.x, q.t, fine).value;
            if (std::abs(h1 - h2) > worst) {
                worst = std::abs(h1 - h2);
                r.detail = name;
            }
        }
    }
    r.measured = worst;
    r.pass = worst <= r.threshold;
    return r;
}

/// Tightening the integrator tolerance must not move solved values.
inline PropertyResult prop_tolerance_saturation() {
    PropertyResult r;
    r.name = "tolerance_saturation";
    r.threshold = 1e-6;
    const HamiltonianModel m = make_model("free");
    const InitialData phi = InitialData::cosine(1.0, 1, 0.0);
    const std::vector<FieldQuery> queries = {{0.0, 0.5}, {0.25, 0.5}, {0.5, 1.0}};
    ShootingFieldConfig base;
    base.ny = 16;
    base.shooting.n_p = 201;
    const SensitivityTable table =
        sensitivity_study(m, phi, queries, "integrator_tol", {1e-6, 1e-8, 1e-10}, base);
    r.measured = table.max_drift;
    r.pass = table.max_drift <= r.threshold;
    r.detail = "integrator_tol 1e-6..1e-10";
    return r;
}

/// Doubling the flood seed lattice must not move the field.
inline PropertyResult prop_seed_saturation() {
    PropertyResult r;
    r.name = "seed_saturation";
    r.threshold = 1e-3;
    const HamiltonianModel m = make_model("free");
    const InitialData phi = InitialData::cosine(1.0, 1, 0.0);
    GridSpec grid;
    grid.nx = 100;
    grid.t_nodes = {0.5, 1.0};
    SeedSpec coarse{300, 301, 8.0};
    SeedSpec fine{600, 601, 8.0};
    const SolutionField a = solve_forward_flood(m, phi, grid, coarse);
    const SolutionField b = solve_forward_flood(m, phi, grid, fine);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
    r.measured = worst;
    r.pass = worst <= r.threshold;
    r.detail = "ny,np 300/301 -> 600/601";
    return r;
}

/// The full structural suite; the acceptance gate's criterion 7 and the
/// CLI `props` command both run exactly this.
inline PropertySuiteReport run_property_suite(std::uint64_t seed = 42, int n_samples = 50) {
    PropertySuiteReport rep;
    rep.results.push_back(prop_legendre_involution());
    rep.results.push_back(prop_energy_conservation());
    rep.results.push_back(prop_calibration());
    rep.results.push_back(prop_interior_consistency());
    rep.results.push_back(prop_flow_roundtrip());
    rep.results.push_back(prop_triangle(seed, n_samples));
    rep.results.push_back(prop_comparison_monotonicity());
    rep.results.push_back(prop_osgood_margins());
    rep.results.push_back(prop_winding_saturation());
    rep.results.push_back(prop_scan_saturation());
    rep.results.push_back(prop_tolerance_saturation());
    rep.results.push_back(prop_seed_saturation());
    return rep;
}

} // namespace hjchar
