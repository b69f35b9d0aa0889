// hjchar: viscosity solutions of u_t + H(x, u, u_x) = 0 on the unit torus
// via minimal characteristics, with grid-scheme and inf-convolution
// reference solvers and structural experiment drivers.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hjchar/analysis.hpp"
#include "hjchar/charflow.hpp"
#include "hjchar/config.hpp"
#include "hjchar/errors.hpp"
#include "hjchar/field.hpp"
#include "hjchar/fundamental.hpp"
#include "hjchar/initial_data.hpp"
#include "hjchar/io.hpp"
#include "hjchar/models.hpp"
#include "hjchar/numerics.hpp"
#include "hjchar/oracle.hpp"
#include "hjchar/properties.hpp"

namespace {

using nlohmann::ordered_json;
using namespace hjchar;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAssertion = 2;

/// JSON numbers are emitted fail-closed like the CSVs: a NaN anywhere in a
/// summary is a bug upstream, not something to serialize as null.
double jreal(double v) {
    if (!std::isfinite(v)) throw SolverError("non-finite value reached a JSON emitter");
    return v;
}

class Stopwatch {
  public:
    double ms() const {
        const auto now = std::chrono::steady_clock::now();
        return std::chrono::duration<double, std::milli>(now - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string out_path(const RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

void write_json(const std::string& path, const ordered_json& j) {
    detail::write_text(path, j.dump(2) + "\n");
}

ordered_json error_rows_json(const ErrorReport& rep) {
    ordered_json rows = ordered_json::array();
    for (const ErrorRow& row : rep.rows)
        rows.push_back({{"t", jreal(row.t)}, {"sup", jreal(row.sup)}, {"l1", jreal(row.l1)}});
    return rows;
}

int cmd_flow(const RunConfig& cfg) {
    Stopwatch timer;
    const HamiltonianModel m = cfg.make_hamiltonian();
    FlowOptions opts;
    opts.keep_nodes = true;
    if (cfg.t_nodes.size() > 1 || cfg.t_nodes.front() != cfg.T) opts.sample_times = cfg.t_nodes;
    const Trajectory traj = flow(m, {cfg.x0, cfg.u0, cfg.p0}, cfg.T, cfg.tol, opts);
    write_trajectory_csv(out_path(cfg, "flow.csv"), traj);

    const PhasePoint end = traj.endpoint();
    ordered_json j;
    j["command"] = "flow";
    j["model"] = cfg.model;
    j["start"] = {{"x", jreal(cfg.x0)}, {"u", jreal(cfg.u0)}, {"p", jreal(cfg.p0)}};
    j["T"] = jreal(cfg.T);
    j["endpoint"] = {{"x", jreal(end.x)}, {"u", jreal(end.u)}, {"p", jreal(end.p)}};
    j["nodes"] = traj.times.size();
    j["max_abs_u"] = jreal(traj.max_abs_u);
    j["max_abs_xdot"] = jreal(traj.max_abs_xdot);
    j["tolerance"] = jreal(traj.tolerance_used);
    j["runtime_ms"] = jreal(timer.ms());
    write_json(out_path(cfg, "flow.json"), j);
    std::cout << "flow: endpoint (" << format_real(end.x) << ", " << format_real(end.u)
              << ", " << format_real(end.p) << ") after " << traj.times.size() << " nodes\n";
    return kExitOk;
}

int cmd_fundamental(const RunConfig& cfg) {
    Stopwatch timer;
    const HamiltonianModel m = cfg.make_hamiltonian();
    const FundamentalValue fv =
        fundamental_solution(m, cfg.x0, cfg.u0, cfg.x, cfg.T, cfg.shooting());
    write_trajectory_csv(out_path(cfg, "trajectory.csv"), fv.trajectory);

    ordered_json j;
    j["command"] = "fundamental";
    j["model"] = cfg.model;
    j["anchor"] = {{"x0", jreal(cfg.x0)}, {"u0", jreal(cfg.u0)}};
    j["query"] = {{"x", jreal(cfg.x)}, {"t", jreal(cfg.T)}};
    j["value"] = jreal(fv.value);
    j["p0"] = jreal(fv.minimizer.p0);
    j["winding"] = fv.minimizer.winding;
    j["residual"] = jreal(fv.minimizer.residual);
    j["calibration_defect"] = jreal(verify_calibration(m, fv));
    ordered_json cands = ordered_json::array();
    for (const ShootingResult& c : fv.candidates)
        cands.push_back({{"p0", jreal(c.p0)},
                         {"winding", c.winding},
                         {"u", jreal(c.terminal.u)},
                         {"residual", jreal(c.residual)}});
    j["candidates"] = cands;
    j["runtime_ms"] = jreal(timer.ms());
    write_json(out_path(cfg, "fundamental.json"), j);
    std::cout << "fundamental: value " << format_real(fv.value) << " via p0 "
              << format_real(fv.minimizer.p0) << " winding " << fv.minimizer.winding << "\n";
    return kExitOk;
}

SolutionField flood_from_config(const RunConfig& cfg, const HamiltonianModel& m) {
    GridSpec grid;
    grid.nx = cfg.nx;
    grid.t_nodes = cfg.t_nodes;
    grid.period = m.period;
    SeedSpec seeds;
    seeds.ny = cfg.ny;
    seeds.np = cfg.np;
    seeds.p_max = cfg.p_max;
    FloodConfig fc;
    fc.tol = cfg.tol;
    return solve_forward_flood(m, cfg.phi, grid, seeds, fc);
}

ordered_json field_summary(const RunConfig& cfg, const SolutionField& field) {
    ordered_json j;
    j["model"] = cfg.model;
    j["phi"] = cfg.phi_spec;
    j["grid"] = {{"nx", field.nx()}, {"t_nodes", field.t_nodes}};
    j["seeds"] = {{"ny", cfg.ny}, {"np", cfg.np}, {"p_max", jreal(cfg.p_max)}};
    j["fill_fraction"] = jreal(field.fill_fraction);
    j["flood_fraction"] = jreal(field.flood_fraction);
    j["fallback_cells"] = field.fallback_cells;
    j["blown_seeds"] = field.blown_seeds;
    return j;
}

int cmd_solve(const RunConfig& cfg) {
    Stopwatch timer;
    const HamiltonianModel m = cfg.make_hamiltonian();
    if (cfg.method == "flood") {
        const SolutionField field = flood_from_config(cfg, m);
        write_field_csv(out_path(cfg, "field.csv"), field);
        ordered_json j = field_summary(cfg, field);
        j["command"] = "solve";
        j["method"] = "flood";
        j["runtime_ms"] = jreal(timer.ms());
        write_json(out_path(cfg, "solve.json"), j);
        std::cout << "solve: flood field " << field.nx() << "x" << field.nt()
                  << ", fill " << format_real(field.fill_fraction) << ", fallback cells "
                  << field.fallback_cells << "\n";
        return kExitOk;
    }

    ShootingFieldConfig sc;
    sc.shooting = cfg.shooting();
    sc.ny = cfg.ny;
    const std::vector<double> values = solve_via_shooting(m, cfg.phi, cfg.queries, sc);
    detail::write_text(out_path(cfg, "queries.csv"), queries_csv(cfg.queries, values));
    ordered_json j;
    j["command"] = "solve";
    j["method"] = "shooting";
    j["model"] = cfg.model;
    j["phi"] = cfg.phi_spec;
    j["n_queries"] = cfg.queries.size();
    j["runtime_ms"] = jreal(timer.ms());
    write_json(out_path(cfg, "solve.json"), j);
    std::cout << "solve: shooting answered " << cfg.queries.size() << " queries\n";
    return kExitOk;
}

SolutionField reference_field(const RunConfig& cfg, const HamiltonianModel& m,
                              double* alpha_used) {
    if (cfg.reference == "hopf_lax") return hopf_lax_field(cfg.phi, cfg.nx, cfg.t_nodes);
    LFConfig lf;
    lf.nx = cfg.nx;
    lf.cfl = cfg.cfl;
    lf.alpha = cfg.alpha;
    lf.t_nodes = cfg.t_nodes;
    return solve_lf(m, cfg.phi, lf, alpha_used);
}

bool lf_indicative(const std::string& model) {
    // The grid scheme's convergence theory needs H nondecreasing in u;
    // outside that class its output is a cross-check, not a reference.
    return model == "antidiscounted" || model == "osgood";
}

int cmd_oracle(const RunConfig& cfg) {
    Stopwatch timer;
    const HamiltonianModel m = cfg.make_hamiltonian();
    double alpha_used = 0.0;
    const SolutionField field = reference_field(cfg, m, &alpha_used);
    write_field_csv(out_path(cfg, "field.csv"), field);
    ordered_json j;
    j["command"] = "oracle";
    j["reference"] = cfg.reference;
    j["model"] = cfg.model;
    j["phi"] = cfg.phi_spec;
    j["grid"] = {{"nx", field.nx()}, {"t_nodes", field.t_nodes}};
    if (cfg.reference == "lf") {
        j["cfl"] = jreal(cfg.cfl);
        j["alpha"] = jreal(alpha_used);
        if (lf_indicative(cfg.model)) j["status"] = "indicative";
    }
    j["runtime_ms"] = jreal(timer.ms());
    write_json(out_path(cfg, "oracle.json"), j);
    std::cout << "oracle: " << cfg.reference << " field " << field.nx() << "x" << field.nt()
              << "\n";
    return kExitOk;
}

int cmd_compare(const RunConfig& cfg) {
    Stopwatch timer;
    const HamiltonianModel m = cfg.make_hamiltonian();
    const SolutionField flood = flood_from_config(cfg, m);
    double alpha_used = 0.0;
    const SolutionField ref = reference_field(cfg, m, &alpha_used);
    const ErrorReport rep = compare_fields(flood, ref);

    write_field_csv(out_path(cfg, "field_flood.csv"), flood);
    write_field_csv(out_path(cfg, "field_reference.csv"), ref);

    const bool pass = rep.sup <= cfg.sup_tol;
    ordered_json j;
    j["command"] = "compare";
    j["model"] = cfg.model;
    j["phi"] = cfg.phi_spec;
    j["reference"] = cfg.reference;
    if (cfg.reference == "lf" && lf_indicative(cfg.model)) j["status"] = "indicative";
    j["sup"] = jreal(rep.sup);
    j["l1"] = jreal(rep.l1);
    j["rows"] = error_rows_json(rep);
    j["sup_tol"] =
        std::isfinite(cfg.sup_tol) ? ordered_json(cfg.sup_tol) : ordered_json("unset");
    j["pass"] = pass;
    j["runtime_ms"] = jreal(timer.ms());
    write_json(out_path(cfg, "error.json"), j);
    std::cout << "compare: sup " << format_real(rep.sup) << ", l1 " << format_real(rep.l1)
              << (pass ? "" : " (exceeds sup_tol)") << "\n";
    return pass ? kExitOk : kExitAssertion;
}

int cmd_osgood(const RunConfig& cfg) {
    Stopwatch timer;
    const HamiltonianModel m = cfg.make_hamiltonian();
    const OsgoodReport og = osgood_pointwise_check(m, m.envelope->box);
    const AssumptionReport as = check_assumptions(m);

    ordered_json j;
    j["command"] = "osgood";
    j["model"] = cfg.model;
    j["worst_margin"] = jreal(og.worst_margin);
    j["margin_ok"] = og.margin_ok;
    ordered_json probe = ordered_json::array();
    for (const OsgoodProbePoint& pp : og.probe)
        probe.push_back({{"u_max", jreal(pp.u_max)}, {"integral", jreal(pp.integral)}});
    j["divergence_probe"] = probe;
    j["assumptions"] = {{"min_p_curvature", jreal(as.min_p_curvature)},
                        {"curvature_ok", as.curvature_ok},
                        {"superlinearity_gaps", as.superlinearity_gaps},
                        {"superlinear_ok", as.superlinear_ok},
                        {"periodicity_residual", jreal(as.periodicity_residual)},
                        {"periodic_ok", as.periodic_ok},
                        {"derivative_residual", jreal(as.derivative_residual)},
                        {"derivatives_ok", as.derivatives_ok}};
    const bool pass = og.pass() && as.pass();
    j["pass"] = pass;
    j["runtime_ms"] = jreal(timer.ms());
    write_json(out_path(cfg, "osgood.json"), j);
    std::cout << "osgood: worst margin " << format_real(og.worst_margin)
              << (pass ? " (pass)" : " (FAIL)") << "\n";
    return pass ? kExitOk : kExitAssertion;
}

int cmd_truncation(const RunConfig& cfg) {
    Stopwatch timer;
    const HamiltonianModel m = cfg.make_hamiltonian();
    TruncationConfig tc;
    tc.x0 = cfg.x0;
    tc.u0 = cfg.u0;
    tc.shooting = cfg.shooting();
    const TruncationTable table = truncation_experiment(m, cfg.queries, cfg.r_list, tc);
    const BoundReport bounds = bound_monitor(table);
    write_truncation_csv(out_path(cfg, "truncation.csv"), table);

    ordered_json j;
    j["command"] = "truncation";
    j["model"] = cfg.model;
    j["anchor"] = {{"x0", jreal(cfg.x0)}, {"u0", jreal(cfg.u0)}};
    j["A_star"] = jreal(table.A_star_observed);
    j["K_star"] = jreal(table.K_star_observed);
    j["R_hat"] = jreal(table.R_hat);
    j["max_stabilized_diff"] = jreal(table.max_stabilized_diff);
    j["stabilized"] = table.stabilized;
    ordered_json per_r = ordered_json::array();
    for (const BoundRow& row : bounds.per_R)
        per_r.push_back({{"R", std::isfinite(row.R) ? ordered_json(row.R)
                                                    : ordered_json("untruncated")},
                         {"A_star", jreal(row.A_star)},
                         {"K_star", jreal(row.K_star)}});
    j["bounds"] = {{"per_R", per_r},
                   {"max_drift", jreal(bounds.max_drift)},
                   {"constant_above_threshold", bounds.constant_above_threshold}};
    const bool pass = table.stabilized && bounds.constant_above_threshold;
    j["pass"] = pass;
    j["runtime_ms"] = jreal(timer.ms());
    write_json(out_path(cfg, "truncation.json"), j);
    std::cout << "truncation: R_hat " << format_real(table.R_hat) << ", stabilized diff "
              << format_real(table.max_stabilized_diff) << (pass ? " (pass)" : " (FAIL)")
              << "\n";
    return pass ? kExitOk : kExitAssertion;
}

int cmd_props(const RunConfig& cfg) {
    Stopwatch timer;
    const PropertySuiteReport rep = run_property_suite(cfg.seed, cfg.n_samples);

    std::string csv = "name,measured,threshold,pass\n";
    for (const PropertyResult& r : rep.results) {
        csv += r.name;
        csv += ',';
        csv += format_real(r.measured);
        csv += ',';
        csv += format_real(r.threshold);
        csv += ',';
        csv += r.pass ? '1' : '0';
        csv += '\n';
    }
    detail::write_text(out_path(cfg, "props.csv"), csv);

    ordered_json j;
    j["command"] = "props";
    ordered_json results = ordered_json::array();
    for (const PropertyResult& r : rep.results)
        results.push_back({{"name", r.name},
                           {"measured", jreal(r.measured)},
                           {"threshold", jreal(r.threshold)},
                           {"pass", r.pass},
                           {"detail", r.detail}});
    j["results"] = results;
    j["pass"] = rep.pass();
    j["runtime_ms"] = jreal(timer.ms());
    write_json(out_path(cfg, "props.json"), j);

    for (const PropertyResult& r : rep.results)
        std::cout << (r.pass ? "pass" : "FAIL") << "  " << r.name << "  measured "
                  << format_real(r.measured) << " vs " << format_real(r.threshold) << "\n";
    return rep.pass() ? kExitOk : kExitAssertion;
}

int run(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    if (cfg.command == "flow") return cmd_flow(cfg);
    if (cfg.command == "fundamental") return cmd_fundamental(cfg);
    if (cfg.command == "solve") return cmd_solve(cfg);
    if (cfg.command == "oracle") return cmd_oracle(cfg);
    if (cfg.command == "compare") return cmd_compare(cfg);
    if (cfg.command == "osgood") return cmd_osgood(cfg);
    if (cfg.command == "truncation") return cmd_truncation(cfg);
    if (cfg.command == "props") return cmd_props(cfg);
    throw SolverError("unhandled command '" + cfg.command + "'");
}

void print_models() {
    std::cout << "catalog (all H = p^2/2 + g(x,u) on the unit torus):\n";
    std::cout << "  free            g = 0\n";
    std::cout << "  mechanical      g = potential * cos(2 pi x)\n";
    std::cout << "  discounted      g = potential * cos(2 pi x) + lambda * u\n";
    std::cout << "  antidiscounted  g = potential * cos(2 pi x) - lambda * u\n";
    std::cout << "  osgood          g = potential * cos(2 pi x) - u * log(1 + u^2)\n";
    std::cout << "knobs: lambda in (0, 100] (default 1), potential in [-100, 100] "
                 "(default 1; 0 removes the well)\n";
}

void print_usage() {
    std::cout
        << "usage: hjchar [--config FILE] [COMMAND] [key=value ...]\n"
           "       hjchar --list-models\n"
           "commands: flow fundamental solve oracle compare osgood truncation props\n"
           "CLI key=value pairs override config-file lines; see README for the key table.\n";
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) {
        print_usage();
        return kExitError;
    }

    try {
        std::vector<ConfigSource> sources;
        bool command_seen = false;
        for (std::size_t i = 0; i < args.size(); ++i) {
            const std::string& a = args[i];
            const std::string where = "arg " + std::to_string(i + 1);
            if (a == "--list-models") {
                print_models();
                return kExitOk;
            }
            if (a == "--help" || a == "-h") {
                print_usage();
                return kExitOk;
            }
            if (a == "--config") {
                if (i + 1 >= args.size())
                    throw ConfigError({where + ": --config needs a file path"});
                const auto file_sources = read_config_file(args[++i]);
                sources.insert(sources.end(), file_sources.begin(), file_sources.end());
                continue;
            }
            const std::size_t eq = a.find('=');
            if (eq == std::string::npos) {
                if (!command_seen) {
                    sources.push_back({"command", a, where});
                    command_seen = true;
                } else {
                    sources.push_back({"", a, where});
                }
                continue;
            }
            sources.push_back({a.substr(0, eq), a.substr(eq + 1), where});
        }

        const RunConfig cfg = parse_config(sources);
        return run(cfg);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitError;
    } catch (const SolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}
