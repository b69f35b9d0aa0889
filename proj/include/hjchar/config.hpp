#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hjchar/errors.hpp"
#include "hjchar/field.hpp"
#include "hjchar/fundamental.hpp"
#include "hjchar/initial_data.hpp"
#include "hjchar/models.hpp"

namespace hjchar {

/// One key=value assignment with where it came from (file:line or CLI slot).
struct ConfigSource {
    std::string key;
    std::string value;
    std::string provenance;
};

struct RunConfig {
    std::string command;
    std::string model = "free";
    double lambda = 1.0;
    double potential = 1.0;
    std::string phi_spec = "const:0";
    InitialData phi = InitialData::constant(0.0);
    int nx = 200;
    int ny = 400;
    int np = 401;
    double p_max = 8.0;
    int k_max = 2;
    double tol = 1e-10;
    double root_tol = 1e-10;
    double cfl = 0.45;
    double alpha = 0.0; // 0 requests auto-calibration
    double T = 1.0;
    std::vector<double> t_nodes; // empty means {T}
    std::string out_dir = ".";
    double x0 = 0.0;
    double u0 = 0.0;
    double p0 = 0.0;
    double x = 0.5;
    std::vector<FieldQuery> queries = {{0.25, 0.5}, {0.5, 1.0}};
    std::vector<double> r_list = {2.0, 4.0, 8.0, 16.0};
    std::uint64_t seed = 42;
    int n_samples = 50;
    std::string method = "flood";     // flood | shooting
    std::string reference = "lf";     // lf | hopf_lax
    double sup_tol = std::numeric_limits<double>::infinity();

    HamiltonianModel make_hamiltonian() const { return make_model(model, lambda, potential); }

    ShootingConfig shooting() const {
        ShootingConfig c;
        c.p_max = p_max;
        c.n_p = np;
        c.k_max = k_max;
        c.tol = tol;
        c.root_tol = root_tol;
        return c;
    }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline bool parse_real(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size() && std::isfinite(out);
    } catch (...) {
        return false;
    }
}

inline bool parse_int(const std::string& s, long long& out) {
    try {
        std::size_t pos = 0;
        out = std::stoll(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

} // namespace detail

/// Parses the initial-data grammar: const:<c>, cos:<a>:<m>:<b> meaning
/// a cos(2 pi m x) + b, sin:<a>:<m>:<b>, table:<path> (CSV rows x,phi).
inline InitialData parse_phi(const std::string& spec) {
    const auto parts = detail::split(spec, ':');
    const std::string& kind = parts[0];
    auto real_at = [&](std::size_t i) {
        double v;
        if (i >= parts.size() || !detail::parse_real(parts[i], v))
            throw SolverError("phi spec '" + spec + "': expected a real in field " +
                              std::to_string(i + 1));
        return v;
    };
    if (kind == "const") {
        if (parts.size() != 2) throw SolverError("phi spec '" + spec + "': want const:<c>");
        return InitialData::constant(real_at(1));
    }
    if (kind == "cos" || kind == "sin") {
        if (parts.size() != 4)
            throw SolverError("phi spec '" + spec + "': want " + kind + ":<a>:<m>:<b>");
        const double a = real_at(1);
        long long mm;
        if (!detail::parse_int(parts[2], mm) || mm < 1 || mm > 64)
            throw SolverError("phi spec '" + spec + "': harmonic count must be in [1,64]");
        const double b = real_at(3);
        return kind == "cos" ? InitialData::cosine(a, static_cast<int>(mm), b)
                             : InitialData::sine(a, static_cast<int>(mm), b);
    }
    if (kind == "table") {
        if (parts.size() != 2) throw SolverError("phi spec '" + spec + "': want table:<path>");
        std::ifstream in(parts[1]);
        if (!in) throw SolverError("phi spec '" + spec + "': cannot open table file");
        std::vector<std::pair<double, double>> knots;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            line = detail::trim(line);
            if (line.empty() || line[0] == '#') continue;
            if (lineno == 1 && line.find("x,phi") == 0) continue; // optional header
            const auto cols = detail::split(line, ',');
            double kx, kv;
            if (cols.size() != 2 || !detail::parse_real(detail::trim(cols[0]), kx) ||
                !detail::parse_real(detail::trim(cols[1]), kv))
                throw SolverError("phi table line " + std::to_string(lineno) +
                                  ": want two reals x,phi");
            knots.emplace_back(kx, kv);
        }
        return InitialData::table(std::move(knots));
    }
    throw SolverError("phi spec '" + spec + "': unknown kind '" + kind + "'");
}

/// Reads key=value lines from a config file. '#' starts a comment; blank
/// lines are skipped. Malformed lines are reported as violations by
/// parse_config (they are forwarded with an empty key).
inline std::vector<ConfigSource> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SolverError("cannot open config file: " + path);
    std::vector<ConfigSource> sources;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        ConfigSource src;
        src.provenance = path + ":" + std::to_string(lineno);
        if (eq == std::string::npos) {
            src.key = "";
            src.value = t;
        } else {
            src.key = detail::trim(t.substr(0, eq));
            src.value = detail::trim(t.substr(eq + 1));
        }
        sources.push_back(src);
    }
    return sources;
}

/// Validates and assembles a RunConfig from ordered key=value sources
/// (later sources override earlier ones). Fail-closed: every violation is
/// collected with its provenance, then reported at once; unknown keys are
/// rejected.
inline RunConfig parse_config(const std::vector<ConfigSource>& sources) {
    RunConfig cfg;
    std::vector<std::string> violations;
    bool t_nodes_set = false;

    auto bad = [&](const ConfigSource& s, const std::string& why) {
        violations.push_back(s.provenance + ": " + s.key +
                             (s.key.empty() ? "" : "=") + s.value + ": " + why);
    };

    auto real_in = [&](const ConfigSource& s, double lo, double hi, bool lo_open,
                       double& out) {
        double v;
        if (!detail::parse_real(s.value, v)) {
            bad(s, "expected a real number");
            return;
        }
        const bool below = lo_open ? v <= lo : v < lo;
        if (below || v > hi) {
            std::ostringstream msg;
            msg << "must be in " << (lo_open ? "(" : "[") << lo << ", " << hi << "]";
            bad(s, msg.str());
            return;
        }
        out = v;
    };

    auto int_in = [&](const ConfigSource& s, long long lo, long long hi, int& out) {
        long long v;
        if (!detail::parse_int(s.value, v)) {
            bad(s, "expected an integer");
            return;
        }
        if (v < lo || v > hi) {
            bad(s, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            return;
        }
        out = static_cast<int>(v);
    };

    auto one_of = [&](const ConfigSource& s, std::initializer_list<const char*> allowed,
                      std::string& out) {
        for (const char* a : allowed)
            if (s.value == a) {
                out = s.value;
                return;
            }
        std::string list;
        for (const char* a : allowed) {
            if (!list.empty()) list += ", ";
            list += a;
        }
        bad(s, "must be one of {" + list + "}");
    };

    for (const ConfigSource& s : sources) {
        if (s.key.empty()) {
            bad(s, "not a key=value line");
        } else if (s.key == "command") {
            one_of(s, {"flow", "fundamental", "solve", "oracle", "compare", "osgood",
                       "truncation", "props"},
                   cfg.command);
        } else if (s.key == "model") {
            one_of(s, {"free", "mechanical", "discounted", "antidiscounted", "osgood"},
                   cfg.model);
        } else if (s.key == "lambda") {
            real_in(s, 0.0, 100.0, true, cfg.lambda);
        } else if (s.key == "potential") {
            real_in(s, -100.0, 100.0, false, cfg.potential);
        } else if (s.key == "phi") {
            try {
                cfg.phi = parse_phi(s.value);
                cfg.phi_spec = s.value;
            } catch (const SolverError& e) {
                bad(s, e.what());
            }
        } else if (s.key == "nx") {
            int_in(s, 16, 20000, cfg.nx);
        } else if (s.key == "ny") {
            int_in(s, 4, 20000, cfg.ny);
        } else if (s.key == "np") {
            int_in(s, 3, 20001, cfg.np);
        } else if (s.key == "p_max") {
            real_in(s, 0.0, 100.0, true, cfg.p_max);
        } else if (s.key == "k_max") {
            int_in(s, 0, 8, cfg.k_max);
        } else if (s.key == "tol") {
            real_in(s, 1e-13, 1e-2, false, cfg.tol);
        } else if (s.key == "root_tol") {
            real_in(s, 1e-13, 1e-2, false, cfg.root_tol);
        } else if (s.key == "cfl") {
            real_in(s, 0.0, 1.0, true, cfg.cfl);
        } else if (s.key == "alpha") {
            real_in(s, 0.0, 1e4, false, cfg.alpha);
        } else if (s.key == "T") {
            real_in(s, 1e-3, 100.0, false, cfg.T);
        } else if (s.key == "t_nodes") {
            std::vector<double> nodes;
            bool ok = true;
            for (const std::string& part : detail::split(s.value, ',')) {
                double v;
                if (!detail::parse_real(detail::trim(part), v) || v <= 0.0) {
                    bad(s, "entries must be reals > 0");
                    ok = false;
                    break;
                }
                if (!nodes.empty() && v <= nodes.back()) {
                    bad(s, "entries must be strictly ascending");
                    ok = false;
                    break;
                }
                nodes.push_back(v);
            }
            if (ok && nodes.empty()) {
                bad(s, "needs at least one time");
            } else if (ok) {
                cfg.t_nodes = nodes;
                t_nodes_set = true;
            }
        } else if (s.key == "out_dir") {
            if (s.value.empty())
                bad(s, "must not be empty");
            else
                cfg.out_dir = s.value;
        } else if (s.key == "x0") {
            real_in(s, -100.0, 100.0, false, cfg.x0);
        } else if (s.key == "u0") {
            real_in(s, -100.0, 100.0, false, cfg.u0);
        } else if (s.key == "p0") {
            real_in(s, -100.0, 100.0, false, cfg.p0);
        } else if (s.key == "x") {
            real_in(s, -100.0, 100.0, false, cfg.x);
        } else if (s.key == "queries") {
            std::vector<FieldQuery> qs;
            bool ok = true;
            for (const std::string& part : detail::split(s.value, ',')) {
                const auto xt = detail::split(detail::trim(part), ':');
                double qx, qt;
                if (xt.size() != 2 || !detail::parse_real(xt[0], qx) ||
                    !detail::parse_real(xt[1], qt) || qt <= 0.0) {
                    bad(s, "want comma-separated x:t pairs with t > 0");
                    ok = false;
                    break;
                }
                qs.push_back({qx, qt});
            }
            if (ok && qs.empty())
                bad(s, "needs at least one query");
            else if (ok)
                cfg.queries = qs;
        } else if (s.key == "r_list") {
            std::vector<double> rs;
            bool ok = true;
            for (const std::string& part : detail::split(s.value, ',')) {
                double v;
                if (!detail::parse_real(detail::trim(part), v) || v <= 0.0) {
                    bad(s, "entries must be reals > 0");
                    ok = false;
                    break;
                }
                if (!rs.empty() && v <= rs.back()) {
                    bad(s, "entries must be strictly increasing");
                    ok = false;
                    break;
                }
                rs.push_back(v);
            }
            if (ok && rs.size() < 3)
                bad(s, "needs at least 3 radii");
            else if (ok)
                cfg.r_list = rs;
        } else if (s.key == "seed") {
            long long v;
            if (!detail::parse_int(s.value, v) || v < 0)
                bad(s, "expected a nonnegative integer");
            else
                cfg.seed = static_cast<std::uint64_t>(v);
        } else if (s.key == "n_samples") {
            int_in(s, 1, 10000, cfg.n_samples);
        } else if (s.key == "method") {
            one_of(s, {"flood", "shooting"}, cfg.method);
        } else if (s.key == "reference") {
            one_of(s, {"lf", "hopf_lax"}, cfg.reference);
        } else if (s.key == "sup_tol") {
            double v;
            if (!detail::parse_real(s.value, v) || v <= 0.0)
                bad(s, "expected a real > 0");
            else
                cfg.sup_tol = v;
        } else if (s.key == "deterministic") {
            if (s.value != "true") bad(s, "only 'true' is supported (determinism contract)");
        } else {
            bad(s, "unknown key");
        }
    }

    if (cfg.command.empty())
        violations.push_back("<config>: command: required key missing");
    if (!t_nodes_set) cfg.t_nodes = {cfg.T};
    if (t_nodes_set && cfg.t_nodes.back() > cfg.T + 1e-12)
        violations.push_back("<config>: t_nodes: last entry exceeds T");
    if (cfg.reference == "hopf_lax" && cfg.model != "free" &&
        (cfg.command == "compare" || cfg.command == "oracle"))
        violations.push_back("<config>: reference=hopf_lax applies to model=free only");

    if (!violations.empty()) throw ConfigError(violations);
    return cfg;
}

} // namespace hjchar
