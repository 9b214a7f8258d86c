#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mfluid/core/audit.hpp"
#include "mfluid/core/time_integration.hpp"
#include "mfluid/core/types.hpp"
#include "mfluid/estimates/ledger.hpp"
#include "mfluid/eulerian/solver.hpp"
#include "mfluid/lagrangian/coordinates.hpp"
#include "mfluid/scenario/expression.hpp"

namespace mfluid::scenario {

using json = nlohmann::json;

inline constexpr const char* kConfigSchema = "mfluid-scenario/1";

struct InitialData {
    std::string preset;                   // empty when expressions are given
    std::vector<std::string> densities;   // ρ_0i(x)
    std::vector<std::string> velocities;  // u_0i(x)
    double perturbation = 0.0;            // δ: ρ_0i += δ cos(2πx), u_0i += δ sin(πx)
};

struct SolverOptions {
    double cfl = 0.4;
    double density_floor = 1e-10;
    TimeIntegrator time_integrator = TimeIntegrator::ssp_rk3;
    eulerian::Reconstruction reconstruction = eulerian::Reconstruction::upwind_linear;
    double picard_tol = 1e-10;
    int picard_max_iters = 50;
    std::size_t quadrature_points = 0;
    std::optional<double> dt_override;
    double blowup_energy_growth = 0.01;
};

struct OutputOptions {
    std::string directory = "out";
    double snapshot_interval = 0.01;
    double monitor_interval = 0.0;  // 0: same as snapshots
    bool plots = false;
};

struct ScenarioConfig {
    std::string name = "scenario";
    Parameters parameters;  // horizon lives here
    BackendKind backend = BackendKind::eulerian;
    std::size_t cells = 256;
    std::size_t modes = 16;
    InitialData initial;
    SolverOptions solver;
    estimates::LedgerOptions ledger;
    OutputOptions outputs;
    std::uint64_t seed = 0;
};

// ---- presets -------------------------------------------------------------

struct Preset {
    std::string name;
    Parameters parameters;
    std::vector<std::string> densities;
    std::vector<std::string> velocities;
};

inline Matrix two_by_two(double a, double b, double c) {
    Matrix m(2, 2);
    m << a, b, b, c;
    return m;
}

inline std::vector<std::string> preset_names() { return {"rest", "smooth-mix", "collapse", "mono"}; }

/// Preset data for `n` constituents; only "rest" accepts any n.
inline Preset make_preset(const std::string& name, std::size_t n = 0) {
    Preset p;
    p.name = name;
    p.parameters.pressure_coeff = 1.0;
    p.parameters.adiabatic_index = 1.4;
    p.parameters.horizon = 0.1;
    if (name == "rest") {
        if (n == 0) n = 2;
        p.parameters.n_constituents = n;
        p.parameters.viscosity = n == 2 ? two_by_two(2.0, 1.0, 2.0) : Matrix(Matrix::Identity(n, n));
        for (std::size_t i = 0; i < n; ++i) {
            p.densities.push_back("1/" + std::to_string(n));
            p.velocities.push_back("0");
        }
    } else if (name == "smooth-mix") {
        p.parameters.n_constituents = 2;
        p.parameters.viscosity = two_by_two(2.0, 1.0, 2.0);
        p.densities = {"0.5 + 0.2*sin(2*pi*x)", "0.5 - 0.1*sin(2*pi*x)"};
        p.velocities = {"0.1*sin(pi*x)", "-0.05*sin(pi*x)"};
    } else if (name == "collapse") {
        p.parameters.n_constituents = 2;
        p.parameters.viscosity = two_by_two(2.0, 1.0, 2.0);
        p.densities = {"(1 + 0.2*sin(2*pi*x))/2", "(1 + 0.2*sin(2*pi*x))/2"};
        p.velocities = {"0.1*sin(pi*x)", "0.1*sin(pi*x)"};
    } else if (name == "mono") {
        p.parameters.n_constituents = 1;
        p.parameters.viscosity = Matrix::Constant(1, 1, 1.0);
        p.densities = {"1 + 0.2*sin(2*pi*x)"};
        p.velocities = {"0.1*sin(pi*x)"};
    } else {
        throw ConfigError("initial_data.preset: unknown preset '" + name + "'");
    }
    if (n != 0 && n != p.parameters.n_constituents) {
        throw ConfigError("initial_data.preset: '" + name + "' is defined for " +
                          std::to_string(p.parameters.n_constituents) + " constituents only");
    }
    return p;
}

/// A config filled with a preset's data and the library defaults.
inline ScenarioConfig preset_config(const std::string& name) {
    const Preset p = make_preset(name);
    ScenarioConfig c;
    c.name = name;
    c.parameters = p.parameters;
    c.initial.preset = name;
    return c;
}

// ---- initial data --------------------------------------------------------

/// Density and velocity expressions actually used by `c`.
inline std::pair<std::vector<std::string>, std::vector<std::string>> initial_expressions(const ScenarioConfig& c) {
    if (!c.initial.preset.empty()) {
        const Preset p = make_preset(c.initial.preset, c.parameters.n_constituents);
        return {p.densities, p.velocities};
    }
    return {c.initial.densities, c.initial.velocities};
}

inline InitialProfiles profiles(const ScenarioConfig& c) {
    const auto [rho, u] = initial_expressions(c);
    const double delta = c.initial.perturbation;
    InitialProfiles ip;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const Expression er(rho[i]), eu(u[i]);
        if (delta == 0.0) {
            ip.densities.push_back(er);
            ip.velocities.push_back(eu);
        } else {
            ip.densities.push_back([er, delta](double x) { return er(x) + delta * std::cos(2.0 * std::numbers::pi * x); });
            ip.velocities.push_back([eu, delta](double x) { return eu(x) + delta * std::sin(std::numbers::pi * x); });
        }
    }
    return ip;
}

inline constexpr std::size_t kValidationSamples = 10000;

/// Checks ρ_0i > 0 on [0, 1] and u_0i(0) = u_0i(1) = 0 at 10⁴ + 1 points.
inline void validate_initial_data(const InitialProfiles& ip) {
    char buf[256];
    for (std::size_t i = 0; i < ip.densities.size(); ++i) {
        for (std::size_t j = 0; j <= kValidationSamples; ++j) {
            const double x = static_cast<double>(j) / static_cast<double>(kValidationSamples);
            const double r = ip.densities[i](x);
            const double u = ip.velocities[i](x);
            if (!(r > 0.0) || !std::isfinite(r)) {
                std::snprintf(buf, sizeof buf,
                              "initial density rho_0%zu = %.6g at x = %.6g: the existence theory requires "
                              "rho_0i > 0 on [0, 1] (no vacuum in the initial data)",
                              i + 1, r, x);
                throw ConfigError(buf);
            }
            if (!std::isfinite(u)) {
                std::snprintf(buf, sizeof buf, "initial velocity u_0%zu is not finite at x = %.6g", i + 1, x);
                throw ConfigError(buf);
            }
        }
        for (double x : {0.0, 1.0}) {
            const double u = ip.velocities[i](x);
            if (std::abs(u) > 1e-12) {
                std::snprintf(buf, sizeof buf,
                              "initial velocity u_0%zu = %.6g at wall x = %g: the existence theory requires "
                              "u_0i to vanish at both walls",
                              i + 1, u, x);
                throw ConfigError(buf);
            }
        }
    }
}

inline void validate(const ScenarioConfig& c) {
    validate_parameters(c.parameters);
    if (!(c.parameters.horizon >= 0.0) || !std::isfinite(c.parameters.horizon)) {
        throw ConfigError("horizon must be a non-negative number");
    }
    if (c.cells < 4) throw ConfigError("grid.cells must be at least 4");
    if (c.modes < 1) throw ConfigError("grid.modes must be at least 1");
    if (!(c.outputs.snapshot_interval > 0.0)) throw ConfigError("outputs.snapshot_interval must be positive");
    if (c.outputs.monitor_interval < 0.0) throw ConfigError("outputs.monitor_interval must be non-negative");
    if (!(c.solver.cfl > 0.0 && c.solver.cfl <= 1.0)) throw ConfigError("solver.cfl must lie in (0, 1]");
    if (!(c.solver.density_floor > 0.0)) throw ConfigError("solver.density_floor must be positive");
    if (!(c.solver.picard_tol > 0.0)) throw ConfigError("solver.picard_tol must be positive");
    if (c.solver.picard_max_iters < 1) throw ConfigError("solver.picard_max_iters must be at least 1");
    if (c.solver.dt_override && !(*c.solver.dt_override > 0.0)) throw ConfigError("solver.dt_override must be positive");
    if (!c.initial.preset.empty() && (!c.initial.densities.empty() || !c.initial.velocities.empty())) {
        throw ConfigError("initial_data: give either a preset or expressions, not both");
    }
    const auto [rho, u] = initial_expressions(c);
    const std::size_t n = c.parameters.n_constituents;
    if (rho.size() != n) throw ConfigError("initial_data.densities: expected " + std::to_string(n) + " expressions");
    if (u.size() != n) throw ConfigError("initial_data.velocities: expected " + std::to_string(n) + " expressions");
    validate_initial_data(profiles(c));
}

// ---- JSON ----------------------------------------------------------------

namespace detail {

inline void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (!ok.count(key)) throw ConfigError(where + ": unknown field '" + key + "'");
    }
}

template <class T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

inline double read_number(const json& obj, const char* key, const std::string& where, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return obj.at(key).get<double>();
}

inline std::size_t read_count(const json& obj, const char* key, const std::string& where, std::size_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(where + "." + key + ": expected a non-negative integer");
    return v.get<std::size_t>();
}

inline BackendKind parse_backend(const std::string& s) {
    if (s == "eulerian") return BackendKind::eulerian;
    if (s == "lagrangian") return BackendKind::lagrangian;
    if (s == "galerkin") return BackendKind::galerkin;
    throw ConfigError("backend: unknown backend '" + s + "' (eulerian, lagrangian, galerkin)");
}

inline Matrix parse_matrix(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty array of rows");
    const auto n = static_cast<Eigen::Index>(v.size());
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const json& row = v[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
            throw ConfigError(where + ": expected a square matrix");
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!row[static_cast<std::size_t>(j)].is_number()) throw ConfigError(where + ": entries must be numbers");
            m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
        }
    }
    return m;
}

inline std::vector<std::string> read_strings(const json& obj, const char* key, const std::string& where) {
    std::vector<std::string> out;
    if (!obj.contains(key)) return out;
    const json& v = obj.at(key);
    if (!v.is_array()) throw ConfigError(where + "." + key + ": expected an array of expressions");
    for (const auto& e : v) {
        if (!e.is_string()) throw ConfigError(where + "." + key + ": expected an array of expressions");
        out.push_back(e.get<std::string>());
        Expression check(out.back());  // syntax errors surface here
    }
    return out;
}

}  // namespace detail

/// Parses (but does not validate) a scenario document.
inline ScenarioConfig from_json(const json& doc) {
    using namespace detail;
    reject_unknown(doc, "document",
                   {"schema", "name", "parameters", "backend", "grid", "horizon", "initial_data", "solver", "ledger",
                    "outputs", "seed"});
    if (!doc.contains("schema") || doc.at("schema") != kConfigSchema) {
        throw ConfigError(std::string("schema: expected \"") + kConfigSchema + "\"");
    }
    if (!doc.contains("initial_data")) throw ConfigError("initial_data: missing");

    ScenarioConfig c;
    const json& init = doc.at("initial_data");
    reject_unknown(init, "initial_data", {"preset", "densities", "velocities", "perturbation"});
    read(init, "preset", "initial_data", c.initial.preset);
    c.initial.densities = read_strings(init, "densities", "initial_data");
    c.initial.velocities = read_strings(init, "velocities", "initial_data");
    c.initial.perturbation = read_number(init, "perturbation", "initial_data", 0.0);

    std::size_t n_hint = 0;
    if (doc.contains("parameters")) {
        const json& p = doc.at("parameters");
        if (p.contains("viscosity")) n_hint = p.at("viscosity").is_array() ? p.at("viscosity").size() : 0;
        if (p.contains("n_constituents")) n_hint = read_count(p, "n_constituents", "parameters", 0);
    }
    if (!c.initial.preset.empty()) {
        const Preset pre = make_preset(c.initial.preset, c.initial.preset == "rest" ? n_hint : 0);
        c.parameters = pre.parameters;
        c.name = pre.name;
    } else {
        c.parameters.n_constituents = n_hint ? n_hint : c.initial.densities.size();
        c.parameters.viscosity = Matrix::Identity(static_cast<Eigen::Index>(c.parameters.n_constituents),
                                                  static_cast<Eigen::Index>(c.parameters.n_constituents));
    }

    read(doc, "name", "document", c.name);
    if (doc.contains("parameters")) {
        const json& p = doc.at("parameters");
        reject_unknown(p, "parameters", {"n_constituents", "pressure_coeff", "adiabatic_index", "viscosity"});
        c.parameters.n_constituents = read_count(p, "n_constituents", "parameters", c.parameters.n_constituents);
        c.parameters.pressure_coeff = read_number(p, "pressure_coeff", "parameters", c.parameters.pressure_coeff);
        c.parameters.adiabatic_index = read_number(p, "adiabatic_index", "parameters", c.parameters.adiabatic_index);
        if (p.contains("viscosity")) c.parameters.viscosity = parse_matrix(p.at("viscosity"), "parameters.viscosity");
    }
    c.parameters.horizon = read_number(doc, "horizon", "document", c.parameters.horizon);
    if (doc.contains("backend")) {
        if (!doc.at("backend").is_string()) throw ConfigError("backend: expected a string");
        c.backend = parse_backend(doc.at("backend").get<std::string>());
    }
    if (doc.contains("grid")) {
        const json& g = doc.at("grid");
        reject_unknown(g, "grid", {"cells", "modes"});
        c.cells = read_count(g, "cells", "grid", c.cells);
        c.modes = read_count(g, "modes", "grid", c.modes);
    }
    if (doc.contains("solver")) {
        const json& s = doc.at("solver");
        reject_unknown(s, "solver",
                       {"cfl", "density_floor", "time_integrator", "reconstruction", "picard_tol", "picard_max_iters",
                        "quadrature_points", "dt_override", "blowup_energy_growth"});
        c.solver.cfl = read_number(s, "cfl", "solver", c.solver.cfl);
        c.solver.density_floor = read_number(s, "density_floor", "solver", c.solver.density_floor);
        if (s.contains("time_integrator")) {
            const std::string ti = s.at("time_integrator").is_string() ? s.at("time_integrator").get<std::string>() : "";
            if (ti == "ssp_rk3") c.solver.time_integrator = TimeIntegrator::ssp_rk3;
            else if (ti == "rk4") c.solver.time_integrator = TimeIntegrator::rk4;
            else throw ConfigError("solver.time_integrator: expected \"ssp_rk3\" or \"rk4\"");
        }
        if (s.contains("reconstruction")) {
            const std::string r = s.at("reconstruction").is_string() ? s.at("reconstruction").get<std::string>() : "";
            if (r == "upwind") c.solver.reconstruction = eulerian::Reconstruction::upwind;
            else if (r == "upwind_linear") c.solver.reconstruction = eulerian::Reconstruction::upwind_linear;
            else throw ConfigError("solver.reconstruction: expected \"upwind\" or \"upwind_linear\"");
        }
        c.solver.picard_tol = read_number(s, "picard_tol", "solver", c.solver.picard_tol);
        c.solver.picard_max_iters = static_cast<int>(read_count(s, "picard_max_iters", "solver", 50));
        c.solver.quadrature_points = read_count(s, "quadrature_points", "solver", 0);
        if (s.contains("dt_override") && !s.at("dt_override").is_null()) {
            c.solver.dt_override = read_number(s, "dt_override", "solver", 0.0);
        }
        c.solver.blowup_energy_growth = read_number(s, "blowup_energy_growth", "solver", c.solver.blowup_energy_growth);
    }
    if (doc.contains("ledger")) {
        const json& l = doc.at("ledger");
        reject_unknown(l, "ledger",
                       {"mass_tol", "energy_constant", "w_kappa", "w_kappa0", "unit_length_tol", "lower_bound_fraction"});
        c.ledger.mass_tol = read_number(l, "mass_tol", "ledger", c.ledger.mass_tol);
        c.ledger.energy_constant = read_number(l, "energy_constant", "ledger", c.ledger.energy_constant);
        c.ledger.w_kappa = read_number(l, "w_kappa", "ledger", c.ledger.w_kappa);
        c.ledger.w_kappa0 = read_number(l, "w_kappa0", "ledger", c.ledger.w_kappa0);
        c.ledger.unit_length_tol = read_number(l, "unit_length_tol", "ledger", c.ledger.unit_length_tol);
        c.ledger.lower_bound_fraction = read_number(l, "lower_bound_fraction", "ledger", c.ledger.lower_bound_fraction);
    }
    if (doc.contains("outputs")) {
        const json& o = doc.at("outputs");
        reject_unknown(o, "outputs", {"directory", "snapshot_interval", "monitor_interval", "plots"});
        read(o, "directory", "outputs", c.outputs.directory);
        c.outputs.snapshot_interval = read_number(o, "snapshot_interval", "outputs", c.outputs.snapshot_interval);
        c.outputs.monitor_interval = read_number(o, "monitor_interval", "outputs", c.outputs.monitor_interval);
        read(o, "plots", "outputs", c.outputs.plots);
    }
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
        c.seed = doc.at("seed").get<std::uint64_t>();
    }
    c.ledger.density_floor = c.solver.density_floor;
    return c;
}

/// Complete document: every field written, so parse(to_json(c)) reproduces c.
inline json to_json(const ScenarioConfig& c) {
    json doc;
    doc["schema"] = kConfigSchema;
    doc["name"] = c.name;
    json visc = json::array();
    for (Eigen::Index i = 0; i < c.parameters.viscosity.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < c.parameters.viscosity.cols(); ++j) row.push_back(c.parameters.viscosity(i, j));
        visc.push_back(row);
    }
    doc["parameters"] = {{"n_constituents", c.parameters.n_constituents},
                         {"pressure_coeff", c.parameters.pressure_coeff},
                         {"adiabatic_index", c.parameters.adiabatic_index},
                         {"viscosity", visc}};
    doc["horizon"] = c.parameters.horizon;
    doc["backend"] = to_string(c.backend);
    doc["grid"] = {{"cells", c.cells}, {"modes", c.modes}};
    json init;
    if (!c.initial.preset.empty()) init["preset"] = c.initial.preset;
    else {
        init["densities"] = c.initial.densities;
        init["velocities"] = c.initial.velocities;
    }
    init["perturbation"] = c.initial.perturbation;
    doc["initial_data"] = init;
    doc["solver"] = {{"cfl", c.solver.cfl},
                     {"density_floor", c.solver.density_floor},
                     {"time_integrator", to_string(c.solver.time_integrator)},
                     {"reconstruction", eulerian::to_string(c.solver.reconstruction)},
                     {"picard_tol", c.solver.picard_tol},
                     {"picard_max_iters", c.solver.picard_max_iters},
                     {"quadrature_points", c.solver.quadrature_points},
                     {"dt_override", c.solver.dt_override ? json(*c.solver.dt_override) : json(nullptr)},
                     {"blowup_energy_growth", c.solver.blowup_energy_growth}};
    doc["ledger"] = {{"mass_tol", c.ledger.mass_tol},
                     {"energy_constant", c.ledger.energy_constant},
                     {"w_kappa", c.ledger.w_kappa},
                     {"w_kappa0", c.ledger.w_kappa0},
                     {"unit_length_tol", c.ledger.unit_length_tol},
                     {"lower_bound_fraction", c.ledger.lower_bound_fraction}};
    doc["outputs"] = {{"directory", c.outputs.directory},
                      {"snapshot_interval", c.outputs.snapshot_interval},
                      {"monitor_interval", c.outputs.monitor_interval},
                      {"plots", c.outputs.plots}};
    doc["seed"] = c.seed;
    return doc;
}

inline std::string serialize(const ScenarioConfig& c) { return to_json(c).dump(2) + "\n"; }

inline bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) { return to_json(a) == to_json(b); }

/// Parses and validates a scenario document given as text.
inline ScenarioConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed document: ") + e.what());
    }
    ScenarioConfig c = from_json(doc);
    validate(c);
    return c;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// 64-bit FNV-1a of the canonical serialization.
inline std::uint64_t config_hash(const ScenarioConfig& c) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : to_json(c).dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace mfluid::scenario
