#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "mfluid/core/fields.hpp"
#include "mfluid/core/types.hpp"
#include "mfluid/estimates/functionals.hpp"
#include "mfluid/lagrangian/coordinates.hpp"
#include "mfluid/trajectory.hpp"

namespace mfluid::estimates {

/// m_i(t) at every monitor time, one series per constituent.
[[nodiscard]] inline std::vector<std::vector<double>> masses(const Trajectory& traj) {
    std::vector<std::vector<double>> out(traj.n_constituents);
    for (const auto& row : traj.monitors)
        for (std::size_t i = 0; i < traj.n_constituents; ++i) out[i].push_back(row.masses[i]);
    return out;
}

struct EnergyBalance {
    std::vector<double> time;
    std::vector<double> energy;
    std::vector<double> dissipation;
    std::vector<double> residual;  // E(t) − E(0) + ∫_0^t D dτ
};

[[nodiscard]] inline EnergyBalance energy_balance(const Trajectory& traj) {
    EnergyBalance eb;
    if (traj.monitors.empty()) return eb;
    const double e0 = traj.monitors.front().energy;
    for (const auto& row : traj.monitors) {
        eb.time.push_back(row.time);
        eb.energy.push_back(row.energy);
        eb.dissipation.push_back(row.dissipation);
        eb.residual.push_back(row.energy - e0 + row.dissipation_integral);
    }
    eb.residual.front() = 0.0;
    return eb;
}

/// ‖∂_y ln ρ‖_{L2(0,d)} at every snapshot.
[[nodiscard]] inline std::vector<double> log_density_gradient(const Trajectory& traj) {
    std::vector<double> w;
    w.reserve(traj.states.size());
    for (const auto& s : traj.states) w.push_back(log_density_gradient_norm(s));
    return w;
}

struct DensityBounds {
    std::vector<double> time;
    std::vector<double> rho_min;  // total density
    std::vector<double> rho_max;
    std::vector<std::vector<double>> constituent_min;  // [i][snapshot]
    std::vector<std::vector<double>> constituent_max;
    double d = 0.0;
    /// max over snapshots of max(min ρ − d, d − max ρ) in mass coordinates;
    /// ≤ 0 means the sandwich min ρ ≤ d ≤ max ρ holds everywhere.
    double sandwich_violation = 0.0;
};

[[nodiscard]] inline DensityBounds density_bounds(const Trajectory& traj) {
    DensityBounds b;
    b.d = traj.total_mass;
    b.constituent_min.assign(traj.n_constituents, {});
    b.constituent_max.assign(traj.n_constituents, {});
    b.sandwich_violation = -INFINITY;
    for (const auto& s : traj.states) {
        b.time.push_back(s.time);
        const auto ext = density_extrema(s);
        b.rho_min.push_back(ext.min_total);
        b.rho_max.push_back(ext.max_total);
        for (std::size_t i = 0; i < s.constituents(); ++i) {
            const auto [lo, hi] = std::minmax_element(s.densities[i].begin(), s.densities[i].end());
            b.constituent_min[i].push_back(*lo);
            b.constituent_max[i].push_back(*hi);
        }
        const FieldState lag = s.grid.coordinate_kind == CoordinateKind::lagrangian_y ? s : lagrangian::to_lagrangian(s);
        const auto le = density_extrema(lag);
        b.sandwich_violation = std::max({b.sandwich_violation, le.min_total - b.d, b.d - le.max_total});
    }
    return b;
}

/// D(t) ≥ −1e−12·scale at every snapshot.
[[nodiscard]] inline std::vector<bool> dissipation_positivity(const Trajectory& traj, const Parameters& params) {
    std::vector<bool> ok;
    for (const auto& s : traj.states) {
        ok.push_back(dissipation(s, params) >= -1e-12 * std::max(dissipation_scale(s, params), 1e-300));
    }
    return ok;
}

enum class Relation { at_most, at_least };

struct LedgerRecord {
    std::string name;
    std::string mirrors;  // the estimate the check stands in for
    double measured = 0.0;
    double bound = 0.0;
    double tolerance = 0.0;
    Relation relation = Relation::at_most;
    bool applicable = true;
    bool pass = true;
};

struct LedgerOptions {
    double mass_tol = -1.0;        // relative; < 0 picks 1e-12 (Eulerian) or 1e-10
    double energy_constant = 4.0;  // C_E in tol_E = C_E·E(0)·(h² + dt^p)·T
    double density_floor = 1e-10;
    double w_kappa = 3.0;
    double w_kappa0 = 1.0;
    double unit_length_tol = 1e-6;
    double lower_bound_fraction = 0.0;  // ρ_min(t) ≥ fraction·ρ_min(0); 0 disables
};

struct LedgerReport {
    std::string backend;
    std::vector<LedgerRecord> records;
    EnergyBalance energy;
    std::vector<std::vector<double>> mass_series;
    DensityBounds bounds;
    std::vector<double> w_norm;
    std::vector<bool> dissipation_flags;
    double energy_tolerance = 0.0;

    [[nodiscard]] bool all_passed() const {
        return std::all_of(records.begin(), records.end(), [](const LedgerRecord& r) { return r.pass; });
    }
    [[nodiscard]] const LedgerRecord* find(const std::string& name) const {
        for (const auto& r : records)
            if (r.name == name) return &r;
        return nullptr;
    }
};

namespace detail {

inline LedgerRecord make_record(std::string name, std::string mirrors, double measured, double bound, double tol,
                                Relation rel = Relation::at_most) {
    LedgerRecord r{std::move(name), std::move(mirrors), measured, bound, tol, rel, true, true};
    r.pass = rel == Relation::at_most ? measured <= bound + tol : measured >= bound - tol;
    if (!std::isfinite(measured)) r.pass = false;
    return r;
}

inline LedgerRecord skipped(std::string name, std::string mirrors) {
    LedgerRecord r;
    r.name = std::move(name);
    r.mirrors = std::move(mirrors);
    r.applicable = false;
    return r;
}

}  // namespace detail

/// Evaluates every ledger check on a trajectory. Deterministic: the same
/// trajectory always yields the same report.
[[nodiscard]] inline LedgerReport build_ledger(const Trajectory& traj, const Parameters& params,
                                               const LedgerOptions& opt = {}) {
    LedgerReport rep;
    rep.backend = traj.backend;
    rep.energy = energy_balance(traj);
    rep.mass_series = masses(traj);
    rep.bounds = density_bounds(traj);
    rep.w_norm = log_density_gradient(traj);
    rep.dissipation_flags = dissipation_positivity(traj, params);

    // Mass.
    double drift = 0.0;
    for (const auto& series : rep.mass_series)
        for (double m : series) drift = std::max(drift, std::abs(m - series.front()) / std::abs(series.front()));
    const double mass_tol = opt.mass_tol >= 0 ? opt.mass_tol : (traj.backend == "eulerian" ? 1e-12 : 1e-10);
    rep.records.push_back(detail::make_record("mass_conservation", "integrated continuity equations", drift, 0.0, mass_tol));

    // Energy.
    const double horizon = traj.final_time();
    const double h = traj.states.empty() ? 0.0 : traj.states.front().grid.spacing() /
                                                     (traj.coordinate_kind == CoordinateKind::lagrangian_y ? traj.total_mass : 1.0);
    const double e0 = rep.energy.energy.empty() ? 0.0 : std::abs(rep.energy.energy.front());
    // p is the temporal order: 3 for the explicit grid backends, 2 for the
    // implicit midpoint rule of the Galerkin backend.
    const double p = traj.backend == "galerkin" ? 2.0 : 3.0;
    rep.energy_tolerance = opt.energy_constant * e0 * (h * h + std::pow(traj.max_dt, p)) * horizon;
    if (traj.body_forcing) {
        rep.records.push_back(detail::skipped("energy_balance", "first a priori (energy) estimate"));
        rep.records.push_back(detail::skipped("energy_monotone", "first a priori (energy) estimate"));
    } else {
        double worst = 0.0, growth = 0.0;
        for (std::size_t k = 0; k < rep.energy.residual.size(); ++k) {
            worst = std::max(worst, std::abs(rep.energy.residual[k]));
            if (k > 0) growth = std::max(growth, rep.energy.energy[k] - rep.energy.energy[k - 1]);
        }
        rep.records.push_back(detail::make_record("energy_balance", "first a priori (energy) estimate", worst, 0.0,
                                                  rep.energy_tolerance));
        rep.records.push_back(detail::make_record("energy_monotone", "first a priori (energy) estimate", growth, 0.0,
                                                  rep.energy_tolerance));
    }

    // Dissipation sign.
    const auto negative = std::count(rep.dissipation_flags.begin(), rep.dissipation_flags.end(), false);
    rep.records.push_back(detail::make_record("dissipation_positivity", "second law: non-negative viscous dissipation",
                                              static_cast<double>(negative), 0.0, 0.0));

    // Densities.
    double rho_min = INFINITY;
    for (const auto& series : rep.bounds.constituent_min)
        for (double r : series) rho_min = std::min(rho_min, r);
    rep.records.push_back(detail::make_record("density_positivity", "strict positivity of the densities", rho_min,
                                              opt.density_floor, 0.0, Relation::at_least));
    if (opt.lower_bound_fraction > 0.0 && !rep.bounds.rho_min.empty()) {
        const double ratio = *std::min_element(rep.bounds.rho_min.begin(), rep.bounds.rho_min.end()) / rep.bounds.rho_min.front();
        rep.records.push_back(detail::make_record("density_lower_bound", "uniform lower bound on the total density",
                                                  ratio, opt.lower_bound_fraction, 0.0, Relation::at_least));
    }
    rep.records.push_back(detail::make_record("density_sandwich", "mean-value point where the density equals d",
                                              rep.bounds.sandwich_violation, 0.0, 1e-12 * rep.bounds.d));
    if (traj.coordinate_kind == CoordinateKind::lagrangian_y) {
        double defect = 0.0;
        for (const auto& row : traj.monitors) defect = std::max(defect, std::abs(row.unit_length - 1.0));
        rep.records.push_back(detail::make_record("unit_length", "fixed spatial domain in mass coordinates", defect, 0.0,
                                                  opt.unit_length_tol));
    } else {
        rep.records.push_back(detail::skipped("unit_length", "fixed spatial domain in mass coordinates"));
    }

    // ‖∂_y ln ρ‖.
    if (!rep.w_norm.empty()) {
        const double w_max = *std::max_element(rep.w_norm.begin(), rep.w_norm.end());
        rep.records.push_back(detail::make_record("log_density_gradient", "uniform bound on the derivative of ln(rho)",
                                                  w_max, opt.w_kappa * rep.w_norm.front() + opt.w_kappa0, 0.0));
    }
    return rep;
}

[[nodiscard]] inline std::string to_text(const LedgerReport& rep) {
    std::ostringstream os;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.6e", v);
        return std::string(buf);
    };
    os << "# mfluid-ledger/1\n";
    os << "# backend " << rep.backend << "\n";
    os << "# columns: status | check | measured | relation | bound | tolerance | mirrors\n";
    for (const auto& r : rep.records) {
        if (!r.applicable) {
            os << "SKIP | " << r.name << " | - | - | - | - | " << r.mirrors << "\n";
            continue;
        }
        os << (r.pass ? "PASS" : "FAIL") << " | " << r.name << " | " << num(r.measured) << " | "
           << (r.relation == Relation::at_most ? "<=" : ">=") << " | " << num(r.bound) << " | " << num(r.tolerance)
           << " | " << r.mirrors << "\n";
    }
    os << "# overall " << (rep.all_passed() ? "PASS" : "FAIL") << "\n";
    return os.str();
}

}  // namespace mfluid::estimates
