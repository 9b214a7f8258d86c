#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mfluid/core/audit.hpp"
#include "mfluid/core/fields.hpp"
#include "mfluid/core/numerics.hpp"
#include "mfluid/core/time_integration.hpp"
#include "mfluid/lagrangian/coordinates.hpp"
#include "mfluid/lagrangian/solver.hpp"

// Exploratory experiment: mass coordinates attached to one constituent m,
// z = ∫_0^x ρ_m ds, for the full model in which each constituent is carried by
// its own velocity. With the momentum supply dropped the system reads
//   ∂_t ρ_i + ρ_m (u_i − u_m) ∂_z ρ_i + ρ_i ρ_m ∂_z u_i = 0,
//   (ρ_i/ρ_m) ∂_t u_i + ρ_i (u_i − u_m) ∂_z u_i + K ∂_z ρ^γ = Σ_j μ_ij ∂_z(ρ_m ∂_z u_j).
// The cross-advection terms ρ_m (u_i − u_m) ∂_z ρ_i vanish only while the
// velocities agree; nothing here is a pass/fail check.

namespace mfluid::verification {

struct OneConstituentRun {
    bool diagonal = false;
    bool completed = false;
    std::string failure;
    double final_time = 0.0;
    std::size_t steps = 0;
    double initial_cross_advection = 0.0;
    double max_cross_advection = 0.0;  // max_t max_i ‖ρ_m (u_i − u_m) ∂_z ρ_i‖_{L2}
    double max_velocity_spread = 0.0;  // max_t max_i ‖u_i − u_m‖_∞
    double min_density = 0.0;
    double max_speed = 0.0;
};

struct OneConstituentReport {
    std::size_t anchor = 0;  // m, zero-based
    OneConstituentRun diagonal_case;
    OneConstituentRun full_case;
};

struct OneConstituentOptions {
    std::size_t anchor = 0;
    std::size_t cells = 128;
    double horizon = 0.05;
    double cfl = 0.4;
    double density_floor = 1e-10;
};

namespace detail {

inline FieldRates one_constituent_rhs(const FieldState& s, const Parameters& p, std::size_t m) {
    const std::size_t n = s.constituents();
    const std::size_t cells = s.cells();
    const double h = s.grid.spacing();
    const Field& rho_m = s.densities[m];
    const Field& u_m = s.velocities[m];

    const Field rho = total_density(s);
    Field pg(cells);
    for (std::size_t k = 0; k < cells; ++k) pg[k] = std::pow(rho[k], p.adiabatic_index);
    const Field dp = scalar_gradient(pg, h);

    std::vector<Field> div(n, Field(cells));
    Field flux(cells + 1);
    for (std::size_t j = 0; j < n; ++j) {
        lagrangian::viscous_face_flux(rho_m, s.velocities[j], h, flux);
        for (std::size_t k = 0; k < cells; ++k) div[j][k] = (flux[k + 1] - flux[k]) / h;
    }

    FieldRates r = make_rates(n, cells);
    for (std::size_t i = 0; i < n; ++i) {
        const Field drho = scalar_gradient(s.densities[i], h);
        const Field du = velocity_gradient(s.velocities[i], h);
        for (std::size_t k = 0; k < cells; ++k) {
            const double rel = s.velocities[i][k] - u_m[k];
            const double rho_i = s.densities[i][k];
            r.densities[i][k] = -rho_m[k] * rel * drho[k] - rho_i * rho_m[k] * du[k];
            double visc = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                visc += p.viscosity(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * div[j][k];
            }
            r.velocities[i][k] = rho_m[k] / rho_i * (-rho_i * rel * du[k] - p.pressure_coeff * dp[k] + visc);
        }
    }
    return r;
}

inline double cross_advection(const FieldState& s, std::size_t m) {
    const double h = s.grid.spacing();
    double worst = 0.0;
    for (std::size_t i = 0; i < s.constituents(); ++i) {
        const Field drho = scalar_gradient(s.densities[i], h);
        double acc = 0.0;
        for (std::size_t k = 0; k < s.cells(); ++k) {
            const double term = s.densities[m][k] * (s.velocities[i][k] - s.velocities[m][k]) * drho[k];
            acc += term * term;
        }
        worst = std::max(worst, std::sqrt(acc * h));
    }
    return worst;
}

/// Initial state on the anchor's mass grid: fields point-sampled at x(z_k).
inline FieldState anchored_state(const InitialProfiles& prof, std::size_t m, std::size_t cells) {
    const std::size_t fine = 16 * cells;
    std::vector<double> xf(fine + 1);
    for (std::size_t j = 0; j <= fine; ++j) xf[j] = static_cast<double>(j) / static_cast<double>(fine);
    const auto zf = cumulative_simpson(prof.densities[m], xf);
    const MonotoneCubic x_of_z(zf, xf);
    FieldState s = make_state(Grid1D{cells, zf.back(), CoordinateKind::lagrangian_y}, prof.densities.size());
    for (std::size_t k = 0; k < cells; ++k) {
        const double x = x_of_z(s.grid.center(k));
        for (std::size_t i = 0; i < prof.densities.size(); ++i) {
            s.densities[i][k] = prof.densities[i](x);
            s.velocities[i][k] = prof.velocities[i](x);
        }
    }
    return s;
}

inline OneConstituentRun run_anchored(const Parameters& p, const InitialProfiles& prof, const OneConstituentOptions& opt) {
    OneConstituentRun run;
    run.diagonal = p.viscosity.isDiagonal(0.0);
    const std::size_t m = opt.anchor;
    FieldState s = anchored_state(prof, m, opt.cells);
    const double lam = lambda_max(p.viscosity);
    run.initial_cross_advection = cross_advection(s, m);
    run.max_cross_advection = run.initial_cross_advection;
    run.min_density = min_density(s);

    auto rhs = [&](const FieldState& st) {
        enforce_density_floor(st, opt.density_floor);
        return one_constituent_rhs(st, p, m);
    };
    try {
        while (s.time < opt.horizon - 1e-14) {
            const double h = s.grid.spacing();
            double rel = 1e-12, rho_m_max = 0.0, rho_min = INFINITY;
            for (std::size_t k = 0; k < s.cells(); ++k) {
                rho_m_max = std::max(rho_m_max, s.densities[m][k]);
                for (std::size_t i = 0; i < s.constituents(); ++i) {
                    rel = std::max(rel, std::abs(s.densities[m][k] * (s.velocities[i][k] - s.velocities[m][k])));
                    rho_min = std::min(rho_min, s.densities[i][k]);
                }
            }
            double dt = opt.cfl * std::min(h / rel, h * h * rho_min / (2.0 * lam * rho_m_max * rho_m_max));
            dt = std::min(dt, opt.horizon - s.time);
            s = advance(s, dt, TimeIntegrator::ssp_rk3, rhs);
            ++run.steps;
            if (!all_finite(s)) throw BlowUpError("non-finite field values", s.time);
            run.max_cross_advection = std::max(run.max_cross_advection, cross_advection(s, m));
            run.min_density = std::min(run.min_density, min_density(s));
            for (std::size_t i = 0; i < s.constituents(); ++i)
                for (std::size_t k = 0; k < s.cells(); ++k) {
                    run.max_velocity_spread =
                        std::max(run.max_velocity_spread, std::abs(s.velocities[i][k] - s.velocities[m][k]));
                    run.max_speed = std::max(run.max_speed, std::abs(s.velocities[i][k]));
                }
        }
        run.completed = true;
    } catch (const SimulationError& e) {
        run.failure = e.what();
    }
    run.final_time = s.time;
    return run;
}

}  // namespace detail

/// Runs the anchored system twice: once with the diagonal part of M, once
/// with M itself. Instability is an outcome, not an error.
[[nodiscard]] inline OneConstituentReport one_constituent_lagrangian_demo(const Parameters& params,
                                                                          const InitialProfiles& prof,
                                                                          const OneConstituentOptions& opt = {}) {
    if (params.n_constituents < 2 || prof.densities.size() != params.n_constituents) {
        throw ConfigError("one-constituent demo needs at least two constituents");
    }
    if (opt.anchor >= params.n_constituents) throw ConfigError("anchor constituent out of range");
    validate_parameters(params);
    OneConstituentReport rep;
    rep.anchor = opt.anchor;
    Parameters diag = params;
    diag.viscosity = Matrix(params.viscosity.diagonal().asDiagonal());
    rep.diagonal_case = detail::run_anchored(diag, prof, opt);
    rep.full_case = detail::run_anchored(params, prof, opt);
    return rep;
}

}  // namespace mfluid::verification
