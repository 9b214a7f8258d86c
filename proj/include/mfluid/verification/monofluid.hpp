#pragma once

#include <cmath>
#include <numbers>

#include "mfluid/core/driver.hpp"
#include "mfluid/core/fields.hpp"
#include "mfluid/core/time_integration.hpp"
#include "mfluid/core/types.hpp"
#include "mfluid/lagrangian/solver.hpp"

// Single-fluid reference in mass coordinates,
//   ∂_t ρ + ρ² ∂_y v = 0,   ∂_t v + K ∂_y ρ^γ = μ ∂_y(ρ ∂_y v),
// written out for one scalar field with no constituent loops.

namespace mfluid::verification {

[[nodiscard]] inline FieldRates monofluid_rhs(const FieldState& s, const Parameters& params) {
    if (s.constituents() != 1) throw std::invalid_argument("monofluid_rhs: expected a single-constituent state");
    const std::size_t m = s.cells();
    const double h = s.grid.spacing();
    const double mu = params.viscosity(0, 0);
    const double k = params.pressure_coeff;
    const Field& rho = s.densities[0];
    const Field& v = s.velocities[0];

    Field dv(m), p(m), dp(m);
    velocity_gradient(v, h, dv);
    for (std::size_t j = 0; j < m; ++j) p[j] = std::pow(rho[j], params.adiabatic_index);
    scalar_gradient(p, h, dp);

    Field flux(m + 1);
    flux[0] = 2.0 * rho[0] * v[0] / h;
    for (std::size_t f = 1; f < m; ++f) flux[f] = 0.5 * (rho[f - 1] + rho[f]) * (v[f] - v[f - 1]) / h;
    flux[m] = -2.0 * rho[m - 1] * v[m - 1] / h;

    FieldRates r = make_rates(1, m);
    for (std::size_t j = 0; j < m; ++j) {
        r.densities[0][j] = -rho[j] * rho[j] * dv[j];
        double dvdt = -k * dp[j] + mu * ((flux[j + 1] - flux[j]) / h);
        if (params.forcing) dvdt += params.forcing(0, s.grid.center(j), s.time);
        r.velocities[0][j] = dvdt;
    }
    return r;
}

class MonofluidSolver {
public:
    using State = FieldState;

    MonofluidSolver(Parameters params, lagrangian::LagrangianSolverConfig cfg) : params_(std::move(params)), cfg_(cfg) {
        validate_parameters(params_);
        lagrangian::validate(cfg_);
        if (params_.n_constituents != 1) throw ConfigError("mono-fluid reference needs n_constituents = 1");
    }

    [[nodiscard]] FieldRates rhs(const FieldState& s) const {
        enforce_density_floor(s, cfg_.density_floor);
        return monofluid_rhs(s, params_);
    }

    /// Same bound as the multi-fluid Lagrangian solver with ρ_i/ρ = 1.
    [[nodiscard]] double stable_dt(const FieldState& s) const {
        const double h = s.grid.spacing();
        double vmax = 1e-12, rho_max = 0.0;
        for (std::size_t j = 0; j < s.cells(); ++j) {
            vmax = std::max(vmax, std::abs(s.velocities[0][j]));
            rho_max = std::max(rho_max, s.densities[0][j]);
        }
        const double viscous = h * h * 1.0 / (2.0 * params_.viscosity(0, 0) * rho_max);
        return cfg_.cfl * std::min(h / vmax, viscous);
    }

    [[nodiscard]] FieldState step(const FieldState& s, double dt) const {
        return advance(s, dt, cfg_.time_integrator, [this](const FieldState& st) { return rhs(st); });
    }

    [[nodiscard]] const FieldState& snapshot(const FieldState& s) const { return s; }
    [[nodiscard]] double time_of(const FieldState& s) const { return s.time; }

private:
    Parameters params_;
    lagrangian::LagrangianSolverConfig cfg_;
};

[[nodiscard]] inline Trajectory run_monofluid(const FieldState& initial, const Parameters& params,
                                              const lagrangian::LagrangianSolverConfig& cfg, const RunControl& rc) {
    MonofluidSolver solver(params, cfg);
    return drive(initial, solver, params, rc, "monofluid");
}

struct HeatModeReport {
    double measured_rate = 0.0;  // −d ln E/dt of E = ∫ v²/2 dy
    double expected_rate = 0.0;  // 2 μ (π/d)²
    double relative_error = 0.0;
};

/// Decay of v = sin(πy/d) under the mono-fluid momentum equation with ρ ≡ 1
/// held fixed (continuity switched off, so the pressure gradient vanishes and
/// the equation reduces to ∂_t v = μ ∂_yy v). Measured over one e-folding time
/// of the kinetic energy.
[[nodiscard]] inline HeatModeReport pinned_density_heat_mode(double mu, double d, std::size_t cells,
                                                             double cfl = 0.4) {
    using std::numbers::pi;
    Parameters p;
    p.viscosity = Matrix::Constant(1, 1, mu);
    FieldState s = make_state(Grid1D{cells, d, CoordinateKind::lagrangian_y}, 1);
    for (std::size_t j = 0; j < cells; ++j) {
        s.densities[0][j] = 1.0;
        s.velocities[0][j] = std::sin(pi * s.grid.center(j) / d);
    }
    auto kinetic = [](const FieldState& st) {
        double e = 0.0;
        for (double v : st.velocities[0]) e += 0.5 * v * v;
        return e * st.grid.spacing();
    };
    auto pinned = [&](const FieldState& st) {
        FieldRates r = monofluid_rhs(st, p);
        std::fill(r.densities[0].begin(), r.densities[0].end(), 0.0);
        return r;
    };

    HeatModeReport rep;
    rep.expected_rate = 2.0 * mu * (pi / d) * (pi / d);
    const double horizon = 1.0 / rep.expected_rate;
    const double h = s.grid.spacing();
    const double dt_max = cfl * h * h / (2.0 * mu);
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt_max));
    const double dt = horizon / static_cast<double>(steps);
    const double e0 = kinetic(s);
    for (std::size_t n = 0; n < steps; ++n) s = advance(s, dt, TimeIntegrator::ssp_rk3, pinned);
    rep.measured_rate = -std::log(kinetic(s) / e0) / horizon;
    rep.relative_error = std::abs(rep.measured_rate - rep.expected_rate) / rep.expected_rate;
    return rep;
}

}  // namespace mfluid::verification
