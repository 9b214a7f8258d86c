#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mfluid/core/audit.hpp"
#include "mfluid/core/driver.hpp"
#include "mfluid/core/fields.hpp"
#include "mfluid/core/time_integration.hpp"
#include "mfluid/core/types.hpp"
#include "mfluid/lagrangian/coordinates.hpp"

namespace mfluid::lagrangian {

struct LagrangianSolverConfig {
    double cfl = 0.4;
    double density_floor = 1e-10;
    TimeIntegrator time_integrator = TimeIntegrator::ssp_rk3;
};

inline void validate(const LagrangianSolverConfig& cfg) {
    if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0)) throw ConfigError("cfl must lie in (0, 1]");
    if (!(cfg.density_floor > 0.0)) throw ConfigError("density_floor must be positive");
}

/// (ρ ∂_y u) at the M+1 faces: ρ_{k+1/2}(u_{k+1} − u_k)/h inside, and the
/// half-cell difference against the wall value 0 at the two ends.
inline void viscous_face_flux(std::span<const double> rho, std::span<const double> u, double h,
                              std::span<double> flux) {
    const std::size_t m = u.size();
    flux[0] = 2.0 * rho[0] * u[0] / h;
    for (std::size_t f = 1; f < m; ++f) flux[f] = 0.5 * (rho[f - 1] + rho[f]) * (u[f] - u[f - 1]) / h;
    flux[m] = -2.0 * rho[m - 1] * u[m - 1] / h;
}

/// Mass-coordinate form on (0, d):
///   ∂_t ρ_i = −ρ ρ_i ∂_y v,
///   ∂_t u_i = (ρ/ρ_i)[−K ∂_y ρ^γ + Σ_j μ_ij ∂_y(ρ ∂_y u_j)] + f_i(y, t).
/// The continuity rate of every constituent carries the same factor −ρ ∂_y v,
/// so the concentrations ρ_i/ρ are invariant through every Runge–Kutta stage.
[[nodiscard]] inline FieldRates lagrangian_rhs(const FieldState& s, const Parameters& params) {
    const std::size_t n = s.constituents();
    const std::size_t m = s.cells();
    const double h = s.grid.spacing();

    const Field rho = total_density(s);
    const Field v = average_velocity(s);
    const Field dv = velocity_gradient(v, h);

    Field p(m);
    for (std::size_t k = 0; k < m; ++k) p[k] = std::pow(rho[k], params.adiabatic_index);
    const Field dp = scalar_gradient(p, h);

    std::vector<Field> div(n, Field(m));
    Field flux(m + 1);
    for (std::size_t j = 0; j < n; ++j) {
        viscous_face_flux(rho, s.velocities[j], h, flux);
        for (std::size_t k = 0; k < m; ++k) div[j][k] = (flux[k + 1] - flux[k]) / h;
    }

    FieldRates r = make_rates(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        for (std::size_t k = 0; k < m; ++k) {
            r.densities[i][k] = -rho[k] * s.densities[i][k] * dv[k];
            double visc = 0.0;
            for (std::size_t j = 0; j < n; ++j) visc += params.viscosity(ii, static_cast<Eigen::Index>(j)) * div[j][k];
            double du = rho[k] / s.densities[i][k] * (-params.pressure_coeff * dp[k] + visc);
            if (params.forcing) du += params.forcing(i, s.grid.center(k), s.time);
            r.velocities[i][k] = du;
        }
    }
    return r;
}

class LagrangianSolver {
public:
    using State = FieldState;

    LagrangianSolver(Parameters params, LagrangianSolverConfig cfg)
        : params_(std::move(params)), cfg_(cfg), lambda_max_(lambda_max(params_.viscosity)) {
        validate_parameters(params_);
        validate(cfg_);
    }

    [[nodiscard]] const Parameters& parameters() const { return params_; }

    [[nodiscard]] FieldRates rhs(const FieldState& s) const {
        enforce_density_floor(s, cfg_.density_floor);
        return lagrangian_rhs(s, params_);
    }

    /// dt = cfl · min(h / max(|v|, ε_v), h² min(ρ_i/ρ) / (2 λ_max(M) max ρ)).
    [[nodiscard]] double stable_dt(const FieldState& s) const {
        const double h = s.grid.spacing();
        const Field rho = total_density(s);
        const Field v = average_velocity(s);
        double vmax = 1e-12, rho_max = 0.0, xi_min = 1.0;
        for (std::size_t k = 0; k < s.cells(); ++k) {
            vmax = std::max(vmax, std::abs(v[k]));
            rho_max = std::max(rho_max, rho[k]);
            for (const auto& rho_i : s.densities) xi_min = std::min(xi_min, rho_i[k] / rho[k]);
        }
        const double viscous = h * h * xi_min / (2.0 * lambda_max_ * rho_max);
        return cfg_.cfl * std::min(h / vmax, viscous);
    }

    [[nodiscard]] FieldState step(const FieldState& s, double dt) const {
        return advance(s, dt, cfg_.time_integrator, [this](const FieldState& st) { return rhs(st); });
    }

    [[nodiscard]] const FieldState& snapshot(const FieldState& s) const { return s; }
    [[nodiscard]] double time_of(const FieldState& s) const { return s.time; }

private:
    Parameters params_;
    LagrangianSolverConfig cfg_;
    double lambda_max_;
};

/// Runs the mass-coordinate backend from a Lagrangian initial state.
[[nodiscard]] inline Trajectory run_lagrangian(const FieldState& initial, const Parameters& params,
                                               const LagrangianSolverConfig& cfg, const RunControl& rc) {
    if (initial.grid.coordinate_kind != CoordinateKind::lagrangian_y) {
        throw std::invalid_argument("run_lagrangian: expected a Lagrangian initial state");
    }
    LagrangianSolver solver(params, cfg);
    return drive(initial, solver, params, rc, "lagrangian");
}

}  // namespace mfluid::lagrangian
