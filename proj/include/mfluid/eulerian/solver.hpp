#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mfluid/core/audit.hpp"
#include "mfluid/core/driver.hpp"
#include "mfluid/core/fields.hpp"
#include "mfluid/core/time_integration.hpp"
#include "mfluid/core/types.hpp"

namespace mfluid::eulerian {

/// Face-density reconstruction for the continuity flux.
enum class Reconstruction {
    upwind,         // first-order donor cell
    upwind_linear,  // upwind-biased linear reconstruction with central slopes
};

inline const char* to_string(Reconstruction r) { return r == Reconstruction::upwind ? "upwind" : "upwind_linear"; }

struct EulerianSolverConfig {
    double cfl = 0.4;
    double density_floor = 1e-10;
    TimeIntegrator time_integrator = TimeIntegrator::ssp_rk3;
    Reconstruction reconstruction = Reconstruction::upwind_linear;
    double snapshot_interval = 0.01;
};

inline void validate(const EulerianSolverConfig& cfg) {
    if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0)) throw ConfigError("cfl must lie in (0, 1]");
    if (!(cfg.density_floor > 0.0)) throw ConfigError("density_floor must be positive");
    if (!(cfg.snapshot_interval > 0.0)) throw ConfigError("snapshot_interval must be positive");
}

/// dρ/dt = −(F_{k+1/2} − F_{k−1/2})/h for F = ρ_face · v_face, with
/// `face_velocity` given at the M+1 faces. Wall fluxes are zero whatever the
/// wall entries of `face_velocity` hold, so Σ_k h dρ_k/dt = 0 exactly.
inline void continuity_rates(std::span<const double> rho, std::span<const double> face_velocity, double h,
                             Reconstruction recon, std::span<double> out) {
    const std::size_t m = rho.size();
    auto slope = [&](std::size_t k) {
        if (k == 0) return (rho[1] - rho[0]) / h;
        if (k + 1 == m) return (rho[m - 1] - rho[m - 2]) / h;
        return 0.5 * (rho[k + 1] - rho[k - 1]) / h;
    };
    double flux_left = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        double flux_right = 0.0;
        if (k + 1 < m) {
            const double vf = face_velocity[k + 1];
            double rho_face;
            if (recon == Reconstruction::upwind) {
                rho_face = vf >= 0.0 ? rho[k] : rho[k + 1];
            } else {
                rho_face = vf >= 0.0 ? rho[k] + 0.5 * h * slope(k) : rho[k + 1] - 0.5 * h * slope(k + 1);
            }
            flux_right = rho_face * vf;
        }
        out[k] = -(flux_right - flux_left) / h;
        flux_left = flux_right;
    }
}

/// Method-of-lines discretisation of
///   ∂_t ρ_i + ∂_x(ρ_i v) = 0,
///   ρ_i(∂_t u_i + v ∂_x u_i) + K ∂_x ρ^γ = Σ_j μ_ij ∂_xx u_j + ρ_i f_i,
/// on (0, 1) with u_i = 0 at both walls.
class EulerianSolver {
public:
    using State = FieldState;

    EulerianSolver(Parameters params, EulerianSolverConfig cfg)
        : params_(std::move(params)), cfg_(cfg), lambda_max_(lambda_max(params_.viscosity)) {
        validate_parameters(params_);
        validate(cfg_);
    }

    [[nodiscard]] const Parameters& parameters() const { return params_; }
    [[nodiscard]] const EulerianSolverConfig& config() const { return cfg_; }

    [[nodiscard]] FieldRates rhs(const FieldState& s) const {
        const std::size_t n = s.constituents();
        const std::size_t m = s.cells();
        const double h = s.grid.spacing();
        const double inv_h2 = 1.0 / (h * h);
        check_floor(s);

        const Field rho = total_density(s);
        const Field v = average_velocity(s);
        Field vf(m + 1, 0.0);
        for (std::size_t k = 0; k + 1 < m; ++k) vf[k + 1] = 0.5 * (v[k] + v[k + 1]);

        Field p(m);
        for (std::size_t k = 0; k < m; ++k) p[k] = std::pow(rho[k], params_.adiabatic_index);
        const Field dp = scalar_gradient(p, h);

        // Three-point Laplacians with the reflected ghost u_{-1} = −u_0.
        std::vector<Field> lap(n, Field(m));
        for (std::size_t j = 0; j < n; ++j) {
            const Field& u = s.velocities[j];
            for (std::size_t k = 0; k < m; ++k) {
                const double left = k == 0 ? -u[0] : u[k - 1];
                const double right = k + 1 == m ? -u[m - 1] : u[k + 1];
                lap[j][k] = (right - 2.0 * u[k] + left) * inv_h2;
            }
        }

        FieldRates r = make_rates(n, m);
        Field grad(m);
        for (std::size_t i = 0; i < n; ++i) {
            continuity_rates(s.densities[i], vf, h, cfg_.reconstruction, r.densities[i]);
            velocity_gradient(s.velocities[i], h, grad);
            const auto ii = static_cast<Eigen::Index>(i);
            for (std::size_t k = 0; k < m; ++k) {
                double visc = 0.0;
                for (std::size_t j = 0; j < n; ++j) visc += params_.viscosity(ii, static_cast<Eigen::Index>(j)) * lap[j][k];
                const double inv_rho_i = 1.0 / s.densities[i][k];
                double du = -v[k] * grad[k] + inv_rho_i * (visc - params_.pressure_coeff * dp[k]);
                if (params_.forcing) du += params_.forcing(i, s.grid.center(k), s.time);
                r.velocities[i][k] = du;
            }
        }
        return r;
    }

    /// dt = cfl · min(h / max(|v|, ε_v), h² min ρ_i / (2 λ_max(M))).
    [[nodiscard]] double stable_dt(const FieldState& s) const {
        const double h = s.grid.spacing();
        const Field v = average_velocity(s);
        double vmax = 1e-12;
        for (double x : v) vmax = std::max(vmax, std::abs(x));
        const double viscous = h * h * min_density(s) / (2.0 * lambda_max_);
        return cfg_.cfl * std::min(h / vmax, viscous);
    }

    [[nodiscard]] FieldState step(const FieldState& s, double dt) const {
        FieldState next = advance(s, dt, cfg_.time_integrator, [this](const FieldState& st) { return rhs(st); });
        return next;
    }

    [[nodiscard]] const FieldState& snapshot(const FieldState& s) const { return s; }
    [[nodiscard]] double time_of(const FieldState& s) const { return s.time; }

private:
    void check_floor(const FieldState& s) const { enforce_density_floor(s, cfg_.density_floor); }

    Parameters params_;
    EulerianSolverConfig cfg_;
    double lambda_max_;
};

/// Runs the Eulerian backend from a sampled initial state.
[[nodiscard]] inline Trajectory run(const FieldState& initial, const Parameters& params,
                                    const EulerianSolverConfig& cfg, const RunControl& rc) {
    EulerianSolver solver(params, cfg);
    return drive(initial, solver, params, rc, "eulerian");
}

}  // namespace mfluid::eulerian
