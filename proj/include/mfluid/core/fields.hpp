#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfluid/core/types.hpp"

namespace mfluid {

/// ρ = Σ_i ρ_i, cell by cell.
[[nodiscard]] inline Field total_density(const FieldState& s) {
    Field rho(s.cells(), 0.0);
    for (const auto& rho_i : s.densities)
        for (std::size_t k = 0; k < rho.size(); ++k) rho[k] += rho_i[k];
    return rho;
}

/// v = (1/N) Σ_i u_i, cell by cell.
[[nodiscard]] inline Field average_velocity(const FieldState& s) {
    Field v(s.cells(), 0.0);
    for (const auto& u_i : s.velocities)
        for (std::size_t k = 0; k < v.size(); ++k) v[k] += u_i[k];
    const double inv_n = 1.0 / static_cast<double>(s.constituents());
    for (double& x : v) x *= inv_n;
    return v;
}

/// p = K ρ^γ. Throws std::domain_error on a non-positive density.
[[nodiscard]] inline Field pressure(std::span<const double> rho, const Parameters& params) {
    Field p(rho.size());
    for (std::size_t k = 0; k < rho.size(); ++k) {
        if (!(rho[k] > 0.0)) {
            throw std::domain_error("pressure: non-positive density " + std::to_string(rho[k]) +
                                    " at cell " + std::to_string(k));
        }
        p[k] = params.pressure_coeff * std::pow(rho[k], params.adiabatic_index);
    }
    return p;
}

/// ξ_i = ρ_i / ρ.
[[nodiscard]] inline std::vector<Field> concentrations(const FieldState& s) {
    const Field rho = total_density(s);
    std::vector<Field> xi(s.constituents(), Field(s.cells()));
    for (std::size_t i = 0; i < s.constituents(); ++i)
        for (std::size_t k = 0; k < s.cells(); ++k) xi[i][k] = s.densities[i][k] / rho[k];
    return xi;
}

/// Derivative of a velocity field whose wall values are exactly zero.
/// Central differences in the interior; at the two boundary cells a one-sided
/// second-order stencil through the wall node (distance h/2) and the two
/// nearest cell centres.
inline void velocity_gradient(std::span<const double> u, double h, std::span<double> out) {
    const std::size_t m = u.size();
    if (m < 2) throw std::invalid_argument("velocity_gradient: need at least 2 cells");
    const double inv_2h = 0.5 / h;
    for (std::size_t k = 1; k + 1 < m; ++k) out[k] = (u[k + 1] - u[k - 1]) * inv_2h;
    out[0] = (u[0] + u[1] / 3.0) / h;
    out[m - 1] = -(u[m - 1] + u[m - 2] / 3.0) / h;
}

[[nodiscard]] inline Field velocity_gradient(std::span<const double> u, double h) {
    Field g(u.size());
    velocity_gradient(u, h, g);
    return g;
}

/// Derivative of a field with no boundary condition (density, pressure):
/// central in the interior, three-point one-sided at the boundary cells.
inline void scalar_gradient(std::span<const double> f, double h, std::span<double> out) {
    const std::size_t m = f.size();
    if (m < 3) throw std::invalid_argument("scalar_gradient: need at least 3 cells");
    const double inv_2h = 0.5 / h;
    for (std::size_t k = 1; k + 1 < m; ++k) out[k] = (f[k + 1] - f[k - 1]) * inv_2h;
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv_2h;
    out[m - 1] = (3.0 * f[m - 1] - 4.0 * f[m - 2] + f[m - 3]) * inv_2h;
}

[[nodiscard]] inline Field scalar_gradient(std::span<const double> f, double h) {
    Field g(f.size());
    scalar_gradient(f, h, g);
    return g;
}

/// Spatial derivatives ∂_x u_i of every velocity. For Lagrangian states the
/// mass-coordinate derivative is converted with ∂_x = ρ ∂_y.
[[nodiscard]] inline std::vector<Field> velocity_gradients_x(const FieldState& s) {
    const double h = s.grid.spacing();
    std::vector<Field> g(s.constituents());
    for (std::size_t i = 0; i < s.constituents(); ++i) g[i] = velocity_gradient(s.velocities[i], h);
    if (s.grid.coordinate_kind == CoordinateKind::lagrangian_y) {
        const Field rho = total_density(s);
        for (auto& gi : g)
            for (std::size_t k = 0; k < gi.size(); ++k) gi[k] *= rho[k];
    }
    return g;
}

/// q = Σ_ij μ_ij ∂_x u_i ∂_x u_j per unit length in x.
[[nodiscard]] inline Field dissipation_density(const FieldState& s, const Parameters& params) {
    const auto g = velocity_gradients_x(s);
    const Matrix& mu = params.viscosity;
    const std::size_t n = s.constituents();
    Field q(s.cells(), 0.0);
    for (std::size_t k = 0; k < s.cells(); ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                acc += mu(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * g[i][k] * g[j][k];
        q[k] = acc;
    }
    return q;
}

/// Throws PositivityError when a density is at or below `floor`, BlowUpError
/// when it is not finite.
inline void enforce_density_floor(const FieldState& s, double floor) {
    for (std::size_t i = 0; i < s.constituents(); ++i) {
        for (std::size_t k = 0; k < s.cells(); ++k) {
            const double r = s.densities[i][k];
            if (r > floor) continue;
            if (!std::isfinite(r)) throw BlowUpError("non-finite density", s.time);
            throw PositivityError("density of constituent " + std::to_string(i + 1) + " fell to " +
                                      std::to_string(r) + " at " +
                                      (s.grid.coordinate_kind == CoordinateKind::eulerian_x ? "x = " : "y = ") +
                                      std::to_string(s.grid.center(k)),
                                  s.time);
        }
    }
}

}  // namespace mfluid
