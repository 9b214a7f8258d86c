#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mfluid/core/fields.hpp"
#include "mfluid/core/numerics.hpp"
#include "mfluid/core/types.hpp"
#include "mfluid/lagrangian/coordinates.hpp"
#include "mfluid/trajectory.hpp"

// Integral functionals of a single state. Every integral is taken over the
// physical domain with the same wall-closed trapezoid rule; Lagrangian states
// use dx = dy/ρ so that both coordinate systems report the same quantity.

namespace mfluid::estimates {

/// ∫_0^1 g dx for a per-unit-x density g sampled at the cell centres of `s`.
[[nodiscard]] inline double integrate_x(const FieldState& s, std::span<const double> g) {
    const double h = s.grid.spacing();
    if (s.grid.coordinate_kind == CoordinateKind::eulerian_x) return trapezoid(g, h);
    const Field rho = total_density(s);
    Field gy(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) gy[k] = g[k] / rho[k];
    return trapezoid(gy, h);
}

/// m_i = ∫ ρ_i dx (= ∫ ρ_i/ρ dy in mass coordinates).
[[nodiscard]] inline std::vector<double> state_masses(const FieldState& s) {
    std::vector<double> m(s.constituents());
    for (std::size_t i = 0; i < s.constituents(); ++i) m[i] = integrate_x(s, s.densities[i]);
    return m;
}

/// E = Σ_i ∫ ρ_i u_i²/2 dx + (N K/(γ−1)) ∫ ρ^γ dx.
/// The elastic weight N K/(γ−1): each of the N momentum equations carries the
/// full K ∂_x ρ^γ, so the summed pressure work is N K ∫ v ∂_x ρ^γ with
/// v = (1/N) Σ u_i, and d/dt ∫ ρ^γ/(γ−1) = −∫ ρ^γ ∂_x v by continuity.
[[nodiscard]] inline double energy(const FieldState& s, const Parameters& p) {
    const Field rho = total_density(s);
    const double elastic = static_cast<double>(s.constituents()) * p.pressure_coeff / (p.adiabatic_index - 1.0);
    Field g(s.cells());
    for (std::size_t k = 0; k < s.cells(); ++k) {
        double kinetic = 0.0;
        for (std::size_t i = 0; i < s.constituents(); ++i) {
            kinetic += 0.5 * s.densities[i][k] * s.velocities[i][k] * s.velocities[i][k];
        }
        g[k] = kinetic + elastic * std::pow(rho[k], p.adiabatic_index);
    }
    return integrate_x(s, g);
}

/// D = ∫ Σ_ij μ_ij ∂_x u_i ∂_x u_j dx.
[[nodiscard]] inline double dissipation(const FieldState& s, const Parameters& p) {
    const Field q = dissipation_density(s, p);
    return integrate_x(s, q);
}

/// Scale for the round-off guard on D: ‖M‖_∞ · max_k Σ_i (∂_x u_i)².
[[nodiscard]] inline double dissipation_scale(const FieldState& s, const Parameters& p) {
    const auto g = velocity_gradients_x(s);
    double gmax = 0.0;
    for (std::size_t k = 0; k < s.cells(); ++k) {
        double acc = 0.0;
        for (const auto& gi : g) acc += gi[k] * gi[k];
        gmax = std::max(gmax, acc);
    }
    return p.viscosity.cwiseAbs().rowwise().sum().maxCoeff() * gmax;
}

/// ‖∂_y ln ρ‖_{L2(0,d)} of a Lagrangian state (central differences, one-sided
/// at the boundary cells). Eulerian states are mapped to mass coordinates first.
[[nodiscard]] inline double log_density_gradient_norm(const FieldState& s) {
    if (s.grid.coordinate_kind == CoordinateKind::eulerian_x) {
        return log_density_gradient_norm(lagrangian::to_lagrangian(s));
    }
    const Field rho = total_density(s);
    Field ln_rho(rho.size());
    for (std::size_t k = 0; k < rho.size(); ++k) {
        if (!(rho[k] > 0.0)) throw PositivityError("log_density_gradient: non-positive density", s.time);
        ln_rho[k] = std::log(rho[k]);
    }
    const Field w = scalar_gradient(ln_rho, s.grid.spacing());
    double acc = 0.0;
    for (double v : w) acc += v * v;
    return std::sqrt(acc * s.grid.spacing());
}

struct DensityExtrema {
    double min_constituent = 0.0;
    double max_constituent = 0.0;
    double min_total = 0.0;
    double max_total = 0.0;
};

[[nodiscard]] inline DensityExtrema density_extrema(const FieldState& s) {
    DensityExtrema e;
    e.min_constituent = std::numeric_limits<double>::infinity();
    e.max_constituent = -std::numeric_limits<double>::infinity();
    for (const auto& rho_i : s.densities) {
        const auto [lo, hi] = std::minmax_element(rho_i.begin(), rho_i.end());
        e.min_constituent = std::min(e.min_constituent, *lo);
        e.max_constituent = std::max(e.max_constituent, *hi);
    }
    const Field rho = total_density(s);
    const auto [lo, hi] = std::minmax_element(rho.begin(), rho.end());
    e.min_total = *lo;
    e.max_total = *hi;
    return e;
}

/// Builds a monitor row; `w_norm` is optional because it needs a remap for Eulerian states.
[[nodiscard]] inline MonitorRow monitor_row(const FieldState& s, const Parameters& p, double dissipation_integral,
                                            bool with_w_norm = true) {
    MonitorRow row;
    row.time = s.time;
    row.energy = energy(s, p);
    row.dissipation = dissipation(s, p);
    row.dissipation_integral = dissipation_integral;
    row.masses = state_masses(s);
    const auto ext = density_extrema(s);
    row.rho_min = ext.min_constituent;
    row.rho_max = ext.max_constituent;
    row.w_norm = with_w_norm ? log_density_gradient_norm(s) : 0.0;
    row.unit_length = s.grid.coordinate_kind == CoordinateKind::lagrangian_y ? lagrangian::unit_length(s) : 1.0;
    return row;
}

}  // namespace mfluid::estimates
