#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mfluid/core/driver.hpp"
#include "mfluid/core/types.hpp"
#include "mfluid/eulerian/solver.hpp"
#include "mfluid/galerkin/solver.hpp"
#include "mfluid/lagrangian/solver.hpp"

namespace mfluid::verification {

using std::numbers::pi;

/// Closed-form solution built in mass coordinates on (0, 1), so the
/// continuity equations hold exactly and only momentum sources are needed:
///   1/ρ = 1 + A(t) π cos(πy),  x(y, t) = y + A(t) sin(πy),  v = a(t) sin(πy),
///   ρ_i = ξ_i(y) ρ with ξ_i = (1 + e_i cos(2πy))/N fixed in time,
///   u_i = v + s_i b(t) sin(2πy),
/// where a = a₀ cos(ωt), A = a₀ sin(ωt)/ω, b = b₀ cos(ωt), Σe_i = Σs_i = 0.
/// Then ∂_t(1/ρ) = ∂_y v, the total mass is 1 and x(1, t) = 1.
struct ManufacturedSolution {
    Parameters params;
    double a0 = 0.1;
    double omega = 2.0;
    double b0 = 0.05;
    std::vector<double> e{-0.2, 0.2};
    std::vector<double> s{1.0, -1.0};

    static ManufacturedSolution standard() {
        ManufacturedSolution m;
        m.params.n_constituents = 2;
        m.params.pressure_coeff = 1.0;
        m.params.adiabatic_index = 1.4;
        m.params.viscosity = Matrix(2, 2);
        m.params.viscosity << 0.2, 0.1, 0.1, 0.2;
        return m;
    }

    /// Static equilibrium: a₀ = b₀ = 0 leaves ρ ≡ 1 and u ≡ 0 with zero source.
    static ManufacturedSolution equilibrium() {
        ManufacturedSolution m = standard();
        m.a0 = 0.0;
        m.b0 = 0.0;
        return m;
    }

    [[nodiscard]] std::size_t constituents() const { return e.size(); }
    [[nodiscard]] double big_a(double t) const { return a0 * std::sin(omega * t) / omega; }
    [[nodiscard]] double a(double t) const { return a0 * std::cos(omega * t); }
    [[nodiscard]] double a_dot(double t) const { return -a0 * omega * std::sin(omega * t); }
    [[nodiscard]] double b(double t) const { return b0 * std::cos(omega * t); }
    [[nodiscard]] double b_dot(double t) const { return -b0 * omega * std::sin(omega * t); }

    [[nodiscard]] double xi(std::size_t i, double y) const {
        return (1.0 + e[i] * std::cos(2.0 * pi * y)) / static_cast<double>(constituents());
    }
    [[nodiscard]] double rho_total(double y, double t) const { return 1.0 / (1.0 + big_a(t) * pi * std::cos(pi * y)); }
    [[nodiscard]] double rho(std::size_t i, double y, double t) const { return xi(i, y) * rho_total(y, t); }
    [[nodiscard]] double u(std::size_t i, double y, double t) const {
        return a(t) * std::sin(pi * y) + s[i] * b(t) * std::sin(2.0 * pi * y);
    }

    /// Inverts x = y + A sin(πy) by Newton's method (the map is strictly increasing).
    [[nodiscard]] double y_of_x(double x, double t) const {
        const double big = big_a(t);
        double y = x;
        for (int it = 0; it < 50; ++it) {
            const double g = y + big * std::sin(pi * y) - x;
            const double dy = g / (1.0 + big * pi * std::cos(pi * y));
            y -= dy;
            if (std::abs(dy) < 1e-16) break;
        }
        return y;
    }

    /// f_i = ∂_t u_i|_y + (ρ/ρ_i)[K ∂_y ρ^γ − Σ_j μ_ij ∂_y(ρ ∂_y u_j)].
    [[nodiscard]] double forcing_y(std::size_t i, double y, double t) const {
        const double big = big_a(t);
        const double tau = 1.0 + big * pi * std::cos(pi * y);
        const double r = 1.0 / tau;
        const double r_y = big * pi * pi * std::sin(pi * y) / (tau * tau);
        const double p_y = params.adiabatic_index * std::pow(r, params.adiabatic_index - 1.0) * r_y;
        double visc = 0.0;
        for (std::size_t j = 0; j < constituents(); ++j) {
            const double u_y = a(t) * pi * std::cos(pi * y) + 2.0 * pi * s[j] * b(t) * std::cos(2.0 * pi * y);
            const double u_yy = -a(t) * pi * pi * std::sin(pi * y) - 4.0 * pi * pi * s[j] * b(t) * std::sin(2.0 * pi * y);
            visc += params.viscosity(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * (r_y * u_y + r * u_yy);
        }
        const double du_dt = a_dot(t) * std::sin(pi * y) + s[i] * b_dot(t) * std::sin(2.0 * pi * y);
        return du_dt + (params.pressure_coeff * p_y - visc) / xi(i, y);
    }

    /// The material derivative and both viscous/pressure terms transform
    /// identically, so the Eulerian source is the Lagrangian one at y(x, t).
    [[nodiscard]] double forcing_x(std::size_t i, double x, double t) const { return forcing_y(i, y_of_x(x, t), t); }

    [[nodiscard]] Parameters lagrangian_params() const {
        Parameters p = params;
        if (!is_static()) p.forcing = [m = *this](std::size_t i, double y, double t) { return m.forcing_y(i, y, t); };
        return p;
    }

    [[nodiscard]] Parameters eulerian_params() const {
        Parameters p = params;
        if (!is_static()) p.forcing = [m = *this](std::size_t i, double x, double t) { return m.forcing_x(i, x, t); };
        return p;
    }

    [[nodiscard]] bool is_static() const { return a0 == 0.0 && b0 == 0.0; }

    [[nodiscard]] FieldState exact_eulerian(std::size_t cells, double t) const {
        FieldState st = make_state(Grid1D{cells, 1.0, CoordinateKind::eulerian_x}, constituents(), t);
        for (std::size_t k = 0; k < cells; ++k) {
            const double y = y_of_x(st.grid.center(k), t);
            for (std::size_t i = 0; i < constituents(); ++i) {
                st.densities[i][k] = rho(i, y, t);
                st.velocities[i][k] = u(i, y, t);
            }
        }
        return st;
    }

    [[nodiscard]] FieldState exact_lagrangian(std::size_t cells, double t) const {
        FieldState st = make_state(Grid1D{cells, 1.0, CoordinateKind::lagrangian_y}, constituents(), t);
        for (std::size_t k = 0; k < cells; ++k) {
            const double y = st.grid.center(k);
            for (std::size_t i = 0; i < constituents(); ++i) {
                st.densities[i][k] = rho(i, y, t);
                st.velocities[i][k] = u(i, y, t);
            }
        }
        return st;
    }

    /// Initial profiles in x (at t = 0 the map is the identity).
    [[nodiscard]] InitialProfiles initial_profiles() const {
        InitialProfiles ip;
        for (std::size_t i = 0; i < constituents(); ++i) {
            ip.densities.push_back([m = *this, i](double x) { return m.rho(i, m.y_of_x(x, 0.0), 0.0); });
            ip.velocities.push_back([m = *this, i](double x) { return m.u(i, m.y_of_x(x, 0.0), 0.0); });
        }
        return ip;
    }
};

struct MmsOptions {
    double horizon = 0.1;
    double cfl = 0.9;
};

struct MmsReport {
    BackendKind backend = BackendKind::eulerian;
    std::vector<std::size_t> levels;      // cells, or modes for the Galerkin backend
    std::vector<double> velocity_errors;  // L2 over all constituents at the horizon
    std::vector<double> density_errors;
    std::vector<double> velocity_orders;  // log(e_k/e_{k+1}) / log(n_{k+1}/n_k)
    std::vector<double> density_orders;
    bool exact = false;         // every error at round-off
    bool monotone = true;       // errors strictly decrease along the levels
    bool inconclusive = false;  // non-monotone errors

    [[nodiscard]] double min_velocity_order() const {
        double m = INFINITY;
        for (double o : velocity_orders) m = std::min(m, o);
        return m;
    }
};

namespace detail {

inline std::pair<double, double> l2_errors(const FieldState& got, const FieldState& exact) {
    double eu = 0.0, er = 0.0;
    for (std::size_t i = 0; i < got.constituents(); ++i)
        for (std::size_t k = 0; k < got.cells(); ++k) {
            eu += std::pow(got.velocities[i][k] - exact.velocities[i][k], 2);
            er += std::pow(got.densities[i][k] - exact.densities[i][k], 2);
        }
    const double h = got.grid.spacing();
    return {std::sqrt(eu * h), std::sqrt(er * h)};
}

}  // namespace detail

/// Runs the manufactured problem on every level and reports observed orders.
[[nodiscard]] inline MmsReport mms_convergence(const ManufacturedSolution& sol, BackendKind backend,
                                               const std::vector<std::size_t>& levels, const MmsOptions& opt = {}) {
    if (levels.size() < 2) throw std::invalid_argument("mms_convergence: need at least two levels");
    MmsReport rep;
    rep.backend = backend;
    rep.levels = levels;
    RunControl rc;
    rc.horizon = opt.horizon;
    rc.snapshot_interval = opt.horizon;
    rc.monitor_interval = opt.horizon;
    rc.monitor_w_norm = false;

    for (std::size_t n : levels) {
        std::pair<double, double> err;
        if (backend == BackendKind::eulerian) {
            eulerian::EulerianSolverConfig cfg;
            cfg.cfl = opt.cfl;
            const auto traj = eulerian::run(sol.exact_eulerian(n, 0.0), sol.eulerian_params(), cfg, rc);
            err = detail::l2_errors(traj.states.back(), sol.exact_eulerian(n, opt.horizon));
        } else if (backend == BackendKind::lagrangian) {
            lagrangian::LagrangianSolverConfig cfg;
            cfg.cfl = opt.cfl;
            const auto traj = lagrangian::run_lagrangian(sol.exact_lagrangian(n, 0.0), sol.lagrangian_params(), cfg, rc);
            err = detail::l2_errors(traj.states.back(), sol.exact_lagrangian(n, opt.horizon));
        } else {
            galerkin::GalerkinConfig cfg;
            cfg.mode_count = n;
            const auto traj = galerkin::run_galerkin(sol.initial_profiles(), sol.eulerian_params(), cfg, rc);
            const FieldState& got = traj.states.back();
            err = detail::l2_errors(got, sol.exact_eulerian(got.cells(), opt.horizon));
        }
        rep.velocity_errors.push_back(err.first);
        rep.density_errors.push_back(err.second);
    }

    rep.exact = true;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (rep.velocity_errors[k] > 1e-12 || rep.density_errors[k] > 1e-12) rep.exact = false;
    }
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
        const double ratio = std::log(static_cast<double>(levels[k + 1]) / static_cast<double>(levels[k]));
        rep.velocity_orders.push_back(std::log(rep.velocity_errors[k] / rep.velocity_errors[k + 1]) / ratio);
        rep.density_orders.push_back(std::log(rep.density_errors[k] / rep.density_errors[k + 1]) / ratio);
        if (!(rep.velocity_errors[k + 1] < rep.velocity_errors[k])) rep.monotone = false;
    }
    rep.inconclusive = !rep.exact && !rep.monotone;
    return rep;
}

}  // namespace mfluid::verification
