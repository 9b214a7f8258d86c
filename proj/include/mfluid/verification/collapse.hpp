#pragma once

#include <algorithm>
#include <cmath>

#include "mfluid/core/audit.hpp"
#include "mfluid/core/driver.hpp"
#include "mfluid/core/fields.hpp"
#include "mfluid/eulerian/solver.hpp"
#include "mfluid/lagrangian/solver.hpp"

namespace mfluid::verification {

struct CollapseReport {
    Parameters mono;                // collapsed constants
    double density_linf = 0.0;      // max over snapshots of ‖Σρ_i − ρ_mono‖_∞
    double velocity_linf = 0.0;     // max over snapshots of ‖v − u_mono‖_∞
    double constituent_spread = 0.0;  // max ‖u_i − u_j‖_∞: identical data must stay identical
    std::size_t snapshots = 0;
    std::size_t steps_multi = 0;
    std::size_t steps_mono = 0;
};

struct CollapseOptions {
    BackendKind backend = BackendKind::eulerian;
    std::size_t cells = 256;
    double horizon = 0.1;
    double snapshot_interval = 0.01;
    double cfl = 0.9;
};

/// Runs N identical constituents ρ_i = ρ₀/N, u_i = u₀ against the single fluid
/// of symmetric_reduction_check and reports the discrepancy of (ρ, v).
[[nodiscard]] inline CollapseReport symmetric_collapse_test(const Parameters& params, const Profile& rho0,
                                                            const Profile& u0, const CollapseOptions& opt = {}) {
    const auto mono = symmetric_reduction_check(params);
    if (!mono) throw ConfigError("symmetric collapse needs a viscosity matrix with equal row sums");
    if (opt.backend == BackendKind::galerkin) throw ConfigError("symmetric collapse supports the grid backends only");

    const double n = static_cast<double>(params.n_constituents);
    InitialProfiles multi, single;
    for (std::size_t i = 0; i < params.n_constituents; ++i) {
        multi.densities.push_back([rho0, n](double x) { return rho0(x) / n; });
        multi.velocities.push_back(u0);
    }
    single.densities.push_back(rho0);
    single.velocities.push_back(u0);

    RunControl rc;
    rc.horizon = opt.horizon;
    rc.snapshot_interval = opt.snapshot_interval;
    rc.monitor_interval = opt.snapshot_interval;
    rc.monitor_w_norm = false;

    Trajectory a, b;
    if (opt.backend == BackendKind::eulerian) {
        eulerian::EulerianSolverConfig cfg;
        cfg.cfl = opt.cfl;
        const Grid1D g{opt.cells, 1.0, CoordinateKind::eulerian_x};
        a = eulerian::run(sample_state(g, multi.densities, multi.velocities), params, cfg, rc);
        b = eulerian::run(sample_state(g, single.densities, single.velocities), *mono, cfg, rc);
    } else {
        lagrangian::LagrangianSolverConfig cfg;
        cfg.cfl = opt.cfl;
        a = lagrangian::run_lagrangian(lagrangian::lagrangian_from_profiles(multi, opt.cells), params, cfg, rc);
        b = lagrangian::run_lagrangian(lagrangian::lagrangian_from_profiles(single, opt.cells), *mono, cfg, rc);
    }

    CollapseReport rep;
    rep.mono = *mono;
    rep.steps_multi = a.steps;
    rep.steps_mono = b.steps;
    rep.snapshots = std::min(a.states.size(), b.states.size());
    if (a.states.size() != b.states.size()) {
        throw std::logic_error("symmetric collapse: snapshot counts differ");
    }
    for (std::size_t s = 0; s < rep.snapshots; ++s) {
        const Field rho = total_density(a.states[s]);
        const Field v = average_velocity(a.states[s]);
        for (std::size_t k = 0; k < rho.size(); ++k) {
            rep.density_linf = std::max(rep.density_linf, std::abs(rho[k] - b.states[s].densities[0][k]));
            rep.velocity_linf = std::max(rep.velocity_linf, std::abs(v[k] - b.states[s].velocities[0][k]));
            for (const auto& ui : a.states[s].velocities) {
                rep.constituent_spread = std::max(rep.constituent_spread, std::abs(ui[k] - v[k]));
            }
        }
    }
    return rep;
}

}  // namespace mfluid::verification
