#pragma once

#include <filesystem>
#include <string>

#include "mfluid/core/driver.hpp"
#include "mfluid/estimates/ledger.hpp"
#include "mfluid/eulerian/solver.hpp"
#include "mfluid/galerkin/solver.hpp"
#include "mfluid/io/trajectory_io.hpp"
#include "mfluid/lagrangian/solver.hpp"
#include "mfluid/scenario/config.hpp"

namespace mfluid::scenario {

enum ExitCode : int {
    exit_ok = 0,
    exit_ledger_failure = 1,
    exit_config = 2,
    exit_positivity = 3,
    exit_blow_up = 4,
    exit_iteration = 5,
    exit_io = 6,
};

inline int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config: return exit_config;
        case ErrorKind::positivity: return exit_positivity;
        case ErrorKind::blow_up: return exit_blow_up;
        case ErrorKind::iteration: return exit_iteration;
        case ErrorKind::io: return exit_io;
    }
    return exit_ledger_failure;
}

inline RunControl run_control(const ScenarioConfig& c) {
    RunControl rc;
    rc.horizon = c.parameters.horizon;
    rc.snapshot_interval = c.outputs.snapshot_interval;
    rc.monitor_interval = c.outputs.monitor_interval > 0 ? c.outputs.monitor_interval : c.outputs.snapshot_interval;
    rc.dt_override = c.solver.dt_override;
    rc.blowup_energy_growth = c.solver.blowup_energy_growth;
    return rc;
}

/// Integrates a validated config on its backend. Solver failures propagate
/// as SimulationError.
[[nodiscard]] inline Trajectory simulate(const ScenarioConfig& c) {
    const InitialProfiles ip = profiles(c);
    const RunControl rc = run_control(c);
    switch (c.backend) {
        case BackendKind::eulerian: {
            eulerian::EulerianSolverConfig cfg;
            cfg.cfl = c.solver.cfl;
            cfg.density_floor = c.solver.density_floor;
            cfg.time_integrator = c.solver.time_integrator;
            cfg.reconstruction = c.solver.reconstruction;
            const Grid1D g{c.cells, 1.0, CoordinateKind::eulerian_x};
            return eulerian::run(sample_state(g, ip.densities, ip.velocities), c.parameters, cfg, rc);
        }
        case BackendKind::lagrangian: {
            lagrangian::LagrangianSolverConfig cfg;
            cfg.cfl = c.solver.cfl;
            cfg.density_floor = c.solver.density_floor;
            cfg.time_integrator = c.solver.time_integrator;
            return lagrangian::run_lagrangian(lagrangian::lagrangian_from_profiles(ip, c.cells), c.parameters, cfg, rc);
        }
        case BackendKind::galerkin: {
            galerkin::GalerkinConfig cfg;
            cfg.mode_count = c.modes;
            cfg.quadrature_points = c.solver.quadrature_points;
            cfg.picard_tol = c.solver.picard_tol;
            cfg.picard_max_iters = c.solver.picard_max_iters;
            cfg.cfl = c.solver.cfl;
            cfg.density_floor = c.solver.density_floor;
            return galerkin::run_galerkin(ip, c.parameters, cfg, rc);
        }
    }
    throw ConfigError("unknown backend");
}

struct RunOutcome {
    int exit_code = exit_ok;
    std::string message;  // failure diagnostic, empty on success
    Trajectory trajectory;
    estimates::LedgerReport ledger;
};

/// Validates, runs, evaluates the ledger and, when `directory` is non-empty,
/// writes trajectory, ledger and optional plots there.
inline RunOutcome run_scenario(const ScenarioConfig& c, const std::filesystem::path& directory = {}) {
    RunOutcome out;
    try {
        validate(c);
        out.trajectory = simulate(c);
        out.ledger = estimates::build_ledger(out.trajectory, c.parameters, c.ledger);
        if (!directory.empty()) {
            io::write_trajectory(directory, out.trajectory, c);
            io::write_ledger(directory, out.ledger, c);
            if (c.outputs.plots) io::write_plots(directory, out.trajectory);
        }
        if (!out.ledger.all_passed()) {
            out.exit_code = exit_ledger_failure;
            out.message = "ledger checks failed";
            for (const auto& r : out.ledger.records)
                if (!r.pass) out.message += " " + r.name;
        }
    } catch (const SimulationError& e) {
        out.exit_code = exit_code(e.kind());
        out.message = e.what();
        if (e.kind() != ErrorKind::config && e.kind() != ErrorKind::io) {
            out.message += " (t = " + std::to_string(e.time()) + ")";
        }
    } catch (const std::filesystem::filesystem_error& e) {
        out.exit_code = exit_io;
        out.message = e.what();
    }
    return out;
}

}  // namespace mfluid::scenario
