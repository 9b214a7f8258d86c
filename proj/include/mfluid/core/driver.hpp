#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "mfluid/core/types.hpp"
#include "mfluid/estimates/functionals.hpp"
#include "mfluid/trajectory.hpp"

namespace mfluid {

/// Horizon, output cadence and safety knobs shared by every backend.
struct RunControl {
    double horizon = 0.1;
    double snapshot_interval = 0.01;
    double monitor_interval = 0.01;
    std::optional<double> dt_override;  // unsafe: bypasses the stability bound
    /// Relative energy growth treated as blow-up when no forcing is present.
    /// The unforced dynamics dissipate energy, so growth far above the
    /// discretisation residual can only come from an unstable step.
    double blowup_energy_growth = 0.01;
    bool monitor_w_norm = true;
};

/// Backend contract:
///   using State;
///   double stable_dt(const State&) const;
///   State step(const State&, double dt) const;
///   FieldState snapshot(const State&) const;
///   double time_of(const State&) const;
/// and optionally `void record_step(const State&, Trajectory&) const`.
template <class Backend>
concept SolverBackend = requires(const Backend& b, const typename Backend::State& s, double dt) {
    { b.stable_dt(s) } -> std::convertible_to<double>;
    { b.step(s, dt) } -> std::convertible_to<typename Backend::State>;
    { b.snapshot(s) } -> std::convertible_to<FieldState>;
    { b.time_of(s) } -> std::convertible_to<double>;
};

/// Integrates `initial` to `rc.horizon`, landing exactly on every snapshot and
/// monitor time. ∫D dτ is accumulated with the trapezoid rule over every
/// accepted step so that the energy ledger does not depend on the output cadence.
template <SolverBackend Backend>
[[nodiscard]] Trajectory drive(const typename Backend::State& initial, const Backend& backend,
                               const Parameters& params, const RunControl& rc, std::string name) {
    using State = typename Backend::State;
    Trajectory traj;
    traj.backend = std::move(name);
    traj.body_forcing = params.has_forcing();

    State s = initial;
    FieldState snap = backend.snapshot(s);
    traj.coordinate_kind = snap.grid.coordinate_kind;
    traj.n_constituents = snap.constituents();
    traj.total_mass = estimates::integrate_x(snap, total_density(snap));
    if (snap.grid.coordinate_kind == CoordinateKind::lagrangian_y) traj.total_mass = snap.grid.length;

    const double t0 = backend.time_of(s);
    const double horizon = rc.horizon;
    const double e0 = estimates::energy(snap, params);
    double d_prev = estimates::dissipation(snap, params);
    double d_int = 0.0;
    traj.states.push_back(snap);
    traj.monitors.push_back(estimates::monitor_row(snap, params, 0.0, rc.monitor_w_norm));

    const double snap_dt = rc.snapshot_interval > 0 ? rc.snapshot_interval : horizon;
    const double mon_dt = rc.monitor_interval > 0 ? rc.monitor_interval : snap_dt;
    std::size_t snap_count = 1, mon_count = 1;
    auto next_snap = [&] { return std::min(t0 + snap_dt * static_cast<double>(snap_count), horizon); };
    auto next_mon = [&] { return std::min(t0 + mon_dt * static_cast<double>(mon_count), horizon); };

    double t = t0;
    const double eps = 1e-13 * std::max(1.0, horizon);
    while (t < horizon - eps) {
        double dt = rc.dt_override ? *rc.dt_override : backend.stable_dt(s);
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw BlowUpError("non-positive or non-finite time step", t);
        }
        const double target = std::min(next_snap(), next_mon());
        bool landed = false;
        if (t + dt >= target - eps) {
            dt = target - t;
            landed = true;
        }

        if (rc.dt_override) {
            // A forced step above the stability bound: whatever breaks first
            // (usually positivity) is a symptom of the instability.
            const double bound = backend.stable_dt(s);
            if (dt > bound) {
                try {
                    s = backend.step(s, dt);
                } catch (const PositivityError& e) {
                    std::ostringstream os;
                    os << "unstable forced step: dt = " << dt << " exceeds the stability bound " << bound << " ("
                       << e.what() << ")";
                    throw BlowUpError(os.str(), t);
                }
            } else {
                s = backend.step(s, dt);
            }
        } else {
            s = backend.step(s, dt);
        }
        t = landed ? target : t + dt;
        if constexpr (requires { backend.record_step(s, traj); }) backend.record_step(s, traj);
        ++traj.steps;
        traj.min_dt = traj.steps == 1 ? dt : std::min(traj.min_dt, dt);
        traj.max_dt = std::max(traj.max_dt, dt);

        snap = backend.snapshot(s);
        snap.time = t;
        if (!all_finite(snap)) throw BlowUpError("non-finite field values", t);
        const double d_now = estimates::dissipation(snap, params);
        d_int += 0.5 * dt * (d_prev + d_now);
        d_prev = d_now;
        // The energy test is cheap relative to a step but not free; every 16th
        // step still catches an exponentially growing mode within a few dozen steps.
        if (!traj.body_forcing && (traj.steps % 16 == 0 || landed)) {
            const double e = estimates::energy(snap, params);
            if (!std::isfinite(e) || e > e0 * (1.0 + rc.blowup_energy_growth)) {
                std::ostringstream os;
                os << "energy grew from " << e0 << " to " << e << " (unstable time step?)";
                throw BlowUpError(os.str(), t);
            }
        }

        if (landed && t >= next_mon() - eps) {
            traj.monitors.push_back(estimates::monitor_row(snap, params, d_int, rc.monitor_w_norm));
            ++mon_count;
        }
        if (landed && t >= next_snap() - eps) {
            traj.states.push_back(snap);
            ++snap_count;
        }
    }
    return traj;
}

}  // namespace mfluid
