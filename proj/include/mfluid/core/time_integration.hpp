#pragma once

#include <string>

#include "mfluid/core/types.hpp"

namespace mfluid {

enum class TimeIntegrator { ssp_rk3, rk4 };

inline const char* to_string(TimeIntegrator ti) { return ti == TimeIntegrator::ssp_rk3 ? "ssp_rk3" : "rk4"; }

namespace detail {

// out = ca·a + cb·b + cr·r (b may alias a; out must not alias r).
inline void combine(FieldState& out, const FieldState& a, double ca, const FieldState& b, double cb,
                    const FieldRates& r, double cr) {
    for (std::size_t i = 0; i < a.constituents(); ++i) {
        for (std::size_t k = 0; k < a.cells(); ++k) {
            out.densities[i][k] = ca * a.densities[i][k] + cb * b.densities[i][k] + cr * r.densities[i][k];
            out.velocities[i][k] = ca * a.velocities[i][k] + cb * b.velocities[i][k] + cr * r.velocities[i][k];
        }
    }
}

}  // namespace detail

/// One explicit step of a method-of-lines system. `rhs(state)` returns the
/// time derivatives at `state.time`.
template <class Rhs>
[[nodiscard]] FieldState advance(const FieldState& s, double dt, TimeIntegrator ti, Rhs&& rhs) {
    if (ti == TimeIntegrator::ssp_rk3) {
        // Shu–Osher scheme written as increments on s: u2 = s + dt(r0 + r1)/4,
        // u3 = s + dt(r0/6 + r1/6 + 2r2/3). Same stages, but no per-stage
        // rescaling of the state by 3/4 or 1/3, whose rounding is correlated
        // across cells and shows up as a systematic mass drift.
        const FieldRates r0 = rhs(s);
        FieldState u1 = s;
        detail::combine(u1, s, 1.0, s, 0.0, r0, dt);
        u1.time = s.time + dt;

        const FieldRates r1 = rhs(u1);
        FieldState u2 = s;
        for (std::size_t i = 0; i < s.constituents(); ++i) {
            for (std::size_t k = 0; k < s.cells(); ++k) {
                u2.densities[i][k] += 0.25 * dt * (r0.densities[i][k] + r1.densities[i][k]);
                u2.velocities[i][k] += 0.25 * dt * (r0.velocities[i][k] + r1.velocities[i][k]);
            }
        }
        u2.time = s.time + 0.5 * dt;

        const FieldRates r2 = rhs(u2);
        FieldState u3 = s;
        for (std::size_t i = 0; i < s.constituents(); ++i) {
            for (std::size_t k = 0; k < s.cells(); ++k) {
                u3.densities[i][k] +=
                    dt * ((r0.densities[i][k] + r1.densities[i][k]) / 6.0 + 2.0 / 3.0 * r2.densities[i][k]);
                u3.velocities[i][k] +=
                    dt * ((r0.velocities[i][k] + r1.velocities[i][k]) / 6.0 + 2.0 / 3.0 * r2.velocities[i][k]);
            }
        }
        u3.time = s.time + dt;
        return u3;
    }

    const FieldRates k1 = rhs(s);
    FieldState tmp = s;
    detail::combine(tmp, s, 1.0, s, 0.0, k1, 0.5 * dt);
    tmp.time = s.time + 0.5 * dt;
    const FieldRates k2 = rhs(tmp);
    detail::combine(tmp, s, 1.0, s, 0.0, k2, 0.5 * dt);
    const FieldRates k3 = rhs(tmp);
    detail::combine(tmp, s, 1.0, s, 0.0, k3, dt);
    tmp.time = s.time + dt;
    const FieldRates k4 = rhs(tmp);

    FieldState out = s;
    for (std::size_t i = 0; i < s.constituents(); ++i) {
        for (std::size_t k = 0; k < s.cells(); ++k) {
            out.densities[i][k] += dt / 6.0 *
                (k1.densities[i][k] + 2 * k2.densities[i][k] + 2 * k3.densities[i][k] + k4.densities[i][k]);
            out.velocities[i][k] += dt / 6.0 *
                (k1.velocities[i][k] + 2 * k2.velocities[i][k] + 2 * k3.velocities[i][k] + k4.velocities[i][k]);
        }
    }
    out.time = s.time + dt;
    return out;
}

}  // namespace mfluid
