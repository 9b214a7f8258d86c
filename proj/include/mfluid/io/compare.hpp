#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mfluid/core/numerics.hpp"
#include "mfluid/lagrangian/coordinates.hpp"
#include "mfluid/trajectory.hpp"

namespace mfluid::io {

struct ComparisonRow {
    double time = 0.0;
    std::string field;  // rho_i or u_i
    double linf = 0.0;
    double l2 = 0.0;
};

/// Discrepancies on the coarser of the two Eulerian grids at the snapshot
/// times both trajectories share.
struct ComparisonReport {
    std::size_t cells = 0;
    std::vector<ComparisonRow> rows;

    [[nodiscard]] double max_linf(const std::string& prefix = "") const {
        double m = 0.0;
        for (const auto& r : rows)
            if (r.field.rfind(prefix, 0) == 0) m = std::max(m, r.linf);
        return m;
    }
    [[nodiscard]] double max_l2(const std::string& prefix = "") const {
        double m = 0.0;
        for (const auto& r : rows)
            if (r.field.rfind(prefix, 0) == 0) m = std::max(m, r.l2);
        return m;
    }
    /// Discrepancy at the last shared time.
    [[nodiscard]] double final_linf(const std::string& prefix = "") const {
        double m = 0.0;
        const double t = rows.empty() ? 0.0 : rows.back().time;
        for (const auto& r : rows)
            if (r.time == t && r.field.rfind(prefix, 0) == 0) m = std::max(m, r.linf);
        return m;
    }
};

namespace detail {

inline FieldState eulerian_view(const FieldState& s) {
    return s.grid.coordinate_kind == CoordinateKind::eulerian_x ? s : lagrangian::to_eulerian(s);
}

/// Resamples cell values onto `target` cell centres: monotone cubic through
/// the centres for densities, wall-closed (u = 0 at the walls) for velocities.
inline Field resample(const FieldState& s, const Field& f, bool velocity, const Grid1D& target) {
    if (s.grid == target) return f;
    MonotoneCubic interp;
    if (velocity) {
        interp = lagrangian::detail::wall_closed_interpolant(s.grid, f, 0.0, 0.0);
    } else {
        std::vector<double> x(f.size());
        for (std::size_t k = 0; k < f.size(); ++k) x[k] = s.grid.center(k);
        interp = MonotoneCubic(std::move(x), f);
    }
    Field out(target.cell_count);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = interp(target.center(k));
    return out;
}

}  // namespace detail

[[nodiscard]] inline ComparisonReport compare(const Trajectory& a, const Trajectory& b) {
    if (a.states.empty() || b.states.empty()) throw std::invalid_argument("compare: empty trajectory");
    if (a.n_constituents != b.n_constituents) throw std::invalid_argument("compare: constituent counts differ");
    const double ta = a.final_time(), tb = b.final_time();
    const double eps = 1e-12 * std::max(1.0, std::max(std::abs(ta), std::abs(tb)));
    if (std::abs(ta - tb) > eps) {
        throw std::invalid_argument("compare: incompatible horizons " + std::to_string(ta) + " and " + std::to_string(tb));
    }

    ComparisonReport rep;
    rep.cells = std::min(a.states.front().cells(), b.states.front().cells());
    const Grid1D target{rep.cells, 1.0, CoordinateKind::eulerian_x};
    std::size_t j = 0;
    for (const auto& sa : a.states) {
        while (j < b.states.size() && b.states[j].time < sa.time - eps) ++j;
        if (j == b.states.size()) break;
        if (std::abs(b.states[j].time - sa.time) > eps) continue;
        const FieldState ea = detail::eulerian_view(sa), eb = detail::eulerian_view(b.states[j]);
        const double h = target.spacing();
        for (int kind = 0; kind < 2; ++kind) {
            for (std::size_t i = 0; i < a.n_constituents; ++i) {
                const bool vel = kind == 1;
                const Field fa = detail::resample(ea, vel ? ea.velocities[i] : ea.densities[i], vel, target);
                const Field fb = detail::resample(eb, vel ? eb.velocities[i] : eb.densities[i], vel, target);
                ComparisonRow row;
                row.time = sa.time;
                row.field = (vel ? "u_" : "rho_") + std::to_string(i + 1);
                double acc = 0.0;
                for (std::size_t k = 0; k < fa.size(); ++k) {
                    const double d = std::abs(fa[k] - fb[k]);
                    row.linf = std::max(row.linf, d);
                    acc += d * d;
                }
                row.l2 = std::sqrt(acc * h);
                rep.rows.push_back(row);
            }
        }
    }
    if (rep.rows.empty()) throw std::invalid_argument("compare: no common snapshot times");
    return rep;
}

}  // namespace mfluid::io
