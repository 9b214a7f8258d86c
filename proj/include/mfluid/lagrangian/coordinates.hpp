#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfluid/core/fields.hpp"
#include "mfluid/core/numerics.hpp"
#include "mfluid/core/types.hpp"

namespace mfluid {

using Profile = std::function<double(double)>;

/// Closed-form initial data ρ_0i(x), u_0i(x) on [0, 1].
struct InitialProfiles {
    std::vector<Profile> densities;
    std::vector<Profile> velocities;
};

}  // namespace mfluid

namespace mfluid::lagrangian {

/// Increasing cumulative function through tabulated face values. Evaluates
/// with degree-5 local polynomials; `limited` switches to the monotone cubic,
/// which the remaps fall back to when the high-order values lose monotonicity.
struct CumulativeMap {
    LocalPolynomial smooth;
    MonotoneCubic monotone;
    bool limited = false;

    CumulativeMap() = default;
    CumulativeMap(const std::vector<double>& x, const std::vector<double>& y) : smooth(x, y), monotone(x, y) {}

    [[nodiscard]] double operator()(double t) const { return limited ? monotone(t) : smooth(t); }
};

/// The map y(x) = ∫_0^x ρ ds of an Eulerian state and its inverse, through
/// the exact cumulative masses at the cell faces.
struct MassCoordinate {
    CumulativeMap y_of_x;
    CumulativeMap x_of_y;
    std::vector<CumulativeMap> constituent_mass_of_x;  // Y_i(x) = ∫_0^x ρ_i ds
    double total_mass = 0.0;                           // d

    void limit() {
        y_of_x.limited = x_of_y.limited = true;
        for (auto& m : constituent_mass_of_x) m.limited = true;
    }
    [[nodiscard]] bool limited() const { return x_of_y.limited; }
};

namespace detail {

inline std::vector<double> face_positions(const Grid1D& grid) {
    std::vector<double> f(grid.cell_count + 1);
    const double h = grid.spacing();
    for (std::size_t k = 0; k <= grid.cell_count; ++k) f[k] = h * static_cast<double>(k);
    f.back() = grid.length;
    return f;
}

/// Cell-centred samples extended with the wall values, as interpolation nodes.
/// Velocities change sign, so the spline is left unlimited; limiting would
/// flatten every extremum to first order.
inline MonotoneCubic wall_closed_interpolant(const Grid1D& grid, std::span<const double> values,
                                             double left, double right) {
    std::vector<double> x(values.size() + 2), y(values.size() + 2);
    x.front() = 0.0;
    y.front() = left;
    for (std::size_t k = 0; k < values.size(); ++k) {
        x[k + 1] = grid.center(k);
        y[k + 1] = values[k];
    }
    x.back() = grid.length;
    y.back() = right;
    return MonotoneCubic(std::move(x), std::move(y), MonotoneCubic::Slopes::spline);
}

/// Conservative remap onto a uniform mass grid. Lagrangian cell j covers
/// y ∈ [j h_y, (j+1) h_y]; its Eulerian extent [X_j, X_{j+1}] gives the
/// specific volume 1/ρ_j = (X_{j+1} − X_j)/h_y, so Σ_j h_y/ρ_j = 1 telescopes
/// exactly. Concentrations are the constituent mass fractions of the same
/// interval.
template <class VelocityAt>
FieldState remap_to_mass(const MassCoordinate& map, std::size_t n_constituents, std::size_t cells,
                         double time, VelocityAt&& velocity_at) {
    const double d = map.total_mass;
    Grid1D grid{cells, d, CoordinateKind::lagrangian_y};
    FieldState out = make_state(grid, n_constituents, time);
    const double hy = grid.spacing();

    auto retry_limited = [&](const char* what) {
        if (map.limited()) throw std::domain_error(std::string("to_lagrangian: ") + what);
        MassCoordinate safe = map;
        safe.limit();
        return remap_to_mass(safe, n_constituents, cells, time, velocity_at);
    };

    std::vector<double> xf(cells + 1);
    for (std::size_t f = 0; f <= cells; ++f) xf[f] = map.x_of_y(hy * static_cast<double>(f));
    xf.front() = 0.0;
    xf.back() = 1.0;
    for (std::size_t f = 0; f < cells; ++f) {
        if (!(xf[f + 1] > xf[f])) return retry_limited("non-monotone mass coordinate");
    }

    for (std::size_t j = 0; j < cells; ++j) {
        const double rho = hy / (xf[j + 1] - xf[j]);
        double sum = 0.0;
        for (std::size_t i = 0; i < n_constituents; ++i) {
            const auto& mi = map.constituent_mass_of_x[i];
            const double frac = mi(xf[j + 1]) - mi(xf[j]);
            if (frac < 0.0 && !map.limited()) return retry_limited("negative constituent mass");
            out.densities[i][j] = std::max(frac, 0.0);
            sum += out.densities[i][j];
        }
        if (!(sum > 0.0)) throw std::domain_error("to_lagrangian: empty mass interval");
        for (std::size_t i = 0; i < n_constituents; ++i) out.densities[i][j] *= rho / sum;

        const double x_mid = map.x_of_y(grid.center(j));
        for (std::size_t i = 0; i < n_constituents; ++i) out.velocities[i][j] = velocity_at(i, x_mid);
    }
    return out;
}

}  // namespace detail

/// Mass coordinate of an Eulerian state. The total mass d is the exact
/// discrete mass h Σ_k ρ_k (the cumulative trapezoid with wall closure).
[[nodiscard]] inline MassCoordinate mass_coordinate(const FieldState& s) {
    if (s.grid.coordinate_kind != CoordinateKind::eulerian_x) {
        throw std::invalid_argument("mass_coordinate: expected an Eulerian state");
    }
    const auto xf = detail::face_positions(s.grid);
    const double h = s.grid.spacing();
    const std::size_t m = s.cells();
    std::vector<double> total(m + 1, 0.0);
    MassCoordinate map;
    for (std::size_t i = 0; i < s.constituents(); ++i) {
        std::vector<double> yi(m + 1, 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            if (!(s.densities[i][k] > 0.0)) {
                throw std::domain_error("mass_coordinate: non-positive density in constituent " + std::to_string(i + 1));
            }
            yi[k + 1] = yi[k] + h * s.densities[i][k];
        }
        for (std::size_t f = 0; f <= m; ++f) total[f] += yi[f];
        map.constituent_mass_of_x.emplace_back(xf, std::move(yi));
    }
    map.total_mass = total.back();
    map.y_of_x = CumulativeMap(xf, total);
    map.x_of_y = CumulativeMap(total, xf);
    return map;
}

/// Eulerian state → mass-Lagrangian state on (0, d) with the same cell count.
[[nodiscard]] inline FieldState to_lagrangian(const FieldState& s) {
    const MassCoordinate map = mass_coordinate(s);
    std::vector<MonotoneCubic> u;
    u.reserve(s.constituents());
    for (std::size_t i = 0; i < s.constituents(); ++i) {
        u.push_back(detail::wall_closed_interpolant(s.grid, s.velocities[i], 0.0, 0.0));
    }
    return detail::remap_to_mass(map, s.constituents(), s.cells(), s.time,
                                 [&](std::size_t i, double x) { return u[i](x); });
}

/// Lagrangian state built directly from closed-form Eulerian profiles. The
/// cumulative masses are tabulated with Simpson's rule on a grid `oversample`
/// times finer than the target.
[[nodiscard]] inline FieldState lagrangian_from_profiles(const InitialProfiles& p, std::size_t cells,
                                                         std::size_t oversample = 16, double time = 0.0) {
    const std::size_t fine = cells * oversample;
    std::vector<double> xf(fine + 1);
    for (std::size_t j = 0; j <= fine; ++j) xf[j] = static_cast<double>(j) / static_cast<double>(fine);
    std::vector<double> total(fine + 1, 0.0);
    MassCoordinate map;
    for (const auto& rho_i : p.densities) {
        auto yi = cumulative_simpson(rho_i, xf);
        for (std::size_t j = 0; j <= fine; ++j) total[j] += yi[j];
        map.constituent_mass_of_x.emplace_back(xf, std::move(yi));
    }
    map.total_mass = total.back();
    map.y_of_x = CumulativeMap(xf, total);
    map.x_of_y = CumulativeMap(total, xf);
    return detail::remap_to_mass(map, p.densities.size(), cells, time,
                                 [&](std::size_t i, double x) { return p.velocities[i](x); });
}

/// Discrete ∫_0^d dy/ρ, equal to the Eulerian domain length 1 for a consistent state.
[[nodiscard]] inline double unit_length(const FieldState& s) {
    const Field rho = total_density(s);
    double acc = 0.0;
    for (double r : rho) acc += 1.0 / r;
    return acc * s.grid.spacing();
}

/// Mass-Lagrangian state → Eulerian state on (0, 1) with the same cell count.
/// x(y) = ∫_0^y dy'/ρ is renormalised so that x(d) = 1; the relative defect
/// before renormalisation is written to `length_defect` when provided.
[[nodiscard]] inline FieldState to_eulerian(const FieldState& s, double* length_defect = nullptr) {
    if (s.grid.coordinate_kind != CoordinateKind::lagrangian_y) {
        throw std::invalid_argument("to_eulerian: expected a Lagrangian state");
    }
    const std::size_t m = s.cells();
    const double hy = s.grid.spacing();
    const Field rho = total_density(s);
    const auto yf = detail::face_positions(s.grid);

    std::vector<double> xf(m + 1, 0.0);
    std::vector<std::vector<double>> yi(s.constituents(), std::vector<double>(m + 1, 0.0));
    for (std::size_t j = 0; j < m; ++j) {
        if (!(rho[j] > 0.0)) throw std::domain_error("to_eulerian: non-positive density");
        xf[j + 1] = xf[j] + hy / rho[j];
        for (std::size_t i = 0; i < s.constituents(); ++i) {
            yi[i][j + 1] = yi[i][j] + hy * s.densities[i][j] / rho[j];
        }
    }
    const double defect = xf.back() - 1.0;
    if (length_defect) *length_defect = defect;
    if (std::abs(defect) > 1e-4) {
        throw std::domain_error("to_eulerian: mass inconsistency, x(d) - 1 = " + std::to_string(defect));
    }
    const double scale = 1.0 / xf.back();
    for (double& x : xf) x *= scale;
    xf.back() = 1.0;

    CumulativeMap y_of_x(xf, yf);
    std::vector<CumulativeMap> mass_of_y;
    for (const auto& v : yi) mass_of_y.emplace_back(yf, v);
    std::vector<MonotoneCubic> u;
    for (std::size_t i = 0; i < s.constituents(); ++i) {
        u.push_back(detail::wall_closed_interpolant(s.grid, s.velocities[i], 0.0, 0.0));
    }

    Grid1D grid{m, 1.0, CoordinateKind::eulerian_x};
    FieldState out = make_state(grid, s.constituents(), s.time);
    const double h = grid.spacing();
    std::vector<double> y_faces(m + 1);
    for (bool limited : {false, true}) {
        y_of_x.limited = limited;
        for (auto& mi : mass_of_y) mi.limited = limited;
        bool monotone = true;
        for (std::size_t k = 0; k <= m; ++k) y_faces[k] = y_of_x(h * static_cast<double>(k));
        y_faces.front() = 0.0;
        y_faces.back() = s.grid.length;
        for (std::size_t k = 0; k < m && monotone; ++k) {
            monotone = y_faces[k + 1] > y_faces[k];
            for (std::size_t i = 0; i < s.constituents() && monotone; ++i) {
                const double mass = mass_of_y[i](y_faces[k + 1]) - mass_of_y[i](y_faces[k]);
                monotone = mass >= 0.0;
                out.densities[i][k] = std::max(mass, 0.0) / h;
            }
        }
        if (monotone || limited) break;
    }
    for (std::size_t k = 0; k < m; ++k) {
        const double y_mid = y_of_x(grid.center(k));
        for (std::size_t i = 0; i < s.constituents(); ++i) out.velocities[i][k] = u[i](y_mid);
    }
    return out;
}

}  // namespace mfluid::lagrangian
