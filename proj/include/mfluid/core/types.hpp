#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfluid/core/errors.hpp"

namespace mfluid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Body force per unit mass, f_i(s, t). `s` is the native coordinate of the
/// backend evaluating it: x for the Eulerian and Galerkin solvers, the mass
/// coordinate y for the Lagrangian solver.
using Forcing = std::function<double(std::size_t constituent, double s, double t)>;

/// Model constants of the multi-fluid system.
struct Parameters {
    std::size_t n_constituents = 1;
    double pressure_coeff = 1.0;   // K
    double adiabatic_index = 1.4;  // gamma
    Matrix viscosity = Matrix::Identity(1, 1);
    double horizon = 0.1;
    Forcing forcing;  // empty means zero forcing

    [[nodiscard]] bool has_forcing() const { return static_cast<bool>(forcing); }
};

/// Λ and M of the general multi-dimensional stress law. Only the admissibility
/// auditor consumes this; the 1D solvers work with the effective matrix M alone.
struct GeneralViscosityPair {
    Matrix lambda_matrix;
    Matrix mu_matrix;
    int flow_dim = 1;
};

enum class BackendKind { eulerian, lagrangian, galerkin };

inline const char* to_string(BackendKind b) {
    switch (b) {
        case BackendKind::eulerian: return "eulerian";
        case BackendKind::lagrangian: return "lagrangian";
        case BackendKind::galerkin: return "galerkin";
    }
    return "?";
}

enum class CoordinateKind { eulerian_x, lagrangian_y };

inline const char* to_string(CoordinateKind kind) {
    return kind == CoordinateKind::eulerian_x ? "eulerian_x" : "lagrangian_y";
}

/// Uniform cell-centred grid on (0, length).
struct Grid1D {
    std::size_t cell_count = 4;
    double length = 1.0;
    CoordinateKind coordinate_kind = CoordinateKind::eulerian_x;

    [[nodiscard]] double spacing() const { return length / static_cast<double>(cell_count); }
    [[nodiscard]] double center(std::size_t k) const { return (static_cast<double>(k) + 0.5) * spacing(); }

    bool operator==(const Grid1D&) const = default;
};

using Field = std::vector<double>;

/// Per-constituent densities and velocities at one instant. Velocity cell
/// values are interior unknowns; the wall values are 0 by construction.
struct FieldState {
    double time = 0.0;
    Grid1D grid;
    std::vector<Field> densities;
    std::vector<Field> velocities;

    [[nodiscard]] std::size_t constituents() const { return densities.size(); }
    [[nodiscard]] std::size_t cells() const { return grid.cell_count; }
};

/// Time derivatives matching the layout of FieldState.
struct FieldRates {
    std::vector<Field> densities;
    std::vector<Field> velocities;
};

struct MatrixAuditReport {
    bool symmetric = false;
    bool positive_definite = false;
    bool second_law_ok = false;  // nΛ+2M ⪰ 0 and M ⪰ 0
    bool coercive = false;       // Λ+2M ≻ 0 and M ≻ 0
    bool diagonal = false;
    bool triangular = false;
    std::map<std::string, double> min_eigenvalues;
    std::optional<Vector> witness;
    std::string failed_condition;  // empty when nothing failed

    [[nodiscard]] bool any_failed() const { return witness.has_value(); }
};

inline FieldState make_state(const Grid1D& grid, std::size_t n_constituents, double time = 0.0) {
    FieldState s;
    s.time = time;
    s.grid = grid;
    s.densities.assign(n_constituents, Field(grid.cell_count, 0.0));
    s.velocities.assign(n_constituents, Field(grid.cell_count, 0.0));
    return s;
}

inline FieldRates make_rates(std::size_t n_constituents, std::size_t cells) {
    FieldRates r;
    r.densities.assign(n_constituents, Field(cells, 0.0));
    r.velocities.assign(n_constituents, Field(cells, 0.0));
    return r;
}

/// Samples closed-form profiles at the cell centres of `grid`.
inline FieldState sample_state(const Grid1D& grid,
                               const std::vector<std::function<double(double)>>& densities,
                               const std::vector<std::function<double(double)>>& velocities,
                               double time = 0.0) {
    FieldState s = make_state(grid, densities.size(), time);
    for (std::size_t i = 0; i < densities.size(); ++i) {
        for (std::size_t k = 0; k < grid.cell_count; ++k) {
            const double x = grid.center(k);
            s.densities[i][k] = densities[i](x);
            s.velocities[i][k] = velocities[i](x);
        }
    }
    return s;
}

[[nodiscard]] inline bool all_finite(const FieldState& s) {
    for (std::size_t i = 0; i < s.constituents(); ++i) {
        for (std::size_t k = 0; k < s.cells(); ++k) {
            if (!std::isfinite(s.densities[i][k]) || !std::isfinite(s.velocities[i][k])) return false;
        }
    }
    return true;
}

[[nodiscard]] inline double min_density(const FieldState& s) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& rho : s.densities)
        for (double r : rho) m = std::min(m, r);
    return m;
}

}  // namespace mfluid
