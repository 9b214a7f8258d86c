#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mfluid/core/types.hpp"

namespace mfluid {

/// Scalar diagnostics recorded along a run.
struct MonitorRow {
    double time = 0.0;
    double energy = 0.0;                // E
    double dissipation = 0.0;           // D
    double dissipation_integral = 0.0;  // ∫_0^t D dτ, trapezoid over every accepted step
    std::vector<double> masses;         // m_i
    double rho_min = 0.0;               // min_{i,k} ρ_i
    double rho_max = 0.0;               // max_{i,k} ρ_i
    double w_norm = 0.0;                // ‖∂_y ln ρ‖_{L2(0,d)}
    double unit_length = 1.0;           // ∫ dy/ρ (1 for Eulerian grids)
};

struct Trajectory {
    std::string backend;
    CoordinateKind coordinate_kind = CoordinateKind::eulerian_x;
    std::size_t n_constituents = 0;
    double total_mass = 0.0;  // d, fixed at t = 0
    bool body_forcing = false;  // f ≠ 0: the energy balance gains a work term and is not checked

    std::vector<FieldState> states;
    std::vector<MonitorRow> monitors;

    std::size_t steps = 0;
    double min_dt = 0.0;
    double max_dt = 0.0;

    // Galerkin bookkeeping; empty for the grid-based backends.
    std::size_t mode_count = 0;
    std::vector<int> picard_iterations;
    double max_picard_residual = 0.0;

    [[nodiscard]] double final_time() const { return states.empty() ? 0.0 : states.back().time; }
};

}  // namespace mfluid
