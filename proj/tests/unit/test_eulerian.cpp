#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mfluid/core/fields.hpp"
#include "mfluid/estimates/functionals.hpp"
#include "mfluid/eulerian/solver.hpp"
#include "mfluid/verification/mms.hpp"
#include "oracles.hpp"

using namespace mfluid;
using namespace mfluid::eulerian;
using std::numbers::pi;

namespace {

Parameters params_with(Matrix mu) {
    Parameters p;
    p.n_constituents = static_cast<std::size_t>(mu.rows());
    p.viscosity = std::move(mu);
    return p;
}

Matrix coupled() {
    Matrix m(2, 2);
    m << 2.0, 1.0, 1.0, 2.0;
    return m;
}

FieldState smooth_mix(std::size_t cells) {
    return sample_state(Grid1D{cells, 1.0, CoordinateKind::eulerian_x},
                        {[](double x) { return 0.5 + 0.1 * std::sin(2 * pi * x); },
                         [](double x) { return 0.5 - 0.1 * std::sin(2 * pi * x); }},
                        {[](double x) { return 0.1 * std::sin(pi * x); },
                         [](double x) { return -0.05 * std::sin(pi * x); }});
}

double mass(const Field& rho, double h) {
    double m = 0.0;
    for (double r : rho) m += r;
    return m * h;
}

}  // namespace

TEST(EulerianRhs, UniformRestIsEquilibrium) {
    FieldState s = make_state(Grid1D{32, 1.0, CoordinateKind::eulerian_x}, 2);
    std::fill(s.densities[0].begin(), s.densities[0].end(), 0.3);
    std::fill(s.densities[1].begin(), s.densities[1].end(), 0.7);
    const EulerianSolver solver(params_with(coupled()), {});
    const auto r = solver.rhs(s);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t k = 0; k < 32; ++k) {
            EXPECT_EQ(r.densities[i][k], 0.0);
            EXPECT_EQ(r.velocities[i][k], 0.0);
        }
}

TEST(EulerianRhs, SineVelocityMatchesAnalyticDerivative) {
    // N = 1, ρ ≡ 1, u = sin πx: ∂_t u = −u u_x + μ u_xx, ∂_t ρ = −∂_x u.
    const double mu = 0.7;
    auto errors = [&](std::size_t cells) {
        const auto s = sample_state(Grid1D{cells, 1.0, CoordinateKind::eulerian_x}, {[](double) { return 1.0; }},
                                    {[](double x) { return std::sin(pi * x); }});
        const EulerianSolver solver(params_with(Matrix::Constant(1, 1, mu)), {});
        const auto r = solver.rhs(s);
        double eu = 0.0, er = 0.0;
        for (std::size_t k = 0; k < cells; ++k) {
            const double x = s.grid.center(k);
            const double du = -std::sin(pi * x) * pi * std::cos(pi * x) - mu * pi * pi * std::sin(pi * x);
            eu = std::max(eu, std::abs(r.velocities[0][k] - du));
            er = std::max(er, std::abs(r.densities[0][k] + pi * std::cos(pi * x)));
        }
        return std::pair{eu, er};
    };
    const auto [eu64, er64] = errors(64);
    const auto [eu128, er128] = errors(128);
    EXPECT_LE(eu64, 5e-3);
    EXPECT_GE(eu64 / eu128, 3.5);
    EXPECT_LE(er64, 5e-2);
    EXPECT_GE(er64 / er128, 1.9);  // one-sided slopes at the walls
}

TEST(EulerianRhs, SineVelocityAtMidCell) {
    const std::size_t cells = 65;  // cell 32 is centred at x = 0.5
    const auto s = sample_state(Grid1D{cells, 1.0, CoordinateKind::eulerian_x}, {[](double) { return 1.0; }},
                                {[](double x) { return std::sin(pi * x); }});
    const EulerianSolver solver(params_with(Matrix::Constant(1, 1, 1.0)), {});
    const auto r = solver.rhs(s);
    const double h = 1.0 / cells;
    EXPECT_NEAR(r.velocities[0][32], -pi * pi, pi * pi * pi * pi * h * h);
    EXPECT_NEAR(r.densities[0][32], 0.0, 1e-12);
}

TEST(EulerianRhs, ManufacturedSourceGivesExactDerivative) {
    // Oracle: central difference in time of the closed-form fields.
    const auto sol = verification::ManufacturedSolution::standard();
    const double t = 0.3, dt = 1e-5;
    auto error = [&](std::size_t cells) {
        const EulerianSolver solver(sol.eulerian_params(), {});
        const auto s = sol.exact_eulerian(cells, t);
        const auto plus = sol.exact_eulerian(cells, t + dt), minus = sol.exact_eulerian(cells, t - dt);
        const auto r = solver.rhs(s);
        double e = 0.0;
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t k = 0; k < cells; ++k) {
                const double drho = (plus.densities[i][k] - minus.densities[i][k]) / (2 * dt);
                const double du = (plus.velocities[i][k] - minus.velocities[i][k]) / (2 * dt);
                // Point values move with x fixed, so ∂_t at fixed x is the oracle.
                e = std::max(e, std::abs(r.densities[i][k] - drho));
                e = std::max(e, std::abs(r.velocities[i][k] - du));
            }
        return e;
    };
    const double e64 = error(64), e128 = error(128);
    EXPECT_LE(e64, 2e-2);
    EXPECT_GE(e64 / e128, 1.9);
}

TEST(EulerianRhs, DensityBelowFloorThrows) {
    auto s = smooth_mix(16);
    s.densities[1][7] = 1e-12;
    const EulerianSolver solver(params_with(coupled()), {});
    EXPECT_THROW((void)solver.rhs(s), PositivityError);
}

TEST(StableDt, FormulaExample) {
    FieldState s = make_state(Grid1D{64, 1.0, CoordinateKind::eulerian_x}, 1);
    std::fill(s.densities[0].begin(), s.densities[0].end(), 1.0);
    EulerianSolverConfig cfg;
    cfg.cfl = 0.4;
    const EulerianSolver solver(params_with(Matrix::Identity(1, 1)), cfg);
    EXPECT_NEAR(solver.stable_dt(s), 0.2 / 4096.0, 1e-18);
}

TEST(StableDt, DoublingViscosityHalvesViscousBound) {
    const auto s = smooth_mix(64);
    const EulerianSolver one(params_with(coupled()), {});
    const EulerianSolver two(params_with(2.0 * coupled()), {});
    EXPECT_NEAR(two.stable_dt(s), 0.5 * one.stable_dt(s), 1e-18);
}

TEST(StableDt, IndependentRecomputation) {
    const auto s = smooth_mix(128);
    const EulerianSolver solver(params_with(coupled()), {});
    const double h = 1.0 / 128;
    double vmax = 1e-12, rmin = INFINITY;
    for (std::size_t k = 0; k < 128; ++k) {
        vmax = std::max(vmax, std::abs(0.5 * (s.velocities[0][k] + s.velocities[1][k])));
        rmin = std::min({rmin, s.densities[0][k], s.densities[1][k]});
    }
    // λ_max of [[2,1],[1,2]] is 3.
    const double expected = 0.4 * std::min(h / vmax, h * h * rmin / 6.0);
    EXPECT_NEAR(solver.stable_dt(s), expected, 1e-15 * expected);
}

TEST(EulerianStep, EquilibriumIsFixedPoint) {
    FieldState s = make_state(Grid1D{16, 1.0, CoordinateKind::eulerian_x}, 2);
    std::fill(s.densities[0].begin(), s.densities[0].end(), 0.5);
    std::fill(s.densities[1].begin(), s.densities[1].end(), 0.5);
    const EulerianSolver solver(params_with(coupled()), {});
    const auto next = solver.step(s, solver.stable_dt(s));
    EXPECT_EQ(next.densities, s.densities);
    EXPECT_EQ(next.velocities, s.velocities);
}

TEST(EulerianStep, MassConservedOnRandomStates) {
    std::mt19937_64 rng(20261016);
    for (auto integrator : {TimeIntegrator::ssp_rk3, TimeIntegrator::rk4}) {
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t n = 1 + trial % 3;
            auto s = test::random_state(rng, n, 48);
            EulerianSolverConfig cfg;
            cfg.time_integrator = integrator;
            for (auto recon : {Reconstruction::upwind, Reconstruction::upwind_linear}) {
                cfg.reconstruction = recon;
                const EulerianSolver solver(params_with(test::random_spd(rng, n)), cfg);
                const auto next = solver.step(s, solver.stable_dt(s));
                const double h = s.grid.spacing();
                for (std::size_t i = 0; i < n; ++i) {
                    const double m0 = mass(s.densities[i], h);
                    EXPECT_NEAR(mass(next.densities[i], h), m0, 1e-13 * m0);
                }
            }
        }
    }
}

TEST(EulerianStep, RichardsonRatioIsThirdOrder) {
    // One step of dt against two of dt/2 differs by C dt⁴ for SSP-RK3.
    const auto s = smooth_mix(64);
    const EulerianSolver solver(params_with(coupled()), {});
    const double dt = solver.stable_dt(s);
    auto defect = [&](double tau) {
        const auto one = solver.step(s, tau);
        const auto two = solver.step(solver.step(s, tau / 2), tau / 2);
        double e = 0.0;
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t k = 0; k < 64; ++k) e = std::max(e, std::abs(one.velocities[i][k] - two.velocities[i][k]));
        return e;
    };
    const double ratio = defect(dt) / defect(dt / 2);
    EXPECT_GT(ratio, 12.0);
    EXPECT_LT(ratio, 20.0);
}

TEST(EulerianRun, ZeroHorizonKeepsOnlyInitialState) {
    RunControl rc;
    rc.horizon = 0.0;
    const auto traj = run(smooth_mix(32), params_with(coupled()), {}, rc);
    ASSERT_EQ(traj.states.size(), 1u);
    EXPECT_EQ(traj.states[0].time, 0.0);
    EXPECT_EQ(traj.states[0].densities, smooth_mix(32).densities);
}

TEST(EulerianRun, RestStaysAtRest) {
    FieldState s = make_state(Grid1D{64, 1.0, CoordinateKind::eulerian_x}, 2);
    std::fill(s.densities[0].begin(), s.densities[0].end(), 0.5);
    std::fill(s.densities[1].begin(), s.densities[1].end(), 0.5);
    RunControl rc;
    rc.horizon = 0.02;
    const auto traj = run(s, params_with(coupled()), {}, rc);
    EXPECT_GE(traj.states.size(), 3u);
    for (const auto& st : traj.states)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t k = 0; k < 64; ++k) {
                EXPECT_NEAR(st.densities[i][k], 0.5, 1e-14);
                EXPECT_NEAR(st.velocities[i][k], 0.0, 1e-14);
            }
}

TEST(EulerianRun, SnapshotTimesIncreaseAndReachHorizon) {
    RunControl rc;
    rc.horizon = 0.025;
    rc.snapshot_interval = 0.01;
    EulerianSolverConfig cfg;
    cfg.cfl = 0.9;
    const auto traj = run(smooth_mix(32), params_with(coupled()), cfg, rc);
    ASSERT_GE(traj.states.size(), 3u);
    EXPECT_EQ(traj.states.front().time, 0.0);
    for (std::size_t j = 1; j < traj.states.size(); ++j) EXPECT_GT(traj.states[j].time, traj.states[j - 1].time);
    EXPECT_NEAR(traj.final_time(), 0.025, 1e-14);
}

TEST(EulerianRun, MassAndEnergyLedgerOnSmoothMix) {
    RunControl rc;
    rc.horizon = 0.05;
    EulerianSolverConfig cfg;
    cfg.cfl = 0.9;
    const auto traj = run(smooth_mix(64), params_with(coupled()), cfg, rc);
    const auto& first = traj.monitors.front();
    double previous = first.energy;
    for (const auto& row : traj.monitors) {
        for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(row.masses[i], first.masses[i], 1e-12 * first.masses[i]);
        EXPECT_LE(row.energy, previous + 1e-12);
        previous = row.energy;
        EXPECT_GT(row.rho_min, 0.0);
    }
}

TEST(EulerianRun, VelocityErrorFallsFourfoldUnderRefinement) {
    RunControl rc;
    rc.horizon = 0.05;
    EulerianSolverConfig cfg;
    cfg.cfl = 0.9;
    auto final_u = [&](std::size_t cells) { return run(smooth_mix(cells), params_with(coupled()), cfg, rc).states.back(); };
    const auto a = final_u(32), b = final_u(64), c = final_u(128);
    // Restrict finer grids to coarse cells by averaging pairs.
    auto coarsen = [](const Field& f) {
        Field g(f.size() / 2);
        for (std::size_t k = 0; k < g.size(); ++k) g[k] = 0.5 * (f[2 * k] + f[2 * k + 1]);
        return g;
    };
    auto diff = [](const Field& f, const Field& g) {
        double e = 0.0;
        for (std::size_t k = 0; k < f.size(); ++k) e = std::max(e, std::abs(f[k] - g[k]));
        return e;
    };
    const double d1 = diff(a.velocities[0], coarsen(b.velocities[0]));
    const double d2 = diff(b.velocities[0], coarsen(c.velocities[0]));
    EXPECT_GT(d1 / d2, 3.0);
    EXPECT_LT(d1 / d2, 5.5);
}

TEST(EulerianRun, UnstableForcedStepIsReportedAsBlowUp) {
    RunControl rc;
    rc.horizon = 0.05;
    const EulerianSolver probe(params_with(coupled()), {});
    rc.dt_override = 20.0 * probe.stable_dt(smooth_mix(64)) / 0.4;
    EXPECT_THROW((void)run(smooth_mix(64), params_with(coupled()), {}, rc), BlowUpError);
}
