#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mfluid/galerkin/solver.hpp"
#include "mfluid/io/compare.hpp"
#include "mfluid/verification/mms.hpp"

using namespace mfluid;
using namespace mfluid::galerkin;
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

InitialProfiles smooth_mix() {
    return {{[](double x) { return 0.5 + 0.1 * std::sin(2 * pi * x); },
             [](double x) { return 0.5 - 0.1 * std::sin(2 * pi * x); }},
            {[](double x) { return 0.1 * std::sin(pi * x); }, [](double x) { return -0.05 * std::sin(pi * x); }}};
}

InitialProfiles rest(std::size_t n) {
    InitialProfiles ip;
    for (std::size_t i = 0; i < n; ++i) {
        ip.densities.push_back([n](double) { return 1.0 / static_cast<double>(n); });
        ip.velocities.push_back([](double) { return 0.0; });
    }
    return ip;
}

GalerkinConfig modes(std::size_t n) {
    GalerkinConfig cfg;
    cfg.mode_count = n;
    return cfg;
}

}  // namespace

TEST(ProjectVelocity, SineIsFirstUnitVector) {
    const auto c = project_velocity([](double x) { return std::sin(pi * x); }, 8, 65);
    EXPECT_NEAR(c(0), 1.0, 1e-10);
    for (Eigen::Index k = 1; k < 8; ++k) EXPECT_NEAR(c(k), 0.0, 1e-10);
}

TEST(ProjectVelocity, ZeroIsZero) {
    const auto c = project_velocity([](double) { return 0.0; }, 5, 41);
    EXPECT_EQ(c.cwiseAbs().maxCoeff(), 0.0);
}

TEST(ProjectVelocity, ParabolaMatchesFourierSineSeries) {
    const std::size_t n = 8, q = 8 * n + 1;
    const auto c = project_velocity([](double x) { return x * (1.0 - x); }, n, q);
    const double h = 1.0 / static_cast<double>(q - 1);
    for (std::size_t k = 1; k <= n; ++k) {
        const double exact = k % 2 == 1 ? 8.0 / std::pow(static_cast<double>(k) * pi, 3) : 0.0;
        // Composite Simpson bound h⁴/180·max|g''''| for g = 2x(1−x) sin(kπx).
        const double w = static_cast<double>(k) * pi;
        const double bound = h * h * h * h / 180.0 * 2.0 * (0.25 * w * w * w * w + 4.0 * w * w * w + 12.0 * w * w);
        EXPECT_NEAR(c(static_cast<Eigen::Index>(k - 1)), exact, bound) << "k = " << k;
    }
}

TEST(Basis, UniformDensityMassMatrixIsHalfIdentity) {
    const Basis basis(6, 49);
    const Field ones(basis.cells(), 1.0);
    const Matrix a = basis.mass_matrix(ones);
    EXPECT_LE((a - 0.5 * Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Basis, WallValuesVanishExactly) {
    for (std::size_t k = 1; k <= 64; ++k) {
        EXPECT_EQ(sine_mode(k, 0.0), 0.0);
        EXPECT_EQ(sine_mode(k, 1.0), 0.0);
    }
}

TEST(ModalRhs, RestIsEquilibrium) {
    const auto cfg = modes(6);
    const Basis basis(6, cfg.nodes());
    const auto s = initial_state(rest(2), cfg);
    const auto r = modal_rhs(s, params_with(coupled()), basis);
    EXPECT_EQ(r.coefficients.cwiseAbs().maxCoeff(), 0.0);
    for (const auto& d : r.densities)
        for (double x : d) EXPECT_EQ(x, 0.0);
}

TEST(ModalRhs, HeatTermOnFirstMode) {
    // ρ ≡ 1, u = sin πx: convection −u u_x = −(π/2) sin 2πx is orthogonal to
    // sin πx, so ċ_1 = −μπ².
    const double mu = 0.8;
    const auto cfg = modes(8);
    const Basis basis(8, cfg.nodes());
    const InitialProfiles ip{{[](double) { return 1.0; }}, {[](double x) { return std::sin(pi * x); }}};
    const auto s = initial_state(ip, cfg);
    Parameters p = params_with(Matrix::Constant(1, 1, mu));
    const auto r = modal_rhs(s, p, basis);
    EXPECT_NEAR(r.coefficients(0, 0), -mu * pi * pi, 1e-10);
    // Convection feeds mode 2 only: ċ_2 = 2∫ −(π/2) sin²(2πx) dx = −π/2.
    EXPECT_NEAR(r.coefficients(0, 1), -pi / 2.0, 1e-10);
    for (Eigen::Index k = 2; k < 8; ++k) EXPECT_NEAR(r.coefficients(0, k), 0.0, 1e-10);
}

TEST(ModalRhs, ManufacturedCoefficientRates) {
    // Oracle: projections of the exact velocity at t ± δ.
    const auto sol = verification::ManufacturedSolution::standard();
    const double t = 0.3, dt = 1e-5;
    auto error = [&](std::size_t n) {
        const auto cfg = modes(n);
        const Basis basis(n, cfg.nodes());
        const std::size_t q = cfg.nodes();
        ModalState s;
        s.time = t;
        s.coefficients = Matrix(2, static_cast<Eigen::Index>(n));
        s.densities.assign(2, Field(basis.cells()));
        Matrix rate(2, static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < 2; ++i) {
            auto u_at = [&](double tau) {
                return project_velocity([&](double x) { return sol.u(i, sol.y_of_x(x, tau), tau); }, n, q);
            };
            s.coefficients.row(static_cast<Eigen::Index>(i)) = u_at(t).transpose();
            rate.row(static_cast<Eigen::Index>(i)) = ((u_at(t + dt) - u_at(t - dt)) / (2 * dt)).transpose();
            for (std::size_t c = 0; c < basis.cells(); ++c) s.densities[i][c] = sol.rho(i, sol.y_of_x(basis.center(c), t), t);
        }
        const auto r = modal_rhs(s, sol.eulerian_params(), basis);
        return (r.coefficients - rate).cwiseAbs().maxCoeff();
    };
    // Spectral accuracy reaches the O(δ²) floor of the oracle by n = 16.
    const double e4 = error(4), e8 = error(8), e16 = error(16);
    EXPECT_LT(e8, e4);
    EXPECT_LE(e16, 1e-8);
}

TEST(GalerkinStep, RestIsFixedPointInOneIteration) {
    const auto cfg = modes(4);
    const GalerkinSolver solver(params_with(coupled()), cfg);
    const auto s = initial_state(rest(2), cfg);
    const auto next = solver.step(s, 1e-3);
    EXPECT_EQ(next.last_iterations, 1);
    EXPECT_EQ(next.coefficients.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(next.densities, s.densities);
}

TEST(GalerkinStep, TighterPicardToleranceMovesStateByLessThanTolerance) {
    auto cfg = modes(8);
    cfg.picard_tol = 1e-8;
    const auto s = initial_state(smooth_mix(), cfg);
    const GalerkinSolver loose(params_with(coupled()), cfg);
    const double dt = loose.stable_dt(s);
    const auto a = loose.step(s, dt);
    cfg.picard_tol = 5e-9;
    const GalerkinSolver tight(params_with(coupled()), cfg);
    const auto b = tight.step(s, dt);
    double diff = (a.coefficients - b.coefficients).cwiseAbs().maxCoeff();
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t c = 0; c < a.densities[i].size(); ++c) diff = std::max(diff, std::abs(a.densities[i][c] - b.densities[i][c]));
    EXPECT_LE(diff, 1e-8);
}

TEST(GalerkinStep, MassConservedPerConstituent) {
    const auto cfg = modes(8);
    const GalerkinSolver solver(params_with(coupled()), cfg);
    auto s = initial_state(smooth_mix(), cfg);
    const double h = solver.basis().spacing();
    auto mass = [&](const Field& f) {
        double m = 0.0;
        for (double x : f) m += x;
        return m * h;
    };
    const double m0 = mass(s.densities[0]), m1 = mass(s.densities[1]);
    for (int n = 0; n < 10; ++n) s = solver.step(s, solver.stable_dt(s));
    EXPECT_NEAR(mass(s.densities[0]), m0, 1e-13);
    EXPECT_NEAR(mass(s.densities[1]), m1, 1e-13);
}

TEST(GalerkinRun, RestIsConstant) {
    RunControl rc;
    rc.horizon = 0.02;
    const auto traj = run_galerkin(rest(2), params_with(coupled()), modes(4), rc);
    EXPECT_EQ(traj.mode_count, 4u);
    for (const auto& st : traj.states)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t k = 0; k < st.cells(); ++k) {
                EXPECT_NEAR(st.densities[i][k], 0.5, 1e-14);
                EXPECT_EQ(st.velocities[i][k], 0.0);
            }
}

TEST(GalerkinRun, LedgerInvariantsOnSmoothMix) {
    RunControl rc;
    rc.horizon = 0.05;
    auto cfg = modes(8);
    const auto traj = run_galerkin(smooth_mix(), params_with(coupled()), cfg, rc);
    ASSERT_FALSE(traj.picard_iterations.empty());
    EXPECT_LE(traj.max_picard_residual, cfg.picard_tol);
    const auto& first = traj.monitors.front();
    double previous = first.energy;
    for (const auto& row : traj.monitors) {
        for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(row.masses[i], first.masses[i], 1e-8 * first.masses[i]);
        EXPECT_LE(row.energy, previous + 1e-10);
        previous = row.energy;
    }
}

TEST(GalerkinRun, ModeRefinementConverges) {
    RunControl rc;
    rc.horizon = 0.05;
    rc.snapshot_interval = 0.05;
    auto run_n = [&](std::size_t n) { return run_galerkin(smooth_mix(), params_with(coupled()), modes(n), rc); };
    const auto ref = run_n(64);
    const double e8 = io::compare(run_n(8), ref).final_linf("u_");
    const double e16 = io::compare(run_n(16), ref).final_linf("u_");
    const double e32 = io::compare(run_n(32), ref).final_linf("u_");
    EXPECT_GT(e8, e16);
    EXPECT_GT(e16, e32);
}

TEST(GalerkinRun, SixteenToThirtyTwoModesShrinksVelocityDifferenceFourfold) {
    RunControl rc;
    rc.horizon = 0.05;
    rc.snapshot_interval = 0.05;
    auto run_n = [&](std::size_t n) { return run_galerkin(smooth_mix(), params_with(coupled()), modes(n), rc); };
    const auto t8 = run_n(8), t16 = run_n(16), t32 = run_n(32);
    const double d1 = io::compare(t8, t16).final_linf("u_");
    const double d2 = io::compare(t16, t32).final_linf("u_");
    EXPECT_GE(d1 / d2, 4.0);
}
