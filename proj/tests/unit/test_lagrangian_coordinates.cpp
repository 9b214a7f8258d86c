#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mfluid/core/fields.hpp"
#include "mfluid/lagrangian/coordinates.hpp"

using namespace mfluid;
using namespace mfluid::lagrangian;
using std::numbers::pi;

namespace {

FieldState sampled(std::size_t cells, std::vector<Profile> rho, std::vector<Profile> u) {
    return sample_state(Grid1D{cells, 1.0, CoordinateKind::eulerian_x}, rho, u);
}

double max_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

const Profile sin_pi = [](double x) { return std::sin(pi * x); };

}  // namespace

TEST(ToLagrangian, UniformUnitDensityIsIdentity) {
    const auto s = sampled(64, {[](double) { return 1.0; }}, {sin_pi});
    const auto l = to_lagrangian(s);
    EXPECT_EQ(l.grid.coordinate_kind, CoordinateKind::lagrangian_y);
    EXPECT_NEAR(l.grid.length, 1.0, 1e-14);
    EXPECT_LE(max_diff(l.densities[0], s.densities[0]), 1e-10);
    EXPECT_LE(max_diff(l.velocities[0], s.velocities[0]), 1e-10);
}

TEST(ToLagrangian, UniformDensityTwoStretchesLinearly) {
    const auto s = sampled(32, {[](double) { return 2.0; }}, {sin_pi});
    const auto map = mass_coordinate(s);
    EXPECT_NEAR(map.total_mass, 2.0, 1e-14);
    for (double x : {0.1, 0.3, 0.77}) EXPECT_NEAR(map.y_of_x(x), 2.0 * x, 1e-13);
    const auto l = to_lagrangian(s);
    EXPECT_NEAR(l.grid.length, 2.0, 1e-14);
    for (double r : l.densities[0]) EXPECT_NEAR(r, 2.0, 1e-12);
}

TEST(ToLagrangian, ClosedFormMassCoordinate) {
    // y(x) = x + (0.5/2π)(1 − cos 2πx): d = 1, y(1/2) = 1/2 + 1/(2π).
    const auto s = sampled(256, {[](double x) { return 1.0 + 0.5 * std::sin(2 * pi * x); }}, {sin_pi});
    const auto map = mass_coordinate(s);
    EXPECT_NEAR(map.total_mass, 1.0, 1e-12);
    // Midpoint sums carry an O(h²) error: h²/24·max|ρ''|/2 ≈ 1.3e-5.
    EXPECT_NEAR(map.y_of_x(0.5), 0.5 + 0.5 / pi, 3e-5);
}

TEST(ToLagrangian, UnitLengthTelescopes) {
    const auto s = sampled(128,
                           {[](double x) { return 0.5 + 0.2 * std::sin(2 * pi * x); },
                            [](double x) { return 0.5 - 0.1 * std::sin(2 * pi * x); }},
                           {sin_pi, sin_pi});
    EXPECT_NEAR(unit_length(to_lagrangian(s)), 1.0, 1e-12);
}

TEST(ToLagrangian, RejectsNonPositiveDensity) {
    auto s = sampled(16, {[](double) { return 1.0; }}, {sin_pi});
    s.densities[0][5] = 0.0;
    EXPECT_THROW((void)to_lagrangian(s), std::domain_error);
}

TEST(ToEulerian, ConstantDensityMapsLinearly) {
    FieldState l = make_state(Grid1D{40, 2.0, CoordinateKind::lagrangian_y}, 1);
    for (std::size_t k = 0; k < 40; ++k) {
        l.densities[0][k] = 2.0;
        l.velocities[0][k] = std::sin(pi * l.grid.center(k) / 2.0);
    }
    double defect = 1.0;
    const auto e = to_eulerian(l, &defect);
    EXPECT_NEAR(defect, 0.0, 1e-14);
    EXPECT_NEAR(e.grid.length, 1.0, 0.0);
    for (std::size_t k = 0; k < 40; ++k) {
        EXPECT_NEAR(e.densities[0][k], 2.0, 1e-12);
        // y = 2x, so u(x) = sin(πx); the velocity is interpolated.
        EXPECT_NEAR(e.velocities[0][k], std::sin(pi * e.grid.center(k)), 1e-4);
    }
}

TEST(ToEulerian, RejectsMassInconsistency) {
    FieldState l = make_state(Grid1D{16, 1.0, CoordinateKind::lagrangian_y}, 1);
    std::fill(l.densities[0].begin(), l.densities[0].end(), 0.5);  // ∫ dy/ρ = 2
    EXPECT_THROW((void)to_eulerian(l), std::domain_error);
}

TEST(ToEulerian, RecoversClosedFormDensity) {
    const Profile rho = [](double x) { return 1.0 + 0.5 * std::sin(2 * pi * x); };
    const std::size_t cells = 256;
    const auto l = lagrangian_from_profiles(InitialProfiles{{rho}, {sin_pi}}, cells);
    const auto e = to_eulerian(l);
    // Against exact cell averages (1/h)∫ρ dx = 1 + 0.5(cos 2πa − cos 2πb)/(2πh).
    const double h = 1.0 / static_cast<double>(cells);
    double err = 0.0;
    for (std::size_t k = 0; k < cells; ++k) {
        const double a = h * static_cast<double>(k), b = a + h;
        const double avg = 1.0 + 0.5 * (std::cos(2 * pi * a) - std::cos(2 * pi * b)) / (2 * pi * h);
        err = std::max(err, std::abs(e.densities[0][k] - avg));
    }
    EXPECT_LE(err, 1e-6);
}

namespace {

double round_trip_error(std::size_t cells) {
    const auto s = sampled(cells,
                           {[](double x) { return 0.5 + 0.2 * std::sin(2 * pi * x); },
                            [](double x) { return 0.5 - 0.1 * std::cos(2 * pi * x); }},
                           {sin_pi, [](double x) { return -0.05 * std::sin(2 * pi * x); }});
    const auto back = to_eulerian(to_lagrangian(s));
    double e = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        e = std::max(e, max_diff(back.densities[i], s.densities[i]));
        e = std::max(e, max_diff(back.velocities[i], s.velocities[i]));
    }
    return e;
}

}  // namespace

TEST(RoundTrip, SmoothFieldsAt256Cells) { EXPECT_LE(round_trip_error(256), 1e-8); }

TEST(RoundTrip, ConvergesAtLeastThirdOrder) {
    const double e128 = round_trip_error(128), e256 = round_trip_error(256);
    EXPECT_GE(std::log2(e128 / e256), 3.0);
}

TEST(RoundTrip, SteepDataStaysPositive) {
    // A near-jump defeats the high-order maps; the limited fallback must keep
    // every density positive and the length exact.
    const auto s = sampled(64,
                           {[](double x) { return x < 0.5 ? 1.0 : 1e-3; }, [](double x) { return x < 0.3 ? 1e-3 : 0.5; }},
                           {sin_pi, sin_pi});
    const auto l = to_lagrangian(s);
    EXPECT_NEAR(unit_length(l), 1.0, 1e-10);
    for (const auto& rho : l.densities)
        for (double r : rho) EXPECT_GE(r, 0.0);
    const auto back = to_eulerian(l);
    for (const auto& rho : back.densities)
        for (double r : rho) EXPECT_GE(r, 0.0);
    // Per-constituent masses shift by the interpolation error (the cell
    // fractions are renormalised to keep the length exact); the total may not.
    double dm = 0.0;
    for (std::size_t k = 0; k < 64; ++k) dm += back.densities[0][k] + back.densities[1][k] - s.densities[0][k] - s.densities[1][k];
    EXPECT_NEAR(dm / 64.0, 0.0, 1e-12);
}

TEST(LagrangianFromProfiles, TotalMassAndUnitLength) {
    const InitialProfiles ip{{[](double x) { return 0.5 + 0.2 * std::sin(2 * pi * x); },
                              [](double x) { return 0.5 - 0.1 * std::sin(2 * pi * x); }},
                             {sin_pi, sin_pi}};
    const auto l = lagrangian_from_profiles(ip, 128);
    EXPECT_NEAR(l.grid.length, 1.0, 1e-12);
    EXPECT_NEAR(unit_length(l), 1.0, 1e-12);
    for (const auto& rho : l.densities)
        for (double r : rho) EXPECT_GT(r, 0.0);
}

TEST(LagrangianFromProfiles, ConstituentMassesMatchIntegrals) {
    const InitialProfiles ip{{[](double x) { return 0.3 + 0.1 * x; }, [](double x) { return 0.7 - 0.2 * x * x; }},
                             {sin_pi, sin_pi}};
    const auto l = lagrangian_from_profiles(ip, 64);
    const Field rho = total_density(l);
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < l.cells(); ++k) {
        m1 += l.densities[0][k] / rho[k];
        m2 += l.densities[1][k] / rho[k];
    }
    const double h = l.grid.spacing();
    EXPECT_NEAR(m1 * h, 0.35, 1e-12);
    EXPECT_NEAR(m2 * h, 0.7 - 0.2 / 3.0, 1e-12);
}
