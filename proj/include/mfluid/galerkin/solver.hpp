#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "mfluid/core/audit.hpp"
#include "mfluid/core/driver.hpp"
#include "mfluid/core/numerics.hpp"
#include "mfluid/core/types.hpp"
#include "mfluid/eulerian/solver.hpp"
#include "mfluid/lagrangian/coordinates.hpp"

// Sine-Galerkin velocities u_i = Σ_k c_ik sin(kπx) coupled to densities held
// as averages over the Q−1 cells between consecutive quadrature nodes. The
// continuity equations are advanced in flux form with the face velocities
// taken from the expansion, so per-constituent mass is conserved to round-off.
// Integrals against the basis use the midpoint rule on the same cells.

namespace mfluid::galerkin {

using std::numbers::pi;

struct GalerkinConfig {
    std::size_t mode_count = 16;
    std::size_t quadrature_points = 0;  // 0 selects 8n + 1
    double picard_tol = 1e-10;
    int picard_max_iters = 50;
    double cfl = 0.4;
    double density_floor = 1e-10;

    [[nodiscard]] std::size_t nodes() const { return quadrature_points ? quadrature_points : 8 * mode_count + 1; }
};

inline void validate(const GalerkinConfig& cfg) {
    if (cfg.mode_count < 1) throw ConfigError("mode_count must be at least 1");
    const std::size_t q = cfg.nodes();
    if (q % 2 == 0 || q < 2 * cfg.mode_count + 1) {
        throw ConfigError("quadrature_points must be odd and at least 2n + 1");
    }
    if (!(cfg.picard_tol > 0.0)) throw ConfigError("picard_tol must be positive");
    if (cfg.picard_max_iters < 1) throw ConfigError("picard_max_iters must be at least 1");
    if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0)) throw ConfigError("cfl must lie in (0, 1]");
    if (!(cfg.density_floor > 0.0)) throw ConfigError("density_floor must be positive");
}

struct ModalState {
    double time = 0.0;
    Matrix coefficients;          // N × n
    std::vector<Field> densities; // N arrays of cell averages, Q − 1 cells
    int last_iterations = 0;
    double last_residual = 0.0;

    [[nodiscard]] std::size_t constituents() const { return densities.size(); }
};

/// sin(kπx), evaluated through the reflection about x = 1/2 so that the value
/// at x = 1 is exactly zero.
[[nodiscard]] inline double sine_mode(std::size_t k, double x) {
    if (x <= 0.5) return std::sin(static_cast<double>(k) * pi * x);
    const double s = std::sin(static_cast<double>(k) * pi * (1.0 - x));
    return k % 2 == 1 ? s : -s;
}

/// c_k = 2 ∫_0^1 u sin(kπx) dx by composite Simpson over equally spaced nodes
/// x_j = j/(Q−1), j = 0..Q−1.
[[nodiscard]] inline Vector project_velocity(std::span<const double> u_nodes, std::size_t n) {
    const std::size_t q = u_nodes.size();
    const auto w = simpson_weights(q);
    Vector c = Vector::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t k = 1; k <= n; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < q; ++j) {
            acc += w[j] * u_nodes[j] * sine_mode(k, static_cast<double>(j) / static_cast<double>(q - 1));
        }
        c(static_cast<Eigen::Index>(k - 1)) = 2.0 * acc;
    }
    return c;
}

[[nodiscard]] inline Vector project_velocity(const Profile& u, std::size_t n, std::size_t q) {
    std::vector<double> nodes(q);
    for (std::size_t j = 0; j < q; ++j) nodes[j] = u(static_cast<double>(j) / static_cast<double>(q - 1));
    return project_velocity(nodes, n);
}

struct ModalRates {
    Matrix coefficients;
    std::vector<Field> densities;
};

/// Basis tables on the density cells and faces.
class Basis {
public:
    Basis(std::size_t n, std::size_t q) : n_(n), cells_(q - 1) {
        const auto nn = static_cast<Eigen::Index>(n);
        const auto mc = static_cast<Eigen::Index>(cells_);
        h_ = 1.0 / static_cast<double>(cells_);
        sin_ = Matrix(mc, nn);
        dsin_ = Matrix(mc, nn);
        cos_ = Matrix(mc, 2 * nn + 1);
        face_sin_ = Matrix(mc + 1, nn);
        for (Eigen::Index c = 0; c < mc; ++c) {
            const double x = (static_cast<double>(c) + 0.5) * h_;
            for (Eigen::Index k = 1; k <= nn; ++k) {
                sin_(c, k - 1) = sine_mode(static_cast<std::size_t>(k), x);
                dsin_(c, k - 1) = static_cast<double>(k) * pi * std::cos(static_cast<double>(k) * pi * x);
            }
            for (Eigen::Index p = 0; p <= 2 * nn; ++p) cos_(c, p) = std::cos(static_cast<double>(p) * pi * x);
        }
        for (Eigen::Index f = 0; f <= mc; ++f) {
            const double x = static_cast<double>(f) / static_cast<double>(cells_);
            for (Eigen::Index k = 1; k <= nn; ++k) face_sin_(f, k - 1) = sine_mode(static_cast<std::size_t>(k), x);
        }
        face_sin_.row(0).setZero();
        face_sin_.row(mc).setZero();
    }

    [[nodiscard]] std::size_t modes() const { return n_; }
    [[nodiscard]] std::size_t cells() const { return cells_; }
    [[nodiscard]] double spacing() const { return h_; }
    [[nodiscard]] double center(std::size_t c) const { return (static_cast<double>(c) + 0.5) * h_; }
    [[nodiscard]] const Matrix& sin() const { return sin_; }
    [[nodiscard]] const Matrix& dsin() const { return dsin_; }
    [[nodiscard]] const Matrix& cos() const { return cos_; }
    [[nodiscard]] const Matrix& face_sin() const { return face_sin_; }

    /// A_km = ∫ ρ φ_k φ_m dx = ½(C_{|k−m|} − C_{k+m}), C_p = ∫ ρ cos(pπx) dx.
    [[nodiscard]] Matrix mass_matrix(std::span<const double> rho) const {
        const Eigen::Map<const Vector> r(rho.data(), static_cast<Eigen::Index>(rho.size()));
        const Vector cp = h_ * (cos_.transpose() * r);
        const auto nn = static_cast<Eigen::Index>(n_);
        Matrix a(nn, nn);
        for (Eigen::Index k = 1; k <= nn; ++k)
            for (Eigen::Index m = 1; m <= nn; ++m) a(k - 1, m - 1) = 0.5 * (cp(std::abs(k - m)) - cp(k + m));
        return a;
    }

private:
    std::size_t n_, cells_;
    double h_;
    Matrix sin_, dsin_, cos_, face_sin_;
};

namespace detail {

inline Vector as_vector(const Field& f) { return Eigen::Map<const Vector>(f.data(), static_cast<Eigen::Index>(f.size())); }

/// Load vector without the viscous term:
///   b_ik = ∫ [−ρ_i v ∂_x u_i + ρ_i f_i] φ_k dx + K kπ ∫ ρ^γ cos(kπx) dx,
/// the pressure term after integrating by parts against φ_k(0) = φ_k(1) = 0.
inline Matrix load(const Basis& basis, const Matrix& coeffs, const std::vector<Field>& rho, double t,
                   const Parameters& params) {
    const std::size_t n_const = rho.size();
    const auto mc = static_cast<Eigen::Index>(basis.cells());
    const double h = basis.spacing();
    const Matrix u = basis.sin() * coeffs.transpose();    // cells × N
    const Matrix du = basis.dsin() * coeffs.transpose();  // cells × N
    const Vector v = u.rowwise().mean();

    Vector p = Vector::Zero(mc);
    for (const auto& r : rho) p += as_vector(r);
    p = p.array().pow(params.adiabatic_index).matrix();
    // ∫ φ_k' dx = 0, so removing the mean changes nothing analytically and
    // keeps uniform states exact equilibria in floating point.
    p.array() -= p.mean();

    Matrix b(static_cast<Eigen::Index>(n_const), static_cast<Eigen::Index>(basis.modes()));
    Vector w(mc);
    for (std::size_t i = 0; i < n_const; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        for (Eigen::Index c = 0; c < mc; ++c) {
            double f = 0.0;
            if (params.forcing) f = params.forcing(i, basis.center(static_cast<std::size_t>(c)), t);
            w(c) = rho[i][static_cast<std::size_t>(c)] * (f - v(c) * du(c, ii));
        }
        b.row(ii) = h * (basis.sin().transpose() * w).transpose();
        for (Eigen::Index k = 1; k <= b.cols(); ++k) {
            b(ii, k - 1) += params.pressure_coeff * static_cast<double>(k) * pi * h * basis.cos().col(k).dot(p);
        }
    }
    return b;
}

inline Field face_velocity(const Basis& basis, const Matrix& coeffs) {
    const Vector mean = coeffs.colwise().mean().transpose();
    const Vector vf = basis.face_sin() * mean;
    return Field(vf.data(), vf.data() + vf.size());
}

inline void check_densities(const std::vector<Field>& rho, double floor, double t) {
    for (std::size_t i = 0; i < rho.size(); ++i)
        for (double r : rho[i]) {
            if (r > floor) continue;
            if (!std::isfinite(r)) throw BlowUpError("non-finite density", t);
            throw PositivityError("density of constituent " + std::to_string(i + 1) + " fell to " + std::to_string(r), t);
        }
}

}  // namespace detail

/// Explicit time derivatives of the semi-discrete system: A^{(i)} ċ_i = b_i − ½(kπ)² Σ_j μ_ij c_jk,
/// and the flux-form continuity rates of the cell densities.
[[nodiscard]] inline ModalRates modal_rhs(const ModalState& s, const Parameters& params, const Basis& basis) {
    const std::size_t n_const = s.constituents();
    const auto nn = static_cast<Eigen::Index>(basis.modes());
    ModalRates r;
    Matrix b = detail::load(basis, s.coefficients, s.densities, s.time, params);
    for (Eigen::Index k = 1; k <= nn; ++k) {
        const double kk = 0.5 * std::pow(static_cast<double>(k) * pi, 2);
        b.col(k - 1) -= kk * params.viscosity * s.coefficients.col(k - 1);
    }
    r.coefficients = Matrix(static_cast<Eigen::Index>(n_const), nn);
    for (std::size_t i = 0; i < n_const; ++i) {
        Eigen::LLT<Matrix> llt(basis.mass_matrix(s.densities[i]));
        if (llt.info() != Eigen::Success) throw PositivityError("singular Galerkin mass matrix", s.time);
        r.coefficients.row(static_cast<Eigen::Index>(i)) =
            llt.solve(b.row(static_cast<Eigen::Index>(i)).transpose()).transpose();
    }
    const Field vf = detail::face_velocity(basis, s.coefficients);
    r.densities.assign(n_const, Field(basis.cells()));
    for (std::size_t i = 0; i < n_const; ++i) {
        eulerian::continuity_rates(s.densities[i], vf, basis.spacing(), eulerian::Reconstruction::upwind_linear,
                                   r.densities[i]);
    }
    return r;
}

/// Initial modal state: Simpson projection of u_0i on the Q nodes and
/// three-point Simpson cell averages of ρ_0i.
[[nodiscard]] inline ModalState initial_state(const InitialProfiles& p, const GalerkinConfig& cfg) {
    const std::size_t q = cfg.nodes();
    const std::size_t cells = q - 1;
    const double h = 1.0 / static_cast<double>(cells);
    ModalState s;
    s.coefficients = Matrix(static_cast<Eigen::Index>(p.densities.size()), static_cast<Eigen::Index>(cfg.mode_count));
    s.densities.assign(p.densities.size(), Field(cells));
    for (std::size_t i = 0; i < p.densities.size(); ++i) {
        s.coefficients.row(static_cast<Eigen::Index>(i)) = project_velocity(p.velocities[i], cfg.mode_count, q).transpose();
        for (std::size_t c = 0; c < cells; ++c) {
            const double a = static_cast<double>(c) * h, b = a + h;
            s.densities[i][c] = (p.densities[i](a) + 4.0 * p.densities[i](0.5 * (a + b)) + p.densities[i](b)) / 6.0;
        }
    }
    return s;
}

/// Implicit-midpoint stepping with a Picard iteration on (c, ρ). Within each
/// sweep the viscous term is treated linearly implicitly, so the sweep solves
/// the symmetric positive definite system
///   [A_mid/dt ⊕ ¼(kπ)² M] c^{new} = A_mid c^n/dt + b(c_mid, ρ_mid) − ¼(kπ)² M c^n,
/// and then transports the densities with v(½(c^n + c^{new})).
class GalerkinSolver {
public:
    using State = ModalState;

    GalerkinSolver(Parameters params, GalerkinConfig cfg)
        : params_(std::move(params)), cfg_(cfg), basis_((validate(cfg), cfg.mode_count), cfg.nodes()) {
        validate_parameters(params_);
    }

    [[nodiscard]] const Basis& basis() const { return basis_; }
    [[nodiscard]] const GalerkinConfig& config() const { return cfg_; }

    /// dt = cfl · min(h_q / max|v|, 1/(c_max n π)), c² = K γ ρ^γ (1/N) Σ_i 1/ρ_i.
    [[nodiscard]] double stable_dt(const ModalState& s) const {
        const Field vf = detail::face_velocity(basis_, s.coefficients);
        double vmax = 1e-12;
        for (double v : vf) vmax = std::max(vmax, std::abs(v));
        double c2 = 0.0;
        const double n = static_cast<double>(s.constituents());
        for (std::size_t c = 0; c < basis_.cells(); ++c) {
            double rho = 0.0, inv = 0.0;
            for (const auto& r : s.densities) {
                rho += r[c];
                inv += 1.0 / r[c];
            }
            c2 = std::max(c2, params_.pressure_coeff * params_.adiabatic_index * std::pow(rho, params_.adiabatic_index) * inv / n);
        }
        const double acoustic = 1.0 / (std::sqrt(c2) * static_cast<double>(cfg_.mode_count) * pi);
        return cfg_.cfl * std::min(basis_.spacing() / vmax, acoustic);
    }

    [[nodiscard]] ModalState step(const ModalState& s, double dt) const {
        const std::size_t n_const = s.constituents();
        const auto nn = static_cast<Eigen::Index>(basis_.modes());
        const auto big = static_cast<Eigen::Index>(n_const) * nn;
        const double t_mid = s.time + 0.5 * dt;

        Matrix c_it = s.coefficients;
        std::vector<Field> rho_it = s.densities;
        std::vector<Field> rho_mid(n_const, Field(basis_.cells()));
        double prev_res = INFINITY;
        int growth = 0;

        for (int it = 1; it <= cfg_.picard_max_iters; ++it) {
            for (std::size_t i = 0; i < n_const; ++i)
                for (std::size_t c = 0; c < basis_.cells(); ++c) rho_mid[i][c] = 0.5 * (s.densities[i][c] + rho_it[i][c]);
            detail::check_densities(rho_mid, cfg_.density_floor, t_mid);

            const Matrix c_mid = 0.5 * (s.coefficients + c_it);
            const Matrix b = detail::load(basis_, c_mid, rho_mid, t_mid, params_);

            Matrix sys = Matrix::Zero(big, big);
            Vector rhs(big);
            for (std::size_t i = 0; i < n_const; ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                const Matrix a = basis_.mass_matrix(rho_mid[i]) / dt;
                sys.block(ii * nn, ii * nn, nn, nn) = a;
                rhs.segment(ii * nn, nn) = a * s.coefficients.row(ii).transpose() + b.row(ii).transpose();
                for (std::size_t j = 0; j < n_const; ++j) {
                    const auto jj = static_cast<Eigen::Index>(j);
                    const double mu = params_.viscosity(ii, jj);
                    for (Eigen::Index k = 1; k <= nn; ++k) {
                        const double kk = 0.25 * std::pow(static_cast<double>(k) * pi, 2) * mu;
                        sys(ii * nn + k - 1, jj * nn + k - 1) += kk;
                        rhs(ii * nn + k - 1) -= kk * s.coefficients(jj, k - 1);
                    }
                }
            }
            Eigen::LLT<Matrix> llt(sys);
            if (llt.info() != Eigen::Success) throw PositivityError("singular Galerkin mass matrix", t_mid);
            const Vector sol = llt.solve(rhs);
            Matrix c_new(static_cast<Eigen::Index>(n_const), nn);
            for (std::size_t i = 0; i < n_const; ++i) {
                c_new.row(static_cast<Eigen::Index>(i)) = sol.segment(static_cast<Eigen::Index>(i) * nn, nn).transpose();
            }

            const Field vf = detail::face_velocity(basis_, 0.5 * (s.coefficients + c_new));
            std::vector<Field> rho_new = s.densities;
            Field rate(basis_.cells());
            for (std::size_t i = 0; i < n_const; ++i) {
                eulerian::continuity_rates(rho_mid[i], vf, basis_.spacing(), eulerian::Reconstruction::upwind_linear, rate);
                for (std::size_t c = 0; c < basis_.cells(); ++c) rho_new[i][c] += dt * rate[c];
            }

            double res = (c_new - c_it).cwiseAbs().maxCoeff();
            for (std::size_t i = 0; i < n_const; ++i)
                for (std::size_t c = 0; c < basis_.cells(); ++c) res = std::max(res, std::abs(rho_new[i][c] - rho_it[i][c]));
            if (!std::isfinite(res)) throw BlowUpError("non-finite Picard iterate", t_mid);
            c_it = std::move(c_new);
            rho_it = std::move(rho_new);

            if (res <= cfg_.picard_tol) {
                ModalState out;
                out.time = s.time + dt;
                out.coefficients = std::move(c_it);
                out.densities = std::move(rho_it);
                out.last_iterations = it;
                out.last_residual = res;
                detail::check_densities(out.densities, cfg_.density_floor, out.time);
                return out;
            }
            growth = res > prev_res ? growth + 1 : 0;
            if (growth >= 5) {
                throw IterationError("Picard iteration diverging (residual " + std::to_string(res) + ")", s.time);
            }
            prev_res = res;
        }
        throw IterationError("Picard iteration did not reach tolerance in " + std::to_string(cfg_.picard_max_iters) +
                                 " iterations",
                             s.time);
    }

    /// Reconstructed fields on the density cells.
    [[nodiscard]] FieldState snapshot(const ModalState& s) const {
        FieldState out = make_state(Grid1D{basis_.cells(), 1.0, CoordinateKind::eulerian_x}, s.constituents(), s.time);
        out.densities = s.densities;
        const Matrix u = basis_.sin() * s.coefficients.transpose();
        for (std::size_t i = 0; i < s.constituents(); ++i)
            for (std::size_t c = 0; c < basis_.cells(); ++c) {
                out.velocities[i][c] = u(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i));
            }
        return out;
    }

    [[nodiscard]] double time_of(const ModalState& s) const { return s.time; }

    void record_step(const ModalState& s, Trajectory& traj) const {
        traj.picard_iterations.push_back(s.last_iterations);
        traj.max_picard_residual = std::max(traj.max_picard_residual, s.last_residual);
    }

private:
    Parameters params_;
    GalerkinConfig cfg_;
    Basis basis_;
};

[[nodiscard]] inline Trajectory run_galerkin(const InitialProfiles& profiles, const Parameters& params,
                                             const GalerkinConfig& cfg, const RunControl& rc) {
    GalerkinSolver solver(params, cfg);
    Trajectory traj = drive(initial_state(profiles, cfg), solver, params, rc, "galerkin");
    traj.mode_count = cfg.mode_count;
    return traj;
}

}  // namespace mfluid::galerkin
