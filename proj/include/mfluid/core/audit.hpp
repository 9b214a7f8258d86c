#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "mfluid/core/types.hpp"

namespace mfluid {

namespace detail {

inline double inf_norm(const Matrix& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
}

struct DefinitenessProbe {
    double min_eigenvalue = 0.0;
    Vector min_eigenvector;
    double threshold = 0.0;  // ε_pd = 1e-12·‖A‖_∞
};

/// Smallest eigenpair of the symmetric part of `a`.
inline DefinitenessProbe probe(const Matrix& a) {
    const Matrix sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    DefinitenessProbe p;
    p.min_eigenvalue = es.eigenvalues()(0);
    p.min_eigenvector = es.eigenvectors().col(0);
    p.threshold = 1e-12 * inf_norm(a);
    return p;
}

inline bool is_upper_triangular(const Matrix& a) {
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < i; ++j)
            if (a(i, j) != 0.0) return false;
    return true;
}

inline bool is_lower_triangular(const Matrix& a) { return is_upper_triangular(a.transpose()); }

}  // namespace detail

/// Largest eigenvalue of the symmetric part of `a`.
[[nodiscard]] inline double lambda_max(const Matrix& a) {
    const Matrix sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(sym.rows() - 1);
}

/// Checks the admissibility conditions of a viscosity pair:
///   second law  : nΛ + 2M ⪰ 0 and M ⪰ 0
///   coercivity  : Λ + 2M ≻ 0 and M ≻ 0
/// Strict conditions require λ_min > ε_pd, non-strict ones λ_min ≥ −ε_pd, with
/// ε_pd = 1e-12·‖A‖_∞ of the matrix under test. When a condition fails the
/// eigenvector of its most negative eigenvalue is reported as the witness.
[[nodiscard]] inline MatrixAuditReport audit_viscosity(const GeneralViscosityPair& pair) {
    const Matrix& lam = pair.lambda_matrix;
    const Matrix& mu = pair.mu_matrix;
    if (lam.rows() != lam.cols() || mu.rows() != mu.cols() || lam.rows() != mu.rows() || mu.rows() == 0) {
        throw std::invalid_argument("audit_viscosity: matrices must be square and of equal, non-zero size");
    }

    MatrixAuditReport r;
    r.symmetric = (mu == mu.transpose()) && (lam == lam.transpose());

    const Matrix second_law = static_cast<double>(pair.flow_dim) * lam + 2.0 * mu;
    const Matrix total = lam + 2.0 * mu;
    const auto pm = detail::probe(mu);
    const auto ps = detail::probe(second_law);
    const auto pt = detail::probe(total);
    r.min_eigenvalues["M"] = pm.min_eigenvalue;
    r.min_eigenvalues["n*Lambda+2M"] = ps.min_eigenvalue;
    r.min_eigenvalues["Lambda+2M"] = pt.min_eigenvalue;

    const bool mu_pd = pm.min_eigenvalue > pm.threshold;
    const bool mu_psd = pm.min_eigenvalue >= -pm.threshold;
    const bool second_psd = ps.min_eigenvalue >= -ps.threshold;
    const bool total_pd = pt.min_eigenvalue > pt.threshold;

    r.positive_definite = mu_pd;
    r.second_law_ok = second_psd && mu_psd;
    r.coercive = total_pd && mu_pd;
    r.diagonal = mu.isDiagonal(0.0) && lam.isDiagonal(0.0);
    r.triangular = detail::is_upper_triangular(total) || detail::is_lower_triangular(total);

    if (!mu_pd) {
        r.witness = pm.min_eigenvector;
        r.failed_condition = "M positive definite";
    } else if (!second_psd) {
        r.witness = ps.min_eigenvector;
        r.failed_condition = "n*Lambda+2M positive semidefinite";
    } else if (!total_pd) {
        r.witness = pt.min_eigenvector;
        r.failed_condition = "Lambda+2M positive definite";
    } else if (!r.symmetric) {
        // Row with the largest asymmetry.
        const Matrix skew = (mu - mu.transpose()).cwiseAbs() + (lam - lam.transpose()).cwiseAbs();
        Eigen::Index row = 0, col = 0;
        skew.maxCoeff(&row, &col);
        r.witness = Vector::Unit(mu.rows(), row);
        r.failed_condition = "symmetry";
    }
    return r;
}

/// Parameters of the single fluid obtained when N identical constituents
/// (ρ_i = ρ/N, u_i = u) share a viscosity matrix with equal row sums s.
/// Multiplying each momentum equation by N gives ρ(u_t + u u_x) + NK ∂_x ρ^γ = N s u_xx,
/// hence viscosity N·s and pressure coefficient N·K. Absent when the row sums
/// differ by more than ε_eq = 1e-12·‖M‖_∞.
[[nodiscard]] inline std::optional<Parameters> symmetric_reduction_check(const Parameters& params) {
    const Matrix& mu = params.viscosity;
    const Vector sums = mu.rowwise().sum();
    const double eps = 1e-12 * detail::inf_norm(mu);
    if (sums.maxCoeff() - sums.minCoeff() > eps) return std::nullopt;

    const double n = static_cast<double>(params.n_constituents);
    Parameters mono;
    mono.n_constituents = 1;
    mono.pressure_coeff = n * params.pressure_coeff;
    mono.adiabatic_index = params.adiabatic_index;
    mono.viscosity = Matrix::Constant(1, 1, n * sums(0));
    mono.horizon = params.horizon;
    return mono;
}

inline std::string format_vector(const Vector& v) {
    std::ostringstream os;
    os.precision(6);
    os << "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
    os << ")";
    return os.str();
}

/// Enforces the model hypotheses on the constants: K > 0, γ > 1 and a symmetric
/// positive definite viscosity matrix of size N. The horizon is checked by the
/// scenario parser; solvers accept T = 0.
inline void validate_parameters(const Parameters& p) {
    if (p.n_constituents < 1) throw ConfigError("n_constituents must be at least 1");
    if (!(p.pressure_coeff > 0.0)) throw ConfigError("pressure_coeff must be positive (K > 0)");
    if (!(p.adiabatic_index > 1.0)) throw ConfigError("adiabatic_index must exceed 1");
    if (!(p.horizon >= 0.0)) throw ConfigError("horizon must be non-negative");
    const auto n = static_cast<Eigen::Index>(p.n_constituents);
    if (p.viscosity.rows() != n || p.viscosity.cols() != n) {
        throw ConfigError("viscosity matrix must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    if (p.viscosity != p.viscosity.transpose()) {
        throw ConfigError("viscosity matrix must be symmetric");
    }
    GeneralViscosityPair pair{Matrix::Zero(n, n), p.viscosity, 1};
    const auto report = audit_viscosity(pair);
    if (!report.positive_definite) {
        throw ConfigError("viscosity matrix must be positive definite: smallest eigenvalue " +
                          std::to_string(report.min_eigenvalues.at("M")) + ", witness " +
                          format_vector(*report.witness));
    }
}

}  // namespace mfluid
