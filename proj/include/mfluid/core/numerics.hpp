#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace mfluid {

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch–Carlson slopes
/// with the weighted harmonic mean of Fritsch–Butland). Monotone data give a
/// monotone interpolant and positive data stay positive between nodes.
class MonotoneCubic {
public:
    /// monotone: limited Fritsch–Butland slopes (shape preserving, O(h³) only
    /// away from extrema). spline: not-a-knot cubic spline slopes, O(h⁴) but
    /// unlimited. spline_if_monotone: spline slopes when they keep every
    /// interval monotone (Fritsch–Carlson α² + β² ≤ 9), else limited slopes.
    enum class Slopes { monotone, spline, spline_if_monotone };

    MonotoneCubic() = default;

    MonotoneCubic(std::vector<double> x, std::vector<double> y, Slopes rule = Slopes::monotone)
        : x_(std::move(x)), y_(std::move(y)) {
        if (x_.size() != y_.size() || x_.size() < 2) {
            throw std::invalid_argument("MonotoneCubic: need at least two nodes of matching size");
        }
        for (std::size_t k = 0; k + 1 < x_.size(); ++k) {
            if (!(x_[k + 1] > x_[k])) throw std::invalid_argument("MonotoneCubic: abscissae must increase strictly");
        }
        if (rule == Slopes::monotone || x_.size() < 4) {
            compute_slopes();
        } else {
            spline_slopes();
            if (rule == Slopes::spline_if_monotone && !spline_is_monotone()) compute_slopes();
        }
    }

    [[nodiscard]] double operator()(double t) const {
        const std::size_t n = x_.size();
        std::size_t k;
        if (t <= x_.front()) {
            k = 0;
        } else if (t >= x_.back()) {
            k = n - 2;
        } else {
            k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
        }
        const double h = x_[k + 1] - x_[k];
        const double s = (t - x_[k]) / h;
        const double s2 = s * s;
        const double s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1;
        const double h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2;
        const double h11 = s3 - s2;
        return h00 * y_[k] + h10 * h * d_[k] + h01 * y_[k + 1] + h11 * h * d_[k + 1];
    }

    [[nodiscard]] const std::vector<double>& nodes() const { return x_; }

private:
    static double sign(double v) { return (v > 0) - (v < 0); }

    void compute_slopes() {
        const std::size_t n = x_.size();
        d_.assign(n, 0.0);
        std::vector<double> h(n - 1), delta(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            h[k] = x_[k + 1] - x_[k];
            delta[k] = (y_[k + 1] - y_[k]) / h[k];
        }
        if (n == 2) {
            d_[0] = d_[1] = delta[0];
            return;
        }
        for (std::size_t k = 1; k + 1 < n; ++k) {
            if (delta[k - 1] * delta[k] <= 0.0) {
                d_[k] = 0.0;
            } else {
                const double w1 = 2 * h[k] + h[k - 1];
                const double w2 = h[k] + 2 * h[k - 1];
                d_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
            }
        }
        d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }

    // Not-a-knot end conditions written for the node derivatives; the
    // system stays tridiagonal.
    void spline_slopes() {
        const std::size_t n = x_.size();
        std::vector<double> h(n - 1), delta(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            h[k] = x_[k + 1] - x_[k];
            delta[k] = (y_[k + 1] - y_[k]) / h[k];
        }
        std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), r(n, 0.0);
        b[0] = h[1];
        c[0] = h[0] + h[1];
        r[0] = ((h[0] + 2 * c[0]) * h[1] * delta[0] + h[0] * h[0] * delta[1]) / c[0];
        for (std::size_t k = 1; k + 1 < n; ++k) {
            a[k] = h[k];
            b[k] = 2 * (h[k - 1] + h[k]);
            c[k] = h[k - 1];
            r[k] = 3 * (h[k] * delta[k - 1] + h[k - 1] * delta[k]);
        }
        const double hl = h[n - 2], hp = h[n - 3];
        a[n - 1] = hl + hp;
        b[n - 1] = hp;
        r[n - 1] = (hl * hl * delta[n - 3] + (2 * a[n - 1] + hl) * hp * delta[n - 2]) / a[n - 1];
        for (std::size_t k = 1; k < n; ++k) {
            const double m = a[k] / b[k - 1];
            b[k] -= m * c[k - 1];
            r[k] -= m * r[k - 1];
        }
        d_.assign(n, 0.0);
        d_[n - 1] = r[n - 1] / b[n - 1];
        for (std::size_t k = n - 1; k-- > 0;) d_[k] = (r[k] - c[k] * d_[k + 1]) / b[k];
    }

    [[nodiscard]] bool spline_is_monotone() const {
        for (std::size_t k = 0; k + 1 < x_.size(); ++k) {
            const double delta = (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]);
            if (delta == 0.0) {
                if (d_[k] != 0.0 || d_[k + 1] != 0.0) return false;
                continue;
            }
            const double al = d_[k] / delta, be = d_[k + 1] / delta;
            if (al < 0.0 || be < 0.0 || al * al + be * be > 9.0) return false;
        }
        return true;
    }

    static double end_slope(double h0, double h1, double m0, double m1) {
        double d = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if (sign(d) != sign(m0)) {
            d = 0.0;
        } else if (sign(m0) != sign(m1) && std::abs(d) > 3 * std::abs(m0)) {
            d = 3 * m0;
        }
        return d;
    }

    std::vector<double> x_, y_, d_;
};

/// Piecewise Lagrange interpolation of the given degree on the nodes nearest
/// each interval (stencil shifted inwards at the ends). Continuous, O(h^(p+1)),
/// not shape preserving: callers that need monotone output must check it.
class LocalPolynomial {
public:
    LocalPolynomial() = default;

    LocalPolynomial(std::vector<double> x, std::vector<double> y, std::size_t degree = 5)
        : x_(std::move(x)), y_(std::move(y)) {
        if (x_.size() != y_.size() || x_.size() < 2) {
            throw std::invalid_argument("LocalPolynomial: need at least two nodes of matching size");
        }
        for (std::size_t k = 0; k + 1 < x_.size(); ++k) {
            if (!(x_[k + 1] > x_[k])) throw std::invalid_argument("LocalPolynomial: abscissae must increase strictly");
        }
        width_ = std::min(degree + 1, x_.size());
    }

    [[nodiscard]] double operator()(double t) const {
        const std::size_t n = x_.size();
        std::size_t k;
        if (t <= x_.front()) {
            k = 0;
        } else if (t >= x_.back()) {
            k = n - 2;
        } else {
            k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
        }
        // Stencil [lo, lo + width) centred on interval k.
        const std::size_t left = (width_ - 2) / 2;
        std::size_t lo = k >= left ? k - left : 0;
        lo = std::min(lo, n - width_);
        double acc = 0.0;
        for (std::size_t a = lo; a < lo + width_; ++a) {
            if (t == x_[a]) return y_[a];
            double w = 1.0;
            for (std::size_t b = lo; b < lo + width_; ++b)
                if (b != a) w *= (t - x_[b]) / (x_[a] - x_[b]);
            acc += w * y_[a];
        }
        return acc;
    }

    [[nodiscard]] const std::vector<double>& nodes() const { return x_; }

private:
    std::vector<double> x_, y_;
    std::size_t width_ = 2;
};

/// ∫ of cell-centred samples over (0, M·h) by the trapezoid rule between
/// cell centres, closed at each wall with the adjacent cell value. With this
/// closure the sum collapses to h·Σ_k f_k.
[[nodiscard]] inline double trapezoid(std::span<const double> f, double h) {
    if (f.empty()) return 0.0;
    double interior = 0.0;
    for (std::size_t k = 0; k + 1 < f.size(); ++k) interior += 0.5 * (f[k] + f[k + 1]);
    return h * (0.5 * f.front() + interior + 0.5 * f.back());
}

/// Composite Simpson weights for Q (odd) equally spaced nodes on [0, length].
[[nodiscard]] inline std::vector<double> simpson_weights(std::size_t q, double length = 1.0) {
    if (q < 3 || q % 2 == 0) throw std::invalid_argument("simpson_weights: node count must be odd and >= 3");
    const double h = length / static_cast<double>(q - 1);
    std::vector<double> w(q);
    for (std::size_t j = 0; j < q; ++j) {
        if (j == 0 || j == q - 1) {
            w[j] = h / 3.0;
        } else {
            w[j] = (j % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
        }
    }
    return w;
}

/// Cumulative ∫_0^{x_j} of a function sampled at nodes, using Simpson on each
/// sub-interval with an extra midpoint sample: out[j+1] = out[j] + Δ/6 (f_j + 4 f_{j+1/2} + f_{j+1}).
template <class F>
[[nodiscard]] std::vector<double> cumulative_simpson(F&& f, std::span<const double> nodes) {
    std::vector<double> out(nodes.size(), 0.0);
    double prev = f(nodes[0]);
    for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
        const double a = nodes[j], b = nodes[j + 1];
        const double next = f(b);
        out[j + 1] = out[j] + (b - a) / 6.0 * (prev + 4.0 * f(0.5 * (a + b)) + next);
        prev = next;
    }
    return out;
}

}  // namespace mfluid
