#pragma once

// Volterra kernel of fractional Brownian motion and its discretization.
//
// K_H(t,s) for H > 1/2:
//     c_H s^{1/2-H} \int_s^t (u-s)^{H-3/2} u^{H-1/2} du
// and for H < 1/2:
//     d_H [ (t/s)^{H-1/2}(t-s)^{H-1/2}
//           - (H-1/2) s^{1/2-H} \int_s^t u^{H-3/2} (u-s)^{H-1/2} du ],
// with K = 0 for s >= t and K = 1{s<t} at H = 1/2.
//
// Pointwise evaluation substitutes u = s + (t-s) y^q with q chosen so the
// endpoint power singularity cancels exactly, leaving a smooth integrand for
// adaptive Gauss-Kronrod. Weight tables reduce every row to K(1,.) through the
// scaling identity K_H(a t, u) = a^{H-1/2} K_H(t, u/a) and evaluate K(1,.)
// through a certified log-log spline, so building N ~ 10^4 rows stays cheap.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "quadrature.hpp"

namespace gfbm {

namespace detail {

inline void check_hurst(double h) {
    if (!(h > 0.0) || !(h < 1.0))
        throw std::invalid_argument("hurst index must lie in (0,1), got " +
                                    std::to_string(h));
}

inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

} // namespace detail

/// Normalizing constant of the kernel: c_H for H > 1/2, d_H for H < 1/2, 1 at
/// H = 1/2. Both make \int_0^t K_H(t,s)^2 ds = t^{2H}.
inline double kernel_constant(double h) {
    detail::check_hurst(h);
    if (h == 0.5)
        return 1.0;
    if (h > 0.5) {
        // c_H = sqrt( H(2H-1) / B(H-1/2, 2-2H) )
        return std::sqrt(h * (2.0 * h - 1.0) /
                         std::exp(detail::log_beta(h - 0.5, 2.0 - 2.0 * h)));
    }
    // d_H = sqrt( 2H / ((1-2H) B(H+1/2, 1-2H)) )
    return std::sqrt(2.0 * h / ((1.0 - 2.0 * h) *
                                std::exp(detail::log_beta(h + 0.5, 1.0 - 2.0 * h))));
}

namespace detail {

/// K_H(t, s) with the gap t-s supplied by the caller (avoids cancellation when
/// evaluating within 1e-300 of the diagonal). Preconditions already checked.
inline double eval_kernel_gap(double h, double t, double s, double gap,
                              double rel_tol = 1e-11) {
    if (h == 0.5)
        return 1.0;
    if (h > 0.5) {
        const double a = h - 0.5;
        const double q = 1.0 / a; // kills the (u-s)^{H-3/2} endpoint power exactly
        auto f = [&](double y) { return std::pow(s + gap * std::pow(y, q), a); };
        QuadResult r = adaptive_gk15(f, 0.0, 1.0, rel_tol);
        if (!r.converged)
            throw std::runtime_error("eval_kernel: inner quadrature did not converge");
        return kernel_constant(h) * std::pow(s, -a) * std::pow(gap, a) * q * r.value;
    }
    // Lower branch. Substituting u = s(1+v) rescales the inner integral to
    //   I = s^{2H-1} \int_0^z (1+v)^{H-3/2} v^{H-1/2} dv,   z = gap / s,
    // which keeps every intermediate representable even when s is within a
    // few hundred orders of magnitude of the underflow threshold (the raw
    // integrand s^{H-3/2} overflows there while K itself is fine).
    const double a = h - 0.5; // negative
    const double qt = 1.0 / (h + 0.5);
    const double z = gap / s;
    double inner_scaled; // I / s^{2H-1}
    if (z <= 1.0) {
        // v = z y^qt cancels the v^{H-1/2} endpoint power exactly
        auto f = [&](double y) {
            return std::pow(1.0 + z * std::pow(y, qt), h - 1.5);
        };
        QuadResult r = adaptive_gk15(f, 0.0, 1.0, rel_tol);
        if (!r.converged)
            throw std::runtime_error("eval_kernel: inner quadrature did not converge");
        inner_scaled = std::pow(z, h + 0.5) * qt * r.value;
    } else {
        // head v in [0,1] with the same power substitution
        auto f1 = [&](double y) {
            return std::pow(1.0 + std::pow(y, qt), h - 1.5);
        };
        QuadResult r1 = adaptive_gk15(f1, 0.0, 1.0, rel_tol);
        // tail v in (1, z] via v = e^w; decays like e^{(2H-1)w}, so beyond
        // 40/(1-2H) the remainder is below 1e-17 relative and is dropped
        const double wmax = std::min(std::log(z), 40.0 / (1.0 - 2.0 * h));
        auto f2 = [&](double w) {
            if (w < 30.0)
                return std::pow(1.0 + std::exp(w), h - 1.5) * std::exp(w * (h + 0.5));
            return std::exp(w * (2.0 * h - 1.0)) *
                   std::pow(1.0 + std::exp(-w), h - 1.5);
        };
        QuadResult r2 = adaptive_gk15(f2, 0.0, wmax, rel_tol);
        if (!r1.converged || !r2.converged)
            throw std::runtime_error("eval_kernel: inner quadrature did not converge");
        inner_scaled = qt * r1.value + r2.value;
    }
    const double term1 = std::pow(t / s, a) * std::pow(gap, a);
    const double term2 = (0.5 - h) * std::pow(s, a) * inner_scaled;
    return kernel_constant(h) * (term1 + term2);
}

} // namespace detail

/// Pointwise kernel value K_H(t, s). Zero for s >= t; pointwise values at
/// s <= 0 are rejected (the kernel diverges there -- cell averages of the
/// first cell are handled by the weight builder instead).
inline double eval_kernel(double h, double t, double s) {
    detail::check_hurst(h);
    if (!(t > 0.0))
        throw std::invalid_argument("eval_kernel: need t > 0");
    if (s >= t)
        return 0.0;
    if (!(s > 0.0))
        throw std::invalid_argument("eval_kernel: pointwise value needs s > 0");
    return detail::eval_kernel_gap(h, t, s, t - s);
}

/// Closed form of \int_0^{min(s,t)} K_H(s,u) K_H(t,u) du.
inline double kernel_inner(double h, double s, double t) {
    detail::check_hurst(h);
    if (!(s >= 0.0) || !(t >= 0.0))
        throw std::invalid_argument("kernel_inner: need s, t >= 0");
    return 0.5 * (std::pow(t, 2.0 * h) + std::pow(s, 2.0 * h) -
                  std::pow(std::abs(t - s), 2.0 * h));
}

/// Direct quadrature of \int_0^{min(s,t)} K_H(s,u) K_H(t,u) du, used to verify
/// the closed form. tanh-sinh handles the u -> 0 and u -> min(s,t) endpoint
/// singularities of the product.
inline double kernel_inner_quadrature(double h, double s, double t,
                                      double rel_tol = 1e-7) {
    detail::check_hurst(h);
    if (!(s > 0.0) || !(t > 0.0))
        throw std::invalid_argument("kernel_inner_quadrature: need s, t > 0");
    const double m = std::min(s, t);
    auto g = [&](double u, double da, double db) {
        // da = u - 0, db = m - u, both exact; the gap to the *other* time is
        // db plus the (possibly zero) offset between m and that time.
        const double ks = detail::eval_kernel_gap(h, s, da, (s - m) + db, 1e-9);
        const double kt = detail::eval_kernel_gap(h, t, da, (t - m) + db, 1e-9);
        return ks * kt;
    };
    QuadResult r = tanh_sinh_distance(g, 0.0, m, rel_tol);
    if (!r.converged)
        throw std::runtime_error("kernel_inner_quadrature: no convergence");
    return r.value;
}

/// Certified spline interpolant of x -> K_H(1, x) on (0, 1), log-log on each
/// side of x = 0.6 so the endpoint power laws become straight lines. Built
/// from exact evaluations; validated against eval_kernel on random abscissae.
class KernelInterpolant {
  public:
    explicit KernelInterpolant(double h) : h_(h) {
        detail::check_hurst(h);
        if (h == 0.5)
            throw std::invalid_argument("KernelInterpolant: trivial at h = 1/2");
        // Each side extends past the x = 0.6 hand-off point: the natural
        // boundary condition is exact at the deep end (power-law tail) but
        // wrong at the interior end, and its O(step^2) error is localized to
        // a few knots, so evaluations stay clear of it.
        build_side(left_, std::log(1e-30), std::log(0.78), /*from_right=*/false);
        build_side(right_, std::log(1e-30), std::log(0.58), /*from_right=*/true);
        certify();
    }

    double hurst() const { return h_; }
    /// Certified max relative error against exact evaluation.
    double certified_error() const { return cert_err_; }

    /// K_H(1, x); use the distance overload near x = 1.
    double value(double x) const {
        if (x <= 0.0 || x >= 1.0)
            throw std::invalid_argument("KernelInterpolant: x must be in (0,1)");
        if (x <= 0.60)
            return std::exp(left_.eval(std::log(x)));
        return value_from_right(1.0 - x);
    }

    /// K_H(1, 1 - y) given the distance y = 1 - x > 0 at full accuracy.
    double value_from_right(double y) const {
        if (y <= 0.0)
            throw std::invalid_argument("KernelInterpolant: distance must be positive");
        if (y >= 0.40)
            return std::exp(left_.eval(std::log1p(-y)));
        return std::exp(right_.eval(std::log(y)));
    }

    /// Branch-picking evaluation given both distances (for tanh-sinh cells).
    double value_dist(double x, double one_minus_x) const {
        if (x <= 0.60)
            return std::exp(left_.eval(std::log(x)));
        return value_from_right(one_minus_x);
    }

  private:
    struct Spline {
        double v0 = 0.0, step = 0.0;
        std::vector<double> y;  // knot values
        std::vector<double> m;  // second derivatives (natural ends)
        double eval(double v) const {
            const double n1 = static_cast<double>(y.size()) - 1.0;
            double u = (v - v0) / step;
            if (u <= 0.0) // linear tail = power law in the original variables
                return y.front() + (v - v0) * (y[1] - y[0] - step * step * m[1] / 6.0) / step;
            if (u >= n1) {
                const std::size_t n = y.size() - 1;
                const double slope =
                    (y[n] - y[n - 1]) / step + step * m[n - 1] / 6.0;
                return y.back() + (v - (v0 + n1 * step)) * slope;
            }
            const std::size_t i = static_cast<std::size_t>(u);
            const double a = (v0 + static_cast<double>(i + 1) * step - v) / step;
            const double b = 1.0 - a;
            return a * y[i] + b * y[i + 1] +
                   ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) *
                       (step * step) / 6.0;
        }
    };

    void build_side(Spline& s, double vmin, double vmax, bool from_right) {
        const double target_step = 0.02;
        const std::size_t n =
            static_cast<std::size_t>((vmax - vmin) / target_step) + 2;
        s.v0 = vmin;
        s.step = (vmax - vmin) / static_cast<double>(n - 1);
        s.y.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = vmin + static_cast<double>(i) * s.step;
            const double d = std::exp(v);
            const double k = from_right
                                 ? detail::eval_kernel_gap(h_, 1.0, 1.0 - d, d)
                                 : detail::eval_kernel_gap(h_, 1.0, d, 1.0 - d);
            if (!(k > 0.0) || !std::isfinite(k))
                throw std::runtime_error(
                    "KernelInterpolant: kernel not positive at sample point");
            s.y[i] = std::log(k);
        }
        // Natural cubic spline second derivatives, Thomas algorithm on the
        // uniform-knot system m[i-1] + 4 m[i] + m[i+1] = 6 d2y[i] / step^2.
        s.m.assign(n, 0.0);
        if (n >= 3) {
            std::vector<double> dia(n, 4.0), rhs(n, 0.0);
            for (std::size_t i = 1; i + 1 < n; ++i)
                rhs[i] = 6.0 * (s.y[i + 1] - 2.0 * s.y[i] + s.y[i - 1]) /
                         (s.step * s.step);
            for (std::size_t i = 2; i + 1 < n; ++i) {
                const double f = 1.0 / dia[i - 1];
                dia[i] -= f;
                rhs[i] -= f * rhs[i - 1];
            }
            for (std::size_t i = n - 2; i >= 1; --i) {
                s.m[i] = (rhs[i] - s.m[i + 1]) / dia[i];
                if (i == 1)
                    break;
            }
        }
    }

    void certify() {
        double worst = 0.0;
        std::uint64_t state = 0x5DEECE66DULL ^ static_cast<std::uint64_t>(h_ * (1ULL << 40));
        for (int i = 0; i < 160; ++i) {
            // log-uniform abscissae over both branches
            state = state * 6364136223846793005ULL + 1442695040888963407ULL;
            const double u01 = static_cast<double>(state >> 11) * 0x1p-53;
            const double v = -28.0 * u01 - 1e-3;
            for (int side = 0; side < 2; ++side) {
                const double d = std::exp(v);
                const double exact =
                    side == 0 ? detail::eval_kernel_gap(h_, 1.0, d, 1.0 - d)
                              : detail::eval_kernel_gap(h_, 1.0, 1.0 - d, d);
                const double approx = side == 0 ? value(d) : value_from_right(d);
                worst = std::max(worst, std::abs(approx - exact) / std::abs(exact));
            }
        }
        cert_err_ = worst;
        if (worst > 1e-7) {
            char buf[128];
            std::snprintf(buf, sizeof(buf),
                          "KernelInterpolant: certification failed, max relative "
                          "error %.3e at h = %.6g",
                          worst, h_);
            throw std::runtime_error(buf);
        }
    }

    double h_;
    Spline left_, right_;
    double cert_err_ = 0.0;
};

namespace detail {

/// Interpolants are immutable and depend only on h: cache across tables.
inline std::shared_ptr<const KernelInterpolant> kernel_interpolant(double h) {
    static std::mutex m;
    static std::map<double, std::shared_ptr<const KernelInterpolant>> cache;
    std::lock_guard<std::mutex> g(m);
    auto it = cache.find(h);
    if (it != cache.end())
        return it->second;
    auto p = std::make_shared<const KernelInterpolant>(h);
    cache.emplace(h, p);
    return p;
}

} // namespace detail

/// Lower-triangular table of cell-averaged kernel weights:
///   w[k][j] = (1/dt_j) \int_{t_j}^{t_{j+1}} K_H(t_k, s) ds,   0 <= j < k <= N.
/// The discrete path is then B^H_{t_k} = sum_j w[k][j] dB_j.
class KernelTable {
  public:
    KernelTable(double h, TimeGrid grid, std::vector<double> weights)
        : h_(h), grid_(std::move(grid)), w_(std::move(weights)) {
        const std::size_t n = grid_.cells();
        if (w_.size() != n * (n + 1) / 2)
            throw std::invalid_argument("KernelTable: weight count mismatch");
    }

    double hurst() const { return h_; }
    const TimeGrid& grid() const { return grid_; }

    /// Weight of cell j in row k (value time t_k), j < k, k in [1, cells()].
    double weight(std::size_t k, std::size_t j) const {
        if (k == 0 || k > grid_.cells() || j >= k)
            throw std::invalid_argument("KernelTable::weight: need 1 <= k <= N, j < k");
        return w_[(k - 1) * k / 2 + j];
    }

    /// Row k as a contiguous span of k weights (cells 0..k-1).
    const double* row(std::size_t k) const { return w_.data() + (k - 1) * k / 2; }

  private:
    double h_;
    TimeGrid grid_;
    std::vector<double> w_;
};

struct WeightOptions {
    double rel_tol = 1e-6; // per-cell quadrature convergence requirement
    unsigned jobs = 1;
};

/// Build the cell-averaged weight table. Every cell quadrature must converge
/// to opts.rel_tol relative or the build throws (naming the cell). At h = 1/2
/// all weights are exactly 1.
inline KernelTable kernel_weights(double h, const TimeGrid& grid,
                                  const WeightOptions& opts = {}) {
    detail::check_hurst(h);
    const std::size_t n = grid.cells();
    std::vector<double> w(n * (n + 1) / 2);
    if (h == 0.5) {
        for (double& x : w)
            x = 1.0;
        return KernelTable(h, grid, std::move(w));
    }
    auto interp = detail::kernel_interpolant(h);
    const double hexp = h - 0.5;
    detail::parallel_for(n, opts.jobs, [&](std::size_t row) {
        const std::size_t k = row + 1;
        const double tk = grid[k];
        const double scale = std::pow(tk, hexp);
        double* out = w.data() + (k - 1) * k / 2;
        for (std::size_t j = 0; j < k; ++j) {
            const double xa = grid[j] / tk;
            const double xb = grid[j + 1] / tk;
            double cell = 0.0;
            const bool left_edge = (j == 0);
            const bool right_edge = (j + 1 == k);
            if (left_edge || right_edge) {
                // Singular endpoint(s): tanh-sinh in distance form. Distances
                // to the row endpoints stay exact: at the diagonal the
                // distance to x = 1 is (t_k - s)/t_k = db + (1 - xb).
                const double right_off = 1.0 - xb;
                auto g = [&](double x, double da, double db) {
                    const double from_left = left_edge ? da : x;
                    const double from_right = db + right_off;
                    return interp->value_dist(left_edge && x <= 0.60 ? from_left : x,
                                              from_right);
                };
                QuadResult r = tanh_sinh_distance(g, xa, xb, opts.rel_tol * 0.1);
                if (!r.converged)
                    throw std::runtime_error(
                        "kernel_weights: cell quadrature did not converge at row " +
                        std::to_string(k) + ", cell " + std::to_string(j));
                cell = r.value;
            } else {
                // Interior cell: smooth integrand; low-order Gauss with an
                // explicit two-rule convergence check, adaptive escalation.
                auto f = [&](double x) { return interp->value_dist(x, 1.0 - x); };
                const double v1 = gauss_legendre_integrate(f, xa, xb, 4);
                const double v2 = gauss_legendre_integrate(f, xa, xb, 8);
                if (std::abs(v1 - v2) <= opts.rel_tol * std::abs(v2)) {
                    cell = v2;
                } else {
                    QuadResult r = adaptive_gk15(f, xa, xb, opts.rel_tol * 0.1);
                    if (!r.converged)
                        throw std::runtime_error(
                            "kernel_weights: cell quadrature did not converge at row " +
                            std::to_string(k) + ", cell " + std::to_string(j));
                    cell = r.value;
                }
            }
            // back to the (1/dt) \int K(t_k, s) ds normalization
            out[j] = scale * cell * tk / grid.dt(j);
        }
    });
    return KernelTable(h, grid, std::move(w));
}

} // namespace gfbm
