#pragma once

// One-dimensional quadrature bricks:
//   * Gauss-Legendre rules of any order (nodes via Newton on the recurrence),
//   * globally adaptive Gauss-Kronrod 7/15 with worst-interval refinement,
//   * tanh-sinh (double exponential) in distance-to-endpoint form, which
//     absorbs integrable endpoint singularities at full relative accuracy --
//     the workhorse for the Volterra kernel cells.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <vector>

namespace gfbm {

struct QuadResult {
    double value = 0.0;
    double error = 0.0; // estimated absolute error
    bool converged = false;
};

/// Gauss-Legendre nodes/weights on [-1, 1].
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

inline const GaussRule& gauss_legendre(std::size_t n) {
    static thread_local std::vector<GaussRule> cache(65);
    if (n == 0 || n > 64)
        throw std::invalid_argument("gauss_legendre: order must be in [1, 64]");
    GaussRule& r = cache[n];
    if (!r.x.empty())
        return r;
    r.x.resize(n);
    r.w.resize(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev start, Newton on P_n.
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * static_cast<double>(j) + 1.0) * z * p1 -
                      static_cast<double>(j) * p2) /
                     (static_cast<double>(j) + 1.0);
            }
            pp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15)
                break;
        }
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return r;
}

/// Fixed-order Gauss-Legendre on [a, b].
template <class F>
double gauss_legendre_integrate(const F& f, double a, double b, std::size_t n) {
    const GaussRule& r = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += r.w[i] * f(mid + half * r.x[i]);
    return half * s;
}

namespace detail {

// Kronrod-15 extension of Gauss-7 (QUADPACK constants).
inline constexpr double kGK15X[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kGK15WK[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGK15WG[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
inline void gk15(const F& f, double a, double b, double& value, double& err) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    const double fc = f(mid);
    double resk = fc * kGK15WK[7];
    double resg = fc * kGK15WG[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kGK15X[j];
        const double fv = f(mid - dx) + f(mid + dx);
        resk += fv * kGK15WK[j];
        if (j % 2 == 1)
            resg += fv * kGK15WG[j / 2];
    }
    value = resk * half;
    err = std::abs((resk - resg) * half);
}

struct Interval {
    double a, b, value, err;
    bool operator<(const Interval& o) const { return err < o.err; }
};

} // namespace detail

/// Globally adaptive Gauss-Kronrod 7/15. Refines the worst interval until the
/// total error estimate meets rel_tol (against the running integral) or the
/// interval budget is exhausted.
template <class F>
QuadResult adaptive_gk15(const F& f, double a, double b, double rel_tol,
                         std::size_t max_intervals = 4000) {
    QuadResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    std::priority_queue<detail::Interval> q;
    detail::Interval whole{a, b, 0.0, 0.0};
    detail::gk15(f, a, b, whole.value, whole.err);
    double total = whole.value, toterr = whole.err;
    q.push(whole);
    std::size_t used = 1;
    while (toterr > rel_tol * std::max(std::abs(total), 1e-300) &&
           used < max_intervals) {
        detail::Interval worst = q.top();
        q.pop();
        const double m = 0.5 * (worst.a + worst.b);
        if (m == worst.a || m == worst.b)
            break; // interval at floating-point resolution
        detail::Interval left{worst.a, m, 0.0, 0.0}, right{m, worst.b, 0.0, 0.0};
        detail::gk15(f, left.a, left.b, left.value, left.err);
        detail::gk15(f, right.a, right.b, right.value, right.err);
        total += left.value + right.value - worst.value;
        toterr += left.err + right.err - worst.err;
        q.push(left);
        q.push(right);
        ++used;
    }
    out.value = total;
    out.error = toterr;
    out.converged = toterr <= rel_tol * std::max(std::abs(total), 1e-300);
    return out;
}

/// tanh-sinh quadrature on (a, b) for integrands given in distance form
/// g(x, da, db) with da = x-a and db = b-x supplied at full relative accuracy
/// even within 1e-300 of an endpoint. Singular factors must be computed from
/// da/db, smooth factors may use x. Doubles node density per level until two
/// consecutive levels agree to rel_tol.
template <class G>
QuadResult tanh_sinh_distance(const G& g, double a, double b, double rel_tol,
                              int max_level = 12) {
    QuadResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    const double pi_half = 0.5 * std::numbers::pi;
    const double tmax = 6.0; // sinh(6) ~ 201; supports singularity exponents to ~0.9
    double h = 0.75;
    auto eval_node = [&](double t) -> double {
        const double sh = pi_half * std::sinh(t);
        if (sh > 350.0)
            return 0.0; // weight underflow region; contribution negligible
        const double ch = std::cosh(sh);
        const double w = pi_half * std::cosh(t) / (ch * ch);
        if (t == 0.0)
            return w * g(mid, half, half);
        // distance of the +x node to b: half*(1-tanh(sh)) = half / (cosh(sh)*exp(sh))... use
        // 1 - tanh(sh) = 2/(exp(2 sh)+1) computed stably via exp(-2 sh).
        const double e = std::exp(-2.0 * sh);
        const double d_near = half * (2.0 * e / (1.0 + e)); // -> nearer endpoint
        const double d_far = 2.0 * half - d_near;
        if (d_near <= 0.0)
            return 0.0;
        const double xp = b - d_near; // +x node
        const double xm = a + d_near; // -x node
        double term = w * (g(xp, d_far, d_near) + g(xm, d_near, d_far));
        if (!std::isfinite(term))
            throw std::runtime_error("tanh_sinh: integrand not finite at interior node");
        return term;
    };
    auto node_sum = [&](double step, bool odd_only) {
        double s = 0.0;
        const int kmax = static_cast<int>(tmax / step);
        for (int k = odd_only ? 1 : 0; k <= kmax; k += odd_only ? 2 : 1)
            s += eval_node(static_cast<double>(k) * step);
        return s;
    };
    double sum = node_sum(h, false);
    double prev = half * h * sum;
    for (int level = 1; level <= max_level; ++level) {
        h *= 0.5;
        sum += node_sum(h, true);
        const double cur = half * h * sum;
        const double diff = std::abs(cur - prev);
        out.value = cur;
        out.error = diff;
        if (level >= 3 && diff <= rel_tol * std::max(std::abs(cur), 1e-300)) {
            out.converged = true;
            return out;
        }
        prev = cur;
    }
    return out;
}

/// tanh-sinh for plain integrands f(x) (smooth or mildly singular; for strong
/// endpoint singularities use tanh_sinh_distance).
template <class F>
QuadResult tanh_sinh(const F& f, double a, double b, double rel_tol,
                     int max_level = 12) {
    return tanh_sinh_distance([&](double x, double, double) { return f(x); }, a, b,
                              rel_tol, max_level);
}

} // namespace gfbm
