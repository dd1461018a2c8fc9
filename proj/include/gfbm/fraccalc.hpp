#pragma once
// Fractional calculus on sampled functions: Riemann-Liouville integrals,
// real-form (Marchaud) Weyl derivatives, the weighted Holder/L1 norms used
// for pathwise integration, and the generalized Lebesgue-Stieltjes integral
// assembled from them.
//
// Every operator treats a SampledFunction as the piecewise-linear
// interpolant of its samples and integrates the singular power weight
// against that interpolant cell by cell with exact moments (product
// integration).  The weight is never point-sampled: near the evaluation
// point the numerator vanishes linearly, which keeps the singular cell
// integrable and gives it a closed form.
//
// Sign convention: the composite phase factors of the two half-derivatives
// are replaced by the real Marchaud forms with an overall minus sign on the
// inner-product term, fixed once by requiring  integral_0^1 t d(t^2) = 2/3.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gfbm/core.hpp"

namespace gfbm {

/// A real function known through samples on a time grid; all operators in
/// this header read it as the piecewise-linear interpolant of the samples.
/// `holder_hint` optionally carries an a-priori Holder exponent (it is
/// advisory metadata only; no operator changes its quadrature based on it).
struct SampledFunction {
    TimeGrid grid;
    std::vector<double> values;
    std::optional<double> holder_hint;

    explicit SampledFunction(TimeGrid g) : grid(std::move(g)), values(grid.size(), 0.0) {}

    SampledFunction(TimeGrid g, std::vector<double> v)
        : grid(std::move(g)), values(std::move(v)) {
        if (values.size() != grid.size())
            throw std::invalid_argument("SampledFunction: values length must match grid");
    }

    std::size_t size() const { return values.size(); }
};

/// Fractional order paired with the Hurst index it is used against.
/// Valid orders live in the window 1-h < alpha < 1/2; for h <= 1/2 the
/// window is empty and construction always fails, matching the h > 1/2
/// restriction of the pathwise integration theory.
struct FracParams {
    double alpha;
    double h;

    FracParams(double alpha_, double h_) : alpha(alpha_), h(h_) {
        if (!(h > 0.0 && h < 1.0))
            throw std::invalid_argument("FracParams: h must lie in (0,1)");
        if (!(alpha > 1.0 - h && alpha < 0.5)) {
            char buf[128];
            std::snprintf(buf, sizeof buf,
                          "FracParams: alpha=%.6g outside the admissible window "
                          "(1-h, 1/2) = (%.6g, 0.5) for h=%.6g",
                          alpha, 1.0 - h, h);
            throw std::invalid_argument(buf);
        }
    }

    /// Midpoint of the admissible window (1-h, 1/2).
    static double default_alpha(double h) { return (3.0 - 2.0 * h) / 4.0; }
    static FracParams for_hurst(double h) { return FracParams(default_alpha(h), h); }
};

/// Per-node refinement diagnostics for the Weyl derivatives.  A node is
/// flagged when the contribution of the innermost cells fails its
/// cell-refinement Cauchy test, i.e. the value keeps growing as the local
/// resolution increases instead of settling.
struct WeylDiagnostics {
    std::vector<std::uint8_t> non_admissible;  // one slot per output node

    std::size_t flagged_count() const {
        std::size_t c = 0;
        for (auto b : non_admissible) c += (b != 0);
        return c;
    }
};

namespace detail {

inline void check_samples(const SampledFunction& f, const char* who) {
    for (double v : f.values)
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite sample");
}

inline void check_order01(double a, const char* who) {
    if (!(a > 0.0 && a < 1.0))
        throw std::invalid_argument(std::string(who) + ": order must lie in (0,1)");
}

inline bool uniform_spacing(const TimeGrid& g) {
    const double d0 = g.dt(0);
    for (std::size_t k = 1; k < g.cells(); ++k)
        if (std::abs(g.dt(k) - d0) > 1e-12 * d0) return false;
    return true;
}

/// Supplies powers of node-to-node distances for one pair of exponents.
/// On uniform grids the powers are tabulated by integer node distance
/// (O(N) calls to pow for O(N^2) cell integrals); otherwise they are
/// computed on demand.
class DistancePowers {
  public:
    DistancePowers(const TimeGrid& g, double e1, double e2)
        : g_(&g), e1_(e1), e2_(e2), uniform_(uniform_spacing(g)) {
        if (uniform_) {
            const double d = g.dt(0);
            const std::size_t n = g.cells();
            p1_.assign(n + 1, 0.0);
            p2_.assign(n + 1, 0.0);
            for (std::size_t m = 1; m <= n; ++m) {
                const double u = d * static_cast<double>(m);
                p1_[m] = std::pow(u, e1_);
                p2_[m] = std::pow(u, e2_);
            }
        }
    }

    double dist(std::size_t j, std::size_t k) const { return (*g_)[k] - (*g_)[j]; }
    // Powers of the distance between nodes j < k.  Never called with j == k
    // when the exponent is negative; the singular cell is handled by its
    // closed form before these lookups.
    double pw1(std::size_t j, std::size_t k) const {
        return uniform_ ? p1_[k - j] : std::pow(dist(j, k), e1_);
    }
    double pw2(std::size_t j, std::size_t k) const {
        return uniform_ ? p2_[k - j] : std::pow(dist(j, k), e2_);
    }

  private:
    const TimeGrid* g_;
    double e1_, e2_;
    bool uniform_;
    std::vector<double> p1_, p2_;
};

/// Exact integral of (A + B*(u - ulo)) * u^e over [ulo, uhi], given
/// q1 = u^{e+1} and q2 = u^{e+2} at both endpoints and the reciprocals of
/// e+1 and e+2.  Requires ulo > 0 when e < -1 (the singular cell at
/// ulo == 0 has A == 0 and is reduced to B * M1 by the caller).
inline double cell_signed(double A, double B, double ulo, double q1lo, double q1hi,
                          double q2lo, double q2hi, double inv_e1, double inv_e2) {
    const double M0 = (q1hi - q1lo) * inv_e1;
    const double M1 = (q2hi - q2lo) * inv_e2;
    return A * M0 + B * (M1 - ulo * M0);
}

/// Same cell integral with |A + B*(u - ulo)| in place of the numerator:
/// exact by splitting the cell at the sign crossing when there is one.
inline double cell_abs(double A, double B, double ulo, double uhi, double q1lo, double q1hi,
                       double q2lo, double q2hi, double e1, double e2, double inv_e1,
                       double inv_e2) {
    const double nhi = A + B * (uhi - ulo);
    if (A * nhi >= 0.0)
        return std::abs(cell_signed(A, B, ulo, q1lo, q1hi, q2lo, q2hi, inv_e1, inv_e2));
    double us = ulo - A / B;
    us = std::min(std::max(us, ulo), uhi);
    const double q1s = std::pow(us, e1);
    const double q2s = std::pow(us, e2);
    return std::abs(cell_signed(A, B, ulo, q1lo, q1s, q2lo, q2s, inv_e1, inv_e2)) +
           std::abs(cell_signed(0.0, B, us, q1s, q1hi, q2s, q2hi, inv_e1, inv_e2));
}

inline std::vector<double> cell_slopes(const SampledFunction& f) {
    const std::size_t n = f.grid.cells();
    std::vector<double> m(n);
    for (std::size_t l = 0; l < n; ++l) m[l] = (f.values[l + 1] - f.values[l]) / f.grid.dt(l);
    return m;
}

/// Restriction of a sampled function to every `stride`-th node.
inline SampledFunction restrict_stride(const SampledFunction& f, std::size_t stride) {
    const std::size_t n = f.grid.cells();
    if (stride == 0 || n % stride != 0)
        throw std::invalid_argument("restrict_stride: stride must divide the cell count");
    std::vector<double> nodes, vals;
    nodes.reserve(n / stride + 1);
    vals.reserve(n / stride + 1);
    for (std::size_t k = 0; k <= n; k += stride) {
        nodes.push_back(f.grid[k]);
        vals.push_back(f.values[k]);
    }
    SampledFunction out(TimeGrid(std::move(nodes)), std::move(vals));
    out.holder_hint = f.holder_hint;
    return out;
}

/// Runs `compute` on the full samples and on stride-2 / stride-4
/// restrictions.  Accepts the full-grid value when the refinement sequence
/// is Cauchy at 1e-4.  Returns +infinity when the value grows by more than
/// 30% at BOTH halvings of the mesh — the signature of a divergent singular
/// integral, whose discrete evaluation blows up like a negative power of
/// the mesh (a jump grows the (1-a,inf) norm by 2^{1-a} >= 1.41 per
/// halving).  Admissible Holder inputs converge, so their growth per
/// halving shrinks toward zero with the mesh instead.
template <class Fn>
double with_refinement_guard(const SampledFunction& f, Fn&& compute) {
    const double v0 = compute(f);
    const std::size_t n = f.grid.cells();
    if (n < 16 || n % 4 != 0) return v0;  // too coarse to test; accept
    const double v1 = compute(restrict_stride(f, 2));
    const double v2 = compute(restrict_stride(f, 4));
    const double d1 = std::abs(v0 - v1);
    if (d1 <= 1e-4 * std::max(1.0, std::abs(v0))) return v0;  // Cauchy at 1e-4
    if (std::abs(v0) > 1.3 * std::abs(v1) && std::abs(v1) > 1.3 * std::abs(v2))
        return std::numeric_limits<double>::infinity();
    return v0;
}

/// Raw singular integrals  I_k = integral_0^{t_k} |f(t_k)-f(y)| (t_k-y)^{-1-a} dy
/// for every node k (I_0 = 0).  Shared by the alpha-1 and alpha-infinity
/// norms.  The cell adjacent to t_k has a vanishing numerator at the
/// singularity and reduces to |slope| * w^{1-a}/(1-a).
inline std::vector<double> abs_marchaud_integrals(const SampledFunction& f, double a) {
    const std::size_t n = f.grid.cells();
    const double e1 = -a, e2 = 1.0 - a;
    const double inv_e1 = -1.0 / a, inv_e2 = 1.0 / (1.0 - a);
    const DistancePowers P(f.grid, e1, e2);
    const std::vector<double> m = cell_slopes(f);
    std::vector<double> I(n + 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        const double fk = f.values[k];
        // singular cell l = k-1: u in [0, dt], |numerator| = |slope|*u
        double s = std::abs(m[k - 1]) * P.pw2(k - 1, k) * inv_e2;
        for (std::size_t l = 0; l + 1 < k; ++l) {
            // u = t_k - y on [dist(l+1,k), dist(l,k)]; numerator at the low
            // edge is f_k - f_{l+1} and grows with slope m_l in u.
            s += cell_abs(fk - f.values[l + 1], m[l], P.dist(l + 1, k), P.dist(l, k),
                          P.pw1(l + 1, k), P.pw1(l, k), P.pw2(l + 1, k), P.pw2(l, k), e1, e2,
                          inv_e1, inv_e2);
        }
        I[k] = s;
    }
    return I;
}

}  // namespace detail

/// Left Riemann-Liouville fractional integral  (1/Gamma(a)) *
/// integral_{t_0}^{x} f(y) (x-y)^{a-1} dy  of the piecewise-linear
/// interpolant, for any x inside the grid range (not only at nodes).
inline double rl_integral_left(const SampledFunction& f, double alpha, double x) {
    detail::check_order01(alpha, "rl_integral_left");
    detail::check_samples(f, "rl_integral_left");
    const TimeGrid& g = f.grid;
    if (!(x >= g[0] && x <= g.horizon()))
        throw std::invalid_argument("rl_integral_left: x outside the grid range");
    const double e1 = alpha, e2 = alpha + 1.0;
    const double inv_e1 = 1.0 / e1, inv_e2 = 1.0 / e2;
    double s = 0.0;
    for (std::size_t l = 0; l < g.cells() && g[l] < x; ++l) {
        const double ya = g[l];
        const double yb = std::min(g[l + 1], x);
        const double fa = f.values[l];
        const double fb =
            f.values[l] + (f.values[l + 1] - f.values[l]) * ((yb - ya) / g.dt(l));
        // u = x - y runs over [x-yb, x-ya]; numerator starts at fb, slope
        // (fa-fb)/(yb-ya) in u.
        const double ulo = x - yb, uhi = x - ya;
        const double B = (fa - fb) / (yb - ya);
        s += detail::cell_signed(fb, B, ulo, std::pow(ulo, e1), std::pow(uhi, e1),
                                 std::pow(ulo, e2), std::pow(uhi, e2), inv_e1, inv_e2);
    }
    return s / std::tgamma(alpha);
}

/// Right Riemann-Liouville fractional integral  (1/Gamma(a)) *
/// integral_{x}^{T} f(y) (y-x)^{a-1} dy.
inline double rl_integral_right(const SampledFunction& f, double alpha, double x) {
    detail::check_order01(alpha, "rl_integral_right");
    detail::check_samples(f, "rl_integral_right");
    const TimeGrid& g = f.grid;
    if (!(x >= g[0] && x <= g.horizon()))
        throw std::invalid_argument("rl_integral_right: x outside the grid range");
    const double e1 = alpha, e2 = alpha + 1.0;
    const double inv_e1 = 1.0 / e1, inv_e2 = 1.0 / e2;
    double s = 0.0;
    for (std::size_t l = 0; l < g.cells(); ++l) {
        if (g[l + 1] <= x) continue;
        const double ya = std::max(g[l], x);
        const double yb = g[l + 1];
        const double fb = f.values[l + 1];
        const double fa =
            f.values[l] + (f.values[l + 1] - f.values[l]) * ((ya - g[l]) / g.dt(l));
        const double ulo = ya - x, uhi = yb - x;
        const double B = (fb - fa) / (yb - ya);
        s += detail::cell_signed(fa, B, ulo, std::pow(ulo, e1), std::pow(uhi, e1),
                                 std::pow(ulo, e2), std::pow(uhi, e2), inv_e1, inv_e2);
    }
    return s / std::tgamma(alpha);
}

namespace detail {

/// Innermost-cell refinement test for a Weyl evaluation at output node k.
/// Computes the contribution of the four cells nearest the singularity at
/// native resolution, merged in pairs, and merged into one, and checks the
/// refinement increments d1, d2 for Cauchy behaviour at 1e-4 (relative to
/// the full derivative value `ref`).  Returns true when the node fails,
/// i.e. the increments are both large and growing toward the fine end.
/// `idx` lists the five node indices bounding the four cells, nearest the
/// singular point first; `num(i)` is the numerator sample at idx[i] (always
/// 0 at i=0); powers are looked up between the singular node and idx[i].
template <class Pw2Of, class DistOf>
bool innermost_diverges(const std::array<std::size_t, 5>& idx, const std::vector<double>& vals,
                        double centre_val, Pw2Of&& pw2of, DistOf&& distof, double inv_e2,
                        double e1, double e2, double inv_e1, double ref) {
    // value of the innermost block at three resolutions
    auto block = [&](std::size_t levels) {
        // levels = 1: cells (0,1),(1,2),(2,3),(3,4); 2: (0,2),(2,4); 4: (0,4)
        double s = 0.0;
        for (std::size_t i = 0; i + levels <= 4; i += levels) {
            const std::size_t a = idx[i], b = idx[i + levels];
            const double na = centre_val - vals[a];  // numerator at the near edge
            const double nb = centre_val - vals[b];
            const double ulo = distof(a), uhi = distof(b);
            const double B = (nb - na) / (uhi - ulo);
            if (i == 0) {
                // singular cell: numerator vanishes at u = 0
                s += B * pw2of(b) * inv_e2;
            } else {
                s += cell_signed(na, B, ulo, std::pow(ulo, e1), std::pow(uhi, e1),
                                 std::pow(ulo, e2), std::pow(uhi, e2), inv_e1, inv_e2);
            }
        }
        return s;
    };
    const double v0 = block(1), v1 = block(2), v2 = block(4);
    const double d1 = std::abs(v0 - v1), d2 = std::abs(v1 - v2);
    if (d1 <= 1e-4 * std::max(1.0, std::abs(ref))) return false;
    return d1 > 1.4 * d2;
}

}  // namespace detail

/// Left Weyl (Marchaud-form) derivative of order `alpha` of the centred
/// function f_{a+} = f - f(t_0) on (t_0, T]:
///
///   D^a f(x) = (1/Gamma(1-a)) [ (f(x)-f(t_0)) (x-t_0)^{-a}
///              + a * integral_{t_0}^x (f(x)-f(y)) (x-y)^{-1-a} dy ].
///
/// Output node 0 is 0 by centring.  When `diag` is given, every output node
/// gets an innermost-cell refinement test; failing nodes are flagged
/// non-admissible (values are still reported).  Evaluation parallelizes
/// over output nodes.
inline SampledFunction weyl_left(const SampledFunction& f, double alpha,
                                 WeylDiagnostics* diag = nullptr, unsigned jobs = 1) {
    detail::check_order01(alpha, "weyl_left");
    detail::check_samples(f, "weyl_left");
    const TimeGrid& g = f.grid;
    const std::size_t n = g.cells();
    const double e1 = -alpha, e2 = 1.0 - alpha;
    const double inv_e1 = -1.0 / alpha, inv_e2 = 1.0 / (1.0 - alpha);
    const double inv_gamma = 1.0 / std::tgamma(1.0 - alpha);
    const detail::DistancePowers P(g, e1, e2);
    const std::vector<double> m = detail::cell_slopes(f);
    SampledFunction out(g);
    if (diag) diag->non_admissible.assign(n + 1, 0);
    detail::parallel_for(n, jobs, [&](std::size_t i) {
        const std::size_t k = i + 1;
        const double fk = f.values[k];
        double s = m[k - 1] * P.pw2(k - 1, k) * inv_e2;  // singular cell, exact
        for (std::size_t l = 0; l + 1 < k; ++l)
            s += detail::cell_signed(fk - f.values[l + 1], m[l], P.dist(l + 1, k),
                                     P.pw1(l + 1, k), P.pw1(l, k), P.pw2(l + 1, k), P.pw2(l, k),
                                     inv_e1, inv_e2);
        const double first = (fk - f.values[0]) * P.pw1(0, k);
        out.values[k] = inv_gamma * (first + alpha * s);
        if (diag && k >= 4) {
            const std::array<std::size_t, 5> idx = {k, k - 1, k - 2, k - 3, k - 4};
            diag->non_admissible[k] = detail::innermost_diverges(
                idx, f.values, fk, [&](std::size_t a) { return P.pw2(a, k); },
                [&](std::size_t a) { return P.dist(a, k); }, inv_e2, e1, e2, inv_e1,
                out.values[k]);
        }
    });
    return out;
}

/// Right Weyl (Marchaud-form) derivative of order `order` of the centred
/// function g_{b-} = g - g(T) on [t_0, T):
///
///   D^p g(x) = (1/Gamma(1-p)) [ (g(x)-g(T)) (T-x)^{-p}
///              + p * integral_x^T (g(x)-g(y)) (y-x)^{-1-p} dy ].
///
/// In the Lebesgue-Stieltjes assembly this is called with order = 1-alpha.
/// Output node N is 0 by centring.
inline SampledFunction weyl_right(const SampledFunction& g_in, double order,
                                  WeylDiagnostics* diag = nullptr, unsigned jobs = 1) {
    detail::check_order01(order, "weyl_right");
    detail::check_samples(g_in, "weyl_right");
    const TimeGrid& g = g_in.grid;
    const std::size_t n = g.cells();
    const double e1 = -order, e2 = 1.0 - order;
    const double inv_e1 = -1.0 / order, inv_e2 = 1.0 / (1.0 - order);
    const double inv_gamma = 1.0 / std::tgamma(1.0 - order);
    const detail::DistancePowers P(g, e1, e2);
    const std::vector<double> m = detail::cell_slopes(g_in);
    SampledFunction out(g);
    if (diag) diag->non_admissible.assign(n + 1, 0);
    detail::parallel_for(n, jobs, [&](std::size_t k) {
        const double gk = g_in.values[k];
        double s = -m[k] * P.pw2(k, k + 1) * inv_e2;  // singular cell, exact
        for (std::size_t l = k + 1; l < n; ++l)
            s += detail::cell_signed(gk - g_in.values[l], -m[l], P.dist(k, l), P.pw1(k, l),
                                     P.pw1(k, l + 1), P.pw2(k, l), P.pw2(k, l + 1), inv_e1,
                                     inv_e2);
        const double first = (gk - g_in.values[n]) * P.pw1(k, n);
        out.values[k] = inv_gamma * (first + order * s);
        if (diag && k + 4 <= n) {
            const std::array<std::size_t, 5> idx = {k, k + 1, k + 2, k + 3, k + 4};
            diag->non_admissible[k] = detail::innermost_diverges(
                idx, g_in.values, gk, [&](std::size_t a) { return P.pw2(k, a); },
                [&](std::size_t a) { return P.dist(k, a); }, inv_e2, e1, e2, inv_e1,
                out.values[k]);
        }
    });
    return out;
}

namespace detail {

inline double norm_alpha_1_raw(const SampledFunction& ff, double alpha) {
    const TimeGrid& g = ff.grid;
    const std::size_t n = g.cells();
    // term 1: |f(s)| s^{-a} with weight exponent e = -a
    const double e1 = 1.0 - alpha, e2 = 2.0 - alpha;
    const double inv_e1 = 1.0 / e1, inv_e2 = 1.0 / e2;
    const DistancePowers P(g, e1, e2);
    const std::vector<double> m = cell_slopes(ff);
    double t1 = 0.0;
    for (std::size_t l = 0; l < n; ++l)
        t1 += cell_abs(ff.values[l], m[l], g[l], g[l + 1], P.pw1(0, l), P.pw1(0, l + 1),
                       P.pw2(0, l), P.pw2(0, l + 1), e1, e2, inv_e1, inv_e2);
    // term 2: trapezoid of the singular inner integrals
    const std::vector<double> I = abs_marchaud_integrals(ff, alpha);
    double t2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) t2 += 0.5 * g.dt(k) * (I[k] + I[k + 1]);
    return t1 + t2;
}

inline double norm_alpha_inf_raw(const SampledFunction& ff, double alpha) {
    const std::vector<double> I = abs_marchaud_integrals(ff, alpha);
    double best = 0.0;
    for (std::size_t k = 0; k < I.size(); ++k)
        best = std::max(best, std::abs(ff.values[k]) + I[k]);
    return best;
}

inline double norm_one_minus_alpha_inf_raw(const SampledFunction& gg, double alpha) {
    const TimeGrid& g = gg.grid;
    const std::size_t n = g.cells();
    const double e1 = alpha - 1.0, e2 = alpha;  // weight exponent e = a-2
    const double inv_e1 = 1.0 / e1, inv_e2 = 1.0 / e2;
    const DistancePowers P(g, e1, e2);
    const std::vector<double> m = cell_slopes(gg);
    double best = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double gj = gg.values[j];
        double acc = std::abs(m[j]) * P.pw2(j, j + 1) * inv_e2;  // singular cell
        best = std::max(best, std::abs(gg.values[j + 1] - gj) * P.pw1(j, j + 1) + acc);
        for (std::size_t k = j + 2; k <= n; ++k) {
            const std::size_t l = k - 1;  // newly entered cell
            acc += cell_abs(gg.values[l] - gj, m[l], P.dist(j, l), P.dist(j, k), P.pw1(j, l),
                            P.pw1(j, k), P.pw2(j, l), P.pw2(j, k), e1, e2, inv_e1, inv_e2);
            best = std::max(best, std::abs(gg.values[k] - gj) * P.pw1(j, k) + acc);
        }
    }
    return best;
}

}  // namespace detail

/// || f ||_{a,1} = integral_0^T |f(s)| s^{-a} ds
///               + integral_0^T integral_0^s |f(s)-f(y)| (s-y)^{-1-a} dy ds.
/// Inner integrals by exact product integration, outer by trapezoid over
/// the grid.  Returns +infinity when the stride-refinement test indicates
/// divergence.
inline double norm_alpha_1(const SampledFunction& f, double alpha) {
    detail::check_order01(alpha, "norm_alpha_1");
    detail::check_samples(f, "norm_alpha_1");
    return detail::with_refinement_guard(
        f, [alpha](const SampledFunction& ff) { return detail::norm_alpha_1_raw(ff, alpha); });
}

/// || f ||_{a,infinity} = sup_t ( |f(t)|
///     + integral_0^t |f(t)-f(s)| (t-s)^{-1-a} ds ).
inline double norm_alpha_inf(const SampledFunction& f, double alpha) {
    detail::check_order01(alpha, "norm_alpha_inf");
    detail::check_samples(f, "norm_alpha_inf");
    return detail::with_refinement_guard(
        f, [alpha](const SampledFunction& ff) { return detail::norm_alpha_inf_raw(ff, alpha); });
}

/// || g ||_{1-a,infinity,T} = sup_{0<s<t<T} ( |g(t)-g(s)| (t-s)^{-(1-a)}
///     + integral_s^t |g(y)-g(s)| (y-s)^{-(2-a)} dy ).
/// For each fixed s the inner integral accumulates cell by cell as t
/// advances, so the full pair sweep costs O(N^2).
inline double norm_one_minus_alpha_inf(const SampledFunction& g_in, double alpha) {
    detail::check_order01(alpha, "norm_one_minus_alpha_inf");
    detail::check_samples(g_in, "norm_one_minus_alpha_inf");
    return detail::with_refinement_guard(g_in, [alpha](const SampledFunction& gg) {
        return detail::norm_one_minus_alpha_inf_raw(gg, alpha);
    });
}

/// Pathwise bound constant
///   G~ = (1/Gamma(1-a)) sup_{0<s<t<T} | D^{1-a}_{t-} path_{t-} (s) |,
/// the discrete sup running over all grid pairs s < t.  Signed cell
/// integrals (no absolute value inside), same O(N^2) prefix sweep as the
/// (1-a, infinity) norm.
inline double g_tilde(const SampledFunction& path, double alpha) {
    detail::check_order01(alpha, "g_tilde");
    detail::check_samples(path, "g_tilde");
    const TimeGrid& g = path.grid;
    const std::size_t n = g.cells();
    const double e1 = alpha - 1.0, e2 = alpha;  // weight exponent e = a-2
    const double inv_e1 = 1.0 / e1, inv_e2 = 1.0 / e2;
    const detail::DistancePowers P(g, e1, e2);
    const std::vector<double> m = detail::cell_slopes(path);
    const double one_minus = 1.0 - alpha;
    double best = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double gj = path.values[j];
        double acc = -m[j] * P.pw2(j, j + 1) * inv_e2;  // singular cell of (g(s)-g(y))
        best = std::max(best, std::abs((gj - path.values[j + 1]) * P.pw1(j, j + 1) +
                                       one_minus * acc));
        for (std::size_t k = j + 2; k <= n; ++k) {
            const std::size_t l = k - 1;
            acc += detail::cell_signed(gj - path.values[l], -m[l], P.dist(j, l), P.pw1(j, l),
                                       P.pw1(j, k), P.pw2(j, l), P.pw2(j, k), inv_e1, inv_e2);
            best = std::max(best,
                            std::abs((gj - path.values[k]) * P.pw1(j, k) + one_minus * acc));
        }
    }
    return best / (std::tgamma(alpha) * std::tgamma(1.0 - alpha));
}

/// Generalized Lebesgue-Stieltjes integral
///
///   integral f dg = - integral_{t_0}^T D^a_{0+} f_{0+} (x) *
///                      D^{1-a}_{T-} g_{T-} (x) dx  +  f(t_0) (g(T)-g(t_0)),
///
/// with the admissibility norms checked first (|| f ||_{a,1} and
/// || g ||_{1-a,infinity,T} must be finite) and the outer integral taken by
/// trapezoid over the grid.  The overall sign of the inner-product term is
/// the real-form convention fixed by the t d(t^2) oracle.
inline double gls_integral(const SampledFunction& f, const SampledFunction& g,
                           const FracParams& params, unsigned jobs = 1) {
    if (!(f.grid == g.grid))
        throw std::invalid_argument("gls_integral: f and g must share one grid");
    detail::check_samples(f, "gls_integral");
    detail::check_samples(g, "gls_integral");
    const double a = params.alpha;
    if (!std::isfinite(norm_alpha_1(f, a)))
        throw std::runtime_error(
            "gls_integral: admissibility check failed: norm_alpha_1(f) diverges under cell "
            "refinement");
    if (!std::isfinite(norm_one_minus_alpha_inf(g, a)))
        throw std::runtime_error(
            "gls_integral: admissibility check failed: norm_one_minus_alpha_inf(g) diverges "
            "under cell refinement");
    const SampledFunction df = weyl_left(f, a, nullptr, jobs);
    const SampledFunction dg = weyl_right(g, 1.0 - a, nullptr, jobs);
    const TimeGrid& grid = f.grid;
    double inner = 0.0;
    for (std::size_t k = 0; k < grid.cells(); ++k)
        inner += 0.5 * grid.dt(k) *
                 (df.values[k] * dg.values[k] + df.values[k + 1] * dg.values[k + 1]);
    const double boundary = f.values.front() * (g.values.back() - g.values.front());
    return -inner + boundary;
}

/// Two-column CSV round trip ("t,value" header, 17 significant digits).
inline void write_csv(const SampledFunction& f, std::ostream& os) {
    os << "t,value\n";
    char buf[96];
    for (std::size_t k = 0; k < f.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", f.grid[k], f.values[k]);
        os << buf;
    }
}

inline SampledFunction read_sampled_csv(std::istream& is) {
    std::vector<double> ts, vs;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("read_sampled_csv: expected two comma-separated columns");
        char* end1 = nullptr;
        char* end2 = nullptr;
        const std::string c0 = line.substr(0, comma), c1 = line.substr(comma + 1);
        const double t = std::strtod(c0.c_str(), &end1);
        const double v = std::strtod(c1.c_str(), &end2);
        const bool parsed = end1 != c0.c_str() && *end1 == '\0' && end2 != c1.c_str() &&
                            *end2 == '\0';
        if (!parsed) {
            if (first) {
                first = false;
                continue;  // header row
            }
            throw std::invalid_argument("read_sampled_csv: malformed row: " + line);
        }
        first = false;
        ts.push_back(t);
        vs.push_back(v);
    }
    if (ts.size() < 2) throw std::invalid_argument("read_sampled_csv: need at least two rows");
    return SampledFunction(TimeGrid(std::move(ts)), std::move(vs));
}

}  // namespace gfbm
