#pragma once

// Volatility-uncertainty priors: the set Theta of admissible instantaneous
// covariance matrices (stored by vertices; every bound used downstream is a
// linear functional of gamma, so extrema over the convex hull are attained at
// vertices), adapted scenario policies, d-dimensional G-Brownian increments,
// and Monte Carlo upper/lower sublinear expectations over a policy family.

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"
#include "rng.hpp"

namespace gfbm {

/// Convex set of admissible covariance-per-unit-time matrices, represented by
/// its vertices.
class UncertaintySet {
  public:
    UncertaintySet(std::size_t dim, std::vector<Eigen::MatrixXd> vertices)
        : dim_(dim), vertices_(std::move(vertices)) {
        if (dim_ == 0)
            throw std::invalid_argument("UncertaintySet: dimension must be >= 1");
        if (vertices_.empty())
            throw std::invalid_argument("UncertaintySet: need at least one vertex");
        sqrts_.reserve(vertices_.size());
        for (std::size_t v = 0; v < vertices_.size(); ++v) {
            Eigen::MatrixXd& g = vertices_[v];
            if (g.rows() != static_cast<Eigen::Index>(dim_) ||
                g.cols() != static_cast<Eigen::Index>(dim_))
                throw std::invalid_argument("UncertaintySet: vertex " +
                                            std::to_string(v) + " is not " +
                                            std::to_string(dim_) + "x" +
                                            std::to_string(dim_));
            if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12)
                throw std::invalid_argument("UncertaintySet: vertex " +
                                            std::to_string(v) + " is not symmetric");
            g = 0.5 * (g + g.transpose()); // exact symmetrization
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
            if (es.eigenvalues().minCoeff() < -1e-10)
                throw std::invalid_argument(
                    "UncertaintySet: vertex " + std::to_string(v) +
                    " is not positive semidefinite (min eigenvalue " +
                    std::to_string(es.eigenvalues().minCoeff()) + ")");
            const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
            sqrts_.push_back(es.eigenvectors() *
                             clipped.cwiseSqrt().asDiagonal() *
                             es.eigenvectors().transpose());
        }
    }

    /// One-dimensional interval [lo_sq, hi_sq] of variance rates.
    static UncertaintySet interval(double lo_sq, double hi_sq) {
        if (!(lo_sq <= hi_sq))
            throw std::invalid_argument("UncertaintySet::interval: need lo <= hi");
        std::vector<Eigen::MatrixXd> v;
        v.push_back(Eigen::MatrixXd::Constant(1, 1, lo_sq));
        if (hi_sq != lo_sq)
            v.push_back(Eigen::MatrixXd::Constant(1, 1, hi_sq));
        return UncertaintySet(1, std::move(v));
    }

    std::size_t dim() const { return dim_; }
    std::size_t vertex_count() const { return vertices_.size(); }
    const Eigen::MatrixXd& vertex(std::size_t v) const { return vertices_.at(v); }
    /// Symmetric PSD square root of vertex v.
    const Eigen::MatrixXd& vertex_sqrt(std::size_t v) const { return sqrts_.at(v); }
    const std::vector<Eigen::MatrixXd>& vertices() const { return vertices_; }

  private:
    std::size_t dim_;
    std::vector<Eigen::MatrixXd> vertices_;
    std::vector<Eigen::MatrixXd> sqrts_;
};

/// (sigma_low^2, sigma_high^2) for component i (1-based): extrema of the
/// diagonal entry gamma_ii over the vertex set.
inline std::pair<double, double> sigma_bounds(const UncertaintySet& theta,
                                              std::size_t i) {
    if (i < 1 || i > theta.dim())
        throw std::invalid_argument("sigma_bounds: component index out of range");
    double lo = theta.vertex(0)(i - 1, i - 1), hi = lo;
    for (std::size_t v = 1; v < theta.vertex_count(); ++v) {
        const double g = theta.vertex(v)(i - 1, i - 1);
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    return {lo, hi};
}

/// Cross-component second-moment bounds for i != j (1-based):
///   sigma_high_sq_ij = sup(g_ii+g_jj+2g_ij) - inf(g_ii+g_jj-2g_ij),
///   sigma_low_sq_ij  = inf(g_ii+g_jj+2g_ij) - sup(g_ii+g_jj-2g_ij),
/// all four extrema taken over the vertex set.
inline std::pair<double, double> cross_bounds(const UncertaintySet& theta,
                                              std::size_t i, std::size_t j) {
    if (i < 1 || i > theta.dim() || j < 1 || j > theta.dim())
        throw std::invalid_argument("cross_bounds: component index out of range");
    if (i == j)
        throw std::invalid_argument("cross_bounds: need i != j");
    double sup_plus, inf_plus, sup_minus, inf_minus;
    sup_plus = inf_plus = sup_minus = inf_minus = 0.0;
    for (std::size_t v = 0; v < theta.vertex_count(); ++v) {
        const Eigen::MatrixXd& g = theta.vertex(v);
        const double plus = g(i - 1, i - 1) + g(j - 1, j - 1) + 2.0 * g(i - 1, j - 1);
        const double minus = g(i - 1, i - 1) + g(j - 1, j - 1) - 2.0 * g(i - 1, j - 1);
        if (v == 0) {
            sup_plus = inf_plus = plus;
            sup_minus = inf_minus = minus;
        } else {
            sup_plus = std::max(sup_plus, plus);
            inf_plus = std::min(inf_plus, plus);
            sup_minus = std::max(sup_minus, minus);
            inf_minus = std::min(inf_minus, minus);
        }
    }
    return {inf_plus - sup_minus, sup_plus - inf_minus};
}

/// G(A) = (1/2) max over vertices of tr(A gamma); input must be symmetric.
inline double g_function(const UncertaintySet& theta, const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols() ||
        a.rows() != static_cast<Eigen::Index>(theta.dim()))
        throw std::invalid_argument("g_function: matrix dimension mismatch");
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("g_function: matrix must be symmetric");
    double best = 0.0;
    for (std::size_t v = 0; v < theta.vertex_count(); ++v) {
        const double tr = (a * theta.vertex(v)).trace();
        if (v == 0 || tr > best)
            best = tr;
    }
    return 0.5 * best;
}

/// Adapted volatility scenario: which vertex drives cell k.
struct ScenarioPolicy {
    enum class Kind { ConstantVertex, PiecewiseSwitch, AntitheticPair };

    Kind kind = Kind::ConstantVertex;
    std::size_t vertex = 0;         // ConstantVertex
    std::uint64_t switch_seed = 0;  // PiecewiseSwitch
    std::shared_ptr<const ScenarioPolicy> base; // AntitheticPair
    std::string description;

    static ScenarioPolicy constant(std::size_t vertex_index) {
        ScenarioPolicy p;
        p.kind = Kind::ConstantVertex;
        p.vertex = vertex_index;
        p.description = "const:" + std::to_string(vertex_index);
        return p;
    }

    /// Feedback switching rule: the vertex for cell k is a deterministic mix
    /// of (seed, k, sign of the component-0 running value at t_k), so the
    /// choice uses only information available at the cell's left endpoint.
    static ScenarioPolicy piecewise_switch(std::uint64_t seed) {
        ScenarioPolicy p;
        p.kind = Kind::PiecewiseSwitch;
        p.switch_seed = seed;
        p.description = "switch:" + std::to_string(seed);
        return p;
    }

    static ScenarioPolicy antithetic(ScenarioPolicy base_policy) {
        ScenarioPolicy p;
        p.kind = Kind::AntitheticPair;
        p.base = std::make_shared<const ScenarioPolicy>(std::move(base_policy));
        p.description = "antithetic(" + p.base->description + ")";
        return p;
    }
};

/// One simulated G-Brownian path: increments and cumulative values.
struct PathBundle {
    TimeGrid grid;
    std::size_t dim = 0;
    std::vector<double> increments; // [i*N + k], N = grid.cells()
    std::vector<double> values;     // [i*(N+1) + k], values[i][0] = 0
    std::string policy_id;
    std::uint64_t replicate_seed = 0;

    explicit PathBundle(TimeGrid g) : grid(std::move(g)) {}

    double increment(std::size_t i, std::size_t k) const {
        return increments[i * grid.cells() + k];
    }
    double value(std::size_t i, std::size_t k) const {
        return values[i * (grid.cells() + 1) + k];
    }
};

namespace detail {

inline std::size_t switch_vertex(std::uint64_t seed, std::size_t cell,
                                 bool nonnegative, std::size_t n_vertices) {
    std::uint64_t s = seed ^ (0x9E3779B97F4A7C15ULL * (cell + 1)) ^
                      (nonnegative ? 0x5555555555555555ULL : 0xAAAAAAAAAAAAAAAAULL);
    return static_cast<std::size_t>(splitmix64(s) % n_vertices);
}

inline PathBundle simulate_gbm_impl(const UncertaintySet& theta,
                                    const ScenarioPolicy& policy,
                                    const TimeGrid& grid, std::uint64_t seed,
                                    bool negate) {
    // Antithetic wrapper delegates to its base; the pairing (same seed, sign
    // flip on the Gaussians) is organized by estimate().
    const ScenarioPolicy* p = &policy;
    while (p->kind == ScenarioPolicy::Kind::AntitheticPair) {
        if (!p->base)
            throw std::invalid_argument("ScenarioPolicy: antithetic without base");
        p = p->base.get();
    }
    if (p->kind == ScenarioPolicy::Kind::ConstantVertex &&
        p->vertex >= theta.vertex_count())
        throw std::invalid_argument("ScenarioPolicy: vertex index " +
                                    std::to_string(p->vertex) + " out of range");

    const std::size_t d = theta.dim();
    const std::size_t n = grid.cells();
    PathBundle out(grid);
    out.dim = d;
    out.policy_id = policy.description;
    out.replicate_seed = seed;
    out.increments.assign(d * n, 0.0);
    out.values.assign(d * (n + 1), 0.0);

    NormalSampler rng(seed);
    Eigen::VectorXd z(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t v = p->vertex;
        if (p->kind == ScenarioPolicy::Kind::PiecewiseSwitch) {
            // running value of component 0 at the cell's left endpoint
            const bool nonneg = out.values[k] >= 0.0;
            v = switch_vertex(p->switch_seed, k, nonneg, theta.vertex_count());
        }
        const Eigen::MatrixXd& s = theta.vertex_sqrt(v);
        for (std::size_t i = 0; i < d; ++i)
            z(static_cast<Eigen::Index>(i)) = rng();
        if (negate)
            z = -z;
        const Eigen::VectorXd db = std::sqrt(grid.dt(k)) * (s * z);
        for (std::size_t i = 0; i < d; ++i) {
            out.increments[i * n + k] = db(static_cast<Eigen::Index>(i));
            out.values[i * (n + 1) + k + 1] =
                out.values[i * (n + 1) + k] + db(static_cast<Eigen::Index>(i));
        }
    }
    return out;
}

} // namespace detail

/// Simulate one G-Brownian path: per cell k the policy picks gamma_k in Theta
/// and dB_k = sqrt(dt_k) * sqrt(gamma_k) * Z_k with Z_k standard Gaussian.
/// Deterministic in (seed, policy).
inline PathBundle simulate_gbm(const UncertaintySet& theta,
                               const ScenarioPolicy& policy,
                               const TimeGrid& grid, std::uint64_t seed) {
    return detail::simulate_gbm_impl(theta, policy, grid, seed, false);
}

/// Per-policy Monte Carlo statistics inside a SublinearEstimate.
struct PolicyStats {
    std::string policy_id;
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t replicates = 0;
    std::size_t rejected = 0; // non-finite payoff evaluations, excluded
};

/// Upper/lower sublinear expectation estimated over a finite policy family.
/// The finite family can only explore part of the prior set, so `upper` is an
/// approximation from below of the true supremum (and `lower` from above).
struct SublinearEstimate {
    double upper = 0.0;
    double lower = 0.0;
    double upper_stderr = 0.0;
    double lower_stderr = 0.0;
    std::size_t upper_policy = 0; // index into per_policy
    std::size_t lower_policy = 0;
    std::vector<PolicyStats> per_policy;
    std::size_t replicates = 0;
    std::uint64_t master_seed = 0;
    // Finite-family caveat: upper is a lower bound of sup_P E_P[X], lower an
    // upper bound of the corresponding infimum.
    bool family_is_inner_approximation = true;
};

struct EstimateOptions {
    unsigned jobs = 1;
    double max_nonfinite_fraction = 0.01;
};

/// Estimate upper = max over policies of the Monte Carlo mean of the payoff
/// and lower = -(max mean of the negated payoff). The same replicates serve
/// both, so lower equals the min of the per-policy means. Replicate r of
/// policy p uses derive_seed(master_seed, p, r) (antithetic pairs share the
/// seed of replicate 2*(r/2) and flip the Gaussians on odd r), and the means
/// are reduced in replicate order regardless of scheduling.
inline SublinearEstimate
estimate(const std::function<double(const PathBundle&)>& payoff,
         const UncertaintySet& theta, const std::vector<ScenarioPolicy>& policies,
         const TimeGrid& grid, std::size_t m, std::uint64_t master_seed,
         const EstimateOptions& opts = {}) {
    if (m < 2)
        throw std::invalid_argument("estimate: need at least 2 replicates");
    if (policies.empty())
        throw std::invalid_argument("estimate: need at least one policy");

    SublinearEstimate out;
    out.replicates = m;
    out.master_seed = master_seed;
    out.per_policy.reserve(policies.size());

    for (std::size_t p = 0; p < policies.size(); ++p) {
        const ScenarioPolicy& pol = policies[p];
        const bool anti = pol.kind == ScenarioPolicy::Kind::AntitheticPair;
        std::vector<double> vals(m);
        detail::parallel_for(m, opts.jobs, [&](std::size_t r) {
            const std::uint64_t rep = anti ? (r / 2) * 2 : r;
            const std::uint64_t seed =
                derive_seed(master_seed, static_cast<std::uint64_t>(p), rep);
            const bool negate = anti && (r % 2 == 1);
            PathBundle b = detail::simulate_gbm_impl(theta, pol, grid, seed, negate);
            vals[r] = payoff(b);
        });
        // Stable reduction in replicate order; non-finite values are excluded
        // and counted.
        PolicyStats st;
        st.policy_id = pol.description;
        double sum = 0.0;
        std::size_t kept = 0;
        for (double v : vals) {
            if (std::isfinite(v)) {
                sum += v;
                ++kept;
            } else {
                ++st.rejected;
            }
        }
        if (st.rejected > opts.max_nonfinite_fraction * static_cast<double>(m))
            throw std::runtime_error("estimate: policy " + pol.description + " had " +
                                     std::to_string(st.rejected) +
                                     " non-finite payoff evaluations out of " +
                                     std::to_string(m));
        if (kept < 2)
            throw std::runtime_error("estimate: policy " + pol.description +
                                     " has fewer than 2 usable replicates");
        const double mean = sum / static_cast<double>(kept);
        double ss = 0.0;
        for (double v : vals)
            if (std::isfinite(v))
                ss += (v - mean) * (v - mean);
        st.mean = mean;
        st.stderr_ = std::sqrt(ss / (static_cast<double>(kept) *
                                     static_cast<double>(kept - 1)));
        st.replicates = kept;
        out.per_policy.push_back(std::move(st));
    }

    out.upper_policy = 0;
    out.lower_policy = 0;
    for (std::size_t p = 1; p < out.per_policy.size(); ++p) {
        if (out.per_policy[p].mean > out.per_policy[out.upper_policy].mean)
            out.upper_policy = p;
        if (out.per_policy[p].mean < out.per_policy[out.lower_policy].mean)
            out.lower_policy = p;
    }
    out.upper = out.per_policy[out.upper_policy].mean;
    out.lower = out.per_policy[out.lower_policy].mean;
    out.upper_stderr = out.per_policy[out.upper_policy].stderr_;
    out.lower_stderr = out.per_policy[out.lower_policy].stderr_;
    return out;
}

} // namespace gfbm
