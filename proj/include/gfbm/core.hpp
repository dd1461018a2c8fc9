#pragma once

// Shared basics: time grids, small result types, linear regression and
// parallel-for helpers used across the toolkit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gfbm {

/// Partition 0 = t_0 < t_1 < ... < t_N = T. Cell k is [t_k, t_{k+1}).
class TimeGrid {
  public:
    explicit TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
        if (nodes_.size() < 2)
            throw std::invalid_argument("TimeGrid: need at least two nodes");
        if (nodes_.front() != 0.0)
            throw std::invalid_argument("TimeGrid: first node must be 0");
        for (std::size_t k = 0; k + 1 < nodes_.size(); ++k)
            if (!(nodes_[k + 1] > nodes_[k]))
                throw std::invalid_argument("TimeGrid: nodes must be strictly increasing");
    }

    /// Uniform grid with n cells on [0, horizon].
    static TimeGrid uniform(std::size_t n, double horizon) {
        if (n == 0 || !(horizon > 0.0))
            throw std::invalid_argument("TimeGrid::uniform: need n >= 1 and horizon > 0");
        std::vector<double> v(n + 1);
        for (std::size_t k = 0; k <= n; ++k)
            v[k] = horizon * static_cast<double>(k) / static_cast<double>(n);
        v[n] = horizon; // exact endpoint
        return TimeGrid(std::move(v));
    }

    std::size_t cells() const { return nodes_.size() - 1; }
    std::size_t size() const { return nodes_.size(); }
    double operator[](std::size_t k) const { return nodes_[k]; }
    double dt(std::size_t k) const { return nodes_[k + 1] - nodes_[k]; }
    double horizon() const { return nodes_.back(); }
    const std::vector<double>& nodes() const { return nodes_; }

    /// Index of the node equal to `t` (no interpolation; 1e-12 absolute slack
    /// for re-derived node values). Throws if `t` is not a grid node.
    std::size_t index_of(double t) const {
        auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t - 1e-12);
        if (it == nodes_.end() || std::abs(*it - t) > 1e-12)
            throw std::invalid_argument("TimeGrid: time " + std::to_string(t) +
                                        " is not a grid node");
        return static_cast<std::size_t>(it - nodes_.begin());
    }

    bool operator==(const TimeGrid& o) const { return nodes_ == o.nodes_; }

  private:
    std::vector<double> nodes_;
};

/// Monte Carlo sample statistic.
struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
    MeanStderr r;
    r.n = xs.size();
    if (r.n == 0)
        throw std::invalid_argument("mean_stderr: empty sample");
    double s = 0.0;
    for (double x : xs)
        s += x;
    r.mean = s / static_cast<double>(r.n);
    if (r.n > 1) {
        double ss = 0.0;
        for (double x : xs) {
            const double d = x - r.mean;
            ss += d * d;
        }
        r.stderr_ = std::sqrt(ss / (static_cast<double>(r.n) - 1.0) /
                              static_cast<double>(r.n));
    }
    return r;
}

/// Least-squares line y ~ slope*x + intercept.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LineFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("linear_fit: need two equal-length samples, size >= 2");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0)
        throw std::invalid_argument("linear_fit: degenerate abscissae");
    LineFit f;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

namespace detail {

/// Run fn(i) for i in [0, n). With jobs > 1 the index range is chunked across
/// threads; results must be written to per-index slots so the outcome is
/// independent of scheduling.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (n == 0)
        return;
    if (jobs <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    std::exception_ptr err;
    std::mutex err_m; // first error wins; others discarded
    for (unsigned w = 0; w < jobs; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t i = w; i < n; i += jobs)
                    fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(err_m);
                if (!err)
                    err = std::current_exception();
            }
        });
    }
    for (auto& th : pool)
        th.join();
    if (err)
        std::rethrow_exception(err);
}

} // namespace detail

} // namespace gfbm
