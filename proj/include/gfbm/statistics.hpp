#pragma once

// Distribution-level test statistics used by the verifiers: two-sample
// Kolmogorov-Smirnov with the asymptotic Kolmogorov p-value and the
// Jarque-Bera normality test (chi-squared with 2 dof under the null).

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace gfbm {

/// Kolmogorov survival function Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} e^{-2k^2
/// lambda^2}, clamped to [0, 1].
inline double kolmogorov_q(double lambda) {
    if (lambda <= 0.0)
        return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term =
            std::exp(-2.0 * static_cast<double>(k) * static_cast<double>(k) *
                     lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-16)
            break;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

struct KsResult {
    double statistic = 0.0; // sup |F_a - F_b|
    double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with Stephens' small-sample correction
/// of the asymptotic p-value.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.size() < 8 || b.size() < 8)
        throw std::invalid_argument("ks_two_sample: need at least 8 samples each");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        const double x = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] <= x)
            ++ia;
        while (ib < b.size() && b[ib] <= x)
            ++ib;
        d = std::max(d, std::abs(static_cast<double>(ia) / na -
                                 static_cast<double>(ib) / nb));
    }
    const double ne = na * nb / (na + nb);
    const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    return {d, kolmogorov_q(lambda)};
}

struct JbResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

/// Jarque-Bera test: JB = n/6 (S^2 + K^2/4); under normality JB ~ chi2(2), so
/// p = exp(-JB/2) exactly.
inline JbResult jarque_bera(const std::vector<double>& x) {
    if (x.size() < 16)
        throw std::invalid_argument("jarque_bera: need at least 16 samples");
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x)
        mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double c = v - mean;
        m2 += c * c;
        m3 += c * c * c;
        m4 += c * c * c * c;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    JbResult r;
    r.skewness = m3 / std::pow(m2, 1.5);
    r.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    r.statistic = n / 6.0 *
                  (r.skewness * r.skewness +
                   0.25 * r.excess_kurtosis * r.excess_kurtosis);
    r.p_value = std::exp(-0.5 * r.statistic);
    return r;
}

} // namespace gfbm
