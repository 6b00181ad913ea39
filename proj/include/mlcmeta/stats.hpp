#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mlcmeta/error.hpp"

namespace mlcmeta {

// Descriptive statistics use population (biased) normalization throughout:
// the values describe the data set itself, not a sample from a larger one.

inline double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double population_variance(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size());
}

inline double population_stddev(std::span<const double> xs) {
    return std::sqrt(population_variance(xs));
}

// m3 / m2^(3/2); zero-variance samples map to the sentinel 0.
inline double population_skewness(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    const double m = mean(xs);
    double m2 = 0.0, m3 = 0.0;
    for (double x : xs) {
        const double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    const double n = static_cast<double>(xs.size());
    m2 /= n;
    m3 /= n;
    if (m2 <= 0.0) return 0.0;
    return m3 / std::pow(m2, 1.5);
}

// Excess kurtosis m4 / m2^2 - 3; zero-variance samples map to the sentinel 0.
inline double population_kurtosis(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    const double m = mean(xs);
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - m;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    const double n = static_cast<double>(xs.size());
    m2 /= n;
    m4 /= n;
    if (m2 <= 0.0) return 0.0;
    return m4 / (m2 * m2) - 3.0;
}

// std / mean; mean == 0 maps to the sentinel 0.
inline double coefficient_of_variation(std::span<const double> xs) {
    const double m = mean(xs);
    if (m == 0.0) return 0.0;
    return population_stddev(xs) / m;
}

// Entropy in bits of a Bernoulli variable with success probability p.
inline double binary_entropy(double p) {
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
    return h < 0.0 ? 0.0 : h; // clear the -0.0 case
}

// Entropy in bits of a discrete distribution given by non-negative counts.
inline double entropy_from_counts(std::span<const double> counts) {
    double total = 0.0;
    for (double c : counts) total += c;
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double c : counts) {
        if (c > 0.0) {
            const double p = c / total;
            h -= p * std::log2(p);
        }
    }
    return h < 0.0 ? 0.0 : h;
}

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz's method).
inline double inc_beta_cf(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 1e-15;
    constexpr double tiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace detail

// Regularized incomplete beta function I_x(a, b).
inline double regularized_inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b)
                          + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::inc_beta_cf(a, b, x) / a;
    }
    return 1.0 - front * detail::inc_beta_cf(b, a, 1.0 - x) / b;
}

// Upper-tail probability P(F > f) for the F distribution with (d1, d2)
// degrees of freedom.
inline double f_upper_tail(double f, double d1, double d2) {
    if (f <= 0.0) return 1.0;
    const double x = d2 / (d2 + d1 * f);
    return regularized_inc_beta(d2 / 2.0, d1 / 2.0, x);
}

// Critical value c with P(X > c) = alpha for the chi-square distribution with
// one degree of freedom. Uses the identity P(X > c) = erfc(sqrt(c / 2)) and
// bisects on t = sqrt(c / 2).
inline double chi_square_critical_1df(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw contract_error("chi-square alpha must lie in (0, 1)");
    double lo = 0.0, hi = 40.0; // erfc(40) underflows far past any usable alpha
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (std::erfc(mid) > alpha) lo = mid; else hi = mid;
        if (hi - lo < 1e-15 * (1.0 + hi)) break;
    }
    const double t = 0.5 * (lo + hi);
    return 2.0 * t * t;
}

// Quartile with linear interpolation between order statistics (the common
// "type 7" rule). q in [0, 1]; input need not be sorted.
inline double quantile_linear(std::vector<double> xs, double q) {
    if (xs.empty()) throw contract_error("quantile of empty sample");
    std::sort(xs.begin(), xs.end());
    if (q <= 0.0) return xs.front();
    if (q >= 1.0) return xs.back();
    const double pos = q * static_cast<double>(xs.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= xs.size()) return xs.back();
    return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

} // namespace mlcmeta
