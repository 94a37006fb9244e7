#ifndef BFL_TEST_UTIL_HPP
#define BFL_TEST_UTIL_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace bfl::test {

inline double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double var_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
inline double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

/// 1% critical values.
inline double ks_crit_one(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }
inline double ks_crit_two(std::size_t n, std::size_t m) {
    const double a = static_cast<double>(n), b = static_cast<double>(m);
    return 1.628 * std::sqrt((a + b) / (a * b));
}

/// Composite Simpson rule on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int k = 1; k < panels; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/**
 * Density of PG(1, c) from its alternating series. For x = 4y the J*(1)
 * series is used in its small-x form below 2/pi and the large-x form above;
 * both are exact, they differ only in how fast they converge.
 */
inline double pg_density(double y, double c) {
    if (y <= 0.0) return 0.0;
    const double x = 4.0 * y;
    const double pi = 3.14159265358979323846;
    double f = 0.0;
    for (int n = 0; n < 200; ++n) {
        const double h = n + 0.5;
        double a;
        if (x <= 2.0 / pi) {
            a = pi * h * std::pow(2.0 / (pi * x), 1.5) * std::exp(-2.0 * h * h / x);
        } else {
            a = pi * h * std::exp(-h * h * pi * pi * x / 2.0);
        }
        f += (n % 2 ? -a : a);
        if (a < 1e-300) break;
    }
    return 4.0 * f * std::cosh(c / 2.0) * std::exp(-c * c * y / 2.0);
}

} // namespace bfl::test

#endif
