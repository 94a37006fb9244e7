#ifndef BFL_DISTRIBUTIONS_HPP
#define BFL_DISTRIBUTIONS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "errors.hpp"
#include "rng.hpp"

// Random variate generators used by the Gibbs kernels.
//
// Conventions:
//   Gamma(shape, rate)            mean shape / rate
//   InverseGamma(shape, scale)    1 / Gamma(shape, rate = scale)
//   InverseGaussian(mean, shape)  variance mean^3 / shape
//   Exponential(rate)             mean 1 / rate
//
// Every sampler returns a value in [DBL_MIN, DBL_MAX]: draws that underflow or
// overflow in double precision are clamped to the representable range.

namespace bfl {

namespace detail {

inline double clamp_positive(double x) {
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = std::numeric_limits<double>::max();
    if (!(x > lo)) return lo;
    if (x > hi) return hi;
    return x;
}

inline void require_positive(double value, const char* what) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw domain_error(std::string(what) + " must be positive and finite, got " + std::to_string(value));
    }
}

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

/// Gamma(shape, 1) by Marsaglia & Tsang; shape < 1 via the u^(1/shape) boost in log space.
inline double log_standard_gamma(double shape, RngStream& rng) {
    double boost = 0.0;
    if (shape < 1.0) {
        boost = std::log(rng.uniform()) / shape;
        shape += 1.0;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v) + boost;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v) + boost;
    }
}

} // namespace detail

/// Gamma draw, shape-rate parameterization (mean shape / rate).
inline double sample_gamma(double shape, double rate, RngStream& rng) {
    detail::require_positive(shape, "gamma shape");
    detail::require_positive(rate, "gamma rate");
    return detail::clamp_positive(std::exp(detail::log_standard_gamma(shape, rng) - std::log(rate)));
}

/// Inverse-gamma draw: reciprocal of Gamma(shape, rate = scale).
inline double sample_inverse_gamma(double shape, double scale, RngStream& rng) {
    detail::require_positive(shape, "inverse-gamma shape");
    detail::require_positive(scale, "inverse-gamma scale");
    return detail::clamp_positive(std::exp(std::log(scale) - detail::log_standard_gamma(shape, rng)));
}

/// Exponential draw with mean 1 / rate.
inline double sample_exponential(double rate, RngStream& rng) {
    detail::require_positive(rate, "exponential rate");
    return detail::clamp_positive(rng.exponential() / rate);
}

namespace detail {

// Michael, Schucany & Haas transformation with a uniform correction. The root
// is written as mean / (1 + q/2 + sqrt(q + q^2/4)), which is algebraically
// equal to the textbook form but free of cancellation when q is large.
inline double inverse_gaussian_unchecked(double mean, double shape, RngStream& rng) {
    const double v = rng.normal();
    const double q = mean * v * v / shape;
    const double x = mean / (1.0 + 0.5 * q + std::sqrt(q + 0.25 * q * q));
    if (rng.uniform() * (mean + x) <= mean) return x;
    return mean * (mean / x);
}

} // namespace detail

/// Inverse-Gaussian draw with the given mean and shape (variance mean^3 / shape).
inline double sample_inverse_gaussian(double mean, double shape, RngStream& rng) {
    detail::require_positive(mean, "inverse-Gaussian mean");
    detail::require_positive(shape, "inverse-Gaussian shape");
    return detail::clamp_positive(detail::inverse_gaussian_unchecked(mean, shape, rng));
}

namespace detail {

// PG(1, c) = J*(1, |c|/2) / 4. The J* sampler below follows Devroye's
// alternating-series method as adapted by Polson, Scott & Windle: a two-piece
// proposal (truncated inverse-Gaussian left of t, exponential right of t)
// accepted by bracketing the density series.

inline constexpr double pg_trunc = 2.0 / std::numbers::pi;  // t

/// Coefficient a_n(x) of the J*(1, 0) density series.
inline double pg_series_term(int n, double x) {
    const double k = n + 0.5;
    if (x <= pg_trunc) {
        return std::exp(std::log(std::numbers::pi * k) + 1.5 * std::log(2.0 / (std::numbers::pi * x)) -
                        2.0 * k * k / x);
    }
    return std::exp(std::log(std::numbers::pi * k) - 0.5 * k * k * std::numbers::pi * std::numbers::pi * x);
}

/// log P(X < t) for X ~ IG(mean 1/z, shape 1); z = 0 is the Levy limit.
inline double pg_log_left_mass(double z) {
    const double t = pg_trunc;
    const double rt = std::sqrt(t);
    if (z == 0.0) return std::log(2.0 * normal_cdf(-1.0 / rt));
    const double a = normal_cdf((t * z - 1.0) / rt);
    const double b = normal_cdf(-(t * z + 1.0) / rt);
    const double second = (b > 0.0) ? std::exp(2.0 * z + std::log(b)) : 0.0;
    return std::log(a + second);
}

/// Draw from IG(mean 1/z, shape 1) truncated to (0, t).
inline double pg_truncated_inverse_gaussian(double z, RngStream& rng) {
    const double t = pg_trunc;
    const double mean = (z > 0.0) ? 1.0 / z : std::numeric_limits<double>::infinity();
    if (mean > t) {
        // 1/X with X ~ Gamma(1/2, rate 1/2) truncated to X > 1/t, then an
        // exp(-z^2 x / 2) tilt correction.
        for (;;) {
            double chi;
            do {
                chi = 1.0 / t + 2.0 * rng.exponential();
            } while (rng.uniform() > std::sqrt(1.0 / (t * chi)));
            const double x = 1.0 / chi;
            if (rng.uniform() <= std::exp(-0.5 * z * z * x)) return x;
        }
    }
    for (;;) {
        const double x = inverse_gaussian_unchecked(mean, 1.0, rng);
        if (x < t) return x;
    }
}

inline double sample_jstar1(double z, RngStream& rng) {
    const double t = pg_trunc;
    const double K = std::numbers::pi * std::numbers::pi / 8.0 + 0.5 * z * z;
    const double log_p = std::log(std::numbers::pi / (2.0 * K)) - K * t;
    const double log_q = std::log(2.0) - z + pg_log_left_mass(z);
    const double prob_right = 1.0 / (1.0 + std::exp(log_q - log_p));

    for (;;) {
        double x;
        if (rng.uniform() < prob_right) {
            x = t + rng.exponential() / K;
        } else {
            x = pg_truncated_inverse_gaussian(z, rng);
        }
        double s = pg_series_term(0, x);
        const double y = rng.uniform() * s;
        for (int n = 1;; ++n) {
            if (n % 2 == 1) {
                s -= pg_series_term(n, x);
                if (y <= s) return x;
            } else {
                s += pg_series_term(n, x);
                if (y > s) break;
            }
        }
    }
}

} // namespace detail

/// Exact draw from the Polya-Gamma distribution PG(1, tilt).
inline double sample_polya_gamma(double tilt, RngStream& rng) {
    const double z = 0.5 * std::abs(tilt);
    return detail::clamp_positive(0.25 * detail::sample_jstar1(z, rng));
}

/// Mean of PG(1, c): tanh(c/2) / (2c), with the limit 1/4 at c = 0.
inline double polya_gamma_mean(double tilt) {
    const double c = std::abs(tilt);
    if (c < 1e-6) return 0.25 - c * c / 48.0;
    return std::tanh(0.5 * c) / (2.0 * c);
}

/**
 * Normal(mean, sd^2) truncated to (lo, hi), lo < hi.
 *
 * Plain rejection from the untruncated normal is tried first; when the
 * interval carries little mass an exact fallback is used (uniform proposal
 * for short intervals, Robert's translated-exponential proposal in the tails).
 */
inline double sample_truncated_normal(double mean, double sd, double lo, double hi, RngStream& rng,
                                      int max_plain_tries = 64) {
    detail::require_positive(sd, "truncated-normal sd");
    if (!(lo < hi)) throw domain_error("truncated-normal bounds must satisfy lo < hi");
    for (int i = 0; i < max_plain_tries; ++i) {
        const double x = mean + sd * rng.normal();
        if (x > lo && x < hi) return x;
    }
    double a = (lo - mean) / sd;
    double b = (hi - mean) / sd;
    bool flipped = false;
    if (b <= 0.0) {
        std::swap(a, b);
        a = -a;
        b = -b;
        flipped = true;
    }
    double z;
    if (a <= 0.0) {
        // interval straddles 0: uniform proposal, accept with exp(-z^2/2)
        for (;;) {
            z = a + (b - a) * rng.uniform();
            if (rng.uniform() <= std::exp(-0.5 * z * z)) break;
        }
    } else {
        const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
        if (b - a < 1.0 / alpha) {
            for (;;) {
                z = a + (b - a) * rng.uniform();
                if (rng.uniform() <= std::exp(0.5 * (a * a - z * z))) break;
            }
        } else {
            for (;;) {
                z = a + rng.exponential() / alpha;
                if (z >= b) continue;
                if (rng.uniform() <= std::exp(-0.5 * (z - alpha) * (z - alpha))) break;
            }
        }
    }
    if (flipped) z = -z;
    return mean + sd * z;
}

} // namespace bfl

#endif
