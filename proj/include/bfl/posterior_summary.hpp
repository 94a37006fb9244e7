#ifndef BFL_POSTERIOR_SUMMARY_HPP
#define BFL_POSTERIOR_SUMMARY_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "gibbs.hpp"

namespace bfl {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Point estimates, credible intervals and the zero / fusion decisions.
struct PosteriorSummary {
    double beta0_mean = 0.0;
    Eigen::VectorXd beta_mean;
    std::vector<Interval> ci_beta;   // level coef_level
    std::vector<Interval> ci_diff;   // level diff_level, on beta[j+1] - beta[j]
    std::vector<bool> selected;      // true: coefficient judged non-zero
    std::vector<bool> fused;         // true: adjacent difference judged non-zero
    double coef_level = 0.95;
    double diff_level = 0.50;
    long draws = 0;
};

/**
 * Empirical quantile with linear interpolation between order statistics
 * (h = (n - 1) q, the "type 7" rule). `sorted` must be ascending.
 */
inline double quantile_sorted(std::span<const double> sorted, double q) {
    const auto n = sorted.size();
    if (n == 0) throw insufficient_draws_error("quantile of an empty sample");
    const double h = static_cast<double>(n - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, n - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Equal-tailed interval between the (1-level)/2 and (1+level)/2 quantiles.
inline Interval credible_interval(std::span<const double> draws, double level) {
    if (draws.size() < 2) throw insufficient_draws_error("credible_interval needs at least 2 draws");
    if (!(level > 0.0 && level < 1.0)) throw domain_error("credible level must lie in (0, 1)");
    std::vector<double> sorted(draws.begin(), draws.end());
    std::sort(sorted.begin(), sorted.end());
    const double tail = 0.5 * (1.0 - level);
    return {quantile_sorted(sorted, tail), quantile_sorted(sorted, 1.0 - tail)};
}

inline Interval credible_interval(const Eigen::VectorXd& draws, double level) {
    return credible_interval(std::span<const double>(draws.data(), static_cast<std::size_t>(draws.size())), level);
}

inline constexpr long min_summary_draws = 100;

/// Summary from raw draws (beta_draws is retained x p).
inline PosteriorSummary summarize_draws(const Eigen::VectorXd& beta0_draws, const Eigen::MatrixXd& beta_draws,
                                        double coef_level = 0.95, double diff_level = 0.50) {
    const Eigen::Index m = beta_draws.rows();
    const Eigen::Index p = beta_draws.cols();
    if (m < min_summary_draws) {
        throw insufficient_draws_error("summarize needs at least " + std::to_string(min_summary_draws) +
                                       " retained draws, got " + std::to_string(m));
    }
    if (beta0_draws.size() != m) throw dimension_error("beta0 and beta draw counts differ");

    PosteriorSummary s;
    s.coef_level = coef_level;
    s.diff_level = diff_level;
    s.draws = m;
    s.beta0_mean = beta0_draws.mean();
    s.beta_mean = beta_draws.colwise().mean().transpose();
    for (Eigen::Index j = 0; j < p; ++j) {
        const Eigen::VectorXd col = beta_draws.col(j);
        const Interval ci = credible_interval(col, coef_level);
        s.ci_beta.push_back(ci);
        s.selected.push_back(!ci.contains(0.0));
    }
    for (Eigen::Index j = 0; j + 1 < p; ++j) {
        const Eigen::VectorXd diff = beta_draws.col(j + 1) - beta_draws.col(j);
        const Interval ci = credible_interval(diff, diff_level);
        s.ci_diff.push_back(ci);
        s.fused.push_back(!ci.contains(0.0));
    }
    return s;
}

inline PosteriorSummary summarize(const Chain& chain, double coef_level = 0.95, double diff_level = 0.50) {
    return summarize_draws(chain.beta0_draws, chain.beta_draws, coef_level, diff_level);
}

/// Number of fusion groups implied by the difference flags: one plus the number of boundaries.
inline long count_groups(const std::vector<bool>& fused) {
    return 1 + static_cast<long>(std::count(fused.begin(), fused.end(), true));
}

struct EssResult {
    double value = 0.0;
    bool degenerate = false;  // zero-variance series; value is then the draw count
};

/**
 * Effective sample size by Geyer's initial positive sequence: sum the
 * autocorrelation pairs rho(2m) + rho(2m+1) while they stay positive.
 */
inline EssResult effective_sample_size(std::span<const double> draws) {
    const std::size_t n = draws.size();
    if (n < 100) throw insufficient_draws_error("effective_sample_size needs at least 100 draws");
    double mean = 0.0;
    for (double x : draws) mean += x;
    mean /= static_cast<double>(n);
    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = draws[i] - mean;

    auto autocov = [&](std::size_t lag) {
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) acc += centered[i] * centered[i + lag];
        return acc / static_cast<double>(n);
    };
    const double gamma0 = autocov(0);
    if (!(gamma0 > 0.0) || gamma0 < 1e-300) return {static_cast<double>(n), true};

    double tau = -1.0;
    for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
        const double pair = (autocov(2 * m) + autocov(2 * m + 1)) / gamma0;
        if (pair <= 0.0) break;
        tau += 2.0 * pair;
    }
    const double ess = static_cast<double>(n) / std::max(tau, 1.0 / static_cast<double>(n));
    return {std::min(ess, static_cast<double>(n)), false};
}

inline EssResult effective_sample_size(const Eigen::VectorXd& draws) {
    return effective_sample_size(std::span<const double>(draws.data(), static_cast<std::size_t>(draws.size())));
}

} // namespace bfl

#endif
