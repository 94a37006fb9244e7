#ifndef BFL_METRICS_HPP
#define BFL_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dataset.hpp"
#include "errors.hpp"
#include "gibbs.hpp"

namespace bfl {

/// Point estimates and decision flags from one replication.
struct ReplicationResult {
    double beta0_hat = 0.0;
    Eigen::VectorXd beta_hat;
    std::vector<bool> selected;       // coefficient judged non-zero
    std::vector<bool> fused_nonzero;  // adjacent difference judged non-zero
};

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

/// Mean and sample standard deviation (sd = 0 for a single value).
inline MeanSd mean_sd(std::span<const double> values) {
    if (values.empty()) throw domain_error("mean_sd of an empty sample");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

/// Per-replication squared error beta0_hat^2 + |beta_hat - beta_star|^2.
inline double squared_error(const ReplicationResult& r, const Eigen::VectorXd& beta_star) {
    if (r.beta_hat.size() != beta_star.size()) throw dimension_error("estimate and truth lengths differ");
    return r.beta0_hat * r.beta0_hat + (r.beta_hat - beta_star).squaredNorm();
}

inline MeanSd mse(std::span<const ReplicationResult> results, const Eigen::VectorXd& beta_star) {
    if (results.empty()) throw domain_error("mse needs at least one replication");
    std::vector<double> v;
    for (const auto& r : results) v.push_back(squared_error(r, beta_star));
    return mean_sd(v);
}

/**
 * Empirical negative expected log-likelihood per test point:
 * -(1/m) sum_j [ y_j eta_j - log(1 + exp(eta_j)) ], eta_j = beta0_hat + x_j'beta_hat.
 * Multiply by m for the unnormalized sum.
 */
inline double expected_neg_loglik(const ReplicationResult& r, const Dataset& test) {
    if (test.n() < 1) throw domain_error("expected_neg_loglik needs a non-empty test set");
    return -log_likelihood(r.beta0_hat, r.beta_hat, test) / static_cast<double>(test.n());
}

// ---------------------------------------------------------------------------
// Selection and fusion rates

/// Undefined rates (empty denominator class) are std::nullopt.
struct SelectionRates {
    std::optional<MeanSd> pv;
    std::optional<MeanSd> pzv;
    MeanSd av;
};

struct FusionRates {
    std::optional<MeanSd> pf;
    std::optional<MeanSd> pnf;
    MeanSd af;
};

/// Throws undefined_rate_error for a rate whose denominator class is empty.
inline MeanSd require_rate(const std::optional<MeanSd>& rate, const char* name) {
    if (!rate) throw undefined_rate_error(std::string(name) + " is undefined: its denominator class is empty");
    return *rate;
}

namespace detail {

// Given truth "is non-zero" and estimated "judged non-zero" per item, returns
// per-replication hit rates on the non-zero class, the zero class, and overall.
inline void classification_rates(std::span<const ReplicationResult> results, const std::vector<bool>& truth_nonzero,
                                 bool use_fusion_flags, std::optional<MeanSd>& pos, std::optional<MeanSd>& neg,
                                 MeanSd& all) {
    if (results.empty()) throw domain_error("rates need at least one replication");
    const auto total = truth_nonzero.size();
    const auto n_pos = static_cast<std::size_t>(std::count(truth_nonzero.begin(), truth_nonzero.end(), true));
    const auto n_neg = total - n_pos;
    std::vector<double> pos_rates, neg_rates, all_rates;
    for (const auto& r : results) {
        const auto& flags = use_fusion_flags ? r.fused_nonzero : r.selected;
        if (flags.size() != total) throw dimension_error("flag vector length does not match the truth");
        std::size_t hit_pos = 0, hit_neg = 0;
        for (std::size_t j = 0; j < total; ++j) {
            if (truth_nonzero[j] && flags[j]) ++hit_pos;
            if (!truth_nonzero[j] && !flags[j]) ++hit_neg;
        }
        if (n_pos) pos_rates.push_back(static_cast<double>(hit_pos) / static_cast<double>(n_pos));
        if (n_neg) neg_rates.push_back(static_cast<double>(hit_neg) / static_cast<double>(n_neg));
        all_rates.push_back(static_cast<double>(hit_pos + hit_neg) / static_cast<double>(total));
    }
    pos = n_pos ? std::optional<MeanSd>(mean_sd(pos_rates)) : std::nullopt;
    neg = n_neg ? std::optional<MeanSd>(mean_sd(neg_rates)) : std::nullopt;
    all = mean_sd(all_rates);
}

} // namespace detail

/// PV, PZV, AV from the 95% interval selection flags.
inline SelectionRates selection_rates(std::span<const ReplicationResult> results, const Eigen::VectorXd& beta_star) {
    std::vector<bool> truth;
    for (Eigen::Index j = 0; j < beta_star.size(); ++j) truth.push_back(beta_star[j] != 0.0);
    SelectionRates out;
    detail::classification_rates(results, truth, false, out.pv, out.pzv, out.av);
    return out;
}

/// PF, PNF, AF over the p-1 adjacent differences of beta_star.
inline FusionRates fusion_rates(std::span<const ReplicationResult> results, const Eigen::VectorXd& beta_star) {
    if (beta_star.size() < 2) throw dimension_error("fusion rates need p >= 2");
    std::vector<bool> truth;
    for (Eigen::Index j = 0; j + 1 < beta_star.size(); ++j) truth.push_back(beta_star[j + 1] != beta_star[j]);
    FusionRates out;
    detail::classification_rates(results, truth, true, out.pf, out.pnf, out.af);
    return out;
}

// ---------------------------------------------------------------------------
// Ranking metrics

namespace detail {

inline void check_scored(std::span<const double> scores, std::span<const double> labels) {
    if (scores.size() != labels.size()) throw dimension_error("scores and labels lengths differ");
    for (double l : labels) {
        if (l != 0.0 && l != 1.0) throw domain_error("labels must be 0 or 1");
    }
}

} // namespace detail

/// ROC AUC as the Mann-Whitney statistic: P(score+ > score-) + P(tie)/2.
inline double auc(std::span<const double> scores, std::span<const double> labels) {
    detail::check_scored(scores, labels);
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t k = i;
        while (k < n && scores[order[k]] == scores[order[i]]) ++k;
        const double midrank = 0.5 * static_cast<double>(i + 1 + k);  // ranks i+1 .. k
        for (std::size_t m = i; m < k; ++m) {
            if (labels[order[m]] == 1.0) {
                rank_sum_pos += midrank;
                ++n_pos;
            }
        }
        i = k;
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw domain_error("auc needs both classes present");
    const double np = static_cast<double>(n_pos);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

/**
 * Area under the precision-recall curve.
 *
 * Thresholds sweep the distinct scores in descending order; each threshold
 * yields one (recall, precision) point. The curve starts at recall 0 with the
 * precision of the first point and is integrated by the trapezoid rule over
 * the achieved points.
 */
inline double pr_auc(std::span<const double> scores, std::span<const double> labels) {
    detail::check_scored(scores, labels);
    const std::size_t n = scores.size();
    const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1.0));
    if (n_pos == 0) throw domain_error("pr_auc needs at least one positive label");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double area = 0.0;
    double prev_recall = 0.0;
    double prev_precision = -1.0;
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t k = i;
        while (k < n && scores[order[k]] == scores[order[i]]) {
            if (labels[order[k]] == 1.0) ++tp; else ++fp;
            ++k;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        if (prev_precision < 0.0) prev_precision = precision;
        area += 0.5 * (recall - prev_recall) * (precision + prev_precision);
        prev_recall = recall;
        prev_precision = precision;
        i = k;
    }
    return area;
}

inline double auc(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
    return auc(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
               std::span<const double>(labels.data(), static_cast<std::size_t>(labels.size())));
}

inline double pr_auc(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
    return pr_auc(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
                  std::span<const double>(labels.data(), static_cast<std::size_t>(labels.size())));
}

} // namespace bfl

#endif
