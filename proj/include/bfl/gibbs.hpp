#ifndef BFL_GIBBS_HPP
#define BFL_GIBBS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "banded_linalg.hpp"
#include "dataset.hpp"
#include "distributions.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace bfl {

enum class ModelTag { blasso, lbfl, lbfh };

inline std::string_view to_string(ModelTag tag) {
    switch (tag) {
    case ModelTag::blasso: return "blasso";
    case ModelTag::lbfl: return "lbfl";
    case ModelTag::lbfh: return "lbfh";
    }
    return "unknown";
}

inline ModelTag parse_model_tag(std::string_view name) {
    if (name == "blasso") return ModelTag::blasso;
    if (name == "lbfl") return ModelTag::lbfl;
    if (name == "lbfh") return ModelTag::lbfh;
    throw domain_error("unknown model '" + std::string(name) + "' (expected blasso, lbfl or lbfh)");
}

/**
 * Prior hyperparameters and chain controls.
 *
 * lambda1^2 ~ Gamma(r1, rate delta1), lambda2^2 ~ Gamma(r2, rate delta2),
 * intercept ~ Uniform(-alpha, alpha).
 */
struct HyperConfig {
    double r1 = 1.0;
    double delta1 = 0.01;
    double r2 = 1.0;
    double delta2 = 0.01;
    double alpha = 1e6;
    long iterations = 10000;
    long burnin = 6000;
    long thin = 1;
    std::uint64_t seed = 1;

    long retained() const { return (iterations - burnin) / thin; }

    void validate() const {
        for (double v : {r1, delta1, r2, delta2, alpha}) {
            if (!(v > 0.0)) throw domain_error("hyperparameters r1, delta1, r2, delta2, alpha must be positive");
        }
        if (iterations < 1) throw domain_error("iterations must be positive");
        if (burnin < 0 || burnin >= iterations) throw domain_error("burnin must satisfy 0 <= burnin < iterations");
        if (thin < 1) throw domain_error("thin must be at least 1");
    }
};

/// Squared magnitudes are floored here before forming inverse-Gaussian means.
inline constexpr double squared_floor = 1e-30;

/// Latents shared by every model: coefficients and Polya-Gamma weights.
struct AugmentedState {
    double beta0 = 0.0;
    Eigen::VectorXd beta;
    Eigen::VectorXd w;
    Eigen::VectorXd kappa;  // y - 1/2, fixed by the data
};

struct StateBlasso : AugmentedState {
    Eigen::VectorXd tau2;
    double lambda_sq = 1.0;
};

struct StateLBFL : AugmentedState {
    Eigen::VectorXd tau2;
    Eigen::VectorXd ttau2;  // scales of beta[j+1] - beta[j], j = 0..p-2
    double lambda1_sq = 1.0;
    double lambda2_sq = 1.0;
};

struct StateLBFH : AugmentedState {
    Eigen::VectorXd tau2;
    double tlambda1_sq = 1.0;
    Eigen::VectorXd lambda2;  // local difference scales
    double ttilde2 = 1.0;     // global difference scale
    Eigen::VectorXd nu;
    double xi = 1.0;
};

/// Retained post-burn-in draws of one chain.
struct Chain {
    ModelTag model = ModelTag::lbfl;
    std::vector<long> iteration;        // 1-based sweep index of each retained draw
    Eigen::VectorXd beta0_draws;
    Eigen::MatrixXd beta_draws;         // retained x p
    std::vector<std::string> hyper_names;
    Eigen::MatrixXd hyper_draws;        // retained x hyper_names.size()
    long retained = 0;
    long pd_retry_count = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

// ---------------------------------------------------------------------------
// Likelihood

namespace detail {

/// log(1 + exp(x)) without overflow.
inline double log1p_exp(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

} // namespace detail

/// Logistic log-likelihood sum_i [ y_i eta_i - log(1 + exp(eta_i)) ], eta = beta0 + X beta.
inline double log_likelihood(double beta0, const Eigen::VectorXd& beta, const Dataset& data) {
    if (beta.size() != data.p()) throw dimension_error("log_likelihood: beta length does not match the design");
    const Eigen::VectorXd eta = (data.X * beta).array() + beta0;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += data.y[i] * eta[i] - detail::log1p_exp(eta[i]);
    return ll;
}

/// P(y = 1 | x) = 1 / (1 + exp(-(beta0 + x'beta))), kept strictly inside (0, 1).
inline double predict_prob(double beta0, const Eigen::VectorXd& beta, const Eigen::VectorXd& x) {
    if (beta.size() != x.size()) throw dimension_error("predict_prob: beta and x lengths differ");
    const double eta = beta0 + beta.dot(x);
    double prob;
    if (eta >= 0.0) {
        prob = 1.0 / (1.0 + std::exp(-eta));
    } else {
        const double e = std::exp(eta);
        prob = e / (1.0 + e);
    }
    constexpr double lo = std::numeric_limits<double>::min();
    const double hi = std::nextafter(1.0, 0.0);
    if (std::isnan(prob)) return 0.5;
    return prob < lo ? lo : (prob > hi ? hi : prob);
}

// ---------------------------------------------------------------------------
// Shared conditional updates

inline Eigen::VectorXd make_kappa(const Eigen::VectorXd& y) { return y.array() - 0.5; }

/// w_i ~ PG(1, beta0 + x_i'beta), independently.
inline void update_augmentation(AugmentedState& state, const Dataset& data, RngStream& rng) {
    const Eigen::VectorXd eta = (data.X * state.beta).array() + state.beta0;
    state.w.resize(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) state.w[i] = sample_polya_gamma(eta[i], rng);
}

/**
 * Precision and linear term of the conditional of beta:
 * A = X'WX + prior, m = X'(kappa - beta0 w). The second form equals
 * X'W(z - beta0 1) with z_i = kappa_i / w_i, without dividing by w_i.
 */
inline PrecisionSystem coefficient_system(const AugmentedState& state, const Dataset& data,
                                          const SymTridiagonal& prior_precision) {
    const Eigen::Index p = data.p();
    const Eigen::MatrixXd xw = data.X.array().colwise() * state.w.array().sqrt();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(xw.transpose());
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    PrecisionSystem sys;
    sys.precision = add_tridiagonal(std::move(gram), prior_precision);
    sys.linear_term = data.X.transpose() * (state.kappa - state.beta0 * state.w);
    return sys;
}

/// beta ~ N(A^-1 m, A^-1). Throws factorization_error when A is not numerically PD.
inline void update_coefficients(AugmentedState& state, const Dataset& data, const SymTridiagonal& prior_precision,
                                RngStream& rng) {
    state.beta = sample_gaussian_from_precision(coefficient_system(state, data, prior_precision), rng);
}

/// beta0 ~ N(sum(v)/S, 1/S) restricted to (-alpha, alpha), v_i = kappa_i - w_i x_i'beta, S = sum(w).
inline void update_intercept(AugmentedState& state, const Dataset& data, double alpha, RngStream& rng) {
    const double s = state.w.sum();
    const double sum_v = state.kappa.sum() - state.w.dot(data.X * state.beta);
    state.beta0 = sample_truncated_normal(sum_v / s, 1.0 / std::sqrt(s), -alpha, alpha, rng);
}

namespace detail {

inline double floored_square(double x) { return std::max(x * x, squared_floor); }

/// 1/tau_j^2 ~ IGauss(sqrt(lambda_sq / beta_j^2), lambda_sq) for each j.
inline void update_coefficient_scales(Eigen::VectorXd& tau2, const Eigen::VectorXd& beta, double lambda_sq,
                                      RngStream& rng) {
    tau2.resize(beta.size());
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double mean = std::sqrt(lambda_sq / floored_square(beta[j]));
        tau2[j] = 1.0 / sample_inverse_gaussian(mean, lambda_sq, rng);
    }
}

} // namespace detail

/// Bayesian-lasso scales: tau^2 then lambda^2 ~ Gamma(p + r1, rate sum(tau^2)/2 + delta1).
inline void update_blasso_scales(StateBlasso& state, const HyperConfig& hyper, RngStream& rng) {
    const auto p = static_cast<double>(state.beta.size());
    detail::update_coefficient_scales(state.tau2, state.beta, state.lambda_sq, rng);
    state.lambda_sq = sample_gamma(p + hyper.r1, 0.5 * state.tau2.sum() + hyper.delta1, rng);
}

/// Fused-Laplace scales: tau^2, lambda1^2, then the difference scales and lambda2^2.
inline void update_lbfl_scales(StateLBFL& state, const HyperConfig& hyper, RngStream& rng) {
    const Eigen::Index p = state.beta.size();
    detail::update_coefficient_scales(state.tau2, state.beta, state.lambda1_sq, rng);
    state.lambda1_sq = sample_gamma(static_cast<double>(p) + hyper.r1, 0.5 * state.tau2.sum() + hyper.delta1, rng);

    state.ttau2.resize(p - 1);
    for (Eigen::Index j = 0; j + 1 < p; ++j) {
        const double diff2 = detail::floored_square(state.beta[j + 1] - state.beta[j]);
        state.ttau2[j] = 1.0 / sample_inverse_gaussian(std::sqrt(state.lambda2_sq / diff2), state.lambda2_sq, rng);
    }
    state.lambda2_sq =
        sample_gamma(static_cast<double>(p - 1) + hyper.r2, 0.5 * state.ttau2.sum() + hyper.delta2, rng);
}

/**
 * Horseshoe-fusion scales. Inverse-gamma draws use the (shape, scale) form.
 *
 *   1/tau_j^2      ~ IGauss(sqrt(tl1 / beta_j^2), tl1)
 *   tl1            ~ Gamma(p + r1, rate sum(tau^2)/2 + delta1)
 *   ttilde^2       ~ IG(p/2, sum(d_j^2 / lambda_j^2)/2 + 1/xi)
 *   lambda_j^2     ~ IG(1, d_j^2 / (2 ttilde^2) + 1/nu_j)
 *   nu_j           ~ IG(1, 1/lambda_j^2 + 1)
 *   xi             ~ IG(1, 1/ttilde^2 + 1)
 *
 * with d_j = beta_{j+1} - beta_j.
 */
inline void update_lbfh_scales(StateLBFH& state, const HyperConfig& hyper, RngStream& rng) {
    const Eigen::Index p = state.beta.size();
    detail::update_coefficient_scales(state.tau2, state.beta, state.tlambda1_sq, rng);
    state.tlambda1_sq = sample_gamma(static_cast<double>(p) + hyper.r1, 0.5 * state.tau2.sum() + hyper.delta1, rng);

    Eigen::VectorXd diff2(p - 1);
    for (Eigen::Index j = 0; j + 1 < p; ++j) diff2[j] = detail::floored_square(state.beta[j + 1] - state.beta[j]);

    const double weighted = (diff2.array() / state.lambda2.array()).sum();
    state.ttilde2 = sample_inverse_gamma(0.5 * static_cast<double>(p), 0.5 * weighted + 1.0 / state.xi, rng);
    for (Eigen::Index j = 0; j + 1 < p; ++j) {
        state.lambda2[j] = sample_inverse_gamma(1.0, diff2[j] / (2.0 * state.ttilde2) + 1.0 / state.nu[j], rng);
    }
    for (Eigen::Index j = 0; j + 1 < p; ++j) {
        state.nu[j] = sample_inverse_gamma(1.0, 1.0 / state.lambda2[j] + 1.0, rng);
    }
    state.xi = sample_inverse_gamma(1.0, 1.0 / state.ttilde2 + 1.0, rng);
}

inline SymTridiagonal prior_precision(const StateBlasso& s) { return build_diagonal_precision(s.tau2); }
inline SymTridiagonal prior_precision(const StateLBFL& s) { return build_fused_precision(s.tau2, s.ttau2); }
inline SymTridiagonal prior_precision(const StateLBFH& s) {
    return build_horseshoe_precision(s.tau2, s.lambda2, s.ttilde2);
}

inline void update_scales(StateBlasso& s, const HyperConfig& h, RngStream& rng) { update_blasso_scales(s, h, rng); }
inline void update_scales(StateLBFL& s, const HyperConfig& h, RngStream& rng) { update_lbfl_scales(s, h, rng); }
inline void update_scales(StateLBFH& s, const HyperConfig& h, RngStream& rng) { update_lbfh_scales(s, h, rng); }

// ---------------------------------------------------------------------------
// Model traits: tag, hyperparameter columns, initial state

template <typename State>
struct ModelTraits;

template <>
struct ModelTraits<StateBlasso> {
    static constexpr ModelTag tag = ModelTag::blasso;
    static std::vector<std::string> hyper_names() { return {"lambda_sq"}; }
    static void hyper_values(const StateBlasso& s, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out) { out[0] = s.lambda_sq; }
};

template <>
struct ModelTraits<StateLBFL> {
    static constexpr ModelTag tag = ModelTag::lbfl;
    static std::vector<std::string> hyper_names() { return {"lambda1_sq", "lambda2_sq"}; }
    static void hyper_values(const StateLBFL& s, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out) {
        out[0] = s.lambda1_sq;
        out[1] = s.lambda2_sq;
    }
};

template <>
struct ModelTraits<StateLBFH> {
    static constexpr ModelTag tag = ModelTag::lbfh;
    static std::vector<std::string> hyper_names() { return {"tlambda1_sq", "ttilde2"}; }
    static void hyper_values(const StateLBFH& s, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out) {
        out[0] = s.tlambda1_sq;
        out[1] = s.ttilde2;
    }
};

/// beta = 0, beta0 = 0, every scale latent 1, w drawn once from PG(1, 0).
template <typename State>
State initial_state(const Dataset& data, RngStream& rng) {
    const Eigen::Index p = data.p();
    State s;
    s.beta0 = 0.0;
    s.beta = Eigen::VectorXd::Zero(p);
    s.kappa = make_kappa(data.y);
    s.tau2 = Eigen::VectorXd::Ones(p);
    if constexpr (std::is_same_v<State, StateLBFL>) {
        s.ttau2 = Eigen::VectorXd::Ones(p - 1);
    }
    if constexpr (std::is_same_v<State, StateLBFH>) {
        s.lambda2 = Eigen::VectorXd::Ones(p - 1);
        s.nu = Eigen::VectorXd::Ones(p - 1);
    }
    update_augmentation(s, data, rng);
    return s;
}

/// Consecutive factorization failures tolerated within one sweep.
inline constexpr int max_pd_retries = 10;

/**
 * One Gibbs sweep: scales, prior precision, beta, beta0, w.
 *
 * If the precision of the beta conditional cannot be factored, the scale
 * latents are redrawn and the block is retried; each retry increments
 * *pd_retries. After max_pd_retries consecutive failures chain_failure is
 * thrown.
 */
template <typename State>
void gibbs_step(State& state, const Dataset& data, const HyperConfig& hyper, RngStream& rng,
                long* pd_retries = nullptr) {
    for (int attempt = 0;; ++attempt) {
        update_scales(state, hyper, rng);
        try {
            update_coefficients(state, data, prior_precision(state), rng);
            break;
        } catch (const factorization_error& e) {
            if (pd_retries) ++*pd_retries;
            if (attempt + 1 >= max_pd_retries) {
                throw chain_failure(std::string("giving up after ") + std::to_string(max_pd_retries) +
                                    " consecutive factorization failures: " + e.what());
            }
        }
    }
    update_intercept(state, data, hyper.alpha, rng);
    update_augmentation(state, data, rng);
}

template <typename State>
Chain run_chain_typed(const Dataset& data, const HyperConfig& hyper, std::uint64_t stream_id = 0) {
    using Traits = ModelTraits<State>;
    validate(data, Traits::tag == ModelTag::blasso ? 1 : 2);
    hyper.validate();

    RngStream rng(hyper.seed, stream_id);
    State state = initial_state<State>(data, rng);

    Chain chain;
    chain.model = Traits::tag;
    chain.seed = hyper.seed;
    chain.stream_id = stream_id;
    chain.hyper_names = Traits::hyper_names();
    const long keep = hyper.retained();
    chain.retained = keep;
    chain.iteration.reserve(static_cast<std::size_t>(keep));
    chain.beta0_draws.resize(keep);
    chain.beta_draws.resize(keep, data.p());
    chain.hyper_draws.resize(keep, static_cast<Eigen::Index>(chain.hyper_names.size()));

    long row = 0;
    for (long it = 1; it <= hyper.iterations; ++it) {
        gibbs_step(state, data, hyper, rng, &chain.pd_retry_count);
        if (it > hyper.burnin && (it - hyper.burnin) % hyper.thin == 0 && row < keep) {
            chain.iteration.push_back(it);
            chain.beta0_draws[row] = state.beta0;
            chain.beta_draws.row(row) = state.beta.transpose();
            Traits::hyper_values(state, chain.hyper_draws.row(row));
            ++row;
        }
    }
    return chain;
}

/// Run one chain of the given model from the default initial state.
inline Chain run_chain(ModelTag model, const Dataset& data, const HyperConfig& hyper, std::uint64_t stream_id = 0) {
    switch (model) {
    case ModelTag::blasso: return run_chain_typed<StateBlasso>(data, hyper, stream_id);
    case ModelTag::lbfl: return run_chain_typed<StateLBFL>(data, hyper, stream_id);
    case ModelTag::lbfh: return run_chain_typed<StateLBFH>(data, hyper, stream_id);
    }
    throw domain_error("unknown model tag");
}

} // namespace bfl

#endif
