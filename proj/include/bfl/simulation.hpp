#ifndef BFL_SIMULATION_HPP
#define BFL_SIMULATION_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "dataset.hpp"
#include "errors.hpp"
#include "gibbs.hpp"
#include "metrics.hpp"
#include "posterior_summary.hpp"
#include "rng.hpp"

namespace bfl {

enum class BetaVariant { b1, b2, b4 };

inline std::string_view to_string(BetaVariant v) {
    switch (v) {
    case BetaVariant::b1: return "b1";
    case BetaVariant::b2: return "b2";
    case BetaVariant::b4: return "b4";
    }
    return "unknown";
}

inline BetaVariant parse_beta_variant(std::string_view name) {
    if (name == "b1") return BetaVariant::b1;
    if (name == "b2") return BetaVariant::b2;
    if (name == "b4") return BetaVariant::b4;
    throw domain_error("unknown beta variant '" + std::string(name) + "' (expected b1, b2 or b4)");
}

/// One synthetic design: covariance case, true coefficients, sizes and seed.
struct CaseSpec {
    int case_id = 1;
    BetaVariant beta_variant = BetaVariant::b1;
    double rho = 0.0;  // Case 1 only
    long n = 500;
    long replications = 100;
    long test_size = 1000;
    std::uint64_t seed = 1;

    void validate() const {
        if (case_id < 1 || case_id > 4) throw domain_error("case id must be 1, 2, 3 or 4");
        if ((case_id == 4) != (beta_variant == BetaVariant::b4)) {
            throw domain_error("beta variant b4 goes with case 4 only, and case 4 requires b4");
        }
        if (!(rho >= 0.0 && rho < 1.0)) throw domain_error("rho must lie in [0, 1)");
        if (n < 1 || replications < 1 || test_size < 1) {
            throw domain_error("n, replications and test_size must be positive");
        }
    }
};

namespace detail {

inline void append_block(std::vector<double>& v, double value, int count) { v.insert(v.end(), count, value); }

} // namespace detail

inline Eigen::VectorXd make_beta_star(int case_id, BetaVariant variant) {
    CaseSpec{case_id, variant}.validate();
    std::vector<double> v;
    switch (variant) {
    case BetaVariant::b1:
        for (double b : {1.0, 0.0, 1.0, 0.0}) detail::append_block(v, b, 5);
        break;
    case BetaVariant::b2:
        for (double b : {-1.0, 2.0, 1.0, 0.0}) detail::append_block(v, b, 5);
        break;
    case BetaVariant::b4:
        detail::append_block(v, 1.0, 20);
        detail::append_block(v, -1.0, 20);
        detail::append_block(v, 0.0, 170);
        detail::append_block(v, 1.5, 20);
        detail::append_block(v, 0.0, 170);
        break;
    }
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/**
 * Covariance of the covariates.
 *   Case 1: unit diagonal, every off-diagonal rho.
 *   Case 2: 0.5 where beta*_i = beta*_j and 1 <= |i-j| <= 4, else 0.
 *   Case 3: as Case 2 with 0.5^|i-j|.
 *   Case 4: identity.
 */
inline Eigen::MatrixXd make_sigma(int case_id, const Eigen::VectorXd& beta_star, double rho = 0.0) {
    const Eigen::Index p = beta_star.size();
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if (i == j) continue;
            const auto dist = std::abs(i - j);
            const bool same_block = beta_star[i] == beta_star[j] && dist <= 4;
            switch (case_id) {
            case 1: s(i, j) = rho; break;
            case 2: s(i, j) = same_block ? 0.5 : 0.0; break;
            case 3: s(i, j) = same_block ? std::pow(0.5, static_cast<double>(dist)) : 0.0; break;
            case 4: break;
            default: throw domain_error("case id must be 1, 2, 3 or 4");
            }
        }
    }
    if (Eigen::LLT<Eigen::MatrixXd>(s).info() != Eigen::Success) {
        throw factorization_error("covariance matrix is not positive definite");
    }
    return s;
}

namespace detail {

inline constexpr std::uint64_t data_stream_tag = 1ULL << 62;

inline Dataset draw_design(const Eigen::MatrixXd& chol_lower, const Eigen::VectorXd& beta_star, long rows,
                           RngStream& rng) {
    const Eigen::Index p = beta_star.size();
    Dataset d;
    d.X.resize(rows, p);
    d.y.resize(rows);
    Eigen::VectorXd z(p);
    for (long i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) z[j] = rng.normal();
        d.X.row(i) = (chol_lower * z).transpose();
        const double prob = 1.0 / (1.0 + std::exp(-d.X.row(i).dot(beta_star)));
        d.y[i] = rng.uniform() < prob ? 1.0 : 0.0;
    }
    return d;
}

} // namespace detail

/// Training and test sets for one replication; no intercept in the true model.
inline std::pair<Dataset, Dataset> generate_dataset(const CaseSpec& spec, long replication_index) {
    spec.validate();
    const Eigen::VectorXd beta_star = make_beta_star(spec.case_id, spec.beta_variant);
    const Eigen::MatrixXd sigma = make_sigma(spec.case_id, beta_star, spec.rho);
    const Eigen::MatrixXd lower = Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();
    const auto rep = static_cast<std::uint64_t>(replication_index);
    RngStream train_rng(spec.seed, detail::data_stream_tag | (2 * rep));
    RngStream test_rng(spec.seed, detail::data_stream_tag | (2 * rep + 1));
    return {detail::draw_design(lower, beta_star, spec.n, train_rng),
            detail::draw_design(lower, beta_star, spec.test_size, test_rng)};
}

/// Means (sd) over completed replications. EL is per test point; el_sum is EL times test size.
struct MetricTable {
    MeanSd mse, el, el_sum;
    std::optional<MeanSd> pv, pzv;
    MeanSd av;
    std::optional<MeanSd> pf, pnf;
    MeanSd af;
    long completed = 0;
    long failed = 0;
};

struct ExperimentResult {
    MetricTable table;
    std::vector<ReplicationResult> results;  // completed replications, in index order
    std::vector<long> replication_index;
    std::vector<double> squared_errors;
    std::vector<double> el;                  // per test point
    std::vector<std::string> failures;       // "rep <k>: <message>"
    long pd_retries = 0;
};

inline ReplicationResult to_replication_result(const PosteriorSummary& s) {
    return {s.beta0_mean, s.beta_mean, s.selected, s.fused};
}

/// Run replications of one design with one model; threads = 0 uses the hardware count.
inline ExperimentResult run_experiment(const CaseSpec& spec, ModelTag model, const HyperConfig& hyper,
                                       unsigned threads = 0) {
    spec.validate();
    hyper.validate();
    const Eigen::VectorXd beta_star = make_beta_star(spec.case_id, spec.beta_variant);

    struct Slot {
        std::optional<ReplicationResult> result;
        double el = 0.0;
        long retries = 0;
        std::string error;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(spec.replications));
    std::atomic<long> next{0};

    auto worker = [&] {
        for (long k = next++; k < spec.replications; k = next++) {
            Slot& slot = slots[static_cast<std::size_t>(k)];
            try {
                const auto [train, test] = generate_dataset(spec, k);
                const Chain chain = run_chain(model, train, hyper, static_cast<std::uint64_t>(k));
                slot.retries = chain.pd_retry_count;
                ReplicationResult r = to_replication_result(summarize(chain));
                slot.el = expected_neg_loglik(r, test);
                slot.result = std::move(r);
            } catch (const std::exception& e) {
                slot.error = e.what();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<long>(threads, spec.replications));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }

    ExperimentResult out;
    for (long k = 0; k < spec.replications; ++k) {
        Slot& slot = slots[static_cast<std::size_t>(k)];
        out.pd_retries += slot.retries;
        if (!slot.result) {
            out.failures.push_back("rep " + std::to_string(k) + ": " + slot.error);
            continue;
        }
        out.replication_index.push_back(k);
        out.squared_errors.push_back(squared_error(*slot.result, beta_star));
        out.el.push_back(slot.el);
        out.results.push_back(std::move(*slot.result));
    }
    MetricTable& t = out.table;
    t.completed = static_cast<long>(out.results.size());
    t.failed = static_cast<long>(out.failures.size());
    if (t.completed == 0) return out;

    t.mse = mean_sd(out.squared_errors);
    t.el = mean_sd(out.el);
    t.el_sum = {t.el.mean * static_cast<double>(spec.test_size), t.el.sd * static_cast<double>(spec.test_size)};
    const SelectionRates sel = selection_rates(out.results, beta_star);
    t.pv = sel.pv;
    t.pzv = sel.pzv;
    t.av = sel.av;
    const FusionRates fus = fusion_rates(out.results, beta_star);
    t.pf = fus.pf;
    t.pnf = fus.pnf;
    t.af = fus.af;
    return out;
}

enum class Preset { desk, paper };

inline Preset parse_preset(std::string_view name) {
    if (name == "desk") return Preset::desk;
    if (name == "paper") return Preset::paper;
    throw domain_error("unknown preset '" + std::string(name) + "' (expected desk or paper)");
}

/// desk: 10 replications of 4000 sweeps (2000 burn-in); paper: 100 of 10000 (6000 burn-in).
inline void apply_preset(Preset preset, CaseSpec& spec, HyperConfig& hyper) {
    if (preset == Preset::desk) {
        spec.replications = 10;
        hyper.iterations = 4000;
        hyper.burnin = 2000;
    } else {
        spec.replications = 100;
        hyper.iterations = 10000;
        hyper.burnin = 6000;
    }
    hyper.thin = 1;
    spec.n = spec.case_id == 4 ? 300 : 500;
    spec.test_size = 1000;
}

} // namespace bfl

#endif
