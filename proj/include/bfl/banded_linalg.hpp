#ifndef BFL_BANDED_LINALG_HPP
#define BFL_BANDED_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "errors.hpp"
#include "rng.hpp"

namespace bfl {

/// Symmetric tridiagonal matrix; off-diagonal stored once.
struct SymTridiagonal {
    Eigen::VectorXd diag;     // length p
    Eigen::VectorXd offdiag;  // length p - 1

    Eigen::Index size() const { return diag.size(); }

    Eigen::MatrixXd to_dense() const {
        const Eigen::Index p = size();
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
        m.diagonal() = diag;
        for (Eigen::Index j = 0; j + 1 < p; ++j) {
            m(j, j + 1) = offdiag[j];
            m(j + 1, j) = offdiag[j];
        }
        return m;
    }
};

/// Dense system for N(precision^-1 * linear_term, precision^-1).
struct PrecisionSystem {
    Eigen::MatrixXd precision;
    Eigen::VectorXd linear_term;
};

namespace detail {

inline void require_all_positive(const Eigen::VectorXd& v, const char* what) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
            throw domain_error(std::string(what) + "[" + std::to_string(i) + "] must be positive and finite");
        }
    }
}

/// diag(1/tau2) + D^T diag(diff_precision) D, D the first-difference operator.
inline SymTridiagonal assemble_tridiagonal(const Eigen::VectorXd& tau2, const Eigen::VectorXd& diff_precision) {
    const Eigen::Index p = tau2.size();
    SymTridiagonal out{tau2.cwiseInverse(), -diff_precision};
    for (Eigen::Index j = 0; j + 1 < p; ++j) {
        out.diag[j] += diff_precision[j];
        out.diag[j + 1] += diff_precision[j];
    }
    return out;
}

} // namespace detail

/// Prior precision of the fused-Laplace model. ttau2[j] is the scale of beta[j+1] - beta[j].
inline SymTridiagonal build_fused_precision(const Eigen::VectorXd& tau2, const Eigen::VectorXd& ttau2) {
    if (tau2.size() < 1 || ttau2.size() != tau2.size() - 1) {
        throw dimension_error("build_fused_precision: need tau2 of length p and ttau2 of length p-1");
    }
    detail::require_all_positive(tau2, "tau2");
    detail::require_all_positive(ttau2, "ttau2");
    return detail::assemble_tridiagonal(tau2, ttau2.cwiseInverse());
}

/// Prior precision of the horseshoe-fusion model: difference scales lambda2[j] * ttilde2.
inline SymTridiagonal build_horseshoe_precision(const Eigen::VectorXd& tau2, const Eigen::VectorXd& lambda2,
                                                double ttilde2) {
    if (tau2.size() < 1 || lambda2.size() != tau2.size() - 1) {
        throw dimension_error("build_horseshoe_precision: need tau2 of length p and lambda2 of length p-1");
    }
    detail::require_all_positive(tau2, "tau2");
    detail::require_all_positive(lambda2, "lambda2");
    if (!(ttilde2 > 0.0) || !std::isfinite(ttilde2)) throw domain_error("ttilde2 must be positive and finite");
    return detail::assemble_tridiagonal(tau2, (lambda2 * ttilde2).cwiseInverse());
}

/// Diagonal prior precision diag(1/tau2) of the plain Bayesian lasso, in tridiagonal form.
inline SymTridiagonal build_diagonal_precision(const Eigen::VectorXd& tau2) {
    if (tau2.size() < 1) throw dimension_error("build_diagonal_precision: empty tau2");
    detail::require_all_positive(tau2, "tau2");
    return SymTridiagonal{tau2.cwiseInverse(), Eigen::VectorXd::Zero(tau2.size() - 1)};
}

inline Eigen::MatrixXd add_tridiagonal(Eigen::MatrixXd dense, const SymTridiagonal& tri) {
    const Eigen::Index p = tri.size();
    if (dense.rows() != p || dense.cols() != p || tri.offdiag.size() != std::max<Eigen::Index>(p - 1, 0)) {
        throw dimension_error("add_tridiagonal: dimension mismatch");
    }
    dense.diagonal() += tri.diag;
    for (Eigen::Index j = 0; j + 1 < p; ++j) {
        dense(j, j + 1) += tri.offdiag[j];
        dense(j + 1, j) += tri.offdiag[j];
    }
    return dense;
}

namespace detail {

inline Eigen::LLT<Eigen::MatrixXd> factor_precision(const PrecisionSystem& sys) {
    const Eigen::Index p = sys.precision.rows();
    if (sys.precision.cols() != p || sys.linear_term.size() != p) {
        throw dimension_error("PrecisionSystem: precision must be p x p and linear_term length p");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(sys.precision);
    if (llt.info() != Eigen::Success) throw factorization_error("precision matrix is not numerically positive definite");
    const auto& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < p; ++i) {
        if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) {
            throw factorization_error("precision matrix is not numerically positive definite");
        }
    }
    return llt;
}

} // namespace detail

/**
 * Draw from N(A^-1 m, A^-1) given A (precision) and m (linear term).
 *
 * With A = L L^T: the mean solves L u = m, L^T mu = u, and the draw adds
 * L^-T z for z ~ N(0, I). A is never inverted.
 */
inline Eigen::VectorXd sample_gaussian_from_precision(const PrecisionSystem& sys, RngStream& rng) {
    const auto llt = detail::factor_precision(sys);
    const Eigen::Index p = sys.precision.rows();
    Eigen::VectorXd rhs = llt.matrixL().solve(sys.linear_term);
    for (Eigen::Index i = 0; i < p; ++i) rhs[i] += rng.normal();
    return llt.matrixU().solve(rhs);
}

/// log N(x; A^-1 m, A^-1), evaluated through the Cholesky factor of A.
inline double gaussian_log_density_from_precision(const PrecisionSystem& sys, const Eigen::VectorXd& x) {
    const auto llt = detail::factor_precision(sys);
    const Eigen::Index p = sys.precision.rows();
    const Eigen::VectorXd mean = llt.solve(sys.linear_term);
    const Eigen::VectorXd r = llt.matrixU() * (x - mean);
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return 0.5 * log_det - 0.5 * static_cast<double>(p) * std::log(2.0 * std::numbers::pi) - 0.5 * r.squaredNorm();
}

} // namespace bfl

#endif
