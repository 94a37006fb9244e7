#ifndef BFL_DATASET_HPP
#define BFL_DATASET_HPP

#include <string>

#include <Eigen/Dense>

#include "errors.hpp"

namespace bfl {

/// Design matrix (rows are observations) with a 0/1 response.
struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }
};

/// Throws unless n >= 1, p >= min_p, sizes agree and every y is 0 or 1.
inline void validate(const Dataset& data, Eigen::Index min_p = 2) {
    if (data.n() < 1) throw dimension_error("dataset has no rows");
    if (data.p() < min_p) {
        throw dimension_error("dataset needs at least " + std::to_string(min_p) + " columns, has " +
                              std::to_string(data.p()));
    }
    if (data.y.size() != data.n()) throw dimension_error("response length does not match the number of rows");
    for (Eigen::Index i = 0; i < data.y.size(); ++i) {
        if (data.y[i] != 0.0 && data.y[i] != 1.0) {
            throw domain_error("response must be 0 or 1; row " + std::to_string(i) + " has " +
                               std::to_string(data.y[i]));
        }
    }
    if (!data.X.allFinite()) throw domain_error("design matrix contains non-finite values");
}

} // namespace bfl

#endif
