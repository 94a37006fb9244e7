#ifndef BFL_ERRORS_HPP
#define BFL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bfl {

/// Invalid distribution or model parameter (non-positive scale, level outside (0,1), ...).
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Vector or matrix sizes that do not agree.
class dimension_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Cholesky factorization of a precision matrix failed.
class factorization_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Too few retained draws for a summary or diagnostic.
class insufficient_draws_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The chain could not recover from repeated factorization failures.
class chain_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file; the message carries the path and line number.
class parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A rate whose denominator class is empty.
class undefined_rate_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace bfl

#endif
