// common.hpp
// Tolerances and error types shared by every usdqkd module.

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace usdqkd {

using cplx = std::complex<double>;

struct Tolerances {
    double num_tol = 1e-10;         // generic floating-point agreement
    double tail_tol = 1e-12;        // allowed discarded Fock mass
    double degeneracy_tol = 1e-8;   // M below this means no USD basis exists
    std::size_t n_cut_max = 4096;   // hard ceiling for auto-grown truncation
};

// Raised when an input violates a documented precondition.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Raised when the Fock expansion cannot reach tail_tol below n_cut_max.
class TruncationError : public std::runtime_error {
public:
    explicit TruncationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an analytic and a numeric route disagree beyond tolerance.
class ConsistencyError : public std::runtime_error {
public:
    explicit ConsistencyError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

inline bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace detail

}  // namespace usdqkd
