#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace lrbandit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidInstance : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct PreconditionError : Error {
    using Error::Error;
};

// raised when a net (or LowLOC run) would not fit under the size cap
struct CapExceeded : Error {
    CapExceeded(const std::string& what, double estimated)
        : Error(what), estimated_size(estimated) {}
    double estimated_size;
};

struct DivergenceError : Error {
    using Error::Error;
};

struct OrderError : Error {
    using Error::Error;
};

// column-major vec(X)
inline Vector vec(const Matrix& x) {
    return Eigen::Map<const Vector>(x.data(), x.size());
}

inline Matrix unvec(const Vector& v, int d1, int d2) {
    return Eigen::Map<const Matrix>(v.data(), d1, d2);
}

// argmax with relative tie tolerance; ties go to the lowest index
inline Eigen::Index argmax_lowest(const Vector& s, double rel_tol = 1e-12) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < s.size(); ++i) {
        const double tol = rel_tol * std::max(1.0, std::abs(s(best)));
        if (s(i) > s(best) + tol) best = i;
    }
    return best;
}

inline double frob_inner(const Matrix& a, const Matrix& b) {
    return (a.array() * b.array()).sum();
}

// independent stream for (seed, purpose)
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

}  // namespace lrbandit
