#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "psa/linalg.hpp"

namespace psa::test {

inline ComplexVector random_vector(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexVector v(n);
    for (auto& x : v) x = cplx(g(rng), g(rng));
    return v;
}

inline ComplexMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = cplx(g(rng), g(rng));
    return m;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) d = std::max(d, std::abs(a(i, j) - b(i, j)));
    return d;
}

inline double max_abs_diff(const ComplexVector& a, const ComplexVector& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

// |empirical - p| in binomial standard errors.
inline double binomial_z(double empirical, double p, std::size_t trials) {
    const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / static_cast<double>(trials));
    return std::abs(empirical - p) / se;
}

}  // namespace psa::test
