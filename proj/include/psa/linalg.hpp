#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace psa {

using cplx = std::complex<double>;

/// Thrown when operand shapes are incompatible or a structural
/// precondition (e.g. Hermitian symmetry) is violated.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a factorization fails (matrix not positive definite).
class FactorizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ComplexVector {
public:
    ComplexVector() = default;
    explicit ComplexVector(std::size_t n, cplx fill = {}) : data_(n, fill) {}
    ComplexVector(std::initializer_list<cplx> init) : data_(init) {}
    explicit ComplexVector(std::vector<cplx> data) : data_(std::move(data)) {}

    std::size_t size() const noexcept { return data_.size(); }
    cplx& operator[](std::size_t i) { return data_[i]; }
    const cplx& operator[](std::size_t i) const { return data_[i]; }

    std::span<cplx> span() noexcept { return data_; }
    std::span<const cplx> span() const noexcept { return data_; }
    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    ComplexVector& operator+=(const ComplexVector& rhs);
    ComplexVector& operator-=(const ComplexVector& rhs);
    ComplexVector& operator*=(cplx s);

    bool operator==(const ComplexVector&) const = default;

private:
    std::vector<cplx> data_;
};

ComplexVector operator+(ComplexVector lhs, const ComplexVector& rhs);
ComplexVector operator-(ComplexVector lhs, const ComplexVector& rhs);
ComplexVector operator*(cplx s, ComplexVector v);

/// x^H y
cplx dot(const ComplexVector& x, const ComplexVector& y);
double norm_sq(const ComplexVector& x);
double norm(const ComplexVector& x);

/// Dense row-major complex matrix. Dimensions are fixed at construction.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols, cplx fill = {})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix diagonal(std::span<const double> d);
    /// Checks conjugate symmetry to 1e-12 (relative to the largest entry,
    /// floored at 1) and then symmetrizes exactly.
    static ComplexMatrix hermitian(ComplexMatrix m);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    ComplexVector column(std::size_t c) const;
    void set_column(std::size_t c, const ComplexVector& v);

    ComplexMatrix adjoint() const;
    cplx trace() const;
    double frobenius_norm() const;

    ComplexMatrix& operator+=(const ComplexMatrix& rhs);
    ComplexMatrix& operator-=(const ComplexMatrix& rhs);
    ComplexMatrix& operator*=(cplx s);

    bool operator==(const ComplexMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator*(cplx s, ComplexMatrix m);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexVector operator*(const ComplexMatrix& a, const ComplexVector& x);

/// A^H x without forming the adjoint.
ComplexVector adjoint_times(const ComplexMatrix& a, const ComplexVector& x);
/// A^H A
ComplexMatrix gram(const ComplexMatrix& a);
/// x x^H
ComplexMatrix outer(const ComplexVector& x);

/// Largest |M - M^H| entry.
double hermitian_defect(const ComplexMatrix& m);

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // ascending
    ComplexMatrix eigenvectors;       // columns, unitary

    ComplexMatrix reconstruct() const;
};

/// Full eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Throws DimensionError on non-square or non-Hermitian input.
EigenDecomposition herm_eig(const ComplexMatrix& m);

/// Solves M x = rhs for Hermitian positive-definite M via Cholesky.
/// Throws FactorizationError when M is not numerically positive definite.
ComplexVector solve_hpd(const ComplexMatrix& m, const ComplexVector& rhs);

}  // namespace psa
