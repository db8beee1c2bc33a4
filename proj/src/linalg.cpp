#include "psa/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace psa {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": size mismatch (" + std::to_string(a) +
                             " vs " + std::to_string(b) + ")");
    }
}

void require_square(const ComplexMatrix& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw DimensionError(std::string(what) + ": matrix is not square");
    }
}

}  // namespace

ComplexVector& ComplexVector::operator+=(const ComplexVector& rhs) {
    require_same_size(size(), rhs.size(), "vector +=");
    for (std::size_t i = 0; i < size(); ++i) data_[i] += rhs[i];
    return *this;
}

ComplexVector& ComplexVector::operator-=(const ComplexVector& rhs) {
    require_same_size(size(), rhs.size(), "vector -=");
    for (std::size_t i = 0; i < size(); ++i) data_[i] -= rhs[i];
    return *this;
}

ComplexVector& ComplexVector::operator*=(cplx s) {
    for (auto& v : data_) v *= s;
    return *this;
}

ComplexVector operator+(ComplexVector lhs, const ComplexVector& rhs) { return lhs += rhs; }
ComplexVector operator-(ComplexVector lhs, const ComplexVector& rhs) { return lhs -= rhs; }
ComplexVector operator*(cplx s, ComplexVector v) { return v *= s; }

cplx dot(const ComplexVector& x, const ComplexVector& y) {
    require_same_size(x.size(), y.size(), "dot");
    cplx acc{};
    for (std::size_t i = 0; i < x.size(); ++i) acc += std::conj(x[i]) * y[i];
    return acc;
}

double norm_sq(const ComplexVector& x) {
    double acc = 0.0;
    for (const auto& v : x) acc += std::norm(v);
    return acc;
}

double norm(const ComplexVector& x) { return std::sqrt(norm_sq(x)); }

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> d) {
    ComplexMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

ComplexMatrix ComplexMatrix::hermitian(ComplexMatrix m) {
    require_square(m, "hermitian");
    double scale = 1.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) scale = std::max(scale, std::abs(m(i, j)));
    if (hermitian_defect(m) > 1e-12 * scale) {
        throw DimensionError("hermitian: matrix violates conjugate symmetry");
    }
    const std::size_t n = m.rows();
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = m(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j) {
            const cplx avg = 0.5 * (m(i, j) + std::conj(m(j, i)));
            m(i, j) = avg;
            m(j, i) = std::conj(avg);
        }
    }
    return m;
}

ComplexVector ComplexMatrix::column(std::size_t c) const {
    ComplexVector v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
    return v;
}

void ComplexMatrix::set_column(std::size_t c, const ComplexVector& v) {
    require_same_size(rows_, v.size(), "set_column");
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
}

cplx ComplexMatrix::trace() const {
    require_square(*this, "trace");
    cplx t{};
    for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
}

double ComplexMatrix::frobenius_norm() const {
    double acc = 0.0;
    for (const auto& v : data_) acc += std::norm(v);
    return std::sqrt(acc);
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs) {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw DimensionError("matrix +=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs) {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw DimensionError("matrix -=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
    for (auto& v : data_) v *= s;
    return *this;
}

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs += rhs; }
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs -= rhs; }
ComplexMatrix operator*(cplx s, ComplexMatrix m) { return m *= s; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matrix product: inner dimension mismatch");
    ComplexMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cplx aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

ComplexVector operator*(const ComplexMatrix& a, const ComplexVector& x) {
    require_same_size(a.cols(), x.size(), "matrix-vector product");
    ComplexVector out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        cplx acc{};
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
        out[i] = acc;
    }
    return out;
}

ComplexVector adjoint_times(const ComplexMatrix& a, const ComplexVector& x) {
    require_same_size(a.rows(), x.size(), "adjoint-vector product");
    ComplexVector out(a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[j] += std::conj(a(i, j)) * x[i];
    return out;
}

ComplexMatrix gram(const ComplexMatrix& a) {
    const std::size_t n = a.cols();
    ComplexMatrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            cplx acc{};
            for (std::size_t r = 0; r < a.rows(); ++r) acc += std::conj(a(r, i)) * a(r, j);
            g(i, j) = acc;
            g(j, i) = std::conj(acc);
        }
    for (std::size_t i = 0; i < n; ++i) g(i, i) = g(i, i).real();
    return g;
}

ComplexMatrix outer(const ComplexVector& x) {
    ComplexMatrix m(x.size(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) m(i, j) = x[i] * std::conj(x[j]);
    return m;
}

double hermitian_defect(const ComplexMatrix& m) {
    require_square(m, "hermitian_defect");
    double worst = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i; j < m.cols(); ++j)
            worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
    return worst;
}

ComplexMatrix EigenDecomposition::reconstruct() const {
    const std::size_t n = eigenvalues.size();
    ComplexMatrix out(n, n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) {
            const cplx left = eigenvectors(i, k) * eigenvalues[k];
            for (std::size_t j = 0; j < n; ++j) out(i, j) += left * std::conj(eigenvectors(j, k));
        }
    return out;
}

EigenDecomposition herm_eig(const ComplexMatrix& input) {
    require_square(input, "herm_eig");
    const std::size_t n = input.rows();
    if (n == 0) throw DimensionError("herm_eig: empty matrix");
    ComplexMatrix a = ComplexMatrix::hermitian(input);
    ComplexMatrix v = ComplexMatrix::identity(n);

    auto off_norm_sq = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += std::norm(a(i, j));
        return s;
    };
    const double scale_sq = std::max(a.frobenius_norm() * a.frobenius_norm(), 1e-300);

    constexpr int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (off_norm_sq() <= 1e-32 * scale_sq) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double r = std::abs(a(p, q));
                if (r == 0.0) continue;
                // Phase e^{i phi} makes the (p,q) block real symmetric, then a
                // real rotation annihilates it. G = diag(1, e^{-i phi}) R.
                const cplx ph = a(p, q) / r;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double tau = (aqq - app) / (2.0 * r);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cplx gqp = -s * std::conj(ph);
                const cplx gqq = c * std::conj(ph);

                for (std::size_t k = 0; k < n; ++k) {
                    const cplx akp = a(k, p);
                    const cplx akq = a(k, q);
                    a(k, p) = c * akp + gqp * akq;
                    a(k, q) = s * akp + gqq * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx apk = a(p, k);
                    const cplx aqk = a(q, k);
                    a(p, k) = c * apk + std::conj(gqp) * aqk;
                    a(q, k) = s * apk + std::conj(gqq) * aqk;
                }
                a(p, p) = app - t * r;
                a(q, q) = aqq + t * r;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx vkp = v(k, p);
                    const cplx vkq = v(k, q);
                    v(k, p) = c * vkp + gqp * vkq;
                    v(k, q) = s * vkp + gqq * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = ComplexMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = a(order[k], order[k]).real();
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
    }
    return out;
}

ComplexVector solve_hpd(const ComplexMatrix& m, const ComplexVector& rhs) {
    require_square(m, "solve_hpd");
    require_same_size(m.rows(), rhs.size(), "solve_hpd");
    const std::size_t n = m.rows();
    // Lower-triangular L with M = L L^H.
    ComplexMatrix l(n, n);
    double diag_scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) diag_scale = std::max(diag_scale, std::abs(m(i, i).real()));
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j).real();
        for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
        if (!(d > 1e-14 * diag_scale) || !std::isfinite(d)) {
            throw FactorizationError("solve_hpd: matrix is not positive definite");
        }
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            cplx acc = m(i, j);
            for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * std::conj(l(j, k));
            l(i, j) = acc / ljj;
        }
    }
    ComplexVector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        cplx acc = rhs[i];
        for (std::size_t k = 0; k < i; ++k) acc -= l(i, k) * y[k];
        y[i] = acc / l(i, i).real();
    }
    ComplexVector x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        cplx acc = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) acc -= std::conj(l(k, ii)) * x[k];
        x[ii] = acc / l(ii, ii).real();
    }
    return x;
}

}  // namespace psa
