#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fellb/scalar.hpp"

namespace fellb {

// Dense matrix over Q(i), row-major.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = Scalar(1);
        return m;
    }

    static Matrix from_rows(const std::vector<Vec>& rows) {
        if (rows.empty()) return Matrix();
        Matrix m(rows.size(), rows[0].size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_)
                throw InvalidInstance("ragged rows in matrix literal");
            for (std::size_t j = 0; j < m.cols_; ++j) m.at(i, j) = rows[i][j];
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Scalar& at(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const Scalar& at(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    Vec row(std::size_t i) const {
        Vec r(cols_);
        for (std::size_t j = 0; j < cols_; ++j) r[j] = at(i, j);
        return r;
    }

    bool is_zero() const {
        for (const auto& x : a_)
            if (!x.is_zero()) return false;
        return true;
    }

    bool is_square() const { return rows_ == cols_; }

    Matrix transpose() const {
        Matrix m(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m.at(j, i) = at(i, j);
        return m;
    }

    Matrix conj() const {
        Matrix m(rows_, cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m.at(i, j) = at(i, j).conj();
        return m;
    }

    Matrix conj_transpose() const { return transpose().conj(); }

    bool is_hermitian() const {
        if (!is_square()) return false;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                if (at(i, j) != at(j, i).conj()) return false;
        return true;
    }

    Scalar trace() const {
        Scalar t;
        for (std::size_t i = 0; i < rows_ && i < cols_; ++i) t += at(i, i);
        return t;
    }

    Vec apply(const Vec& v) const {
        if (v.size() != cols_) throw InvalidInstance("matrix/vector size mismatch");
        Vec r(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            Scalar s;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (!at(i, j).is_zero() && !v[j].is_zero()) s += at(i, j) * v[j];
            }
            r[i] = s;
        }
        return r;
    }

    friend Matrix operator+(const Matrix& a, const Matrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            throw InvalidInstance("matrix addition shape mismatch");
        Matrix m(a.rows_, a.cols_);
        for (std::size_t k = 0; k < a.a_.size(); ++k) m.a_[k] = a.a_[k] + b.a_[k];
        return m;
    }
    friend Matrix operator-(const Matrix& a, const Matrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            throw InvalidInstance("matrix subtraction shape mismatch");
        Matrix m(a.rows_, a.cols_);
        for (std::size_t k = 0; k < a.a_.size(); ++k) m.a_[k] = a.a_[k] - b.a_[k];
        return m;
    }
    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw InvalidInstance("matrix product shape mismatch");
        Matrix m(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                if (a.at(i, k).is_zero()) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) {
                    if (b.at(k, j).is_zero()) continue;
                    m.at(i, j) += a.at(i, k) * b.at(k, j);
                }
            }
        return m;
    }
    friend Matrix operator*(const Scalar& s, const Matrix& a) {
        Matrix m(a.rows_, a.cols_);
        for (std::size_t k = 0; k < a.a_.size(); ++k) m.a_[k] = s * a.a_[k];
        return m;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.a_ == b.a_;
    }
    friend bool operator!=(const Matrix& a, const Matrix& b) { return !(a == b); }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Scalar> a_;
};

inline Vec conj_vec(const Vec& v) {
    Vec r(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) r[k] = v[k].conj();
    return r;
}

inline Vec tensor_pair(const Vec& a, const Vec& b) {
    Vec r(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i * b.size() + j] = a[i] * b[j];
    return r;
}

// tensor_swap(m, n) carries tensor_pair(x, y) to tensor_pair(y, x) for
// x of size m and y of size n.
inline Matrix tensor_swap(std::size_t m, std::size_t n) {
    Matrix t(m * n, m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) t.at(j * m + i, i * n + j) = Scalar(1);
    return t;
}

// Kronecker product, compatible with tensor_pair: kron(A, B) applied to
// tensor_pair(x, y) equals tensor_pair(A x, B y).
inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix m(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (a.at(i, j).is_zero()) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    m.at(i * b.rows() + k, j * b.cols() + l) = a.at(i, j) * b.at(k, l);
        }
    return m;
}

inline Vec add_vec(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw InvalidInstance("vector addition size mismatch");
    Vec r(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) r[k] = a[k] + b[k];
    return r;
}

inline Vec scale_vec(const Scalar& s, const Vec& a) {
    Vec r(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) r[k] = s * a[k];
    return r;
}

inline bool is_zero_vec(const Vec& v) {
    for (const auto& x : v)
        if (!x.is_zero()) return false;
    return true;
}

inline Vec unit_vec(std::size_t n, std::size_t k) {
    Vec v(n);
    v[k] = Scalar(1);
    return v;
}

// In-place reduced row echelon form; returns the rank. Pivots are the first
// nonzero column in each surviving row, normalized to 1, with full
// elimination above and below, so the result is the canonical RREF.
inline std::size_t rref_in_place(Matrix& m) {
    std::size_t rank = 0;
    for (std::size_t col = 0; col < m.cols() && rank < m.rows(); ++col) {
        std::size_t pivot = rank;
        while (pivot < m.rows() && m.at(pivot, col).is_zero()) ++pivot;
        if (pivot == m.rows()) continue;
        if (pivot != rank)
            for (std::size_t j = 0; j < m.cols(); ++j)
                std::swap(m.at(pivot, j), m.at(rank, j));
        Scalar inv = Scalar(1) / m.at(rank, col);
        for (std::size_t j = col; j < m.cols(); ++j) m.at(rank, j) *= inv;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i == rank || m.at(i, col).is_zero()) continue;
            Scalar f = m.at(i, col);
            for (std::size_t j = col; j < m.cols(); ++j)
                m.at(i, j) -= f * m.at(rank, j);
        }
        ++rank;
    }
    return rank;
}

inline std::size_t rank(Matrix m) { return rref_in_place(m); }

// Rows of the result form a basis of {v : m v = 0} (v as column).
inline Matrix kernel_basis(Matrix m) {
    std::size_t n = m.cols();
    std::size_t r = rref_in_place(m);
    std::vector<std::size_t> pivot_col(r);
    std::vector<bool> is_pivot(n, false);
    for (std::size_t i = 0; i < r; ++i) {
        std::size_t j = 0;
        while (m.at(i, j).is_zero()) ++j;
        pivot_col[i] = j;
        is_pivot[j] = true;
    }
    Matrix out(n - r, n);
    std::size_t row = 0;
    for (std::size_t f = 0; f < n; ++f) {
        if (is_pivot[f]) continue;
        out.at(row, f) = Scalar(1);
        for (std::size_t i = 0; i < r; ++i) out.at(row, pivot_col[i]) = -m.at(i, f);
        ++row;
    }
    return out;
}

// One solution of A x = b (free variables set to 0), or nullopt.
inline std::optional<Vec> solve(const Matrix& a, const Vec& b) {
    if (b.size() != a.rows()) throw InvalidInstance("solve: size mismatch");
    Matrix aug(a.rows(), a.cols() + 1);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) aug.at(i, j) = a.at(i, j);
        aug.at(i, a.cols()) = b[i];
    }
    std::size_t r = rref_in_place(aug);
    Vec x(a.cols());
    for (std::size_t i = 0; i < r; ++i) {
        std::size_t j = 0;
        while (j < aug.cols() && aug.at(i, j).is_zero()) ++j;
        if (j == aug.cols()) continue;                    // all-zero row
        if (j == a.cols()) return std::nullopt;           // row (0 ... 0 | 1)
        x[j] = aug.at(i, a.cols());
    }
    return x;
}

inline Scalar det(Matrix m) {
    if (!m.is_square()) throw InvalidInstance("det: matrix not square");
    std::size_t n = m.rows();
    Scalar d(1);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        while (pivot < n && m.at(pivot, col).is_zero()) ++pivot;
        if (pivot == n) return Scalar(0);
        if (pivot != col) {
            for (std::size_t j = col; j < n; ++j)
                std::swap(m.at(pivot, j), m.at(col, j));
            d = -d;
        }
        d *= m.at(col, col);
        Scalar inv = Scalar(1) / m.at(col, col);
        for (std::size_t i = col + 1; i < n; ++i) {
            if (m.at(i, col).is_zero()) continue;
            Scalar f = m.at(i, col) * inv;
            for (std::size_t j = col; j < n; ++j) m.at(i, j) -= f * m.at(col, j);
        }
    }
    return d;
}

// Coefficients c of the characteristic polynomial det(tI - A), c[k] the
// coefficient of t^k, c[n] = 1. Fraction-free recurrence:
//   M_1 = I, c_{n-k} = -tr(A M_k)/k, M_{k+1} = A M_k + c_{n-k} I.
inline std::vector<Scalar> char_poly(const Matrix& a) {
    if (!a.is_square()) throw InvalidInstance("char_poly: matrix not square");
    std::size_t n = a.rows();
    std::vector<Scalar> c(n + 1);
    c[n] = Scalar(1);
    Matrix m = Matrix::identity(n);
    for (std::size_t k = 1; k <= n; ++k) {
        Matrix am = a * m;
        c[n - k] = -(am.trace() / Scalar(static_cast<long>(k)));
        if (k < n) {
            m = am;
            for (std::size_t i = 0; i < n; ++i) m.at(i, i) += c[n - k];
        }
    }
    return c;
}

enum class PsdStatus { NotHermitian, No, Yes };

// A Hermitian matrix is PSD iff (-1)^(n-k) c_k >= 0 for all k (equivalently:
// all elementary symmetric functions of the eigenvalues are >= 0), and PD
// iff those are all strictly positive.
inline PsdStatus psd_status(const Matrix& a, bool strict = false) {
    if (!a.is_hermitian()) return PsdStatus::NotHermitian;
    std::size_t n = a.rows();
    auto c = char_poly(a);
    for (std::size_t k = 0; k < n; ++k) {
        Scalar e = ((n - k) % 2 == 0) ? c[k] : -c[k];
        if (e.im != 0) return PsdStatus::No;  // cannot happen for Hermitian input
        if (strict ? e.re <= 0 : e.re < 0) return PsdStatus::No;
    }
    return PsdStatus::Yes;
}

inline bool is_psd(const Matrix& a) {
    PsdStatus s = psd_status(a, false);
    if (s == PsdStatus::NotHermitian)
        throw InvalidInstance("is_psd: matrix is not Hermitian");
    return s == PsdStatus::Yes;
}

inline bool is_pd(const Matrix& a) {
    PsdStatus s = psd_status(a, true);
    if (s == PsdStatus::NotHermitian)
        throw InvalidInstance("is_pd: matrix is not Hermitian");
    return s == PsdStatus::Yes;
}

}  // namespace fellb
