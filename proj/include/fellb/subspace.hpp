#pragma once

#include <cstddef>
#include <vector>

#include "fellb/matrix.hpp"

namespace fellb {

// Linear subspace of Q(i)^n, stored as the canonical RREF basis (rows).
// Two subspaces are equal iff their stored bases are identical.
class Subspace {
  public:
    explicit Subspace(std::size_t ambient) : ambient_(ambient), basis_(0, ambient) {}

    static Subspace span(std::size_t ambient, const std::vector<Vec>& vecs) {
        Subspace s(ambient);
        if (vecs.empty()) return s;
        Matrix m(vecs.size(), ambient);
        for (std::size_t i = 0; i < vecs.size(); ++i) {
            if (vecs[i].size() != ambient)
                throw InvalidInstance("span: vector has wrong ambient dimension");
            for (std::size_t j = 0; j < ambient; ++j) m.at(i, j) = vecs[i][j];
        }
        s.adopt_rows(m);
        return s;
    }

    static Subspace full(std::size_t ambient) {
        Subspace s(ambient);
        s.basis_ = Matrix::identity(ambient);
        return s;
    }

    static Subspace from_row_matrix(Matrix m) {
        Subspace s(m.cols());
        s.adopt_rows(m);
        return s;
    }

    std::size_t ambient() const { return ambient_; }
    std::size_t dim() const { return basis_.rows(); }
    const Matrix& basis() const { return basis_; }
    Vec basis_vector(std::size_t k) const { return basis_.row(k); }
    bool is_zero() const { return dim() == 0; }
    bool is_full() const { return dim() == ambient_; }

    // Residual of v after eliminating along the RREF basis.
    Vec reduce(Vec v) const {
        if (v.size() != ambient_) throw InvalidInstance("reduce: wrong dimension");
        for (std::size_t i = 0; i < basis_.rows(); ++i) {
            std::size_t p = pivot_of(i);
            if (v[p].is_zero()) continue;
            Scalar f = v[p];
            for (std::size_t j = 0; j < ambient_; ++j) v[j] -= f * basis_.at(i, j);
        }
        return v;
    }

    bool contains(const Vec& v) const { return is_zero_vec(reduce(v)); }

    bool contains(const Subspace& o) const {
        if (o.ambient_ != ambient_) return false;
        for (std::size_t i = 0; i < o.dim(); ++i)
            if (!contains(o.basis_vector(i))) return false;
        return true;
    }

    Subspace sum(const Subspace& o) const {
        if (o.ambient_ != ambient_) throw InvalidInstance("sum: ambient mismatch");
        Matrix m(dim() + o.dim(), ambient_);
        for (std::size_t i = 0; i < dim(); ++i)
            for (std::size_t j = 0; j < ambient_; ++j) m.at(i, j) = basis_.at(i, j);
        for (std::size_t i = 0; i < o.dim(); ++i)
            for (std::size_t j = 0; j < ambient_; ++j)
                m.at(dim() + i, j) = o.basis_.at(i, j);
        Subspace s(ambient_);
        s.adopt_rows(m);
        return s;
    }

    // Row spaces A, B: a vector of the intersection is u A = -(-v B) for
    // (u | v) in the kernel of the n x (p+q) matrix [A^T | -B^T].
    Subspace intersect(const Subspace& o) const {
        if (o.ambient_ != ambient_) throw InvalidInstance("intersect: ambient mismatch");
        std::size_t p = dim(), q = o.dim();
        if (p == 0 || q == 0) return Subspace(ambient_);
        Matrix c(ambient_, p + q);
        for (std::size_t j = 0; j < ambient_; ++j) {
            for (std::size_t i = 0; i < p; ++i) c.at(j, i) = basis_.at(i, j);
            for (std::size_t i = 0; i < q; ++i) c.at(j, p + i) = -o.basis_.at(i, j);
        }
        Matrix k = kernel_basis(c);
        std::vector<Vec> vecs;
        for (std::size_t r = 0; r < k.rows(); ++r) {
            Vec v(ambient_);
            for (std::size_t i = 0; i < p; ++i) {
                if (k.at(r, i).is_zero()) continue;
                for (std::size_t j = 0; j < ambient_; ++j)
                    v[j] += k.at(r, i) * basis_.at(i, j);
            }
            vecs.push_back(std::move(v));
        }
        return span(ambient_, vecs);
    }

    // Image of this subspace under the linear map v -> m v.
    Subspace apply(const Matrix& m) const {
        std::vector<Vec> vecs;
        for (std::size_t i = 0; i < dim(); ++i) vecs.push_back(m.apply(basis_vector(i)));
        return span(m.rows(), vecs);
    }

    // Image under the conjugate-linear map v -> m conj(v).
    Subspace apply_conj(const Matrix& m) const {
        std::vector<Vec> vecs;
        for (std::size_t i = 0; i < dim(); ++i)
            vecs.push_back(m.apply(conj_vec(basis_vector(i))));
        return span(m.rows(), vecs);
    }

    friend bool operator==(const Subspace& a, const Subspace& b) {
        return a.ambient_ == b.ambient_ && a.basis_ == b.basis_;
    }
    friend bool operator!=(const Subspace& a, const Subspace& b) { return !(a == b); }

    // Deterministic total order for canonical sorting.
    friend bool operator<(const Subspace& a, const Subspace& b) {
        if (a.ambient_ != b.ambient_) return a.ambient_ < b.ambient_;
        if (a.dim() != b.dim()) return a.dim() < b.dim();
        for (std::size_t i = 0; i < a.dim(); ++i)
            for (std::size_t j = 0; j < a.ambient_; ++j) {
                if (a.basis_.at(i, j) != b.basis_.at(i, j))
                    return a.basis_.at(i, j) < b.basis_.at(i, j);
            }
        return false;
    }

  private:
    void adopt_rows(Matrix m) {
        std::size_t r = rref_in_place(m);
        Matrix b(r, ambient_);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < ambient_; ++j) b.at(i, j) = m.at(i, j);
        basis_ = std::move(b);
    }

    std::size_t pivot_of(std::size_t i) const {
        std::size_t j = 0;
        while (basis_.at(i, j).is_zero()) ++j;
        return j;
    }

    std::size_t ambient_;
    Matrix basis_;
};

}  // namespace fellb
