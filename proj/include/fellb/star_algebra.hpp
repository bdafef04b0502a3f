#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fellb/matrix.hpp"
#include "fellb/subspace.hpp"

namespace fellb {

// ---------------------------------------------------------------------------
// Dense polynomials over Q(i): coefficient vector, index = degree, kept
// normalized (no trailing zeros; the zero polynomial is the empty vector).
// ---------------------------------------------------------------------------

using Poly = std::vector<Scalar>;

inline void poly_normalize(Poly& p) {
    while (!p.empty() && p.back().is_zero()) p.pop_back();
}

inline Poly poly_derivative(const Poly& p) {
    Poly d;
    for (std::size_t k = 1; k < p.size(); ++k)
        d.push_back(Scalar(static_cast<long>(k)) * p[k]);
    poly_normalize(d);
    return d;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    poly_normalize(r);
    return r;
}

// Quotient and remainder; the divisor must be nonzero.
inline std::pair<Poly, Poly> poly_divmod(Poly a, const Poly& b) {
    if (b.empty()) throw Error("polynomial division by zero");
    poly_normalize(a);
    Poly q;
    if (a.size() >= b.size()) q.assign(a.size() - b.size() + 1, Scalar(0));
    Scalar lead = b.back();
    while (a.size() >= b.size()) {
        Scalar f = a.back() / lead;
        std::size_t shift = a.size() - b.size();
        q[shift] = f;
        for (std::size_t k = 0; k < b.size(); ++k) a[shift + k] -= f * b[k];
        poly_normalize(a);
        if (!a.empty() && a.size() >= b.size() + shift + 1)
            throw Error("polynomial division failed to reduce");
        if (a.size() == b.size() + shift) throw Error("polynomial division stuck");
    }
    poly_normalize(q);
    return {q, a};
}

inline Poly poly_monic(Poly p) {
    poly_normalize(p);
    if (p.empty()) return p;
    Scalar inv = Scalar(1) / p.back();
    for (auto& c : p) c *= inv;
    return p;
}

inline Poly poly_gcd(Poly a, Poly b) {
    poly_normalize(a);
    poly_normalize(b);
    while (!b.empty()) {
        Poly r = poly_divmod(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    return poly_monic(a);
}

inline Poly poly_squarefree_part(const Poly& p) {
    Poly d = poly_derivative(p);
    if (d.empty()) return poly_monic(p);
    Poly g = poly_gcd(p, d);
    if (g.size() <= 1) return poly_monic(p);
    return poly_monic(poly_divmod(p, g).first);
}

inline Scalar poly_eval(const Poly& p, const Scalar& x) {
    Scalar r;
    for (std::size_t k = p.size(); k-- > 0;) r = r * x + p[k];
    return r;
}

inline std::string poly_str(const Poly& p, const std::string& var = "t") {
    if (p.empty()) return "0";
    std::string out;
    for (std::size_t k = p.size(); k-- > 0;) {
        const Scalar& c = p[k];
        if (c.is_zero()) continue;
        std::string term;
        bool is_one = (c == Scalar(1)), is_minus_one = (c == Scalar(-1));
        std::string cs = c.is_real() ? c.str() : "(" + c.str() + ")";
        if (k == 0) {
            term = cs;
        } else {
            std::string pow = (k == 1) ? var : var + "^" + std::to_string(k);
            if (is_one)
                term = pow;
            else if (is_minus_one)
                term = "-" + pow;
            else
                term = cs + "*" + pow;
        }
        if (out.empty()) {
            out = term;
        } else if (!term.empty() && term[0] == '-') {
            out += term;
        } else {
            out += "+" + term;
        }
    }
    return out.empty() ? "0" : out;
}

// All roots of p lying in Q(i), found exactly: integerize to a monic
// polynomial over Z[i] and test the Gaussian-integer divisors of its
// constant term. Throws UnsupportedInstance when the divisor-norm bound
// would make the search unsound to truncate silently.
inline std::vector<Scalar> qi_roots(Poly p) {
    p = poly_monic(p);
    if (p.size() <= 1) return {};
    std::vector<Scalar> roots;
    while (p.size() > 1 && p[0].is_zero()) {  // factor t
        roots.push_back(Scalar(0));
        p.erase(p.begin());
    }
    if (p.size() <= 1) {
        std::sort(roots.begin(), roots.end());
        roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
        return roots;
    }
    // Common denominator of all coefficients.
    mpz_class s(1);
    for (const auto& c : p) {
        s = lcm(s, c.re.get_den());
        s = lcm(s, c.im.get_den());
    }
    // Substituting t = u/s makes u^n + sum_k p_k s^(n-k) u^k monic over Z[i].
    std::size_t n = p.size() - 1;
    std::vector<Scalar> u(p.size());
    u[n] = Scalar(1);
    mpz_class pw(1);
    for (std::size_t k = n; k-- > 0;) {
        pw *= s;
        u[k] = p[k] * Scalar(mpq_class(pw));
    }
    mpz_class c0n = u[0].norm2().get_num();  // integral by construction
    if (c0n > 4000000)
        throw UnsupportedInstance(
            "eigenvalue search bound exceeded while splitting the center",
            poly_str(p));
    long r = 1;
    while (mpz_class(r) * r < c0n) ++r;
    Scalar si{mpq_class(s), mpq_class(0)};
    for (long x = -r; x <= r; ++x) {
        for (long y = -r; y <= r; ++y) {
            if (x == 0 && y == 0) continue;
            mpz_class nrm = mpz_class(x) * x + mpz_class(y) * y;
            if (!mpz_divisible_p(c0n.get_mpz_t(), nrm.get_mpz_t())) continue;
            Scalar cand{mpq_class(x), mpq_class(y)};
            if (poly_eval(u, cand).is_zero()) roots.push_back(cand / si);
        }
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return roots;
}

// ---------------------------------------------------------------------------
// Finite-dimensional *-algebra over Q(i) given by structure constants.
// ---------------------------------------------------------------------------

struct StarAlgebra {
    std::size_t dim = 0;
    // mult[i][j] = coordinates of e_i e_j.
    std::vector<std::vector<Vec>> mult;
    // a* = invol . conj(a) in coordinates.
    Matrix invol;

    static StarAlgebra make(std::size_t n) {
        StarAlgebra a;
        a.dim = n;
        a.mult.assign(n, std::vector<Vec>(n, Vec(n)));
        a.invol = Matrix::identity(n);
        return a;
    }

    Vec mul(const Vec& a, const Vec& b) const {
        Vec r(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            if (a[i].is_zero()) continue;
            for (std::size_t j = 0; j < dim; ++j) {
                if (b[j].is_zero()) continue;
                Scalar f = a[i] * b[j];
                const Vec& m = mult[i][j];
                for (std::size_t k = 0; k < dim; ++k)
                    if (!m[k].is_zero()) r[k] += f * m[k];
            }
        }
        return r;
    }

    Vec star(const Vec& a) const { return invol.apply(conj_vec(a)); }

    Matrix left_op(const Vec& a) const {  // L_a : x -> a x
        Matrix m(dim, dim);
        for (std::size_t j = 0; j < dim; ++j) {
            Vec col = mul(a, unit_vec(dim, j));
            for (std::size_t k = 0; k < dim; ++k) m.at(k, j) = col[k];
        }
        return m;
    }

    Matrix right_op(const Vec& a) const {  // R_a : x -> x a
        Matrix m(dim, dim);
        for (std::size_t j = 0; j < dim; ++j) {
            Vec col = mul(unit_vec(dim, j), a);
            for (std::size_t k = 0; k < dim; ++k) m.at(k, j) = col[k];
        }
        return m;
    }
};

struct Violation {
    std::string code;
    std::string message;
};
using ValidationReport = std::vector<Violation>;

inline bool report_ok(const ValidationReport& r) { return r.empty(); }

inline std::string vec_str(const Vec& v) {
    std::string s = "(";
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) s += ", ";
        s += v[k].str();
    }
    return s + ")";
}

inline ValidationReport validate_star_algebra(const StarAlgebra& a) {
    ValidationReport rep;
    std::size_t n = a.dim;
    if (a.mult.size() != n)
        rep.push_back({"algebra/shape", "multiplication table has wrong size"});
    for (const auto& row : a.mult) {
        if (row.size() != n) {
            rep.push_back({"algebra/shape", "multiplication table row has wrong size"});
            return rep;
        }
        for (const auto& e : row)
            if (e.size() != n) {
                rep.push_back({"algebra/shape", "structure vector has wrong size"});
                return rep;
            }
    }
    if (a.invol.rows() != n || a.invol.cols() != n) {
        rep.push_back({"algebra/shape", "involution matrix has wrong size"});
        return rep;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                Vec lhs = a.mul(a.mult[i][j], unit_vec(n, k));
                Vec rhs = a.mul(unit_vec(n, i), a.mult[j][k]);
                if (lhs != rhs) {
                    rep.push_back({"algebra/associativity",
                                   "(e" + std::to_string(i) + " e" + std::to_string(j) +
                                       ") e" + std::to_string(k) +
                                       " != e" + std::to_string(i) + " (e" +
                                       std::to_string(j) + " e" + std::to_string(k) +
                                       ")"});
                    if (rep.size() > 8) return rep;
                }
            }
    for (std::size_t k = 0; k < n; ++k) {
        Vec ss = a.star(a.star(unit_vec(n, k)));
        if (ss != unit_vec(n, k))
            rep.push_back({"algebra/involution",
                           "star(star(e" + std::to_string(k) + ")) = " + vec_str(ss)});
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Vec lhs = a.star(a.mult[i][j]);
            Vec rhs = a.mul(a.star(unit_vec(n, j)), a.star(unit_vec(n, i)));
            if (lhs != rhs) {
                rep.push_back({"algebra/anti-multiplicative",
                               "star(e" + std::to_string(i) + " e" + std::to_string(j) +
                                   ") != star(e" + std::to_string(j) + ") star(e" +
                                   std::to_string(i) + ")"});
                if (rep.size() > 16) return rep;
            }
        }
    return rep;
}

// Two-sided unit, if one exists.
inline std::optional<Vec> algebra_unit(const StarAlgebra& a) {
    std::size_t n = a.dim;
    // The zero algebra is vacuously unital.
    if (n == 0) return Vec{};
    Matrix sys(2 * n * n, n);
    Vec rhs(2 * n * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t r0 = j * n + k, r1 = n * n + j * n + k;
            for (std::size_t i = 0; i < n; ++i) {
                sys.at(r0, i) = a.mult[i][j][k];
                sys.at(r1, i) = a.mult[j][i][k];
            }
            rhs[r0] = rhs[r1] = (j == k) ? Scalar(1) : Scalar(0);
        }
    auto u = solve(sys, rhs);
    if (!u) return std::nullopt;
    return *u;
}

// Sesquilinear trace form G(k,l) = tr L_{e_k* e_l}.
inline Matrix trace_form(const StarAlgebra& a) {
    std::size_t n = a.dim;
    Matrix g(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        Vec sk = a.star(unit_vec(n, k));
        for (std::size_t l = 0; l < n; ++l)
            g.at(k, l) = a.left_op(a.mul(sk, unit_vec(n, l))).trace();
    }
    return g;
}

// The finite-scale C*-criterion: *-algebra axioms, a two-sided unit, and a
// Hermitian positive-definite trace form.
inline bool cstar_criterion(const StarAlgebra& a, ValidationReport& rep) {
    ValidationReport base = validate_star_algebra(a);
    rep.insert(rep.end(), base.begin(), base.end());
    if (!base.empty()) return false;
    if (!algebra_unit(a)) {
        rep.push_back({"algebra/unit", "no two-sided unit"});
        return false;
    }
    Matrix g = trace_form(a);
    if (!g.is_hermitian()) {
        rep.push_back({"algebra/trace-form", "trace form is not Hermitian"});
        return false;
    }
    if (!is_pd(g)) {
        rep.push_back({"algebra/trace-form", "trace form is not positive definite"});
        return false;
    }
    return true;
}

inline Subspace algebra_center(const StarAlgebra& a) {
    std::size_t n = a.dim;
    Matrix stack(n * n, n);
    for (std::size_t j = 0; j < n; ++j) {
        Matrix d = a.left_op(unit_vec(n, j)) - a.right_op(unit_vec(n, j));
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) stack.at(j * n + r, c) = d.at(r, c);
    }
    return Subspace::from_row_matrix(kernel_basis(stack));
}

struct CentralBlocks {
    std::vector<Vec> idempotent;   // primitive central idempotents, canonical order
    std::vector<Subspace> block;   // block[k] = idempotent[k] . A
};

namespace detail {

// Multiplication by z restricted to the subspace P, in P-basis coordinates.
inline Matrix restricted_mult(const StarAlgebra& a, const Vec& z, const Subspace& p) {
    std::size_t d = p.dim();
    Matrix basis_t(p.ambient(), d);
    for (std::size_t i = 0; i < d; ++i) {
        Vec b = p.basis_vector(i);
        for (std::size_t r = 0; r < p.ambient(); ++r) basis_t.at(r, i) = b[r];
    }
    Matrix m(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        Vec img = a.mul(z, p.basis_vector(i));
        auto x = solve(basis_t, img);
        if (!x) throw Error("central piece is not closed under multiplication");
        for (std::size_t r = 0; r < d; ++r) m.at(r, i) = (*x)[r];
    }
    return m;
}

inline Vec coords_to_ambient(const Subspace& p, const Vec& coords) {
    Vec v(p.ambient());
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (coords[i].is_zero()) continue;
        Vec b = p.basis_vector(i);
        for (std::size_t r = 0; r < v.size(); ++r) v[r] += coords[i] * b[r];
    }
    return v;
}

// Split P into eigenspaces of mult-by-z for the Q(i)-eigenvalues, plus the
// complementary invariant piece. Returns an empty list when z gives no
// proper split.
inline std::vector<Subspace> eigensplit(const StarAlgebra& a, const Vec& z,
                                        const Subspace& p, Poly* rootless_witness) {
    Matrix m = restricted_mult(a, z, p);
    Poly cp = char_poly(m);
    Poly sq = poly_squarefree_part(cp);
    std::vector<Scalar> roots = qi_roots(sq);
    Poly rest = sq;
    for (const auto& lam : roots)
        rest = poly_divmod(rest, Poly{-lam, Scalar(1)}).first;
    if (rest.size() >= 3 && rootless_witness && rootless_witness->empty())
        *rootless_witness = rest;
    if (roots.empty()) return {};
    std::size_t d = p.dim();
    std::vector<Subspace> parts;
    std::size_t total = 0;
    for (const auto& lam : roots) {
        Matrix shifted = m;
        for (std::size_t i = 0; i < d; ++i) shifted.at(i, i) -= lam;
        Matrix ker = kernel_basis(shifted);
        std::vector<Vec> vecs;
        for (std::size_t r = 0; r < ker.rows(); ++r)
            vecs.push_back(coords_to_ambient(p, ker.row(r)));
        Subspace part = Subspace::span(p.ambient(), vecs);
        if (part.dim() == 0) throw Error("eigenvalue without eigenvector");
        total += part.dim();
        parts.push_back(std::move(part));
    }
    if (total < d) {
        Matrix prod = Matrix::identity(d);
        for (const auto& lam : roots) {
            Matrix shifted = m;
            for (std::size_t i = 0; i < d; ++i) shifted.at(i, i) -= lam;
            prod = shifted * prod;
        }
        std::vector<Vec> vecs;
        for (std::size_t c = 0; c < d; ++c) {
            Vec col(d);
            for (std::size_t r = 0; r < d; ++r) col[r] = prod.at(r, c);
            vecs.push_back(coords_to_ambient(p, col));
        }
        Subspace leftover = Subspace::span(p.ambient(), vecs);
        total += leftover.dim();
        if (total != d) throw Error("center does not split semisimply");
        parts.push_back(std::move(leftover));
    }
    if (parts.size() <= 1) return {};
    return parts;
}

}  // namespace detail

// Primitive central idempotents with their blocks. Requires the
// C*-criterion to hold; throws UnsupportedInstance when an idempotent is
// not rational over Q(i) (with the blocking irreducible factor as witness).
inline CentralBlocks central_blocks(const StarAlgebra& a) {
    auto unit = algebra_unit(a);
    if (!unit) throw Error("central_blocks: algebra has no unit");
    Subspace z = algebra_center(a);
    std::vector<Subspace> pending, done;
    if (z.dim() > 0) pending.push_back(z);
    Poly witness;
    while (!pending.empty()) {
        Subspace p = pending.back();
        pending.pop_back();
        if (p.dim() == 1) {
            done.push_back(std::move(p));
            continue;
        }
        std::vector<Vec> candidates;
        for (std::size_t i = 0; i < p.dim(); ++i) candidates.push_back(p.basis_vector(i));
        std::size_t nb = p.dim();
        for (std::size_t i = 0; i < nb; ++i)
            for (std::size_t j = i + 1; j < nb; ++j)
                candidates.push_back(add_vec(p.basis_vector(i), p.basis_vector(j)));
        for (std::size_t i = 0; i < nb; ++i)
            for (std::size_t j = i; j < nb; ++j)
                candidates.push_back(a.mul(p.basis_vector(i), p.basis_vector(j)));
        bool split = false;
        for (const auto& cand : candidates) {
            auto parts = detail::eigensplit(a, cand, p, &witness);
            if (!parts.empty()) {
                for (auto& part : parts) pending.push_back(std::move(part));
                split = true;
                break;
            }
        }
        if (!split)
            throw UnsupportedInstance(
                "central idempotents are not rational over Q(i)",
                witness.empty() ? std::string("(no rational eigenvalue separates "
                                              "the center)")
                                : poly_str(witness));
    }
    CentralBlocks out;
    for (const auto& p : done) {
        Vec w = p.basis_vector(0);
        Vec w2 = a.mul(w, w);
        std::size_t k = 0;
        while (k < w.size() && w[k].is_zero()) ++k;
        if (k == w.size()) throw Error("zero vector in central splitting");
        Scalar c = w2[k] / w[k];
        if (c.is_zero() || w2 != scale_vec(c, w))
            throw Error("one-dimensional central piece is not spanned by an idempotent");
        out.idempotent.push_back(scale_vec(Scalar(1) / c, w));
    }
    std::sort(out.idempotent.begin(), out.idempotent.end(),
              [](const Vec& x, const Vec& y) {
                  for (std::size_t k = 0; k < x.size(); ++k)
                      if (x[k] != y[k]) return x[k] < y[k];
                  return false;
              });
    // Integrity of the decomposition.
    Vec sum(a.dim);
    for (const auto& p : out.idempotent) {
        if (a.mul(p, p) != p) throw Error("central splitting produced a non-idempotent");
        if (a.star(p) != p)
            throw Error("central splitting produced a non-self-adjoint idempotent");
        sum = add_vec(sum, p);
    }
    for (std::size_t i = 0; i < out.idempotent.size(); ++i)
        for (std::size_t j = i + 1; j < out.idempotent.size(); ++j)
            if (!is_zero_vec(a.mul(out.idempotent[i], out.idempotent[j])))
                throw Error("central idempotents are not orthogonal");
    if (sum != *unit) throw Error("central idempotents do not sum to the unit");
    for (const auto& p : out.idempotent) {
        std::vector<Vec> vecs;
        for (std::size_t j = 0; j < a.dim; ++j)
            vecs.push_back(a.mul(p, unit_vec(a.dim, j)));
        out.block.push_back(Subspace::span(a.dim, vecs));
    }
    return out;
}

// PSD test for a d x d matrix over the algebra: the trace-form-weighted
// left-regular Gram H[(i,k),(j,l)] = (G L_{x_ij})_{k,l} must be Hermitian
// PSD. `x` is indexed x[i][j], each entry an element of `a`.
inline PsdStatus positive_matrix_status(const StarAlgebra& a, const Matrix& gram,
                                        const std::vector<std::vector<Vec>>& x) {
    std::size_t d = x.size(), n = a.dim;
    Matrix h(d * n, d * n);
    for (std::size_t i = 0; i < d; ++i) {
        if (x[i].size() != d) throw InvalidInstance("positivity: ragged matrix");
        for (std::size_t j = 0; j < d; ++j) {
            Matrix blk = gram * a.left_op(x[i][j]);
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t l = 0; l < n; ++l)
                    h.at(i * n + k, j * n + l) = blk.at(k, l);
        }
    }
    return psd_status(h);
}

inline PsdStatus positive_element_status(const StarAlgebra& a, const Matrix& gram,
                                         const Vec& v) {
    return positive_matrix_status(a, gram, {{v}});
}

}  // namespace fellb
