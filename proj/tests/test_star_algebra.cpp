#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "fellb/instances.hpp"
#include "fellb/star_algebra.hpp"

using namespace fellb;

namespace {

Poly poly_from(std::initializer_list<long> coeffs) {
    Poly p;
    for (long c : coeffs) p.push_back(Scalar(c));
    poly_normalize(p);
    return p;
}

// Smallest *-closed two-sided ideal containing the given vectors, by
// fixpoint closure. Independent of the block machinery.
Subspace ideal_closure(const StarAlgebra& a, std::vector<Vec> gens) {
    Subspace s = Subspace::span(a.dim, gens);
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<Vec> next;
        for (std::size_t i = 0; i < s.dim(); ++i) {
            Vec v = s.basis_vector(i);
            next.push_back(a.star(v));
            for (std::size_t j = 0; j < a.dim; ++j) {
                next.push_back(a.mul(v, unit_vec(a.dim, j)));
                next.push_back(a.mul(unit_vec(a.dim, j), v));
            }
        }
        Subspace grown = s.sum(Subspace::span(a.dim, next));
        if (grown.dim() > s.dim()) {
            s = grown;
            grew = true;
        }
    }
    return s;
}

}  // namespace

TEST_CASE("polynomial utilities", "[exactalg]") {
    Poly p = poly_mul(poly_from({-1, 1}), poly_from({-2, 1}));  // (t-1)(t-2)
    CHECK(p == poly_from({2, -3, 1}));
    auto [q, r] = poly_divmod(p, poly_from({-1, 1}));
    CHECK(q == poly_from({-2, 1}));
    CHECK(r.empty());

    CHECK(poly_gcd(p, poly_from({-1, 1})) == poly_from({-1, 1}));
    Poly sq = poly_mul(p, poly_from({-1, 1}));  // (t-1)^2 (t-2)
    CHECK(poly_squarefree_part(sq) == poly_from({2, -3, 1}));

    CHECK(poly_eval(p, Scalar(3)) == Scalar(2));
    CHECK(poly_str(poly_from({1, 1, 1})) == "t^2+t+1");
    CHECK(poly_str(poly_from({3, -3, 1})) == "t^2-3*t+3");
}

TEST_CASE("exact roots in Q(i)", "[exactalg]") {
    // t^2 + 1 = (t - i)(t + i)
    auto r1 = qi_roots(poly_from({1, 0, 1}));
    REQUIRE(r1.size() == 2);
    CHECK(r1[0] == -Scalar::i());
    CHECK(r1[1] == Scalar::i());

    CHECK(qi_roots(poly_from({-2, 0, 1})).empty());  // t^2 - 2

    auto r3 = qi_roots(poly_from({-1, 0, 0, 1}));  // t^3 - 1
    REQUIRE(r3.size() == 1);
    CHECK(r3[0] == Scalar(1));

    // (t - 1/2)(t - i) = t^2 - (1/2 + i) t + i/2
    Poly p{Scalar(mpq_class(0), mpq_class(1, 2)),
           -Scalar(mpq_class(1, 2), mpq_class(1)), Scalar(1)};
    auto r4 = qi_roots(p);
    REQUIRE(r4.size() == 2);
    // Lexicographic (re, im) order puts i (re = 0) before 1/2.
    CHECK(r4[0] == Scalar::i());
    CHECK(r4[1] == Scalar(mpq_class(1, 2)));

    // t^2 (roots with multiplicity collapse to one)
    auto r5 = qi_roots(poly_from({0, 0, 1}));
    REQUIRE(r5.size() == 1);
    CHECK(r5[0] == Scalar(0));
}

TEST_CASE("star algebra axioms and C* criterion", "[exactalg]") {
    for (auto alg : {instances::diag_algebra(2), instances::matrix_algebra(2),
                     instances::z2_group_algebra(), instances::z3_group_algebra()}) {
        ValidationReport rep;
        CHECK(report_ok(validate_star_algebra(alg)));
        CHECK(cstar_criterion(alg, rep));
        CHECK(report_ok(rep));
    }

    // No unit: 1-dimensional algebra with zero product.
    StarAlgebra nil = StarAlgebra::make(1);
    ValidationReport rep;
    CHECK_FALSE(cstar_criterion(nil, rep));
    REQUIRE_FALSE(rep.empty());
    CHECK(rep[0].code == "algebra/unit");

    // Q(i)[t]/(t^2) with t* = t: unital but trace form is degenerate.
    StarAlgebra dual = StarAlgebra::make(2);
    dual.mult[0][0][0] = Scalar(1);
    dual.mult[0][1][1] = Scalar(1);
    dual.mult[1][0][1] = Scalar(1);
    rep.clear();
    CHECK_FALSE(cstar_criterion(dual, rep));
    REQUIRE_FALSE(rep.empty());
    CHECK(rep.back().code == "algebra/trace-form");

    // Broken involution: star not anti-multiplicative on M_2.
    StarAlgebra bad = instances::matrix_algebra(2);
    bad.invol = Matrix::identity(4);  // transpose-less "involution"
    CHECK_FALSE(report_ok(validate_star_algebra(bad)));
}

TEST_CASE("unit and trace form", "[exactalg]") {
    auto m2 = instances::matrix_algebra(2);
    auto u = algebra_unit(m2);
    REQUIRE(u.has_value());
    CHECK(*u == Vec{Scalar(1), Scalar(0), Scalar(0), Scalar(1)});

    Matrix g = trace_form(instances::z2_group_algebra());
    CHECK(g == Matrix::from_rows({{Scalar(2), Scalar(0)}, {Scalar(0), Scalar(2)}}));
    CHECK(is_pd(g));
}

TEST_CASE("center and central blocks", "[exactalg]") {
    auto d2 = instances::diag_algebra(2);
    CHECK(algebra_center(d2).dim() == 2);
    auto cb = central_blocks(d2);
    REQUIRE(cb.idempotent.size() == 2);
    CHECK(cb.idempotent[0] == Vec{Scalar(0), Scalar(1)});
    CHECK(cb.idempotent[1] == Vec{Scalar(1), Scalar(0)});
    CHECK(cb.block[0].dim() == 1);
    CHECK(cb.block[1].dim() == 1);

    auto m2 = instances::matrix_algebra(2);
    CHECK(algebra_center(m2).dim() == 1);
    auto cbm = central_blocks(m2);
    REQUIRE(cbm.idempotent.size() == 1);
    CHECK(cbm.idempotent[0] == Vec{Scalar(1), Scalar(0), Scalar(0), Scalar(1)});
    CHECK(cbm.block[0].is_full());

    // Q(i)[Z2] splits through (1 +- g)/2.
    auto z2 = instances::z2_group_algebra();
    auto cbz = central_blocks(z2);
    REQUIRE(cbz.idempotent.size() == 2);
    Scalar half(mpq_class(1, 2));
    CHECK(cbz.idempotent[0] == Vec{half, -half});
    CHECK(cbz.idempotent[1] == Vec{half, half});
}

TEST_CASE("Z3 group algebra is rejected with the blocking factor", "[exactalg]") {
    auto z3 = instances::z3_group_algebra();
    try {
        central_blocks(z3);
        FAIL("expected UnsupportedInstance");
    } catch (const UnsupportedInstance& e) {
        CHECK(e.witness == "t^2+t+1");
    }
}

TEST_CASE("ideal closures match block sums", "[exactalg]") {
    std::mt19937 rng(4242);
    std::uniform_int_distribution<long> entry(-2, 2);
    for (auto alg : {instances::diag_algebra(2), instances::diag_algebra(3),
                     instances::matrix_algebra(2), instances::z2_group_algebra()}) {
        auto cb = central_blocks(alg);
        // closure(v) = sum of the blocks whose component of v is nonzero.
        for (int trial = 0; trial < 40; ++trial) {
            Vec v(alg.dim);
            for (auto& x : v) x = Scalar(mpq_class(entry(rng)), mpq_class(entry(rng)));
            Subspace expect(alg.dim);
            for (std::size_t b = 0; b < cb.idempotent.size(); ++b)
                if (!is_zero_vec(alg.mul(cb.idempotent[b], v)))
                    expect = expect.sum(cb.block[b]);
            CHECK(ideal_closure(alg, {v}) == expect);
        }
        // Closures of subsets of the primitive idempotents give exactly the
        // 2^#blocks block sums; together with the random-vector check above
        // this pins the ideal lattice of the algebra.
        std::set<std::vector<std::size_t>> seen;
        std::size_t nb = cb.idempotent.size();
        for (std::size_t mask = 0; mask < (1u << nb); ++mask) {
            std::vector<Vec> gens;
            for (std::size_t k = 0; k < nb; ++k)
                if (mask & (1u << k)) gens.push_back(cb.idempotent[k]);
            Subspace cl = ideal_closure(alg, gens);
            std::vector<std::size_t> sig;
            for (std::size_t b = 0; b < cb.idempotent.size(); ++b)
                if (cl.contains(cb.block[b])) sig.push_back(b);
            // The closure must equal the sum of the blocks it contains.
            Subspace blocksum(alg.dim);
            for (auto b : sig) blocksum = blocksum.sum(cb.block[b]);
            CHECK(cl == blocksum);
            seen.insert(sig);
        }
        CHECK(seen.size() == (1u << cb.idempotent.size()));
    }
}

TEST_CASE("positivity in the algebra", "[exactalg]") {
    auto d2 = instances::diag_algebra(2);
    Matrix g2 = trace_form(d2);
    CHECK(positive_element_status(d2, g2, Vec{Scalar(1), Scalar(1)}) == PsdStatus::Yes);
    CHECK(positive_element_status(d2, g2, Vec{Scalar(1), Scalar(0)}) == PsdStatus::Yes);
    CHECK(positive_element_status(d2, g2, Vec{Scalar(1), Scalar(-1)}) == PsdStatus::No);
    CHECK(positive_element_status(d2, g2, Vec{Scalar::i(), Scalar(0)}) ==
          PsdStatus::NotHermitian);

    auto m2 = instances::matrix_algebra(2);
    Matrix gm = trace_form(m2);
    // e11 is positive, e11 - e22 is not, a*a is always positive.
    Vec e11{Scalar(1), Scalar(0), Scalar(0), Scalar(0)};
    Vec diff{Scalar(1), Scalar(0), Scalar(0), Scalar(-1)};
    CHECK(positive_element_status(m2, gm, e11) == PsdStatus::Yes);
    CHECK(positive_element_status(m2, gm, diff) == PsdStatus::No);
    std::mt19937 rng(99);
    std::uniform_int_distribution<long> entry(-2, 2);
    for (int trial = 0; trial < 25; ++trial) {
        Vec a(4);
        for (auto& x : a) x = Scalar(mpq_class(entry(rng)), mpq_class(entry(rng)));
        CHECK(positive_element_status(m2, gm, m2.mul(m2.star(a), a)) == PsdStatus::Yes);
    }

    // 2x2 matrix over C + C: [[(1,1), (1,0)], [(1,0), (1,1)]] is PSD
    // (each coordinate gives [[1,1],[1,1]] or [[1,0],[0,1]]).
    Vec one_one{Scalar(1), Scalar(1)}, e1{Scalar(1), Scalar(0)};
    CHECK(positive_matrix_status(d2, g2, {{one_one, e1}, {e1, one_one}}) ==
          PsdStatus::Yes);
    // [[(1,1), (1,1)], [(1,1), (1,0)]]: first coordinate gives [[1,1],[1,1]],
    // second gives [[1,1],[1,0]] with det -1, so the matrix is not PSD.
    CHECK(positive_matrix_status(d2, g2, {{one_one, one_one}, {one_one, e1}}) ==
          PsdStatus::No);
}
