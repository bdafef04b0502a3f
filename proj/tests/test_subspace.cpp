#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fellb/subspace.hpp"

using fellb::Scalar;
using fellb::Subspace;
using fellb::Vec;

namespace {

Vec v3(long a, long b, long c) { return Vec{Scalar(a), Scalar(b), Scalar(c)}; }

}  // namespace

TEST_CASE("span, containment, canonical equality", "[subspace]") {
    Subspace zero(3);
    CHECK(zero.dim() == 0);
    CHECK(zero.contains(v3(0, 0, 0)));
    CHECK_FALSE(zero.contains(v3(1, 0, 0)));

    Subspace s = Subspace::span(3, {v3(1, 1, 0), v3(2, 2, 0), v3(0, 0, 1)});
    CHECK(s.dim() == 2);
    CHECK(s.contains(v3(3, 3, 7)));
    CHECK_FALSE(s.contains(v3(1, 0, 0)));

    // Same space from a different generating set: identical canonical basis.
    Subspace t = Subspace::span(3, {v3(1, 1, 1), v3(0, 0, 2)});
    CHECK(s == t);

    CHECK(Subspace::full(3).contains(s));
    CHECK(Subspace::full(3).dim() == 3);
}

TEST_CASE("sum and intersection", "[subspace]") {
    Subspace a = Subspace::span(3, {v3(1, 0, 0), v3(0, 1, 0)});
    Subspace b = Subspace::span(3, {v3(0, 1, 0), v3(0, 0, 1)});

    CHECK(a.sum(b) == Subspace::full(3));
    CHECK(a.intersect(b) == Subspace::span(3, {v3(0, 1, 0)}));

    Subspace zero(3);
    CHECK(a.intersect(zero).is_zero());
    CHECK(a.sum(zero) == a);

    // Diagonal line meets each axis plane in a line only when contained.
    Subspace diag = Subspace::span(3, {v3(1, 1, 1)});
    CHECK(a.intersect(diag).is_zero());
    CHECK(a.sum(diag) == Subspace::full(3));
}

TEST_CASE("intersection randomized: dimension formula and membership", "[subspace]") {
    std::mt19937 rng(77);
    std::uniform_int_distribution<long> entry(-2, 2);
    for (int trial = 0; trial < 120; ++trial) {
        std::size_t n = 2 + rng() % 3;
        auto rand_space = [&](std::size_t gens) {
            std::vector<Vec> vs;
            for (std::size_t g = 0; g < gens; ++g) {
                Vec v(n);
                for (auto& x : v) x = Scalar(entry(rng));
                vs.push_back(v);
            }
            return Subspace::span(n, vs);
        };
        Subspace a = rand_space(1 + rng() % n), b = rand_space(1 + rng() % n);
        Subspace cap = a.intersect(b), cup = a.sum(b);
        INFO("trial " << trial);
        CHECK(cap.dim() + cup.dim() == a.dim() + b.dim());
        CHECK(a.contains(cap));
        CHECK(b.contains(cap));
        CHECK(cup.contains(a));
        CHECK(cup.contains(b));
        for (std::size_t k = 0; k < cap.dim(); ++k) {
            CHECK(a.contains(cap.basis_vector(k)));
            CHECK(b.contains(cap.basis_vector(k)));
        }
    }
}

TEST_CASE("apply and apply_conj", "[subspace]") {
    fellb::Matrix m(2, 2);  // v -> (v2, i v1)
    m.at(0, 1) = Scalar(1);
    m.at(1, 0) = Scalar::i();
    Subspace line = Subspace::span(2, {Vec{Scalar(1), Scalar::i()}});
    Subspace img = line.apply(m);
    CHECK(img.dim() == 1);
    CHECK(img.contains(Vec{Scalar::i(), Scalar::i()}));

    Subspace imgc = line.apply_conj(fellb::Matrix::identity(2));
    CHECK(imgc.contains(Vec{Scalar(1), -Scalar::i()}));
}

TEST_CASE("deterministic subspace order", "[subspace]") {
    Subspace a = Subspace::span(2, {Vec{Scalar(1), Scalar(0)}});
    Subspace b = Subspace::span(2, {Vec{Scalar(1), Scalar(1)}});
    CHECK((a < b || b < a));
    CHECK_FALSE(a < a);
}
