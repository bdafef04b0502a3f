#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>

#include "fellb/instances.hpp"
#include "fellb/ladder.hpp"

using namespace fellb;
using namespace fellb::instances;

namespace {

std::vector<std::size_t> random_bijection(std::size_t n, std::mt19937& rng) {
    std::vector<std::size_t> m(n);
    std::iota(m.begin(), m.end(), std::size_t{0});
    std::shuffle(m.begin(), m.end(), rng);
    return m;
}

// Rungs drawn at random, struts forced by composition: a valid diagram.
SetLadder random_valid_ladder(std::size_t n, std::mt19937& rng) {
    SetLadder l;
    l.nx = l.ny = l.nz = l.nw = n;
    l.f = random_bijection(n, rng);
    l.g = random_bijection(n, rng);
    l.h = random_bijection(n, rng);
    l.u.resize(n);
    l.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) l.u[i] = l.g[l.f[i]];
    for (std::size_t j = 0; j < n; ++j) l.v[j] = l.h[l.g[j]];
    return l;
}

std::vector<std::size_t> node_sizes(const LadderCore& c) {
    return {c.x.size(), c.y.size(), c.z.size(), c.w.size()};
}

void check_certified(const LadderCore& c) {
    std::string why;
    bool ok = certify_ladder(c, &why);
    UNSCOPED_INFO(why);
    REQUIRE(ok);
    CHECK(why.empty());
}

// Enumeration starts at the zero ideal and ends at the whole bundle, so
// every structure map must fix the two extremes.
void check_extremes(const SetLadder& s) {
    REQUIRE(s.f.front() == 0);
    REQUIRE(s.u.front() == 0);
    REQUIRE(s.v.front() == 0);
    REQUIRE(s.f.back() == s.ny - 1);
    REQUIRE(s.u.back() == s.nz - 1);
    REQUIRE(s.v.back() == s.nw - 1);
}

}  // namespace

TEST_CASE("ladder lemma accepts randomly generated commuting diagrams") {
    std::mt19937 rng(20260819u);
    std::uniform_int_distribution<std::size_t> pick(1, 8);
    for (int trial = 0; trial < 100; ++trial) {
        SetLadder l = random_valid_ladder(pick(rng), rng);
        std::string why;
        bool ok = ladder_lemma_check(l, &why);
        UNSCOPED_INFO(why);
        REQUIRE(ok);
    }
    SetLadder empty;
    REQUIRE(ladder_lemma_check(empty));
}

TEST_CASE("ladder lemma rejects planted defects") {
    std::mt19937 rng(7u);
    std::uniform_int_distribution<std::size_t> pick(2, 8);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = pick(rng);
        std::string why;

        SetLadder l = random_valid_ladder(n, rng);
        l.u[1] = l.u[0];
        REQUIRE_FALSE(ladder_lemma_check(l, &why));
        REQUIRE(why == "lower strut is not a bijection");

        l = random_valid_ladder(n, rng);
        std::swap(l.u[0], l.u[1]);
        REQUIRE_FALSE(ladder_lemma_check(l, &why));
        REQUIRE(why == "lower square does not commute");

        l = random_valid_ladder(n, rng);
        l.v[1] = l.v[0];
        REQUIRE_FALSE(ladder_lemma_check(l, &why));
        REQUIRE(why == "upper strut is not a bijection");

        l = random_valid_ladder(n, rng);
        std::swap(l.v[0], l.v[1]);
        REQUIRE_FALSE(ladder_lemma_check(l, &why));
        REQUIRE(why == "upper square does not commute");

        l = random_valid_ladder(n, rng);
        l.f[0] = l.ny;
        REQUIRE_FALSE(ladder_lemma_check(l, &why));
        REQUIRE(why == "first rung is not a total map");

        l = random_valid_ladder(n, rng);
        l.g[0] = l.nz;
        REQUIRE_FALSE(ladder_lemma_check(l, &why));
        REQUIRE(why == "middle rung is not a total map");

        l = random_valid_ladder(n, rng);
        l.h[0] = l.nw;
        REQUIRE_FALSE(ladder_lemma_check(l, &why));
        REQUIRE(why == "last rung is not a total map");

        l = random_valid_ladder(n, rng);
        l.u.pop_back();
        REQUIRE_FALSE(ladder_lemma_check(l, &why));
        REQUIRE(why == "lower strut is not a bijection");
    }
}

TEST_CASE("invariant-base ladder of the summand swap") {
    LeftLadder l = build_left_ladder(c2diag_swap_action());
    REQUIRE(node_sizes(l.core) == std::vector<std::size_t>{2, 2, 2, 2});
    check_extremes(l.core.set);
    check_certified(l.core);
}

TEST_CASE("invariant-base ladder of the trivial action on the diagonal") {
    LeftLadder l = build_left_ladder(c2diag_trivial_action());
    REQUIRE(node_sizes(l.core) == std::vector<std::size_t>{4, 4, 4, 4});
    check_extremes(l.core.set);
    check_certified(l.core);
}

TEST_CASE("invariant-base ladder of the trivial action on the group line") {
    LeftLadder l = build_left_ladder(linez2_trivial_action());
    REQUIRE(node_sizes(l.core) == std::vector<std::size_t>{2, 2, 2, 2});
    check_certified(l.core);
}

TEST_CASE("plain-base ladder of the cyclic group line") {
    auto base = std::make_shared<const FellBundle>(
        line_bundle(std::make_shared<const FiniteGroupoid>(cyclic_group(2))));
    RightLadder r = build_right_ladder(base);
    REQUIRE(node_sizes(r.core) == std::vector<std::size_t>{2, 2, 2, 2});
    check_extremes(r.core.set);
    check_certified(r.core);
}

TEST_CASE("plain-base ladder of the matrix pair bundle") {
    RightLadder r = build_right_ladder(m2pair_bundle());
    REQUIRE(node_sizes(r.core) == std::vector<std::size_t>{2, 2, 2, 2});
    check_certified(r.core);
}

TEST_CASE("plain-base ladder of the Klein line bundle") {
    RightLadder r = build_right_ladder(linev4_bundle());
    REQUIRE(node_sizes(r.core) == std::vector<std::size_t>{2, 2, 2, 2});
    check_certified(r.core);
}

TEST_CASE("plain-base ladder of the twisted Klein bundle") {
    RightLadder r = build_right_ladder(v4_cocycle_bundle());
    REQUIRE(node_sizes(r.core) == std::vector<std::size_t>{2, 2, 2, 2});
    check_extremes(r.core.set);
    check_certified(r.core);
}

TEST_CASE("plain-base ladder of the diagonal bundle") {
    RightLadder r = build_right_ladder(c2diag_bundle());
    REQUIRE(node_sizes(r.core) == std::vector<std::size_t>{4, 4, 4, 4});
    check_extremes(r.core.set);
    check_certified(r.core);
}

TEST_CASE("extension reuses the upper half of the ladder below") {
    LeftLadder l = build_left_ladder(c2diag_swap_action());
    LeftLadder up = extend_left_ladder(l);
    REQUIRE(node_sizes(up.core) == std::vector<std::size_t>{2, 2, 2, 2});
    REQUIRE(lattices_equal(l.core.z, up.core.x));
    REQUIRE(lattices_equal(l.core.w, up.core.y));
    REQUIRE(l.core.set.h == up.core.set.f);
    check_certified(up.core);
}

TEST_CASE("extension of a plain-base ladder climbs to the invariant side") {
    auto base = std::make_shared<const FellBundle>(
        line_bundle(std::make_shared<const FiniteGroupoid>(cyclic_group(2))));
    RightLadder r = build_right_ladder(base);
    LeftLadder up = extend_right_ladder(r);
    REQUIRE(node_sizes(up.core) == std::vector<std::size_t>{2, 2, 2, 2});
    REQUIRE(lattices_equal(r.core.y, up.core.x));
    REQUIRE(lattices_equal(r.core.w, up.core.z));
    REQUIRE(r.core.set.g == up.core.set.f);
    check_certified(up.core);
}
