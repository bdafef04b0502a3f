#include <catch2/catch_amalgamated.hpp>

#include "fellb/equivalence.hpp"
#include "fellb/instances.hpp"

using namespace fellb;

namespace {

bool has_code(const ValidationReport& rep, const std::string& prefix) {
    for (const Violation& v : rep)
        if (v.code.rfind(prefix, 0) == 0) return true;
    return false;
}

void check_equivalence(const EquivalenceBundle& e) {
    ValidationReport sp = validate_equivalence_space(*e.space);
    for (const Violation& v : sp) UNSCOPED_INFO(v.code + ": " + v.message);
    REQUIRE(sp.empty());
    ValidationReport rep = validate_equivalence_bundle(e);
    for (const Violation& v : rep) UNSCOPED_INFO(v.code + ": " + v.message);
    REQUIRE(rep.empty());
}

struct RoundTrip {
    IdealLattice left, right;
    std::vector<std::size_t> l2r, r2l;
};

// The induced maps must be mutually inverse lattice isomorphisms fixing the
// zero and full ideals (first and last in enumeration order).
RoundTrip check_roundtrip(const EquivalenceBundle& e, std::size_t expect_size) {
    RoundTrip rt{enumerate_ideals(e.left), enumerate_ideals(e.right), {}, {}};
    REQUIRE(rt.left.size() == expect_size);
    REQUIRE(rt.right.size() == expect_size);
    rt.l2r = rieffel_map_left_to_right(e, rt.left, rt.right);
    rt.r2l = rieffel_map_right_to_left(e, rt.right, rt.left);
    for (std::size_t i = 0; i < rt.left.size(); ++i) REQUIRE(rt.r2l[rt.l2r[i]] == i);
    for (std::size_t i = 0; i < rt.right.size(); ++i) REQUIRE(rt.l2r[rt.r2l[i]] == i);
    REQUIRE(rt.l2r.front() == 0);
    REQUIRE(rt.l2r.back() == rt.right.size() - 1);
    std::string why;
    REQUIRE(lattice_isomorphic_via(rt.left, rt.right, rt.l2r, &why));
    REQUIRE(lattice_isomorphic_via(rt.right, rt.left, rt.r2l, &why));
    // Every induced module is a genuine submodule.
    for (const FellBundleIdeal& j : rt.left.ideals)
        REQUIRE(validate_submodule(e, module_from_left_ideal(e, j)).empty());
    for (const FellBundleIdeal& j : rt.right.ideals)
        REQUIRE(validate_submodule(e, module_from_right_ideal(e, j)).empty());
    return rt;
}

}  // namespace

TEST_CASE("subgroupoid equivalence: Klein line bundle against a two-element subgroup") {
    auto b = instances::linev4_bundle();
    SubgroupoidEquivalenceBundle se =
        subgroupoid_equivalence_bundle(b, make_subgroupoid(b->gpd, {0, 1}));
    REQUIRE(se.eq.space->n_points == 4);
    REQUIRE(se.eq.space->left->n_arrows == 8);
    REQUIRE(se.eq.space->right->n_arrows == 2);
    REQUIRE(se.space.quotient->n_points == 2);
    check_equivalence(se.eq);
    check_roundtrip(se.eq, 2);
}

TEST_CASE("subgroupoid equivalence: matrix pair bundle against its unit fibers") {
    auto b = instances::m2pair_bundle();
    SubgroupoidEquivalenceBundle se =
        subgroupoid_equivalence_bundle(b, units_subgroupoid(b->gpd));
    REQUIRE(se.eq.space->n_points == 4);
    REQUIRE(se.space.quotient->n_points == 4);
    check_equivalence(se.eq);
    RoundTrip rt = check_roundtrip(se.eq, 4);
    // The unit-fiber restriction has one central block per object.
    REQUIRE(rt.right.n_blocks == 2);
}

TEST_CASE("semidirect equivalence recovers the base bundle on the right") {
    auto a = instances::c2diag_swap_action();
    SemidirectEquivalence se = semidirect_equivalence(a);
    REQUIRE(se.right_to_base.size() == 2);
    REQUIRE(bundles_isomorphic_via(*se.core.right, *a->bun, se.right_to_base));
    // The quotient keeps the commuting translation structure for reuse.
    REQUIRE(se.core.space.quotient->translate.has_value());
    REQUIRE(se.core.space.quotient->n_points == 4);
    check_equivalence(se.core.eq);
    check_roundtrip(se.core.eq, 4);
}

TEST_CASE("semidirect equivalence of the trivial action") {
    auto a = instances::c2diag_trivial_action();
    SemidirectEquivalence se = semidirect_equivalence(a);
    REQUIRE(bundles_isomorphic_via(*se.core.right, *a->bun, se.right_to_base));
    check_equivalence(se.core.eq);
    check_roundtrip(se.core.eq, 4);
}

TEST_CASE("principal equivalence needs an action free on objects") {
    REQUIRE_THROWS_AS(principal_equivalence(instances::c2diag_trivial_action()),
                      InvalidInstance);
}

TEST_CASE("principal equivalence of the summand swap") {
    PrincipalEquivalence pe = principal_equivalence(instances::c2diag_swap_action());
    REQUIRE(pe.eq.space->n_points == 2);
    REQUIRE(pe.eq.left->gpd->n_arrows == 4);
    REQUIRE(pe.eq.right->gpd->n_arrows == 1);
    check_equivalence(pe.eq);
    check_roundtrip(pe.eq, 2);
}

TEST_CASE("principal equivalence of a free translation action") {
    auto base = instances::m2pair_bundle();
    ActionBundle ab = make_action_bundle(
        base, std::make_shared<const SpaceAction>(translation_space(base->gpd)));
    PrincipalEquivalence pe = principal_equivalence(translation_action(ab));
    REQUIRE(pe.eq.space->n_points == 8);
    REQUIRE(pe.eq.left->gpd->n_arrows == 16);
    REQUIRE(pe.eq.right->gpd->n_arrows == 4);
    check_equivalence(pe.eq);
    check_roundtrip(pe.eq, 2);
}

TEST_CASE("action-semidirect equivalence over the torsor") {
    ActionSemidirectEquivalence ae = action_semidirect_equivalence(
        instances::m2pair_bundle(), instances::m2pair_torsor());
    REQUIRE(ae.eq.space->n_points == 8);
    REQUIRE(ae.eq.left->gpd->n_arrows == 16);
    check_equivalence(ae.eq);
    check_roundtrip(ae.eq, 2);
}

TEST_CASE("arrow-space equivalence of the matrix pair bundle") {
    ActionSemidirectEquivalence ae =
        arrow_space_equivalence(instances::m2pair_bundle());
    REQUIRE(ae.eq.space->n_points == 8);
    check_equivalence(ae.eq);
    check_roundtrip(ae.eq, 2);
}

TEST_CASE("arrow-space equivalence of the diagonal bundle and its lattice map") {
    ActionSemidirectEquivalence ae = arrow_space_equivalence(instances::c2diag_bundle());
    REQUIRE(ae.eq.space->n_points == 2);
    check_equivalence(ae.eq);
    RoundTrip rt = check_roundtrip(ae.eq, 4);
    REQUIRE(rt.right.mask == std::vector<std::uint64_t>{0, 1, 2, 3});
}

TEST_CASE("modules induced from right ideals restrict to the ideal fibers") {
    for (auto base : {instances::c2diag_bundle(), instances::m2pair_bundle()}) {
        ActionSemidirectEquivalence ae = arrow_space_equivalence(base);
        IdealLattice lat = enumerate_ideals(base);
        for (const FellBundleIdeal& j : lat.ideals) {
            ModuleFamily m = module_from_right_ideal(ae.eq, j);
            REQUIRE(validate_submodule(ae.eq, m).empty());
            for (std::size_t z = 0; z < ae.eq.space->n_points; ++z)
                REQUIRE(m[z] == j.at[ae.ab.agpd.parts[z].first]);
        }
    }
}

TEST_CASE("equivalence validation rejects planted defects") {
    auto b = instances::m2pair_bundle();
    SubgroupoidEquivalenceBundle se =
        subgroupoid_equivalence_bundle(b, units_subgroupoid(b->gpd));
    REQUIRE(validate_equivalence_bundle(se.eq).empty());
    const GroupoidEquivalence& s = *se.eq.space;

    SECTION("a rescaled unit action breaks the left action laws") {
        EquivalenceBundle d = se.eq;
        std::size_t e = s.left->unit_arrow[s.lmoment[0]];
        d.lac[e][0] = Scalar(2) * d.lac[e][0];
        REQUIRE(has_code(validate_equivalence_bundle(d), "eqbundle/leftaction"));
    }
    SECTION("a rescaled inner product breaks the adjoint law") {
        EquivalenceBundle d = se.eq;
        d.lip[0][0] = Scalar::i() * d.lip[0][0];
        REQUIRE(has_code(validate_equivalence_bundle(d), "eqbundle/ipleft"));
    }
    SECTION("zeroed inner products break fullness") {
        EquivalenceBundle d = se.eq;
        for (std::size_t z = 0; z < s.n_points; ++z)
            for (std::size_t w = 0; w < s.n_points; ++w)
                if (s.lpair[z][w] >= 0)
                    d.lip[z][w] = Matrix(d.lip[z][w].rows(), d.lip[z][w].cols());
        REQUIRE(has_code(validate_equivalence_bundle(d), "eqbundle/fullness"));
    }
    SECTION("a truncated fiber table is a shape error") {
        EquivalenceBundle d = se.eq;
        d.dim.pop_back();
        REQUIRE(has_code(validate_equivalence_bundle(d), "eqbundle/shape"));
    }
    SECTION("a base mismatch is a shape error") {
        EquivalenceBundle d = se.eq;
        d.left = instances::c2diag_bundle();
        REQUIRE(has_code(validate_equivalence_bundle(d), "eqbundle/shape"));
    }
}

TEST_CASE("submodule validation rejects a non-invariant family") {
    auto b = instances::m2pair_bundle();
    SubgroupoidEquivalenceBundle se =
        subgroupoid_equivalence_bundle(b, units_subgroupoid(b->gpd));
    ModuleFamily m;
    for (std::size_t z = 0; z < se.eq.space->n_points; ++z)
        m.emplace_back(z == 1 ? Subspace::full(se.eq.dim[1]) : Subspace(se.eq.dim[z]));
    ValidationReport rep = validate_submodule(se.eq, m);
    REQUIRE_FALSE(rep.empty());
    REQUIRE((has_code(rep, "submodule/leftaction") ||
             has_code(rep, "submodule/rightaction")));

    ModuleFamily wrong;
    wrong.emplace_back(se.eq.dim[0] + 1);
    for (std::size_t z = 1; z < se.eq.space->n_points; ++z)
        wrong.emplace_back(se.eq.dim[z]);
    REQUIRE(has_code(validate_submodule(se.eq, wrong), "submodule/shape"));
}
