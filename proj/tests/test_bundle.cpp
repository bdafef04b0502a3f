#include <catch2/catch_amalgamated.hpp>

#include <memory>

#include "fellb/bundle.hpp"
#include "fellb/instances.hpp"

using namespace fellb;

namespace {

bool has_code(const ValidationReport& rep, const std::string& prefix) {
    for (const auto& v : rep)
        if (v.code.rfind(prefix, 0) == 0) return true;
    return false;
}

std::shared_ptr<const FiniteGroupoid> share(FiniteGroupoid g) {
    return std::make_shared<const FiniteGroupoid>(std::move(g));
}

SpaceAction objects_space(std::shared_ptr<const FiniteGroupoid> k) {
    SpaceAction a;
    a.gpd = k;
    a.n_points = k->n_objects;
    a.point_label = k->object_label;
    a.moment.resize(k->n_objects);
    for (std::size_t u = 0; u < k->n_objects; ++u) a.moment[u] = u;
    a.act.assign(k->n_arrows, std::vector<std::ptrdiff_t>(k->n_objects, -1));
    for (std::size_t g = 0; g < k->n_arrows; ++g)
        a.act[g][k->src[g]] = static_cast<std::ptrdiff_t>(k->rng[g]);
    return a;
}

}  // namespace

TEST_CASE("line bundles validate") {
    CHECK(validate_bundle(line_bundle(share(pair_groupoid(2)))).empty());
    CHECK(validate_bundle(line_bundle(share(cyclic_group(2)))).empty());
    CHECK(validate_bundle(line_bundle(share(klein_group()))).empty());
    CHECK(validate_bundle(*instances::c2diag_bundle()).empty());
    CHECK(validate_bundle(*instances::m2pair_bundle()).empty());
}

TEST_CASE("algebra bundles validate") {
    auto d1 = share(instances::discrete_groupoid(1));
    FellBundle m2 = algebras_bundle(d1, {instances::matrix_algebra(2)});
    CHECK(validate_bundle(m2).empty());

    auto d2 = share(instances::discrete_groupoid(2));
    FellBundle two_lines =
        algebras_bundle(d2, {instances::diag_algebra(1), instances::diag_algebra(1)});
    CHECK(same_presentation(two_lines, line_bundle(d2)));

    // Unit algebra extraction round-trips the input algebra.
    StarAlgebra back = m2.unit_algebra(0);
    StarAlgebra orig = instances::matrix_algebra(2);
    CHECK(back.dim == orig.dim);
    CHECK(back.invol == orig.invol);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(back.mult[i][j] == orig.mult[i][j]);
}

TEST_CASE("group algebra of Z3 validates but its blocks are refused") {
    auto b = instances::z3_algebra_bundle();
    CHECK(validate_bundle(*b).empty());
    try {
        analyze_unit_fibers(*b);
        FAIL("expected the block analysis to refuse this instance");
    } catch (const UnsupportedInstance& e) {
        CHECK(e.witness == "t^2+t+1");
    }
}

TEST_CASE("twisted Klein line bundle") {
    auto b = instances::v4_cocycle_bundle();
    CHECK(validate_bundle(*b).empty());

    // The sections form a single 4-dimensional block (a 2x2 matrix algebra):
    // the twist fuses the four characters of the untwisted bundle into one.
    StarAlgebra tot = total_algebra(*b);
    ValidationReport rep;
    CHECK(cstar_criterion(tot, rep));
    CHECK(central_blocks(tot).idempotent.size() == 1);

    StarAlgebra untwisted = total_algebra(*instances::linev4_bundle());
    CHECK(central_blocks(untwisted).idempotent.size() == 4);

    // Anti-commutation of the two generators underneath the twist.
    Vec a = unit_vec(1, 0), bb = unit_vec(1, 0);
    Vec ab = b->mul(1, 2, a, bb);
    Vec ba = b->mul(2, 1, bb, a);
    CHECK(ab == scale_vec(Scalar(-1), ba));

    UnitFibers uf = analyze_unit_fibers(*b);
    CHECK(uf.n_blocks == 1);
}

TEST_CASE("pair groupoid line bundle has matrix sections") {
    StarAlgebra tot = total_algebra(*instances::m2pair_bundle());
    ValidationReport rep;
    CHECK(cstar_criterion(tot, rep));
    CHECK(central_blocks(tot).idempotent.size() == 1);

    UnitFibers uf = analyze_unit_fibers(*instances::m2pair_bundle());
    CHECK(uf.n_blocks == 2);
    CHECK(uf.block_home[0] == std::pair<std::size_t, std::size_t>{0, 0});
    CHECK(uf.block_home[1] == std::pair<std::size_t, std::size_t>{1, 0});
}

TEST_CASE("planted bundle defects") {
    // Involution scaled by 2: applying it twice is no longer the identity.
    FellBundle b = line_bundle(share(cyclic_group(2)));
    b.invol[1] = Scalar(2) * b.invol[1];
    CHECK(has_code(validate_bundle(b), "bundle/involution"));

    // A sign table that is not a cocycle breaks associativity.
    auto z2 = share(cyclic_group(2));
    std::vector<std::vector<Scalar>> bad(2, std::vector<Scalar>(2, Scalar(1)));
    bad[1][0] = Scalar(-1);  // s(g, e) = -1 violates unitality
    FellBundle nb = cocycle_line_bundle(z2, bad);
    ValidationReport rep = validate_bundle(nb);
    CHECK_FALSE(rep.empty());

    // Zero multiplication map: saturation fails.
    FellBundle sat = line_bundle(z2);
    sat.mult_at(1, 1) = Matrix(1, 1);
    ValidationReport srep = validate_bundle(sat);
    CHECK(has_code(srep, "bundle/saturation"));
}

TEST_CASE("positivity can fail while every algebraic law holds") {
    // Direct sum of two line bundles over Z2; the first summand's involution
    // carries the sign -1, which is compatible with every identity but makes
    // the pairing ( e_1* e_1 ) at the non-unit arrow equal to -1.
    auto z2 = share(cyclic_group(2));
    FellBundle b;
    b.gpd = z2;
    b.dim = {2, 2};
    b.invol.resize(2);
    b.mult.assign(4, Matrix());
    Matrix conj2 = Matrix::identity(2);
    b.invol[0] = conj2;
    Matrix iv(2, 2);
    iv.at(0, 0) = Scalar(-1);
    iv.at(1, 1) = Scalar(1);
    b.invol[1] = iv;
    Matrix m(2, 4);  // componentwise product on tensor coordinates
    m.at(0, 0) = Scalar(1);
    m.at(1, 3) = Scalar(1);
    for (std::size_t x = 0; x < 2; ++x)
        for (std::size_t y = 0; y < 2; ++y) b.mult_at(x, y) = m;
    ValidationReport rep = validate_bundle(b);
    CHECK(has_code(rep, "bundle/positivity"));
    CHECK_FALSE(has_code(rep, "bundle/involution"));
    CHECK_FALSE(has_code(rep, "bundle/associativity"));
    CHECK_FALSE(has_code(rep, "bundle/unit-fiber"));
}

TEST_CASE("restriction") {
    auto klein = share(klein_group());
    FellBundle b = line_bundle(klein);
    Subgroupoid sub = make_subgroupoid(klein, {0, 1});
    FellBundle r = restrict_bundle(b, sub);
    CHECK(validate_bundle(r).empty());
    CHECK(same_presentation(r, line_bundle(share(cyclic_group(2)))));

    FellBundle tw = restrict_bundle(*instances::v4_cocycle_bundle(),
                                    make_subgroupoid(klein, {0, 2}));
    CHECK(validate_bundle(tw).empty());
    // The cocycle restricted to {e, b} is trivial on that subgroup.
    CHECK(same_presentation(tw, line_bundle(share(cyclic_group(2)))));
}

TEST_CASE("bundle actions validate") {
    CHECK(validate_bundle_action(*instances::c2diag_swap_action()).empty());
    CHECK(validate_bundle_action(*instances::c2diag_trivial_action()).empty());
    CHECK(validate_bundle_action(*instances::linez2_trivial_action()).empty());

    BundleIsoAction broken = *instances::c2diag_swap_action();
    broken.alpha[1][0] = Scalar::i() * broken.alpha[1][0];
    ValidationReport rep = validate_bundle_action(broken);
    CHECK_FALSE(rep.empty());
}

TEST_CASE("semidirect bundles") {
    // Extension by the trivial group changes nothing.
    auto pt = share(point_groupoid());
    auto v4b = instances::v4_cocycle_bundle();
    auto trivact = std::make_shared<const IsoAction>(
        trivial_iso_action(pt, v4b->gpd));
    SemidirectBundle sb =
        semidirect_bundle(instances::identity_bundle_action(v4b, trivact));
    CHECK(validate_bundle(*sb.bun).empty());
    std::vector<std::size_t> id_map;
    for (std::size_t k = 0; k < sb.bun->gpd->n_arrows; ++k)
        id_map.push_back(sb.sgpd.parts[k].first);
    CHECK(bundles_isomorphic_via(*sb.bun, *v4b, id_map));

    // Swap action on the two-point diagonal: sections become 2x2 matrices.
    SemidirectBundle sw = semidirect_bundle(instances::c2diag_swap_action());
    CHECK(validate_bundle(*sw.bun).empty());
    StarAlgebra tot = total_algebra(*sw.bun);
    CHECK(central_blocks(tot).idempotent.size() == 1);

    // Trivial action on the two-point diagonal: two copies of the Z2 algebra.
    SemidirectBundle tv = semidirect_bundle(instances::c2diag_trivial_action());
    CHECK(validate_bundle(*tv.bun).empty());
    CHECK(central_blocks(total_algebra(*tv.bun)).idempotent.size() == 4);
}

TEST_CASE("action bundles") {
    // Acting on the object space returns the original bundle.
    auto p2 = share(pair_groupoid(2));
    auto base = std::make_shared<const FellBundle>(line_bundle(p2));
    auto osp = std::make_shared<const SpaceAction>(objects_space(p2));
    ActionBundle ab = make_action_bundle(base, osp);
    CHECK(validate_bundle(*ab.bun).empty());
    std::vector<std::size_t> to_base;
    for (auto [arrow, point] : ab.agpd.parts) to_base.push_back(arrow);
    CHECK(bundles_isomorphic_via(*ab.bun, *base, to_base));

    // Acting on the arrow space by translation.
    auto tsp = std::make_shared<const SpaceAction>(translation_space(p2));
    ActionBundle at = make_action_bundle(base, tsp);
    CHECK(validate_bundle(*at.bun).empty());
    CHECK(at.bun->gpd->n_arrows == 8);
    CHECK(at.bun->gpd->n_objects == 4);
}

TEST_CASE("translation action and its orbit bundle") {
    auto p2 = share(pair_groupoid(2));
    auto base = std::make_shared<const FellBundle>(line_bundle(p2));
    auto tsp = std::make_shared<const SpaceAction>(translation_space(p2));
    ActionBundle ab = make_action_bundle(base, tsp);
    auto ta = translation_action(ab);
    CHECK(validate_bundle_action(*ta).empty());

    // Quotienting the translation out of the arrow space recovers the base.
    OrbitBundle ob = orbit_bundle(ta);
    CHECK(validate_bundle(*ob.bun).empty());
    std::vector<std::size_t> to_base;
    for (std::size_t a = 0; a < ob.bun->gpd->n_arrows; ++a)
        to_base.push_back(ab.agpd.parts[ob.ogpd.rep_arrow[a]].first);
    CHECK(bundles_isomorphic_via(*ob.bun, *base, to_base));
}

TEST_CASE("orbit products are representative-independent") {
    auto v4 = share(klein_group());
    auto base = std::make_shared<const FellBundle>(line_bundle(v4));
    auto tsp = std::make_shared<const SpaceAction>(translation_space(v4));
    ActionBundle ab = make_action_bundle(base, tsp);
    auto ta = translation_action(ab);
    OrbitBundle ob = orbit_bundle(ta);
    CHECK(validate_bundle(*ob.bun).empty());

    const OrbitGroupoid& og = ob.ogpd;
    const FiniteGroupoid& h = *ab.agpd.gpd;
    const FellBundle& up = *ab.bun;
    const IsoAction& act = *ta->act;
    const FiniteGroupoid& q = *og.gpd;
    // For every pair of upstairs arrows lying over a composable orbit pair,
    // the aligned product transported to the representative matches the
    // orbit bundle's product of the transported factors.
    for (std::size_t a = 0; a < h.n_arrows; ++a)
        for (std::size_t b = 0; b < h.n_arrows; ++b) {
            std::size_t qa = og.orbit_of_arrow[a], qb = og.orbit_of_arrow[b];
            if (!q.composable(qa, qb)) continue;
            // Align b onto a: unique x with sigma_x carrying rng(b) to src(a).
            std::ptrdiff_t found = -1;
            for (std::size_t x = 0; x < act.g->n_arrows; ++x)
                if (act.sigma_object(x, h.rng[b]) ==
                    static_cast<std::ptrdiff_t>(h.src[a])) {
                    found = static_cast<std::ptrdiff_t>(x);
                    break;
                }
            REQUIRE(found >= 0);
            std::size_t moved = act.sigma_apply(static_cast<std::size_t>(found), b);
            std::size_t c = h.comp(a, moved);
            Vec va = unit_vec(up.dim[a], 0), vb = unit_vec(up.dim[b], 0);
            Vec prod = up.mul(a, moved, va,
                              ta->apply(static_cast<std::size_t>(found), b, vb));
            Vec down = ta->apply(og.to_rep_x[c], c, prod);
            Vec da = ta->apply(og.to_rep_x[a], a, va);
            Vec db = ta->apply(og.to_rep_x[b], b, vb);
            CHECK(ob.bun->mul(qa, qb, da, db) == down);
        }
}

TEST_CASE("torsor over the pair groupoid") {
    auto sp = instances::m2pair_torsor();
    CHECK(validate_space_action(*sp).empty());
    CHECK(space_action_free(*sp));
    REQUIRE(sp->translate.has_value());

    // Translation orbits biject with the objects through the moment map.
    const auto& tr = *sp->translate;
    for (std::size_t t = 0; t < sp->n_points; ++t) {
        std::ptrdiff_t other = tr.act[1][t];
        REQUIRE(other >= 0);
        CHECK(sp->moment[static_cast<std::size_t>(other)] == sp->moment[t]);
        CHECK(static_cast<std::size_t>(other) != t);
    }

    ActionBundle ab = make_action_bundle(instances::m2pair_bundle(), sp);
    CHECK(validate_bundle(*ab.bun).empty());
    auto ta = translation_action(ab);
    CHECK(validate_bundle_action(*ta).empty());
}

TEST_CASE("semidirect quotient feeds the action bundle") {
    SemidirectBundle sw = semidirect_bundle(instances::c2diag_swap_action());
    auto q = std::make_shared<const SpaceAction>(semidirect_quotient_space(sw.sgpd));
    CHECK(validate_space_action(*q).empty());
    ActionBundle ab = make_action_bundle(sw.bun, q);
    CHECK(validate_bundle(*ab.bun).empty());
    auto ta = translation_action(ab);
    CHECK(validate_bundle_action(*ta).empty());
}
