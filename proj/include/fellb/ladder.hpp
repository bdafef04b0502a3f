#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fellb/equivalence.hpp"

namespace fellb {

// ---------------------------------------------------------------------------
// The finite combinatorial core: four sets joined by three rungs and two
// struts.  If both struts are bijections and both squares commute, the
// middle rung is forced to be a bijection, and with it the outer rungs.
//
//        f        g        h
//    X ----> Y ----> Z ----> W
//    |________________^      ^
//            u        |______|
//                         v
// ---------------------------------------------------------------------------

struct SetLadder {
    std::size_t nx = 0, ny = 0, nz = 0, nw = 0;
    std::vector<std::size_t> f, g, h;   // rungs x -> y -> z -> w
    std::vector<std::size_t> u, v;      // struts x -> z and y -> w
};

inline bool ladder_lemma_check(const SetLadder& l, std::string* why = nullptr) {
    auto fail = [&](const std::string& m) {
        if (why) *why = m;
        return false;
    };
    auto total = [](const std::vector<std::size_t>& m, std::size_t dom,
                    std::size_t cod) {
        if (m.size() != dom) return false;
        for (std::size_t i : m)
            if (i >= cod) return false;
        return true;
    };
    auto bijective = [&total](const std::vector<std::size_t>& m, std::size_t dom,
                              std::size_t cod) {
        if (!total(m, dom, cod) || dom != cod) return false;
        std::vector<bool> hit(cod, false);
        for (std::size_t i : m) {
            if (hit[i]) return false;
            hit[i] = true;
        }
        return true;
    };
    if (!total(l.f, l.nx, l.ny)) return fail("first rung is not a total map");
    if (!total(l.g, l.ny, l.nz)) return fail("middle rung is not a total map");
    if (!total(l.h, l.nz, l.nw)) return fail("last rung is not a total map");
    if (!bijective(l.u, l.nx, l.nz)) return fail("lower strut is not a bijection");
    if (!bijective(l.v, l.ny, l.nw)) return fail("upper strut is not a bijection");
    for (std::size_t i = 0; i < l.nx; ++i)
        if (l.g[l.f[i]] != l.u[i]) return fail("lower square does not commute");
    for (std::size_t j = 0; j < l.ny; ++j)
        if (l.h[l.g[j]] != l.v[j]) return fail("upper square does not commute");
    // Forced conclusions, re-verified mechanically: u = g . f onto makes g
    // onto, v = h . g one-to-one makes g one-to-one; then f and h follow.
    if (!bijective(l.g, l.ny, l.nz)) return fail("middle rung failed to be a bijection");
    if (!bijective(l.f, l.nx, l.ny)) return fail("first rung failed to be a bijection");
    if (!bijective(l.h, l.nz, l.nw)) return fail("last rung failed to be a bijection");
    return true;
}

namespace detail {

inline std::vector<std::size_t> first_parts(
    const std::vector<std::pair<std::size_t, std::size_t>>& parts) {
    std::vector<std::size_t> m;
    for (const auto& p : parts) m.push_back(p.first);
    return m;
}

// Ideal of `to` whose fiber over arrow k is the fiber of `j` over part_of[k].
inline FellBundleIdeal pull_ideal(const FellBundle& to, const FellBundleIdeal& j,
                                  const std::vector<std::size_t>& part_of) {
    FellBundleIdeal r;
    for (std::size_t k = 0; k < to.gpd->n_arrows; ++k) r.at.push_back(j.at[part_of[k]]);
    if (!validate_ideal(to, r).empty())
        throw Error("reindexed ideal candidate fails the ideal laws");
    return r;
}

inline std::size_t index_in(const IdealLattice& lat, const FellBundleIdeal& j,
                            const char* where) {
    std::ptrdiff_t i = lat.index_of(j);
    if (i < 0) throw Error(std::string("transported ideal left the lattice at ") + where);
    return static_cast<std::size_t>(i);
}

// Carry `src` through the correspondence from right to left: restrict it to
// the right bundle along right_part, induce the module, check the induced
// fibers against src at point_part, and return the induced left ideal.
inline FellBundleIdeal transport_right_to_left(
    const EquivalenceBundle& e, const FellBundleIdeal& src,
    const std::vector<std::size_t>& right_part,
    const std::vector<std::size_t>& point_part) {
    FellBundleIdeal rj;
    for (std::size_t r = 0; r < e.right->gpd->n_arrows; ++r)
        rj.at.push_back(src.at[right_part[r]]);
    if (!validate_ideal(*e.right, rj).empty())
        throw Error("restricted ideal fails the ideal laws");
    ModuleFamily m = module_from_right_ideal(e, rj);
    for (std::size_t z = 0; z < e.space->n_points; ++z)
        if (!(m[z] == src.at[point_part[z]]))
            throw Error("induced module does not have the predicted fibers");
    return left_ideal_from_module(e, m);
}

// Carry a left ideal back to the right and spread it out along right_part.
inline FellBundleIdeal transport_left_to_right(
    const EquivalenceBundle& e, const FellBundleIdeal& lft,
    const std::vector<std::size_t>& right_part, std::size_t n_src_arrows) {
    FellBundleIdeal ri = rieffel_left_to_right(e, lft);
    if (right_part.size() != n_src_arrows)
        throw Error("right side does not cover the source bundle");
    std::vector<std::size_t> inv(n_src_arrows, n_src_arrows);
    for (std::size_t r = 0; r < right_part.size(); ++r) {
        if (inv[right_part[r]] != n_src_arrows)
            throw Error("right side covers a source arrow twice");
        inv[right_part[r]] = r;
    }
    FellBundleIdeal out;
    for (std::size_t k = 0; k < n_src_arrows; ++k) out.at.push_back(ri.at[inv[k]]);
    return out;
}

inline void check_mutual_inverse(const std::vector<std::size_t>& a,
                                 const std::vector<std::size_t>& b,
                                 const char* where) {
    if (a.size() != b.size()) throw Error(std::string("strut sides differ at ") + where);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] >= b.size() || b[a[i]] != i)
            throw Error(std::string("strut transport is not invertible at ") + where);
}

inline void require_valid(const EquivalenceBundle& e, const char* where) {
    ValidationReport rep = validate_equivalence_space(*e.space);
    if (rep.empty()) rep = validate_equivalence_bundle(e);
    if (!rep.empty())
        throw Error(std::string("equivalence failed validation at ") + where + ": [" +
                    rep.front().code + "] " + rep.front().message);
}

}  // namespace detail

inline bool lattices_equal(const IdealLattice& a, const IdealLattice& b) {
    if (a.n_blocks != b.n_blocks || a.mask != b.mask ||
        a.ideals.size() != b.ideals.size())
        return false;
    for (std::size_t i = 0; i < a.ideals.size(); ++i)
        if (!ideal_equal(a.ideals[i], b.ideals[i])) return false;
    return true;
}

// The four lattices with their rung and strut index maps, plus labels naming
// each node's lattice and each map's defining construction.
struct LadderCore {
    IdealLattice x, y, z, w;
    SetLadder set;
    std::array<std::string, 4> node_label{};
    std::array<std::string, 5> map_label{};   // f, g, h, u, v
};

// Full certification: the finite lemma plus order preservation of every map.
inline bool certify_ladder(const LadderCore& c, std::string* why = nullptr) {
    std::string local;
    std::string* out = why ? why : &local;
    if (!ladder_lemma_check(c.set, out)) return false;
    struct Row {
        const IdealLattice *a, *b;
        const std::vector<std::size_t>* m;
        const char* name;
    };
    const Row rows[] = {{&c.x, &c.y, &c.set.f, "first rung"},
                        {&c.y, &c.z, &c.set.g, "middle rung"},
                        {&c.z, &c.w, &c.set.h, "last rung"},
                        {&c.x, &c.z, &c.set.u, "lower strut"},
                        {&c.y, &c.w, &c.set.v, "upper strut"}};
    for (const Row& r : rows)
        if (!lattice_isomorphic_via(*r.a, *r.b, *r.m, out)) {
            *out = std::string(r.name) + ": " + *out;
            return false;
        }
    return true;
}

// ---------------------------------------------------------------------------
// Ladder with an invariant lattice at the bottom: starting from an action on
// a bundle, the nodes are
//   X = invariant ideals of the base bundle,
//   Y = ideals of the semidirect product bundle SB,
//   Z = translation-invariant ideals of the product of SB with the orbit
//       space of its embedded copy of the base,
//   W = ideals of the second-level semidirect product bundle.
// The struts are realized by the module correspondences of the semidirect
// equivalence (lower) and the action-semidirect equivalence (upper).
// ---------------------------------------------------------------------------

struct LeftLadder {
    std::shared_ptr<const BundleIsoAction> action;
    SemidirectEquivalence equ;                    // base bundle ~ product bundle
    std::shared_ptr<const BundleIsoAction> tau;   // translation on the product
    SemidirectBundle sd2;                         // second-level semidirect
    ActionSemidirectEquivalence eqv;              // SB ~ second level
    LadderCore core;
};

inline LeftLadder build_left_ladder(std::shared_ptr<const BundleIsoAction> a) {
    LeftLadder l;
    l.action = a;
    l.equ = semidirect_equivalence(a);
    detail::require_valid(l.equ.core.eq, "the lower strut");
    l.tau = translation_action(l.equ.core.left);
    l.sd2 = semidirect_bundle(l.tau);
    l.eqv = action_semidirect_equivalence(l.equ.sd.bun, l.equ.core.space.quotient);
    if (!same_presentation(*l.equ.core.left.bun, *l.eqv.ab.bun) ||
        !same_presentation(*l.sd2.bun, *l.eqv.sd.bun))
        throw Error("second-level bundles do not line up");
    detail::require_valid(l.eqv.eq, "the upper strut");

    LadderCore& c = l.core;
    c.x = enumerate_invariant_ideals(*a);
    c.y = enumerate_ideals(l.equ.sd.bun);
    c.z = enumerate_invariant_ideals(*l.tau);
    c.w = enumerate_ideals(l.sd2.bun);
    c.node_label = {"invariant ideals of the base bundle",
                    "ideals of the semidirect product",
                    "invariant ideals of the action product",
                    "ideals of the second semidirect product"};
    c.map_label = {"semidirect twist", "action-product lift", "semidirect twist",
                   "Rieffel correspondence", "Rieffel correspondence"};
    SetLadder& s = c.set;
    s.nx = c.x.size();
    s.ny = c.y.size();
    s.nz = c.z.size();
    s.nw = c.w.size();

    std::vector<std::size_t> sd_part = detail::first_parts(l.equ.sd.sgpd.parts);
    std::vector<std::size_t> ab_part = detail::first_parts(l.equ.core.left.agpd.parts);
    std::vector<std::size_t> sd2_part = detail::first_parts(l.sd2.sgpd.parts);

    for (const FellBundleIdeal& j : c.x.ideals)
        s.f.push_back(detail::index_in(
            c.y, detail::pull_ideal(*l.equ.sd.bun, j, sd_part), "the first rung"));
    for (const FellBundleIdeal& j : c.y.ideals) {
        FellBundleIdeal t = detail::pull_ideal(*l.equ.core.left.bun, j, ab_part);
        if (!is_action_invariant(*l.tau, t))
            throw Error("lifted ideal is not translation invariant");
        s.g.push_back(detail::index_in(c.z, t, "the middle rung"));
    }
    for (const FellBundleIdeal& j : c.z.ideals)
        s.h.push_back(detail::index_in(
            c.w, detail::pull_ideal(*l.sd2.bun, j, sd2_part), "the last rung"));

    // Lower strut through the base-recovery equivalence: restrict along the
    // right identification, induce, and land in the invariant lattice.
    std::vector<std::size_t> uinv;
    for (const FellBundleIdeal& j : c.x.ideals)
        s.u.push_back(detail::index_in(
            c.z,
            detail::transport_right_to_left(l.equ.core.eq, j, l.equ.right_to_base,
                                            sd_part),
            "the lower strut"));
    for (const FellBundleIdeal& j : c.z.ideals)
        uinv.push_back(detail::index_in(
            c.x,
            detail::transport_left_to_right(l.equ.core.eq, j, l.equ.right_to_base,
                                            a->bun->gpd->n_arrows),
            "the lower strut return"));
    detail::check_mutual_inverse(s.u, uinv, "the lower strut");

    // Upper strut straight through the action-semidirect equivalence.
    std::vector<std::size_t> identity_y(l.equ.sd.bun->gpd->n_arrows);
    for (std::size_t k = 0; k < identity_y.size(); ++k) identity_y[k] = k;
    std::vector<std::size_t> eqv_part = detail::first_parts(l.eqv.ab.agpd.parts);
    std::vector<std::size_t> vinv;
    for (const FellBundleIdeal& j : c.y.ideals)
        s.v.push_back(detail::index_in(
            c.w,
            detail::transport_right_to_left(l.eqv.eq, j, identity_y, eqv_part),
            "the upper strut"));
    for (const FellBundleIdeal& j : c.w.ideals)
        vinv.push_back(detail::index_in(
            c.y,
            detail::transport_left_to_right(l.eqv.eq, j, identity_y,
                                            identity_y.size()),
            "the upper strut return"));
    detail::check_mutual_inverse(s.v, vinv, "the upper strut");
    return l;
}

// ---------------------------------------------------------------------------
// Ladder with the plain lattice at the bottom: starting from a bundle, the
// nodes are
//   X = ideals of the base bundle,
//   Y = translation-invariant ideals of its product with the arrow space,
//   Z = ideals of the semidirect product bundle SB1 of that translation,
//   W = translation-invariant ideals of the product of SB1 with the orbit
//       space of its embedded copy.
// The struts are realized by the arrow-space equivalence (lower) and the
// semidirect equivalence of the translation action (upper).
// ---------------------------------------------------------------------------

struct RightLadder {
    std::shared_ptr<const FellBundle> base;
    ActionSemidirectEquivalence equ;              // base ~ SB1 via the arrow space
    SemidirectEquivalence eqv;                    // AB1 ~ second-level product
    std::shared_ptr<const BundleIsoAction> tau2;  // translation on that product
    LadderCore core;
};

inline RightLadder build_right_ladder(std::shared_ptr<const FellBundle> base) {
    RightLadder r;
    r.base = std::move(base);
    r.equ = arrow_space_equivalence(r.base);
    detail::require_valid(r.equ.eq, "the lower strut");
    r.eqv = semidirect_equivalence(r.equ.translation);
    if (!same_presentation(*r.eqv.sd.bun, *r.equ.sd.bun))
        throw Error("second-level semidirect bundles do not line up");
    detail::require_valid(r.eqv.core.eq, "the upper strut");
    r.tau2 = translation_action(r.eqv.core.left);

    LadderCore& c = r.core;
    c.x = enumerate_ideals(r.base);
    c.y = enumerate_invariant_ideals(*r.equ.translation);
    c.z = enumerate_ideals(r.equ.sd.bun);
    c.w = enumerate_invariant_ideals(*r.tau2);
    c.node_label = {"ideals of the base bundle",
                    "invariant ideals of the action product",
                    "ideals of the semidirect product",
                    "invariant ideals of the second action product"};
    c.map_label = {"action-product lift", "semidirect twist", "action-product lift",
                   "Rieffel correspondence", "Rieffel correspondence"};
    SetLadder& s = c.set;
    s.nx = c.x.size();
    s.ny = c.y.size();
    s.nz = c.z.size();
    s.nw = c.w.size();

    std::vector<std::size_t> ab1_part = detail::first_parts(r.equ.ab.agpd.parts);
    std::vector<std::size_t> sd1_part = detail::first_parts(r.equ.sd.sgpd.parts);
    std::vector<std::size_t> ab2_part = detail::first_parts(r.eqv.core.left.agpd.parts);

    for (const FellBundleIdeal& j : c.x.ideals) {
        FellBundleIdeal t = detail::pull_ideal(*r.equ.ab.bun, j, ab1_part);
        if (!is_action_invariant(*r.equ.translation, t))
            throw Error("lifted ideal is not translation invariant");
        s.f.push_back(detail::index_in(c.y, t, "the first rung"));
    }
    for (const FellBundleIdeal& j : c.y.ideals)
        s.g.push_back(detail::index_in(
            c.z, detail::pull_ideal(*r.equ.sd.bun, j, sd1_part), "the middle rung"));
    for (const FellBundleIdeal& j : c.z.ideals) {
        FellBundleIdeal t = detail::pull_ideal(*r.eqv.core.left.bun, j, ab2_part);
        if (!is_action_invariant(*r.tau2, t))
            throw Error("lifted ideal is not translation invariant");
        s.h.push_back(detail::index_in(c.w, t, "the last rung"));
    }

    // Lower strut straight through the arrow-space equivalence.
    std::vector<std::size_t> identity_x(r.base->gpd->n_arrows);
    for (std::size_t k = 0; k < identity_x.size(); ++k) identity_x[k] = k;
    std::vector<std::size_t> uinv;
    for (const FellBundleIdeal& j : c.x.ideals)
        s.u.push_back(detail::index_in(
            c.z, detail::transport_right_to_left(r.equ.eq, j, identity_x, ab1_part),
            "the lower strut"));
    for (const FellBundleIdeal& j : c.z.ideals)
        uinv.push_back(detail::index_in(
            c.x,
            detail::transport_left_to_right(r.equ.eq, j, identity_x,
                                            identity_x.size()),
            "the lower strut return"));
    detail::check_mutual_inverse(s.u, uinv, "the lower strut");

    // Upper strut through the second-level base-recovery equivalence.
    std::vector<std::size_t> vinv;
    for (const FellBundleIdeal& j : c.y.ideals)
        s.v.push_back(detail::index_in(
            c.w,
            detail::transport_right_to_left(r.eqv.core.eq, j, r.eqv.right_to_base,
                                            sd1_part),
            "the upper strut"));
    for (const FellBundleIdeal& j : c.w.ideals)
        vinv.push_back(detail::index_in(
            c.y,
            detail::transport_left_to_right(r.eqv.core.eq, j, r.eqv.right_to_base,
                                            r.equ.ab.bun->gpd->n_arrows),
            "the upper strut return"));
    detail::check_mutual_inverse(s.v, vinv, "the upper strut");
    return r;
}

// ---------------------------------------------------------------------------
// Upward extension: running the construction one level higher must reproduce
// the upper half of the ladder below as the lower half of the new one.
// ---------------------------------------------------------------------------

inline LeftLadder extend_left_ladder(const LeftLadder& l) {
    LeftLadder up = build_left_ladder(l.tau);
    if (!same_presentation(*l.sd2.bun, *up.equ.sd.bun))
        throw Error("extension bundle does not match the level below");
    if (!lattices_equal(l.core.z, up.core.x) || !lattices_equal(l.core.w, up.core.y))
        throw Error("extension lattices do not match the level below");
    if (l.core.set.h != up.core.set.f)
        throw Error("extension rung does not match the level below");
    return up;
}

inline LeftLadder extend_right_ladder(const RightLadder& r) {
    LeftLadder up = build_left_ladder(r.equ.translation);
    if (!same_presentation(*r.equ.sd.bun, *up.equ.sd.bun))
        throw Error("extension bundle does not match the level below");
    if (!lattices_equal(r.core.y, up.core.x) || !lattices_equal(r.core.z, up.core.y) ||
        !lattices_equal(r.core.w, up.core.z))
        throw Error("extension lattices do not match the level below");
    if (r.core.set.g != up.core.set.f || r.core.set.h != up.core.set.g)
        throw Error("extension rungs do not match the level below");
    return up;
}

}  // namespace fellb
