#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fellb/bundle.hpp"
#include "fellb/ideal.hpp"

namespace fellb {

// ---------------------------------------------------------------------------
// An imprimitivity bimodule between two Fell bundles, carried by a groupoid
// equivalence: a fiber over every point of the linking space, commuting
// actions of both bundles, and inner products valued in each bundle over the
// pairing arrows.  lip is linear in its first slot and conjugate-linear in
// the second; rip the other way around.  Matrices act on tensor coordinates
// with the conjugation already applied to the relevant slot.
// ---------------------------------------------------------------------------

struct EquivalenceBundle {
    std::shared_ptr<const GroupoidEquivalence> space;
    std::shared_ptr<const FellBundle> left, right;
    std::vector<std::size_t> dim;            // fiber dimension per point
    std::vector<std::vector<Matrix>> lac;    // [g][z]: A_g (x) E_z -> E_{g.z}
    std::vector<std::vector<Matrix>> rac;    // [z][h]: E_z (x) B_h -> E_{z.h}
    std::vector<std::vector<Matrix>> lip;    // [z][w]: E_z (x) conj E_w -> A over lpair
    std::vector<std::vector<Matrix>> rip;    // [z][w]: conj E_z (x) E_w -> B over rpair

    Vec lmul(std::size_t g, std::size_t z, const Vec& a, const Vec& e) const {
        return lac[g][z].apply(tensor_pair(a, e));
    }
    Vec rmul(std::size_t z, std::size_t h, const Vec& e, const Vec& b) const {
        return rac[z][h].apply(tensor_pair(e, b));
    }
    Vec lprod(std::size_t z, std::size_t w, const Vec& e, const Vec& f) const {
        return lip[z][w].apply(tensor_pair(e, conj_vec(f)));
    }
    Vec rprod(std::size_t z, std::size_t w, const Vec& e, const Vec& f) const {
        return rip[z][w].apply(tensor_pair(conj_vec(e), f));
    }
};

inline ValidationReport validate_equivalence_bundle(const EquivalenceBundle& eb) {
    ValidationReport rep;
    const GroupoidEquivalence& s = *eb.space;
    const FellBundle& a = *eb.left;
    const FellBundle& b = *eb.right;
    const FiniteGroupoid& ga = *a.gpd;
    const FiniteGroupoid& gb = *b.gpd;
    std::size_t n = s.n_points;

    auto tables_match = [](const FiniteGroupoid& x, const FiniteGroupoid& y) {
        return x.n_arrows == y.n_arrows && x.n_objects == y.n_objects &&
               x.src == y.src && x.rng == y.rng && x.inv == y.inv &&
               x.comp_table == y.comp_table;
    };
    if (!tables_match(ga, *s.left) || !tables_match(gb, *s.right)) {
        rep.push_back(
            {"eqbundle/shape", "bundle bases do not match the linking space"});
        return rep;
    }
    if (eb.dim.size() != n || eb.lac.size() != ga.n_arrows || eb.rac.size() != n ||
        eb.lip.size() != n || eb.rip.size() != n) {
        rep.push_back({"eqbundle/shape", "tables have wrong size"});
        return rep;
    }
    auto defined = [](const Matrix& m, std::size_t rows, std::size_t cols,
                      bool want) {
        if (!want) return m.rows() == 0 && m.cols() == 0;
        return m.rows() == rows && m.cols() == cols;
    };
    for (std::size_t g = 0; g < ga.n_arrows; ++g) {
        if (eb.lac[g].size() != n) {
            rep.push_back({"eqbundle/shape", "tables have wrong size"});
            return rep;
        }
        for (std::size_t z = 0; z < n; ++z)
            if (!defined(eb.lac[g][z],
                         s.lact[g][z] < 0
                             ? 0
                             : eb.dim[static_cast<std::size_t>(s.lact[g][z])],
                         a.dim[g] * eb.dim[z], s.lact[g][z] >= 0)) {
                rep.push_back({"eqbundle/shape",
                               "left action matrix shape at " + ga.arrow_label[g] +
                                   " on " + s.point_label[z]});
                return rep;
            }
    }
    for (std::size_t z = 0; z < n; ++z) {
        if (eb.rac[z].size() != gb.n_arrows || eb.lip[z].size() != n ||
            eb.rip[z].size() != n) {
            rep.push_back({"eqbundle/shape", "tables have wrong size"});
            return rep;
        }
        for (std::size_t h = 0; h < gb.n_arrows; ++h)
            if (!defined(eb.rac[z][h],
                         s.ract[z][h] < 0
                             ? 0
                             : eb.dim[static_cast<std::size_t>(s.ract[z][h])],
                         eb.dim[z] * b.dim[h], s.ract[z][h] >= 0)) {
                rep.push_back({"eqbundle/shape",
                               "right action matrix shape at " + s.point_label[z] +
                                   " by " + gb.arrow_label[h]});
                return rep;
            }
        for (std::size_t w = 0; w < n; ++w) {
            if (!defined(eb.lip[z][w],
                         s.lpair[z][w] < 0
                             ? 0
                             : a.dim[static_cast<std::size_t>(s.lpair[z][w])],
                         eb.dim[z] * eb.dim[w], s.lpair[z][w] >= 0) ||
                !defined(eb.rip[z][w],
                         s.rpair[z][w] < 0
                             ? 0
                             : b.dim[static_cast<std::size_t>(s.rpair[z][w])],
                         eb.dim[z] * eb.dim[w], s.rpair[z][w] >= 0)) {
                rep.push_back({"eqbundle/shape",
                               "inner product matrix shape at " + s.point_label[z] +
                                   ", " + s.point_label[w]});
                return rep;
            }
        }
    }

    // Left action: associativity and the unit law.
    for (std::size_t g1 = 0; g1 < ga.n_arrows; ++g1)
        for (std::size_t g2 = 0; g2 < ga.n_arrows; ++g2) {
            if (!ga.composable(g1, g2)) continue;
            std::size_t g12 = ga.comp(g1, g2);
            for (std::size_t z = 0; z < n; ++z) {
                if (s.lact[g2][z] < 0) continue;
                auto g2z = static_cast<std::size_t>(s.lact[g2][z]);
                Matrix lhs =
                    eb.lac[g12][z] * kron(a.mult_at(g1, g2), Matrix::identity(eb.dim[z]));
                Matrix rhs = eb.lac[g1][g2z] *
                             kron(Matrix::identity(a.dim[g1]), eb.lac[g2][z]);
                if (!(lhs == rhs))
                    rep.push_back({"eqbundle/leftaction",
                                   "composition law fails at " + ga.arrow_label[g1] +
                                       " . " + ga.arrow_label[g2] + " on " +
                                       s.point_label[z]});
            }
        }
    std::vector<std::optional<Vec>> aunit(ga.n_objects), bunit(gb.n_objects);
    for (std::size_t u = 0; u < ga.n_objects; ++u)
        aunit[u] = algebra_unit(a.unit_algebra(u));
    for (std::size_t u = 0; u < gb.n_objects; ++u)
        bunit[u] = algebra_unit(b.unit_algebra(u));
    for (std::size_t z = 0; z < n; ++z) {
        std::size_t u = s.lmoment[z], e = ga.unit_arrow[u];
        if (!aunit[u]) {
            rep.push_back({"eqbundle/leftaction", "left unit fiber has no unit"});
            continue;
        }
        bool ok = true;
        for (std::size_t j = 0; j < eb.dim[z]; ++j)
            if (eb.lmul(e, z, *aunit[u], unit_vec(eb.dim[z], j)) !=
                unit_vec(eb.dim[z], j))
                ok = false;
        if (!ok)
            rep.push_back({"eqbundle/leftaction",
                           "unit does not act as the identity on " + s.point_label[z]});
    }

    // Right action: associativity and the unit law.
    for (std::size_t z = 0; z < n; ++z)
        for (std::size_t h1 = 0; h1 < gb.n_arrows; ++h1) {
            if (s.ract[z][h1] < 0) continue;
            auto zh1 = static_cast<std::size_t>(s.ract[z][h1]);
            for (std::size_t h2 = 0; h2 < gb.n_arrows; ++h2) {
                if (!gb.composable(h1, h2)) continue;
                std::size_t h12 = gb.comp(h1, h2);
                Matrix lhs =
                    eb.rac[zh1][h2] * kron(eb.rac[z][h1], Matrix::identity(b.dim[h2]));
                Matrix rhs = eb.rac[z][h12] *
                             kron(Matrix::identity(eb.dim[z]), b.mult_at(h1, h2));
                if (!(lhs == rhs))
                    rep.push_back({"eqbundle/rightaction",
                                   "composition law fails at " + s.point_label[z] +
                                       " by " + gb.arrow_label[h1] + " . " +
                                       gb.arrow_label[h2]});
            }
        }
    for (std::size_t z = 0; z < n; ++z) {
        std::size_t v = s.rmoment[z], e = gb.unit_arrow[v];
        if (!bunit[v]) {
            rep.push_back({"eqbundle/rightaction", "right unit fiber has no unit"});
            continue;
        }
        bool ok = true;
        for (std::size_t j = 0; j < eb.dim[z]; ++j)
            if (eb.rmul(z, e, unit_vec(eb.dim[z], j), *bunit[v]) !=
                unit_vec(eb.dim[z], j))
                ok = false;
        if (!ok)
            rep.push_back({"eqbundle/rightaction",
                           "unit does not act as the identity on " + s.point_label[z]});
    }

    // The two actions commute.
    for (std::size_t g = 0; g < ga.n_arrows; ++g)
        for (std::size_t z = 0; z < n; ++z) {
            if (s.lact[g][z] < 0) continue;
            auto gz = static_cast<std::size_t>(s.lact[g][z]);
            for (std::size_t h = 0; h < gb.n_arrows; ++h) {
                if (s.ract[z][h] < 0) continue;
                auto zh = static_cast<std::size_t>(s.ract[z][h]);
                Matrix lhs = eb.rac[gz][h] * kron(eb.lac[g][z], Matrix::identity(b.dim[h]));
                Matrix rhs = eb.lac[g][zh] * kron(Matrix::identity(a.dim[g]), eb.rac[z][h]);
                if (!(lhs == rhs))
                    rep.push_back({"eqbundle/bimodule",
                                   "actions fail to commute at " + ga.arrow_label[g] +
                                       " . " + s.point_label[z] + " . " +
                                       gb.arrow_label[h]});
            }
        }

    // Left inner product: action linearity and the adjoint law.
    for (std::size_t z = 0; z < n; ++z)
        for (std::size_t w = 0; w < n; ++w) {
            if (s.lpair[z][w] < 0) continue;
            auto zw = static_cast<std::size_t>(s.lpair[z][w]);
            for (std::size_t g = 0; g < ga.n_arrows; ++g) {
                if (s.lact[g][z] < 0) continue;
                auto gz = static_cast<std::size_t>(s.lact[g][z]);
                Matrix lhs =
                    eb.lip[gz][w] * kron(eb.lac[g][z], Matrix::identity(eb.dim[w]));
                Matrix rhs =
                    a.mult_at(g, zw) * kron(Matrix::identity(a.dim[g]), eb.lip[z][w]);
                if (!(lhs == rhs))
                    rep.push_back({"eqbundle/ipleft",
                                   "action linearity fails at " + ga.arrow_label[g] +
                                       " . " + s.point_label[z] + ", " +
                                       s.point_label[w]});
            }
            Matrix adj_l = a.invol[zw] * eb.lip[z][w].conj();
            Matrix adj_r = eb.lip[w][z] * tensor_swap(eb.dim[z], eb.dim[w]);
            if (!(adj_l == adj_r))
                rep.push_back({"eqbundle/ipleft",
                               "adjoint law fails at " + s.point_label[z] + ", " +
                                   s.point_label[w]});
        }

    // Right inner product: action linearity and the adjoint law.
    for (std::size_t z = 0; z < n; ++z)
        for (std::size_t w = 0; w < n; ++w) {
            if (s.rpair[z][w] < 0) continue;
            auto zw = static_cast<std::size_t>(s.rpair[z][w]);
            for (std::size_t h = 0; h < gb.n_arrows; ++h) {
                if (s.ract[w][h] < 0) continue;
                auto wh = static_cast<std::size_t>(s.ract[w][h]);
                Matrix lhs =
                    eb.rip[z][wh] * kron(Matrix::identity(eb.dim[z]), eb.rac[w][h]);
                Matrix rhs =
                    b.mult_at(zw, h) * kron(eb.rip[z][w], Matrix::identity(b.dim[h]));
                if (!(lhs == rhs))
                    rep.push_back({"eqbundle/ipright",
                                   "action linearity fails at " + s.point_label[z] +
                                       ", " + s.point_label[w] + " . " +
                                       gb.arrow_label[h]});
            }
            Matrix adj_l = b.invol[zw] * eb.rip[z][w].conj();
            Matrix adj_r = eb.rip[w][z] * tensor_swap(eb.dim[z], eb.dim[w]);
            if (!(adj_l == adj_r))
                rep.push_back({"eqbundle/ipright",
                               "adjoint law fails at " + s.point_label[z] + ", " +
                                   s.point_label[w]});
        }

    // The two inner products are linked: <e,f>_A . f' = e . <f,f'>_B.
    for (std::size_t z = 0; z < n; ++z)
        for (std::size_t w = 0; w < n; ++w) {
            if (s.lpair[z][w] < 0) continue;
            auto zw = static_cast<std::size_t>(s.lpair[z][w]);
            for (std::size_t w2 = 0; w2 < n; ++w2) {
                if (s.rpair[w][w2] < 0) continue;
                auto ww2 = static_cast<std::size_t>(s.rpair[w][w2]);
                Matrix lhs =
                    eb.lac[zw][w2] * kron(eb.lip[z][w], Matrix::identity(eb.dim[w2]));
                Matrix rhs =
                    eb.rac[z][ww2] * kron(Matrix::identity(eb.dim[z]), eb.rip[w][w2]);
                if (!(lhs == rhs))
                    rep.push_back({"eqbundle/imprimitivity",
                                   "inner products fail to link at " +
                                       s.point_label[z] + ", " + s.point_label[w] +
                                       ", " + s.point_label[w2]});
            }
        }

    // Fullness: each bundle fiber is spanned by inner products.
    for (std::size_t g = 0; g < ga.n_arrows; ++g) {
        std::vector<Vec> vals;
        for (std::size_t z = 0; z < n; ++z)
            for (std::size_t w = 0; w < n; ++w) {
                if (s.lpair[z][w] != static_cast<std::ptrdiff_t>(g)) continue;
                const Matrix& m = eb.lip[z][w];
                for (std::size_t c = 0; c < m.cols(); ++c) {
                    Vec col(m.rows());
                    for (std::size_t r = 0; r < m.rows(); ++r) col[r] = m.at(r, c);
                    vals.push_back(std::move(col));
                }
            }
        if (!Subspace::span(a.dim[g], vals).is_full())
            rep.push_back({"eqbundle/fullness",
                           "left inner products do not span the fiber over " +
                               ga.arrow_label[g]});
    }
    for (std::size_t h = 0; h < gb.n_arrows; ++h) {
        std::vector<Vec> vals;
        for (std::size_t z = 0; z < n; ++z)
            for (std::size_t w = 0; w < n; ++w) {
                if (s.rpair[z][w] != static_cast<std::ptrdiff_t>(h)) continue;
                const Matrix& m = eb.rip[z][w];
                for (std::size_t c = 0; c < m.cols(); ++c) {
                    Vec col(m.rows());
                    for (std::size_t r = 0; r < m.rows(); ++r) col[r] = m.at(r, c);
                    vals.push_back(std::move(col));
                }
            }
        if (!Subspace::span(b.dim[h], vals).is_full())
            rep.push_back({"eqbundle/fullness",
                           "right inner products do not span the fiber over " +
                               gb.arrow_label[h]});
    }

    // Positivity of both fiberwise Gram matrices.
    for (std::size_t z = 0; z < n; ++z) {
        std::size_t d = eb.dim[z];
        StarAlgebra la = a.unit_algebra(s.lmoment[z]);
        std::vector<std::vector<Vec>> xa(d, std::vector<Vec>(d));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                xa[i][j] = eb.lprod(z, z, unit_vec(d, j), unit_vec(d, i));
        if (positive_matrix_status(la, trace_form(la), xa) != PsdStatus::Yes)
            rep.push_back({"eqbundle/positivity",
                           "left Gram matrix at " + s.point_label[z] +
                               " is not positive"});
        StarAlgebra rb = b.unit_algebra(s.rmoment[z]);
        std::vector<std::vector<Vec>> xb(d, std::vector<Vec>(d));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                xb[i][j] = eb.rprod(z, z, unit_vec(d, i), unit_vec(d, j));
        if (positive_matrix_status(rb, trace_form(rb), xb) != PsdStatus::Yes)
            rep.push_back({"eqbundle/positivity",
                           "right Gram matrix at " + s.point_label[z] +
                               " is not positive"});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Construction: a bundle over M against its restriction to a wide
// subgroupoid, linked by the arrow space of M.  The left side is the action
// product of the bundle with the orbit space M/H.
// ---------------------------------------------------------------------------

struct SubgroupoidEquivalenceBundle {
    SubgroupoidEquivalence space;
    ActionBundle left;
    std::shared_ptr<const FellBundle> right;
    EquivalenceBundle eq;
};

inline SubgroupoidEquivalenceBundle subgroupoid_equivalence_bundle(
    std::shared_ptr<const FellBundle> b, Subgroupoid sub,
    std::optional<SpaceAction> prebuilt_quotient = std::nullopt) {
    const FiniteGroupoid& m = *b->gpd;
    SubgroupoidEquivalenceBundle out;
    out.space = canonical_subgroupoid_equivalence(b->gpd, std::move(sub),
                                                  std::move(prebuilt_quotient));
    out.left = make_action_bundle(b, out.space.quotient);
    out.right = std::make_shared<const FellBundle>(
        restrict_bundle(*b, out.space.right));

    EquivalenceBundle& e = out.eq;
    e.space = std::make_shared<const GroupoidEquivalence>(out.space.eq);
    e.left = out.left.bun;
    e.right = out.right;
    e.dim = b->dim;
    const GroupoidEquivalence& s = *e.space;
    const FiniteGroupoid& lg = *s.left;
    const FiniteGroupoid& rg = *s.right;
    e.lac.assign(lg.n_arrows, std::vector<Matrix>(m.n_arrows));
    for (std::size_t g = 0; g < lg.n_arrows; ++g) {
        std::size_t k = out.space.left.parts[g].first;
        for (std::size_t z = 0; z < m.n_arrows; ++z)
            if (s.lact[g][z] >= 0) e.lac[g][z] = b->mult_at(k, z);
    }
    e.rac.assign(m.n_arrows, std::vector<Matrix>(rg.n_arrows));
    for (std::size_t z = 0; z < m.n_arrows; ++z)
        for (std::size_t h = 0; h < rg.n_arrows; ++h)
            if (s.ract[z][h] >= 0)
                e.rac[z][h] = b->mult_at(z, out.space.right.arrows[h]);
    e.lip.assign(m.n_arrows, std::vector<Matrix>(m.n_arrows));
    e.rip.assign(m.n_arrows, std::vector<Matrix>(m.n_arrows));
    for (std::size_t z = 0; z < m.n_arrows; ++z)
        for (std::size_t w = 0; w < m.n_arrows; ++w) {
            if (s.lpair[z][w] >= 0)
                e.lip[z][w] = b->mult_at(z, m.inv[w]) *
                              kron(Matrix::identity(b->dim[z]), b->invol[w]);
            if (s.rpair[z][w] >= 0)
                e.rip[z][w] = b->mult_at(m.inv[z], w) *
                              kron(b->invol[z], Matrix::identity(b->dim[w]));
        }
    return out;
}

// ---------------------------------------------------------------------------
// Construction: a semidirect product bundle against the bundle it was built
// from, realized through the embedded copy of the base groupoid and the
// orbit space of its right translations (which carries the commuting
// translation structure used one level up).
// ---------------------------------------------------------------------------

struct SemidirectEquivalence {
    SemidirectBundle sd;
    SubgroupoidEquivalenceBundle core;
    std::vector<std::size_t> right_to_base;   // right arrow -> base arrow
};

inline SemidirectEquivalence semidirect_equivalence(
    std::shared_ptr<const BundleIsoAction> a) {
    SemidirectEquivalence out;
    out.sd = semidirect_bundle(a);
    std::shared_ptr<const FiniteGroupoid> sg = out.sd.sgpd.gpd;
    std::vector<std::size_t> emb(out.sd.sgpd.embed.begin(), out.sd.sgpd.embed.end());
    SpaceAction t1 = semidirect_quotient_space(out.sd.sgpd);
    out.core = subgroupoid_equivalence_bundle(out.sd.bun, make_subgroupoid(sg, emb),
                                              std::move(t1));
    out.right_to_base.resize(out.core.space.right.arrows.size());
    for (std::size_t r = 0; r < out.right_to_base.size(); ++r)
        out.right_to_base[r] =
            out.sd.sgpd.parts[out.core.space.right.arrows[r]].first;
    if (!bundles_isomorphic_via(*out.core.right, *a->bun, out.right_to_base))
        throw Error("embedded restriction does not match the base bundle");
    return out;
}

// ---------------------------------------------------------------------------
// Construction: for a bundle action free on objects, the semidirect product
// bundle against the orbit bundle, linked by the arrow space of the base.
// ---------------------------------------------------------------------------

struct PrincipalEquivalence {
    SemidirectBundle sd;
    OrbitBundle orbit;
    EquivalenceBundle eq;
};

inline PrincipalEquivalence principal_equivalence(
    std::shared_ptr<const BundleIsoAction> a) {
    PrincipalEquivalence out;
    out.sd = semidirect_bundle(a);
    out.orbit = orbit_bundle(a);
    const FellBundle& b = *a->bun;
    const IsoAction& act = *a->act;
    const FiniteGroupoid& h = *act.h;
    const FiniteGroupoid& g = *act.g;
    const FiniteGroupoid& sg = *out.sd.sgpd.gpd;
    const OrbitGroupoid& og = out.orbit.ogpd;
    const FiniteGroupoid& rg = *og.gpd;

    GroupoidEquivalence s;
    s.left = out.sd.sgpd.gpd;
    s.right = og.gpd;
    s.n_points = h.n_arrows;
    s.point_label = h.arrow_label;
    s.lmoment.resize(h.n_arrows);
    s.rmoment.resize(h.n_arrows);
    for (std::size_t z = 0; z < h.n_arrows; ++z) {
        s.lmoment[z] = h.rng[z];
        s.rmoment[z] = og.orbit_of_object[h.src[z]];
    }
    s.lact.assign(sg.n_arrows, std::vector<std::ptrdiff_t>(h.n_arrows, -1));
    for (std::size_t a2 = 0; a2 < sg.n_arrows; ++a2) {
        auto [hh, x] = out.sd.sgpd.parts[a2];
        for (std::size_t z = 0; z < h.n_arrows; ++z) {
            if (act.sigma[x][z] < 0) continue;
            auto sz = static_cast<std::size_t>(act.sigma[x][z]);
            std::ptrdiff_t c = h.comp_raw(hh, sz);
            if (c >= 0) s.lact[a2][z] = c;
        }
    }
    // Aligned member of each arrow orbit, unique by object freeness.
    s.ract.assign(h.n_arrows, std::vector<std::ptrdiff_t>(rg.n_arrows, -1));
    std::vector<std::vector<std::ptrdiff_t>> aligned(
        h.n_arrows, std::vector<std::ptrdiff_t>(rg.n_arrows, -1));
    for (std::size_t z = 0; z < h.n_arrows; ++z)
        for (std::size_t w = 0; w < rg.n_arrows; ++w) {
            for (std::size_t c = 0; c < h.n_arrows; ++c) {
                if (og.orbit_of_arrow[c] != w || h.rng[c] != h.src[z]) continue;
                if (aligned[z][w] >= 0)
                    throw Error("orbit alignment is not unique");
                aligned[z][w] = static_cast<std::ptrdiff_t>(c);
            }
            if (aligned[z][w] >= 0)
                s.ract[z][w] =
                    h.comp_raw(z, static_cast<std::size_t>(aligned[z][w]));
        }
    equivalence_compute_pairings(s);

    EquivalenceBundle& e = out.eq;
    e.space = std::make_shared<const GroupoidEquivalence>(std::move(s));
    const GroupoidEquivalence& se = *e.space;
    e.left = out.sd.bun;
    e.right = out.orbit.bun;
    e.dim = b.dim;
    e.lac.assign(sg.n_arrows, std::vector<Matrix>(h.n_arrows));
    for (std::size_t a2 = 0; a2 < sg.n_arrows; ++a2) {
        auto [hh, x] = out.sd.sgpd.parts[a2];
        for (std::size_t z = 0; z < h.n_arrows; ++z) {
            if (se.lact[a2][z] < 0) continue;
            auto sz = static_cast<std::size_t>(act.sigma[x][z]);
            e.lac[a2][z] = b.mult_at(hh, sz) *
                           kron(Matrix::identity(b.dim[hh]), a->alpha[x][z]);
        }
    }
    e.rac.assign(h.n_arrows, std::vector<Matrix>(rg.n_arrows));
    for (std::size_t z = 0; z < h.n_arrows; ++z)
        for (std::size_t w = 0; w < rg.n_arrows; ++w) {
            if (se.ract[z][w] < 0) continue;
            auto c = static_cast<std::size_t>(aligned[z][w]);
            e.rac[z][w] =
                b.mult_at(z, c) *
                kron(Matrix::identity(b.dim[z]),
                     a->alpha[g.inv[og.to_rep_x[c]]][og.rep_arrow[w]]);
        }
    e.lip.assign(h.n_arrows, std::vector<Matrix>(h.n_arrows));
    e.rip.assign(h.n_arrows, std::vector<Matrix>(h.n_arrows));
    for (std::size_t z = 0; z < h.n_arrows; ++z)
        for (std::size_t w = 0; w < h.n_arrows; ++w) {
            if (se.lpair[z][w] >= 0) {
                auto [hh, x] = out.sd.sgpd.parts[
                    static_cast<std::size_t>(se.lpair[z][w])];
                auto sw = static_cast<std::size_t>(act.sigma[x][w]);
                e.lip[z][w] = b.mult_at(z, h.inv[sw]) *
                              kron(Matrix::identity(b.dim[z]),
                                   b.invol[sw] * a->alpha[x][w].conj());
            }
            if (se.rpair[z][w] >= 0) {
                std::size_t c = h.comp(h.inv[z], w);
                e.rip[z][w] = a->alpha[og.to_rep_x[c]][c] *
                              (b.mult_at(h.inv[z], w) *
                               kron(b.invol[z], Matrix::identity(b.dim[w])));
            }
        }
    return out;
}

// ---------------------------------------------------------------------------
// Construction: the semidirect product (by the translation structure) of an
// action product bundle against the base bundle itself, linked by the arrow
// space of the action groupoid.
// ---------------------------------------------------------------------------

struct ActionSemidirectEquivalence {
    ActionBundle ab;
    std::shared_ptr<const BundleIsoAction> translation;
    SemidirectBundle sd;
    std::shared_ptr<const FellBundle> right;
    EquivalenceBundle eq;
};

inline ActionSemidirectEquivalence action_semidirect_equivalence(
    std::shared_ptr<const FellBundle> base, std::shared_ptr<const SpaceAction> space) {
    ActionSemidirectEquivalence out;
    out.ab = make_action_bundle(base, space);
    out.translation = translation_action(out.ab);
    out.sd = semidirect_bundle(out.translation);
    out.right = base;
    const FiniteGroupoid& kg = *base->gpd;
    const FiniteGroupoid& ag = *out.ab.agpd.gpd;
    const FiniteGroupoid& sg = *out.sd.sgpd.gpd;
    const SpaceAction& sp = *space;

    GroupoidEquivalence s;
    s.left = out.sd.sgpd.gpd;
    s.right = base->gpd;
    s.n_points = ag.n_arrows;
    s.point_label = ag.arrow_label;
    s.lmoment.resize(ag.n_arrows);
    s.rmoment.resize(ag.n_arrows);
    for (std::size_t z = 0; z < ag.n_arrows; ++z) {
        s.lmoment[z] = ag.rng[z];
        s.rmoment[z] = kg.src[out.ab.agpd.parts[z].first];
    }
    const IsoAction& tr = *out.translation->act;
    s.lact.assign(sg.n_arrows, std::vector<std::ptrdiff_t>(ag.n_arrows, -1));
    for (std::size_t a2 = 0; a2 < sg.n_arrows; ++a2) {
        auto [hh, x] = out.sd.sgpd.parts[a2];
        for (std::size_t z = 0; z < ag.n_arrows; ++z) {
            if (tr.sigma[x][z] < 0) continue;
            auto tz = static_cast<std::size_t>(tr.sigma[x][z]);
            std::ptrdiff_t c = ag.comp_raw(hh, tz);
            if (c >= 0) s.lact[a2][z] = c;
        }
    }
    s.ract.assign(ag.n_arrows, std::vector<std::ptrdiff_t>(kg.n_arrows, -1));
    for (std::size_t z = 0; z < ag.n_arrows; ++z) {
        auto [k, t] = out.ab.agpd.parts[z];
        for (std::size_t h = 0; h < kg.n_arrows; ++h) {
            if (!kg.composable(k, h)) continue;
            std::size_t kh = kg.comp(k, h);
            std::ptrdiff_t t2 = sp.act[kg.inv[h]][t];
            if (t2 < 0) continue;
            s.ract[z][h] = out.ab.agpd.index[kh][static_cast<std::size_t>(t2)];
        }
    }
    equivalence_compute_pairings(s);

    EquivalenceBundle& e = out.eq;
    e.space = std::make_shared<const GroupoidEquivalence>(std::move(s));
    const GroupoidEquivalence& se = *e.space;
    e.left = out.sd.bun;
    e.right = base;
    e.dim.resize(ag.n_arrows);
    for (std::size_t z = 0; z < ag.n_arrows; ++z)
        e.dim[z] = base->dim[out.ab.agpd.parts[z].first];
    e.lac.assign(sg.n_arrows, std::vector<Matrix>(ag.n_arrows));
    for (std::size_t a2 = 0; a2 < sg.n_arrows; ++a2) {
        std::size_t hh = out.sd.sgpd.parts[a2].first;
        std::size_t m = out.ab.agpd.parts[hh].first;
        for (std::size_t z = 0; z < ag.n_arrows; ++z)
            if (se.lact[a2][z] >= 0)
                e.lac[a2][z] = base->mult_at(m, out.ab.agpd.parts[z].first);
    }
    e.rac.assign(ag.n_arrows, std::vector<Matrix>(kg.n_arrows));
    for (std::size_t z = 0; z < ag.n_arrows; ++z) {
        std::size_t k = out.ab.agpd.parts[z].first;
        for (std::size_t h = 0; h < kg.n_arrows; ++h)
            if (se.ract[z][h] >= 0) e.rac[z][h] = base->mult_at(k, h);
    }
    e.lip.assign(ag.n_arrows, std::vector<Matrix>(ag.n_arrows));
    e.rip.assign(ag.n_arrows, std::vector<Matrix>(ag.n_arrows));
    for (std::size_t z = 0; z < ag.n_arrows; ++z)
        for (std::size_t w = 0; w < ag.n_arrows; ++w) {
            std::size_t k = out.ab.agpd.parts[z].first;
            std::size_t k2 = out.ab.agpd.parts[w].first;
            if (se.lpair[z][w] >= 0)
                e.lip[z][w] = base->mult_at(k, kg.inv[k2]) *
                              kron(Matrix::identity(base->dim[k]), base->invol[k2]);
            if (se.rpair[z][w] >= 0)
                e.rip[z][w] = base->mult_at(kg.inv[k], k2) *
                              kron(base->invol[k], Matrix::identity(base->dim[k2]));
        }
    return out;
}

// The translation structure of the arrow space links the semidirect product
// of the arrow-space action bundle back to the base bundle.
inline ActionSemidirectEquivalence arrow_space_equivalence(
    std::shared_ptr<const FellBundle> base) {
    return action_semidirect_equivalence(
        base, std::make_shared<const SpaceAction>(translation_space(base->gpd)));
}

// ---------------------------------------------------------------------------
// Submodules and the ideal correspondence.
// ---------------------------------------------------------------------------

using ModuleFamily = std::vector<Subspace>;

inline ValidationReport validate_submodule(const EquivalenceBundle& e,
                                           const ModuleFamily& m) {
    ValidationReport rep;
    const GroupoidEquivalence& s = *e.space;
    if (m.size() != s.n_points) {
        rep.push_back({"submodule/shape", "one subspace per point required"});
        return rep;
    }
    for (std::size_t z = 0; z < s.n_points; ++z)
        if (m[z].ambient() != e.dim[z]) {
            rep.push_back({"submodule/shape",
                           "subspace at " + s.point_label[z] +
                               " lives in the wrong fiber dimension"});
            return rep;
        }
    for (std::size_t g = 0; g < s.left->n_arrows; ++g)
        for (std::size_t z = 0; z < s.n_points; ++z) {
            if (s.lact[g][z] < 0) continue;
            auto gz = static_cast<std::size_t>(s.lact[g][z]);
            for (std::size_t i = 0; i < e.left->dim[g]; ++i)
                for (std::size_t k = 0; k < m[z].dim(); ++k)
                    if (!m[gz].contains(e.lmul(g, z, unit_vec(e.left->dim[g], i),
                                               m[z].basis_vector(k))))
                        rep.push_back({"submodule/leftaction",
                                       "left action escapes the subspace at " +
                                           s.point_label[gz]});
        }
    for (std::size_t z = 0; z < s.n_points; ++z)
        for (std::size_t h = 0; h < s.right->n_arrows; ++h) {
            if (s.ract[z][h] < 0) continue;
            auto zh = static_cast<std::size_t>(s.ract[z][h]);
            for (std::size_t k = 0; k < m[z].dim(); ++k)
                for (std::size_t i = 0; i < e.right->dim[h]; ++i)
                    if (!m[zh].contains(e.rmul(z, h, m[z].basis_vector(k),
                                               unit_vec(e.right->dim[h], i))))
                        rep.push_back({"submodule/rightaction",
                                       "right action escapes the subspace at " +
                                           s.point_label[zh]});
        }
    return rep;
}

inline ModuleFamily module_from_left_ideal(const EquivalenceBundle& e,
                                           const FellBundleIdeal& j) {
    const GroupoidEquivalence& s = *e.space;
    ModuleFamily m;
    for (std::size_t z = 0; z < s.n_points; ++z) m.emplace_back(e.dim[z]);
    for (std::size_t g = 0; g < s.left->n_arrows; ++g)
        for (std::size_t w = 0; w < s.n_points; ++w) {
            if (s.lact[g][w] < 0) continue;
            auto z = static_cast<std::size_t>(s.lact[g][w]);
            for (std::size_t k = 0; k < j.at[g].dim(); ++k)
                for (std::size_t i = 0; i < e.dim[w]; ++i) {
                    Vec v = e.lmul(g, w, j.at[g].basis_vector(k), unit_vec(e.dim[w], i));
                    m[z] = m[z].sum(Subspace::span(v.size(), {v}));
                }
        }
    return m;
}

inline ModuleFamily module_from_right_ideal(const EquivalenceBundle& e,
                                            const FellBundleIdeal& j) {
    const GroupoidEquivalence& s = *e.space;
    ModuleFamily m;
    for (std::size_t z = 0; z < s.n_points; ++z) m.emplace_back(e.dim[z]);
    for (std::size_t w = 0; w < s.n_points; ++w)
        for (std::size_t h = 0; h < s.right->n_arrows; ++h) {
            if (s.ract[w][h] < 0) continue;
            auto z = static_cast<std::size_t>(s.ract[w][h]);
            for (std::size_t i = 0; i < e.dim[w]; ++i)
                for (std::size_t k = 0; k < j.at[h].dim(); ++k) {
                    Vec v = e.rmul(w, h, unit_vec(e.dim[w], i), j.at[h].basis_vector(k));
                    m[z] = m[z].sum(Subspace::span(v.size(), {v}));
                }
        }
    return m;
}

inline FellBundleIdeal left_ideal_from_module(const EquivalenceBundle& e,
                                              const ModuleFamily& m) {
    const GroupoidEquivalence& s = *e.space;
    std::vector<std::pair<std::size_t, Vec>> gens, gens2;
    for (std::size_t z = 0; z < s.n_points; ++z)
        for (std::size_t w = 0; w < s.n_points; ++w) {
            if (s.lpair[z][w] < 0) continue;
            auto g = static_cast<std::size_t>(s.lpair[z][w]);
            for (std::size_t k = 0; k < m[z].dim(); ++k)
                for (std::size_t i = 0; i < e.dim[w]; ++i)
                    gens.emplace_back(
                        g, e.lprod(z, w, m[z].basis_vector(k), unit_vec(e.dim[w], i)));
            for (std::size_t i = 0; i < e.dim[z]; ++i)
                for (std::size_t k = 0; k < m[w].dim(); ++k)
                    gens2.emplace_back(
                        g, e.lprod(z, w, unit_vec(e.dim[z], i), m[w].basis_vector(k)));
        }
    FellBundleIdeal j = generated_ideal(*e.left, gens);
    if (!ideal_equal(j, generated_ideal(*e.left, gens2)))
        throw Error("module inner products disagree across slots");
    return j;
}

inline FellBundleIdeal right_ideal_from_module(const EquivalenceBundle& e,
                                               const ModuleFamily& m) {
    const GroupoidEquivalence& s = *e.space;
    std::vector<std::pair<std::size_t, Vec>> gens, gens2;
    for (std::size_t z = 0; z < s.n_points; ++z)
        for (std::size_t w = 0; w < s.n_points; ++w) {
            if (s.rpair[z][w] < 0) continue;
            auto h = static_cast<std::size_t>(s.rpair[z][w]);
            for (std::size_t k = 0; k < m[z].dim(); ++k)
                for (std::size_t i = 0; i < e.dim[w]; ++i)
                    gens.emplace_back(
                        h, e.rprod(z, w, m[z].basis_vector(k), unit_vec(e.dim[w], i)));
            for (std::size_t i = 0; i < e.dim[z]; ++i)
                for (std::size_t k = 0; k < m[w].dim(); ++k)
                    gens2.emplace_back(
                        h, e.rprod(z, w, unit_vec(e.dim[z], i), m[w].basis_vector(k)));
        }
    FellBundleIdeal j = generated_ideal(*e.right, gens);
    if (!ideal_equal(j, generated_ideal(*e.right, gens2)))
        throw Error("module inner products disagree across slots");
    return j;
}

inline FellBundleIdeal rieffel_left_to_right(const EquivalenceBundle& e,
                                             const FellBundleIdeal& j) {
    return right_ideal_from_module(e, module_from_left_ideal(e, j));
}

inline FellBundleIdeal rieffel_right_to_left(const EquivalenceBundle& e,
                                             const FellBundleIdeal& j) {
    return left_ideal_from_module(e, module_from_right_ideal(e, j));
}

// Index maps between the two ideal lattices realized by the correspondence.
inline std::vector<std::size_t> rieffel_map_left_to_right(const EquivalenceBundle& e,
                                                          const IdealLattice& from,
                                                          const IdealLattice& to) {
    std::vector<std::size_t> f;
    for (const FellBundleIdeal& j : from.ideals) {
        std::ptrdiff_t i = to.index_of(rieffel_left_to_right(e, j));
        if (i < 0) throw Error("correspondence left the target lattice");
        f.push_back(static_cast<std::size_t>(i));
    }
    return f;
}

inline std::vector<std::size_t> rieffel_map_right_to_left(const EquivalenceBundle& e,
                                                          const IdealLattice& from,
                                                          const IdealLattice& to) {
    std::vector<std::size_t> f;
    for (const FellBundleIdeal& j : from.ideals) {
        std::ptrdiff_t i = to.index_of(rieffel_right_to_left(e, j));
        if (i < 0) throw Error("correspondence left the target lattice");
        f.push_back(static_cast<std::size_t>(i));
    }
    return f;
}

}  // namespace fellb
