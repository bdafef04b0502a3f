#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "fellb/bundle.hpp"
#include "fellb/groupoid.hpp"
#include "fellb/star_algebra.hpp"

namespace fellb::instances {

// C^k with coordinatewise product and conjugation.
inline StarAlgebra diag_algebra(std::size_t k) {
    StarAlgebra a = StarAlgebra::make(k);
    for (std::size_t i = 0; i < k; ++i) a.mult[i][i][i] = Scalar(1);
    return a;
}

// Full matrix algebra M_n, basis e_{pq} at index p*n+q, (e_pq)* = e_qp.
inline StarAlgebra matrix_algebra(std::size_t n) {
    StarAlgebra a = StarAlgebra::make(n * n);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q)
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t s = 0; s < n; ++s)
                    if (q == r) a.mult[p * n + q][r * n + s][p * n + s] = Scalar(1);
    a.invol = Matrix(n * n, n * n);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q)
            a.invol.at(q * n + p, p * n + q) = Scalar(1);
    return a;
}

// Group algebra from a multiplication table, (e_g)* = e_{g^-1}.
inline StarAlgebra group_algebra(const std::vector<std::vector<std::size_t>>& table,
                                 const std::vector<std::size_t>& inv) {
    std::size_t n = table.size();
    StarAlgebra a = StarAlgebra::make(n);
    for (std::size_t g = 0; g < n; ++g)
        for (std::size_t h = 0; h < n; ++h) a.mult[g][h][table[g][h]] = Scalar(1);
    a.invol = Matrix(n, n);
    for (std::size_t g = 0; g < n; ++g) a.invol.at(inv[g], g) = Scalar(1);
    return a;
}

inline StarAlgebra z2_group_algebra() { return group_algebra({{0, 1}, {1, 0}}, {0, 1}); }

inline StarAlgebra z3_group_algebra() {
    return group_algebra({{0, 1, 2}, {1, 2, 0}, {2, 0, 1}}, {0, 2, 1});
}

// Groupoid with n objects and only the unit arrows.
inline FiniteGroupoid discrete_groupoid(std::size_t n) {
    FiniteGroupoid g;
    g.n_arrows = n;
    g.n_objects = n;
    g.comp_table.assign(n * n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        g.src.push_back(i);
        g.rng.push_back(i);
        g.inv.push_back(i);
        g.unit_arrow.push_back(i);
        g.unit_object.push_back(static_cast<std::ptrdiff_t>(i));
        g.object_label.push_back(std::to_string(i + 1));
        g.arrow_label.push_back("e" + std::to_string(i + 1));
        g.set_comp(i, i, i);
    }
    return g;
}

// Action of a group on the discrete groupoid on n points via a permutation
// representation perm[x][i]; must be a homomorphism of the group.
inline IsoAction permutation_action(std::shared_ptr<const FiniteGroupoid> g,
                                    std::shared_ptr<const FiniteGroupoid> discrete_n,
                                    const std::vector<std::vector<std::size_t>>& perm) {
    if (g->n_objects != 1)
        throw InvalidInstance("permutation_action: acting groupoid must be a group");
    std::size_t n = discrete_n->n_objects;
    IsoAction a;
    a.g = g;
    a.h = discrete_n;
    a.rho.assign(n, 0);
    a.sigma.assign(g->n_arrows, std::vector<std::ptrdiff_t>(discrete_n->n_arrows));
    for (std::size_t x = 0; x < g->n_arrows; ++x)
        for (std::size_t i = 0; i < n; ++i)
            a.sigma[x][discrete_n->unit_arrow[i]] =
                static_cast<std::ptrdiff_t>(discrete_n->unit_arrow[perm[x][i]]);
    return a;
}

// Z2 swapping the two points of the discrete groupoid on {1, 2}.
inline std::shared_ptr<const IsoAction> swap2_action() {
    auto g = std::make_shared<const FiniteGroupoid>(cyclic_group(2));
    auto h = std::make_shared<const FiniteGroupoid>(discrete_groupoid(2));
    return std::make_shared<const IsoAction>(
        permutation_action(g, h, {{0, 1}, {1, 0}}));
}

// Z2 acting trivially on the discrete groupoid on {1, 2}.
inline std::shared_ptr<const IsoAction> triv2_action() {
    auto g = std::make_shared<const FiniteGroupoid>(cyclic_group(2));
    auto h = std::make_shared<const FiniteGroupoid>(discrete_groupoid(2));
    return std::make_shared<const IsoAction>(trivial_iso_action(g, h));
}

// ---------------------------------------------------------------------------
// Bundle-level instances.
// ---------------------------------------------------------------------------

// One-dimensional fibers over the two-point discrete groupoid: the unit
// algebras form Q(i) (+) Q(i).
inline std::shared_ptr<const FellBundle> c2diag_bundle() {
    auto h = std::make_shared<const FiniteGroupoid>(discrete_groupoid(2));
    return std::make_shared<const FellBundle>(line_bundle(h));
}

// Identity fiber maps over a given base iso-action on a line-type bundle.
inline std::shared_ptr<const BundleIsoAction> identity_bundle_action(
    std::shared_ptr<const FellBundle> bun, std::shared_ptr<const IsoAction> act) {
    auto a = std::make_shared<BundleIsoAction>();
    a->bun = bun;
    a->act = act;
    const FiniteGroupoid& g = *act->g;
    const FiniteGroupoid& h = *act->h;
    a->alpha.assign(g.n_arrows, std::vector<Matrix>(h.n_arrows));
    for (std::size_t x = 0; x < g.n_arrows; ++x)
        for (std::size_t t = 0; t < h.n_arrows; ++t)
            if (act->sigma[x][t] >= 0) {
                std::size_t im = static_cast<std::size_t>(act->sigma[x][t]);
                if (bun->dim[im] != bun->dim[t])
                    throw InvalidInstance("identity fiber maps need equal dimensions");
                a->alpha[x][t] = Matrix::identity(bun->dim[t]);
            }
    return a;
}

// Z2 swapping the two summands of c2diag.
inline std::shared_ptr<const BundleIsoAction> c2diag_swap_action() {
    auto act = swap2_action();
    auto bun = std::make_shared<const FellBundle>(line_bundle(act->h));
    return identity_bundle_action(bun, act);
}

// Z2 fixing the two summands of c2diag.
inline std::shared_ptr<const BundleIsoAction> c2diag_trivial_action() {
    auto act = triv2_action();
    auto bun = std::make_shared<const FellBundle>(line_bundle(act->h));
    return identity_bundle_action(bun, act);
}

// Line bundle over the group Z2, with the trivial Z2 action on the base.
inline std::shared_ptr<const BundleIsoAction> linez2_trivial_action() {
    auto g = std::make_shared<const FiniteGroupoid>(cyclic_group(2));
    auto h = std::make_shared<const FiniteGroupoid>(cyclic_group(2));
    auto act = std::make_shared<const IsoAction>(trivial_iso_action(g, h));
    auto bun = std::make_shared<const FellBundle>(line_bundle(h));
    return identity_bundle_action(bun, act);
}

// Line bundle over the pair groupoid on two objects; its sections form M_2.
inline std::shared_ptr<const FellBundle> m2pair_bundle() {
    auto k = std::make_shared<const FiniteGroupoid>(pair_groupoid(2));
    return std::make_shared<const FellBundle>(line_bundle(k));
}

// Principal two-point torsor under Z2 over the pair groupoid: points (i, z)
// with moment i, arrows (j|i) moving the first coordinate, and the
// translation flipping the second. Its orbit space is the object space.
inline std::shared_ptr<const SpaceAction> m2pair_torsor() {
    auto k = std::make_shared<const FiniteGroupoid>(pair_groupoid(2));
    auto z2 = std::make_shared<const FiniteGroupoid>(cyclic_group(2));
    SpaceAction a;
    a.gpd = k;
    a.n_points = 4;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t z = 0; z < 2; ++z) {
            a.moment.push_back(i);
            a.point_label.push_back("(" + std::to_string(i + 1) + "," +
                                    (z == 0 ? "e" : "s") + ")");
        }
    a.act.assign(k->n_arrows, std::vector<std::ptrdiff_t>(4, -1));
    for (std::size_t arrow = 0; arrow < k->n_arrows; ++arrow)
        for (std::size_t t = 0; t < 4; ++t)
            if (k->src[arrow] == a.moment[t])
                a.act[arrow][t] =
                    static_cast<std::ptrdiff_t>(k->rng[arrow] * 2 + (t % 2));
    SpaceAction::Translate tr;
    tr.gpd = z2;
    tr.moment.assign(4, 0);
    tr.act.assign(2, std::vector<std::ptrdiff_t>(4, -1));
    for (std::size_t t = 0; t < 4; ++t) {
        tr.act[0][t] = static_cast<std::ptrdiff_t>(t);
        tr.act[1][t] = static_cast<std::ptrdiff_t>((t / 2) * 2 + (1 - t % 2));
    }
    a.translate = std::move(tr);
    return std::make_shared<const SpaceAction>(std::move(a));
}

// Twisted line bundle over the Klein four-group with cocycle
// s(a^i b^j, a^k b^l) = (-1)^{jk}; its sections form M_2.
inline std::shared_ptr<const FellBundle> v4_cocycle_bundle() {
    auto v4 = std::make_shared<const FiniteGroupoid>(klein_group());
    std::vector<std::vector<Scalar>> sigma(4, std::vector<Scalar>(4));
    for (std::size_t x = 0; x < 4; ++x)
        for (std::size_t y = 0; y < 4; ++y) {
            std::size_t jx = (x >> 1) & 1, iy = y & 1;
            sigma[x][y] = Scalar((jx & iy) ? -1 : 1);
        }
    return std::make_shared<const FellBundle>(cocycle_line_bundle(v4, sigma));
}

// Untwisted line bundle over the Klein four-group (four central blocks).
inline std::shared_ptr<const FellBundle> linev4_bundle() {
    auto v4 = std::make_shared<const FiniteGroupoid>(klein_group());
    return std::make_shared<const FellBundle>(line_bundle(v4));
}

// The group algebra of Z3 as the unit fiber over a single point; its
// central blocks are not Q(i)-rational, so block analysis must refuse it.
inline std::shared_ptr<const FellBundle> z3_algebra_bundle() {
    auto pt = std::make_shared<const FiniteGroupoid>(discrete_groupoid(1));
    return std::make_shared<const FellBundle>(
        algebras_bundle(pt, {z3_group_algebra()}));
}

}  // namespace fellb::instances
