#pragma once

#include <cstdint>
#include <cstdlib>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fellb/bundle.hpp"

namespace fellb {

// ---------------------------------------------------------------------------
// Ideals of a Fell bundle: one subspace per fiber, absorbing under the bundle
// product on both sides and closed under the involution.  When the unit
// fibers split into matrix blocks, every ideal is the lift of its unit
// restriction, so the lattice is indexed by block sets closed under
// conjugation by the bundle; enumeration uses that indexing and re-validates
// every ideal it emits.
// ---------------------------------------------------------------------------

struct FellBundleIdeal {
    std::vector<Subspace> at;   // at[g] <= fiber over arrow g
};

inline bool ideal_equal(const FellBundleIdeal& a, const FellBundleIdeal& b) {
    return a.at == b.at;
}

inline FellBundleIdeal zero_ideal(const FellBundle& b) {
    FellBundleIdeal j;
    for (std::size_t g = 0; g < b.gpd->n_arrows; ++g)
        j.at.emplace_back(b.dim[g]);
    return j;
}

inline FellBundleIdeal full_ideal(const FellBundle& b) {
    FellBundleIdeal j;
    for (std::size_t g = 0; g < b.gpd->n_arrows; ++g)
        j.at.push_back(Subspace::full(b.dim[g]));
    return j;
}

inline ValidationReport validate_ideal(const FellBundle& b, const FellBundleIdeal& j) {
    ValidationReport rep;
    const FiniteGroupoid& g = *b.gpd;
    if (j.at.size() != g.n_arrows) {
        rep.push_back({"ideal/shape", "one subspace per arrow required"});
        return rep;
    }
    for (std::size_t x = 0; x < g.n_arrows; ++x)
        if (j.at[x].ambient() != b.dim[x]) {
            rep.push_back({"ideal/shape",
                           "subspace over " + g.arrow_label[x] +
                               " lives in the wrong fiber dimension"});
            return rep;
        }
    for (std::size_t x = 0; x < g.n_arrows; ++x)
        for (std::size_t k = 0; k < j.at[x].dim(); ++k)
            if (!j.at[g.inv[x]].contains(b.star(x, j.at[x].basis_vector(k))))
                rep.push_back({"ideal/involution",
                               "star of a member over " + g.arrow_label[x] +
                                   " escapes the subspace over " +
                                   g.arrow_label[g.inv[x]]});
    for (std::size_t x = 0; x < g.n_arrows; ++x)
        for (std::size_t y = 0; y < g.n_arrows; ++y) {
            if (!g.composable(x, y)) continue;
            std::size_t xy = g.comp(x, y);
            for (std::size_t i = 0; i < b.dim[x]; ++i)
                for (std::size_t k = 0; k < j.at[y].dim(); ++k)
                    if (!j.at[xy].contains(
                            b.mul(x, y, unit_vec(b.dim[x], i), j.at[y].basis_vector(k))))
                        rep.push_back({"ideal/absorption",
                                       "left product " + g.arrow_label[x] + " . " +
                                           g.arrow_label[y] +
                                           " escapes the subspace over " +
                                           g.arrow_label[xy]});
            for (std::size_t k = 0; k < j.at[x].dim(); ++k)
                for (std::size_t i = 0; i < b.dim[y]; ++i)
                    if (!j.at[xy].contains(
                            b.mul(x, y, j.at[x].basis_vector(k), unit_vec(b.dim[y], i))))
                        rep.push_back({"ideal/absorption",
                                       "right product " + g.arrow_label[x] + " . " +
                                           g.arrow_label[y] +
                                           " escapes the subspace over " +
                                           g.arrow_label[xy]});
        }
    return rep;
}

// The unit-fiber part of an ideal, one subspace per object.
inline std::vector<Subspace> unit_restriction(const FellBundle& b,
                                              const FellBundleIdeal& j) {
    std::vector<Subspace> out;
    for (std::size_t u = 0; u < b.gpd->n_objects; ++u)
        out.push_back(j.at[b.gpd->unit_arrow[u]]);
    return out;
}

namespace detail {

// Rows q with: q v = 0 for every v in s, and jointly ker = s exactly.
inline Matrix annihilator_rows(const Subspace& s) {
    Matrix basis = s.basis();
    if (basis.rows() == 0) return kernel_basis(Matrix(0, s.ambient()));
    return kernel_basis(basis);
}

}  // namespace detail

// Largest per-fiber family restricting to the given unit subspaces:
// over g it keeps v with  star(v) . B_g  inside the subspace at src(g).
// The result is an ideal exactly when the unit family is absorption-closed;
// callers validate or cross-check.
inline FellBundleIdeal unit_to_bundle_ideal(const FellBundle& b,
                                            const std::vector<Subspace>& unit_ideals) {
    const FiniteGroupoid& g = *b.gpd;
    if (unit_ideals.size() != g.n_objects)
        throw InvalidInstance("one unit subspace per object required");
    FellBundleIdeal j;
    j.at.reserve(g.n_arrows);
    for (std::size_t x = 0; x < g.n_arrows; ++x) {
        std::size_t u = g.src[x];
        if (unit_ideals[u].ambient() != b.dim[g.unit_arrow[u]])
            throw InvalidInstance("unit subspace has the wrong fiber dimension");
        std::size_t d = b.dim[x];
        Matrix q = detail::annihilator_rows(unit_ideals[u]);
        // Constraint on c = conj(v):  q . mult(inv x, x) . (invol[x] c (x) e_j) = 0.
        const Matrix& m = b.mult_at(g.inv[x], x);
        const Matrix& s = b.invol[x];
        std::size_t dprime = b.dim[g.inv[x]];
        Matrix cons(q.rows() * d, d);
        for (std::size_t jj = 0; jj < d; ++jj) {
            Matrix w(m.rows(), dprime);   // m restricted to tensor slots (*, jj)
            for (std::size_t r = 0; r < m.rows(); ++r)
                for (std::size_t ip = 0; ip < dprime; ++ip)
                    w.at(r, ip) = m.at(r, ip * d + jj);
            Matrix block = q * w * s;
            for (std::size_t r = 0; r < block.rows(); ++r)
                for (std::size_t c = 0; c < d; ++c)
                    cons.at(jj * q.rows() + r, c) = block.at(r, c);
        }
        j.at.push_back(Subspace::from_row_matrix(kernel_basis(cons).conj()));
    }
    return j;
}

// Smallest ideal containing the generators, by closing under the involution
// and products with fiber basis vectors on both sides.  Cross-checks the
// result against the lift of its own unit restriction; on bundles whose
// section algebra meets the positivity criterion the two agree.
inline FellBundleIdeal generated_ideal(
    const FellBundle& b, const std::vector<std::pair<std::size_t, Vec>>& gens) {
    const FiniteGroupoid& g = *b.gpd;
    FellBundleIdeal j = zero_ideal(b);
    for (const auto& [x, v] : gens) {
        if (x >= g.n_arrows || v.size() != b.dim[x])
            throw InvalidInstance("generator does not live in a fiber");
        j.at[x] = j.at[x].sum(Subspace::span(b.dim[x], {v}));
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t x = 0; x < g.n_arrows; ++x) {
            for (std::size_t k = 0; k < j.at[x].dim(); ++k) {
                Vec v = j.at[x].basis_vector(k);
                Vec sv = b.star(x, v);
                if (!j.at[g.inv[x]].contains(sv)) {
                    j.at[g.inv[x]] = j.at[g.inv[x]].sum(Subspace::span(sv.size(), {sv}));
                    changed = true;
                }
                for (std::size_t y = 0; y < g.n_arrows; ++y) {
                    if (g.composable(y, x)) {
                        std::size_t yx = g.comp(y, x);
                        for (std::size_t i = 0; i < b.dim[y]; ++i) {
                            Vec p = b.mul(y, x, unit_vec(b.dim[y], i), v);
                            if (!j.at[yx].contains(p)) {
                                j.at[yx] = j.at[yx].sum(Subspace::span(p.size(), {p}));
                                changed = true;
                            }
                        }
                    }
                    if (g.composable(x, y)) {
                        std::size_t xy = g.comp(x, y);
                        for (std::size_t i = 0; i < b.dim[y]; ++i) {
                            Vec p = b.mul(x, y, v, unit_vec(b.dim[y], i));
                            if (!j.at[xy].contains(p)) {
                                j.at[xy] = j.at[xy].sum(Subspace::span(p.size(), {p}));
                                changed = true;
                            }
                        }
                    }
                }
            }
        }
    }
    FellBundleIdeal lifted = unit_to_bundle_ideal(b, unit_restriction(b, j));
    if (!ideal_equal(j, lifted))
        throw Error("generated ideal does not match the lift of its unit restriction");
    return j;
}

// alpha_x maps the subspace over h into the subspace over sigma_x(h), for
// every acting arrow.  Since every x has an inverse this forces equality.
inline bool is_action_invariant(const BundleIsoAction& a, const FellBundleIdeal& j,
                                std::string* witness = nullptr) {
    const IsoAction& act = *a.act;
    for (std::size_t x = 0; x < act.g->n_arrows; ++x)
        for (std::size_t h = 0; h < act.h->n_arrows; ++h) {
            if (act.sigma[x][h] < 0) continue;
            auto th = static_cast<std::size_t>(act.sigma[x][h]);
            if (!j.at[th].contains(j.at[h].apply(a.alpha[x][h]))) {
                if (witness)
                    *witness = act.g->arrow_label[x] + " moves the subspace over " +
                               act.h->arrow_label[h] + " off the subspace over " +
                               act.h->arrow_label[th];
                return false;
            }
        }
    return true;
}

// ---------------------------------------------------------------------------
// Enumeration.  A block set S is closed when every block it contains only
// reaches blocks inside S under conjugation by bundle fibers (and, for the
// invariant lattice, under the unit-fiber action of every acting arrow).
// Ideals are listed by ascending block-set bitmask.
// ---------------------------------------------------------------------------

struct IdealLattice {
    std::shared_ptr<const FellBundle> bun;
    std::size_t n_blocks = 0;
    std::vector<FellBundleIdeal> ideals;
    std::vector<std::uint64_t> mask;                 // block set per ideal
    std::vector<std::vector<std::size_t>> meet, join;

    std::size_t size() const { return ideals.size(); }

    std::ptrdiff_t index_of(const FellBundleIdeal& j) const {
        for (std::size_t i = 0; i < ideals.size(); ++i)
            if (ideal_equal(ideals[i], j)) return static_cast<std::ptrdiff_t>(i);
        return -1;
    }

    std::size_t index_of_mask(std::uint64_t m) const {
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i] == m) return i;
        throw Error("block set is not in the lattice");
    }
};

inline std::size_t max_enumerable_blocks() {
    std::size_t cap = 16;
    if (const char* e = std::getenv("FELLB_MAX_BLOCKS"); e && *e)
        cap = std::strtoul(e, nullptr, 10);
    return cap < 62 ? cap : 62;
}

namespace detail {

// Unit subspaces selected by a block set.
inline std::vector<Subspace> unit_ideals_of_mask(const FellBundle& b,
                                                 const UnitFibers& uf,
                                                 std::uint64_t mask) {
    std::vector<Subspace> unit_ideals;
    for (std::size_t u = 0; u < b.gpd->n_objects; ++u) {
        const UnitFiberInfo& info = uf.at[u];
        Subspace s(info.alg.dim);
        for (std::size_t k = 0; k < info.global_block.size(); ++k)
            if (mask >> info.global_block[k] & 1) s = s.sum(info.blocks.block[k]);
        unit_ideals.push_back(std::move(s));
    }
    return unit_ideals;
}

// reach[b] = blocks hit by conjugating block b with bundle fibers, plus the
// images of b under the unit-fiber action when one is supplied.
inline std::vector<std::uint64_t> block_reach(const FellBundle& b, const UnitFibers& uf,
                                              const BundleIsoAction* inv_action) {
    const FiniteGroupoid& g = *b.gpd;
    std::vector<std::uint64_t> reach(uf.n_blocks, 0);
    for (std::size_t bb = 0; bb < uf.n_blocks; ++bb) {
        auto [u, k] = uf.block_home[bb];
        const Vec& p = uf.at[u].blocks.idempotent[k];
        std::size_t e = g.unit_arrow[u];
        for (std::size_t x = 0; x < g.n_arrows; ++x) {
            if (g.src[x] != u) continue;
            std::size_t r = g.rng[x];
            std::vector<Vec> image;
            for (std::size_t i = 0; i < b.dim[x]; ++i) {
                Vec a = b.mul(x, e, unit_vec(b.dim[x], i), p);
                for (std::size_t jj = 0; jj < b.dim[x]; ++jj)
                    image.push_back(
                        b.mul(x, g.inv[x], a, b.star(x, unit_vec(b.dim[x], jj))));
            }
            Subspace s = Subspace::span(b.dim[g.unit_arrow[r]], image);
            const UnitFiberInfo& ri = uf.at[r];
            for (std::size_t l = 0; l < ri.global_block.size(); ++l) {
                bool hit = false;
                for (std::size_t t = 0; t < s.dim() && !hit; ++t)
                    hit = !is_zero_vec(
                        ri.alg.mul(ri.blocks.idempotent[l], s.basis_vector(t)));
                if (hit) reach[bb] |= std::uint64_t{1} << ri.global_block[l];
            }
        }
        if (inv_action) {
            const IsoAction& act = *inv_action->act;
            for (std::size_t x = 0; x < act.g->n_arrows; ++x) {
                if (act.sigma[x][e] < 0) continue;
                auto eu = static_cast<std::size_t>(act.sigma[x][e]);
                if (act.h->unit_object[eu] < 0)
                    throw Error("sigma does not preserve units");
                auto uprime = static_cast<std::size_t>(act.h->unit_object[eu]);
                Vec q = inv_action->apply(x, e, p);
                const UnitFiberInfo& ti = uf.at[uprime];
                bool found = false;
                for (std::size_t l = 0; l < ti.global_block.size(); ++l)
                    if (ti.blocks.idempotent[l] == q) {
                        reach[bb] |= std::uint64_t{1} << ti.global_block[l];
                        found = true;
                        break;
                    }
                if (!found) throw Error("action does not permute unit blocks");
            }
        }
    }
    return reach;
}

inline IdealLattice enumerate_core(std::shared_ptr<const FellBundle> bun,
                                   const UnitFibers& uf,
                                   const BundleIsoAction* inv_action) {
    const FellBundle& b = *bun;
    if (uf.n_blocks > max_enumerable_blocks())
        throw UnsupportedInstance("too many unit blocks to enumerate",
                                  std::to_string(uf.n_blocks) + " blocks");
    std::vector<std::uint64_t> reach = block_reach(b, uf, inv_action);
    IdealLattice lat;
    lat.bun = std::move(bun);
    lat.n_blocks = uf.n_blocks;
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << uf.n_blocks); ++s) {
        bool closed = true;
        for (std::size_t bb = 0; bb < uf.n_blocks && closed; ++bb)
            if (s >> bb & 1) closed = (reach[bb] & ~s) == 0;
        if (!closed) continue;
        std::vector<Subspace> chosen = unit_ideals_of_mask(b, uf, s);
        FellBundleIdeal j = unit_to_bundle_ideal(b, chosen);
        if (!validate_ideal(b, j).empty())
            throw Error("closed block set lifted to a non-ideal");
        if (unit_restriction(b, j) != chosen)
            throw Error("lift does not restrict back to the chosen blocks");
        if (inv_action && !is_action_invariant(*inv_action, j))
            throw Error("closed block set lifted to a non-invariant ideal");
        lat.ideals.push_back(std::move(j));
        lat.mask.push_back(s);
    }
    std::size_t n = lat.size();
    lat.meet.assign(n, std::vector<std::size_t>(n, 0));
    lat.join.assign(n, std::vector<std::size_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            FellBundleIdeal cap;
            for (std::size_t x = 0; x < b.gpd->n_arrows; ++x)
                cap.at.push_back(lat.ideals[i].at[x].intersect(lat.ideals[k].at[x]));
            std::ptrdiff_t mi = lat.index_of(cap);
            if (mi < 0 || lat.mask[static_cast<std::size_t>(mi)] !=
                              (lat.mask[i] & lat.mask[k]))
                throw Error("meet of two ideals left the lattice");
            lat.meet[i][k] = static_cast<std::size_t>(mi);
            std::vector<std::pair<std::size_t, Vec>> gens;
            for (std::size_t x = 0; x < b.gpd->n_arrows; ++x) {
                for (std::size_t t = 0; t < lat.ideals[i].at[x].dim(); ++t)
                    gens.emplace_back(x, lat.ideals[i].at[x].basis_vector(t));
                for (std::size_t t = 0; t < lat.ideals[k].at[x].dim(); ++t)
                    gens.emplace_back(x, lat.ideals[k].at[x].basis_vector(t));
            }
            std::ptrdiff_t ji = lat.index_of(generated_ideal(b, gens));
            if (ji < 0 || lat.mask[static_cast<std::size_t>(ji)] !=
                              (lat.mask[i] | lat.mask[k]))
                throw Error("join of two ideals left the lattice");
            lat.join[i][k] = static_cast<std::size_t>(ji);
        }
    return lat;
}

}  // namespace detail

inline IdealLattice enumerate_ideals(std::shared_ptr<const FellBundle> bun,
                                     const UnitFibers& uf) {
    return detail::enumerate_core(std::move(bun), uf, nullptr);
}

inline IdealLattice enumerate_ideals(std::shared_ptr<const FellBundle> bun) {
    UnitFibers uf = analyze_unit_fibers(*bun);
    return detail::enumerate_core(std::move(bun), uf, nullptr);
}

inline IdealLattice enumerate_invariant_ideals(const BundleIsoAction& a,
                                               const UnitFibers& uf) {
    return detail::enumerate_core(a.bun, uf, &a);
}

inline IdealLattice enumerate_invariant_ideals(const BundleIsoAction& a) {
    UnitFibers uf = analyze_unit_fibers(*a.bun);
    return detail::enumerate_core(a.bun, uf, &a);
}

// f carries indices of a to indices of b, preserving meets and joins.
inline bool lattice_isomorphic_via(const IdealLattice& a, const IdealLattice& b,
                                   const std::vector<std::size_t>& f,
                                   std::string* why = nullptr) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (a.size() != b.size()) return fail("lattices have different sizes");
    if (f.size() != a.size()) return fail("map has the wrong domain");
    std::vector<char> hit(b.size(), 0);
    for (std::size_t v : f) {
        if (v >= b.size()) return fail("map value out of range");
        if (hit[v]) return fail("map is not injective");
        hit[v] = 1;
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (f[a.meet[i][k]] != b.meet[f[i]][f[k]])
                return fail("map does not preserve meets");
            if (f[a.join[i][k]] != b.join[f[i]][f[k]])
                return fail("map does not preserve joins");
        }
    return true;
}

}  // namespace fellb
