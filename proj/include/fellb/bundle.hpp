#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fellb/groupoid.hpp"
#include "fellb/star_algebra.hpp"

namespace fellb {

// ---------------------------------------------------------------------------
// Fell bundle over a finite groupoid: a fiber Q(i)^{dim[g]} per arrow,
// bilinear multiplications B_g x B_h -> B_{gh} stored as matrices on tensor
// coordinates, and conjugate-linear involutions B_g -> B_{g^-1} stored as
// v -> invol[g] . conj(v).
// ---------------------------------------------------------------------------

struct FellBundle {
    std::shared_ptr<const FiniteGroupoid> gpd;
    std::vector<std::size_t> dim;
    std::vector<Matrix> mult;    // index g * n_arrows + h; empty if not composable
    std::vector<Matrix> invol;   // invol[g]: dim[inv g] x dim[g]

    const Matrix& mult_at(std::size_t g, std::size_t h) const {
        return mult[g * gpd->n_arrows + h];
    }
    Matrix& mult_at(std::size_t g, std::size_t h) {
        return mult[g * gpd->n_arrows + h];
    }

    Vec mul(std::size_t g, std::size_t h, const Vec& a, const Vec& b) const {
        if (!gpd->composable(g, h))
            throw InvalidInstance("bundle product over a non-composable pair");
        return mult_at(g, h).apply(tensor_pair(a, b));
    }

    Vec star(std::size_t g, const Vec& v) const { return invol[g].apply(conj_vec(v)); }

    StarAlgebra unit_algebra(std::size_t object) const {
        std::size_t e = gpd->unit_arrow[object];
        std::size_t n = dim[e];
        StarAlgebra a = StarAlgebra::make(n);
        const Matrix& m = mult_at(e, e);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k)
                    a.mult[i][j][k] = m.at(k, i * n + j);
        a.invol = invol[e];
        return a;
    }
};

// ---------------------------------------------------------------------------
// Validation: shapes, associativity, involution laws, unit fibers, unit
// action, per-arrow positivity, and saturation.
// ---------------------------------------------------------------------------

inline ValidationReport validate_bundle(const FellBundle& b) {
    ValidationReport rep;
    const FiniteGroupoid& g = *b.gpd;
    std::size_t n = g.n_arrows;
    if (b.dim.size() != n || b.mult.size() != n * n || b.invol.size() != n) {
        rep.push_back({"bundle/shape", "table sizes are inconsistent"});
        return rep;
    }
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) {
            const Matrix& m = b.mult_at(x, y);
            std::ptrdiff_t c = g.comp_raw(x, y);
            if (c < 0) {
                if (m.rows() != 0 || m.cols() != 0)
                    rep.push_back({"bundle/shape",
                                   "product defined over non-composable " +
                                       g.arrow_label[x] + " . " + g.arrow_label[y]});
                continue;
            }
            if (m.rows() != b.dim[static_cast<std::size_t>(c)] ||
                m.cols() != b.dim[x] * b.dim[y])
                rep.push_back({"bundle/shape",
                               "product matrix shape is wrong at " + g.arrow_label[x] +
                                   " . " + g.arrow_label[y]});
        }
    for (std::size_t x = 0; x < n; ++x)
        if (b.invol[x].rows() != b.dim[g.inv[x]] || b.invol[x].cols() != b.dim[x])
            rep.push_back({"bundle/shape",
                           "involution matrix shape is wrong at " + g.arrow_label[x]});
    if (!rep.empty()) return rep;

    // Associativity on basis triples.
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) {
            if (!g.composable(x, y)) continue;
            std::size_t xy = g.comp(x, y);
            for (std::size_t z = 0; z < n; ++z) {
                if (!g.composable(y, z)) continue;
                std::size_t yz = g.comp(y, z);
                bool bad = false;
                for (std::size_t i = 0; i < b.dim[x] && !bad; ++i)
                    for (std::size_t j = 0; j < b.dim[y] && !bad; ++j)
                        for (std::size_t k = 0; k < b.dim[z] && !bad; ++k) {
                            Vec l = b.mul(xy, z,
                                          b.mul(x, y, unit_vec(b.dim[x], i),
                                                unit_vec(b.dim[y], j)),
                                          unit_vec(b.dim[z], k));
                            Vec r = b.mul(x, yz, unit_vec(b.dim[x], i),
                                          b.mul(y, z, unit_vec(b.dim[y], j),
                                                unit_vec(b.dim[z], k)));
                            if (l != r) bad = true;
                        }
                if (bad)
                    rep.push_back({"bundle/associativity",
                                   "products through " + g.arrow_label[x] + ", " +
                                       g.arrow_label[y] + ", " + g.arrow_label[z] +
                                       " do not associate"});
            }
        }

    // Involution: conjugate-linear, involutive, anti-multiplicative.
    for (std::size_t x = 0; x < n; ++x) {
        bool bad = false;
        for (std::size_t i = 0; i < b.dim[x]; ++i) {
            Vec v = unit_vec(b.dim[x], i);
            if (b.star(g.inv[x], b.star(x, v)) != v) bad = true;
        }
        if (bad)
            rep.push_back({"bundle/involution",
                           "applying the involution twice is not the identity at " +
                               g.arrow_label[x]});
    }
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) {
            if (!g.composable(x, y)) continue;
            std::size_t xy = g.comp(x, y);
            bool bad = false;
            for (std::size_t i = 0; i < b.dim[x] && !bad; ++i)
                for (std::size_t j = 0; j < b.dim[y] && !bad; ++j) {
                    Vec prod = b.mul(x, y, unit_vec(b.dim[x], i), unit_vec(b.dim[y], j));
                    Vec l = b.star(xy, prod);
                    Vec r = b.mul(g.inv[y], g.inv[x],
                                  b.star(y, unit_vec(b.dim[y], j)),
                                  b.star(x, unit_vec(b.dim[x], i)));
                    if (l != r) bad = true;
                }
            if (bad)
                rep.push_back({"bundle/involution",
                               "(ab)* != b* a* at " + g.arrow_label[x] + " . " +
                                   g.arrow_label[y]});
        }
    if (!rep.empty()) return rep;

    // Unit fibers carry finite-dimensional C*-algebras.
    std::vector<Vec> units(g.n_objects);
    std::vector<Matrix> grams(g.n_objects);
    for (std::size_t u = 0; u < g.n_objects; ++u) {
        StarAlgebra a = b.unit_algebra(u);
        ValidationReport sub;
        cstar_criterion(a, sub);
        for (const auto& v : sub)
            rep.push_back({"bundle/unit-fiber",
                           "object " + g.object_label[u] + ": [" + v.code + "] " +
                               v.message});
        if (!sub.empty()) continue;
        units[u] = *algebra_unit(a);
        grams[u] = trace_form(a);
    }
    if (!rep.empty()) return rep;

    // Unit elements act as identities on adjacent fibers.
    for (std::size_t x = 0; x < n; ++x) {
        std::size_t er = g.unit_arrow[g.rng[x]], es = g.unit_arrow[g.src[x]];
        bool bad = false;
        for (std::size_t i = 0; i < b.dim[x]; ++i) {
            Vec v = unit_vec(b.dim[x], i);
            if (b.mul(er, x, units[g.rng[x]], v) != v) bad = true;
            if (b.mul(x, es, v, units[g.src[x]]) != v) bad = true;
        }
        if (bad)
            rep.push_back({"bundle/unit-action",
                           "unit elements do not act as the identity on " +
                               g.arrow_label[x]});
    }

    // Positivity: the matrix [ e_i* e_j ] over the unit algebra at src(x).
    for (std::size_t x = 0; x < n; ++x) {
        std::size_t u = g.src[x];
        StarAlgebra a = b.unit_algebra(u);
        std::vector<std::vector<Vec>> gram_x(
            b.dim[x], std::vector<Vec>(b.dim[x]));
        for (std::size_t i = 0; i < b.dim[x]; ++i)
            for (std::size_t j = 0; j < b.dim[x]; ++j)
                gram_x[i][j] = b.mul(g.inv[x], x, b.star(x, unit_vec(b.dim[x], i)),
                                     unit_vec(b.dim[x], j));
        if (positive_matrix_status(a, grams[u], gram_x) != PsdStatus::Yes)
            rep.push_back({"bundle/positivity",
                           "the fiber pairing at " + g.arrow_label[x] +
                               " is not positive"});
    }

    // Saturation: B_x B_y spans the whole fiber over xy.
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) {
            if (!g.composable(x, y)) continue;
            std::size_t xy = g.comp(x, y);
            const Matrix& m = b.mult_at(x, y);
            std::vector<Vec> cols;
            for (std::size_t c = 0; c < m.cols(); ++c) {
                Vec col(m.rows());
                for (std::size_t r = 0; r < m.rows(); ++r) col[r] = m.at(r, c);
                cols.push_back(std::move(col));
            }
            if (!Subspace::span(b.dim[xy], cols).is_full())
                rep.push_back({"bundle/saturation",
                               "products from " + g.arrow_label[x] + " . " +
                                   g.arrow_label[y] + " do not span the target fiber"});
        }
    return rep;
}

// Defined after total_algebra below.
inline ValidationReport validate_bundle_with_sections(const FellBundle& b);

// ---------------------------------------------------------------------------
// Unit-fiber analysis: algebra, unit, trace form, and primitive central
// idempotents per object, with a global numbering of all blocks.
// ---------------------------------------------------------------------------

struct UnitFiberInfo {
    StarAlgebra alg;
    Vec unit;
    Matrix gram;
    CentralBlocks blocks;
    std::vector<std::size_t> global_block;   // local block -> global id
};

struct UnitFibers {
    std::vector<UnitFiberInfo> at;           // per object
    std::size_t n_blocks = 0;
    std::vector<std::pair<std::size_t, std::size_t>> block_home;  // global -> (obj, local)
};

inline UnitFibers analyze_unit_fibers(const FellBundle& b) {
    UnitFibers out;
    for (std::size_t u = 0; u < b.gpd->n_objects; ++u) {
        UnitFiberInfo info;
        info.alg = b.unit_algebra(u);
        auto unit = algebra_unit(info.alg);
        if (!unit)
            throw InvalidInstance("unit fiber at " + b.gpd->object_label[u] +
                                  " has no unit");
        info.unit = *unit;
        info.gram = trace_form(info.alg);
        info.blocks = central_blocks(info.alg);
        for (std::size_t k = 0; k < info.blocks.idempotent.size(); ++k) {
            info.global_block.push_back(out.n_blocks);
            out.block_home.emplace_back(u, k);
            ++out.n_blocks;
        }
        out.at.push_back(std::move(info));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Action of a groupoid on a Fell bundle over an iso-action of the bases:
// linear isomorphisms alpha[x][h] : B_h -> B_{sigma_x(h)} that respect
// products, involutions, and composition in x.
// ---------------------------------------------------------------------------

struct BundleIsoAction {
    std::shared_ptr<const FellBundle> bun;
    std::shared_ptr<const IsoAction> act;
    std::vector<std::vector<Matrix>> alpha;   // [x][h-arrow], empty when undefined

    Vec apply(std::size_t x, std::size_t h, const Vec& v) const {
        return alpha[x][h].apply(v);
    }
};

inline ValidationReport validate_bundle_action(const BundleIsoAction& a) {
    ValidationReport rep;
    const FellBundle& b = *a.bun;
    const IsoAction& act = *a.act;
    const FiniteGroupoid& g = *act.g;
    const FiniteGroupoid& h = *act.h;
    if (b.gpd->n_arrows != h.n_arrows) {
        rep.push_back({"bundleaction/shape", "bundle base does not match the action"});
        return rep;
    }
    {
        ValidationReport base = validate_iso_action(act);
        for (const auto& v : base) rep.push_back(v);
        if (!rep.empty()) return rep;
    }
    if (a.alpha.size() != g.n_arrows) {
        rep.push_back({"bundleaction/shape", "alpha has wrong size"});
        return rep;
    }
    for (std::size_t x = 0; x < g.n_arrows; ++x) {
        if (a.alpha[x].size() != h.n_arrows) {
            rep.push_back({"bundleaction/shape", "alpha row has wrong size"});
            return rep;
        }
        for (std::size_t t = 0; t < h.n_arrows; ++t) {
            const Matrix& m = a.alpha[x][t];
            if (act.sigma[x][t] < 0) {
                if (m.rows() != 0 || m.cols() != 0)
                    rep.push_back({"bundleaction/shape",
                                   "alpha defined off the action domain"});
                continue;
            }
            auto xt = static_cast<std::size_t>(act.sigma[x][t]);
            if (m.rows() != b.dim[xt] || m.cols() != b.dim[t]) {
                rep.push_back({"bundleaction/shape",
                               "alpha shape is wrong at " + g.arrow_label[x] + ", " +
                                   h.arrow_label[t]});
                continue;
            }
            Matrix r = m;
            if (rref_in_place(r) != m.cols())
                rep.push_back({"bundleaction/invertible",
                               "alpha is singular at " + g.arrow_label[x] + ", " +
                                   h.arrow_label[t]});
        }
    }
    if (!rep.empty()) return rep;
    // Multiplicative and star-preserving.
    for (std::size_t x = 0; x < g.n_arrows; ++x) {
        for (std::size_t s = 0; s < h.n_arrows; ++s) {
            if (act.sigma[x][s] < 0) continue;
            auto xs = static_cast<std::size_t>(act.sigma[x][s]);
            if (!(b.invol[xs] * a.alpha[x][s].conj() ==
                  a.alpha[x][h.inv[s]] * b.invol[s]))
                rep.push_back({"bundleaction/star",
                               "alpha does not intertwine the involutions at " +
                                   g.arrow_label[x] + ", " + h.arrow_label[s]});
            for (std::size_t t = 0; t < h.n_arrows; ++t) {
                if (act.sigma[x][t] < 0 || !h.composable(s, t)) continue;
                auto xt = static_cast<std::size_t>(act.sigma[x][t]);
                std::size_t st = h.comp(s, t);
                if (!(a.alpha[x][st] * b.mult_at(s, t) ==
                      b.mult_at(xs, xt) * kron(a.alpha[x][s], a.alpha[x][t])))
                    rep.push_back({"bundleaction/multiplicative",
                                   "alpha is not multiplicative at " +
                                       g.arrow_label[x] + " on " + h.arrow_label[s] +
                                       " . " + h.arrow_label[t]});
            }
        }
    }
    // Functorial in x.
    for (std::size_t x = 0; x < g.n_arrows; ++x)
        for (std::size_t y = 0; y < g.n_arrows; ++y) {
            std::ptrdiff_t xy = g.comp_raw(x, y);
            if (xy < 0) continue;
            for (std::size_t t = 0; t < h.n_arrows; ++t) {
                if (act.sigma[y][t] < 0) continue;
                auto yt = static_cast<std::size_t>(act.sigma[y][t]);
                if (!(a.alpha[static_cast<std::size_t>(xy)][t] ==
                      a.alpha[x][yt] * a.alpha[y][t]))
                    rep.push_back({"bundleaction/functorial",
                                   "alpha of a composite differs from the composite "
                                   "of alphas at " +
                                       h.arrow_label[t]});
            }
        }
    for (std::size_t u = 0; u < g.n_objects; ++u) {
        std::size_t e = g.unit_arrow[u];
        for (std::size_t t = 0; t < h.n_arrows; ++t)
            if (act.sigma[e][t] >= 0 &&
                !(a.alpha[e][t] == Matrix::identity(b.dim[t])))
                rep.push_back({"bundleaction/units",
                               "alpha of a unit is not the identity at " +
                                   h.arrow_label[t]});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Restriction to a subgroupoid.
// ---------------------------------------------------------------------------

inline FellBundle restrict_bundle(const FellBundle& b, const Subgroupoid& s) {
    FellBundle r;
    r.gpd = std::make_shared<const FiniteGroupoid>(s.gpd);
    std::size_t n = s.arrows.size();
    r.dim.resize(n);
    r.invol.resize(n);
    r.mult.assign(n * n, Matrix());
    for (std::size_t k = 0; k < n; ++k) {
        r.dim[k] = b.dim[s.arrows[k]];
        r.invol[k] = b.invol[s.arrows[k]];
        for (std::size_t l = 0; l < n; ++l)
            if (s.gpd.composable(k, l))
                r.mult[k * n + l] = b.mult_at(s.arrows[k], s.arrows[l]);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Semidirect bundle over the semidirect groupoid of the base action: fiber
// at (h, x) is B_h, product (a, x)(b, y) = (a alpha_x(b), xy), involution
// (a, x)* = (alpha_{x^-1}(a*), x^-1).
// ---------------------------------------------------------------------------

struct SemidirectBundle {
    std::shared_ptr<const BundleIsoAction> action;
    SemidirectGroupoid sgpd;
    std::shared_ptr<const FellBundle> bun;
};

inline SemidirectBundle semidirect_bundle(std::shared_ptr<const BundleIsoAction> a) {
    const FellBundle& b = *a->bun;
    const IsoAction& act = *a->act;
    const FiniteGroupoid& g = *act.g;
    const FiniteGroupoid& h = *act.h;
    SemidirectBundle out;
    out.action = a;
    out.sgpd = semidirect_groupoid(a->act);
    const FiniteGroupoid& m = *out.sgpd.gpd;
    auto bun = std::make_shared<FellBundle>();
    bun->gpd = out.sgpd.gpd;
    std::size_t n = m.n_arrows;
    bun->dim.resize(n);
    bun->invol.resize(n);
    bun->mult.assign(n * n, Matrix());
    for (std::size_t k = 0; k < n; ++k) {
        auto [ah, ax] = out.sgpd.parts[k];
        bun->dim[k] = b.dim[ah];
        // (a, x)* = (alpha_{x^-1}(a*), x^-1).
        bun->invol[k] = a->alpha[g.inv[ax]][h.inv[ah]] * b.invol[ah];
    }
    for (std::size_t k = 0; k < n; ++k) {
        auto [ah, ax] = out.sgpd.parts[k];
        for (std::size_t l = 0; l < n; ++l) {
            if (!m.composable(k, l)) continue;
            auto [bh, by] = out.sgpd.parts[l];
            std::size_t shifted = act.sigma_apply(ax, bh);
            bun->mult[k * n + l] =
                b.mult_at(ah, shifted) *
                kron(Matrix::identity(b.dim[ah]), a->alpha[ax][bh]);
        }
    }
    out.bun = bun;
    return out;
}

// ---------------------------------------------------------------------------
// Action bundle over the action groupoid of a space action: fiber at (k, t)
// is B_k, product (a, k.t)(b, t) = (ab, t), involution (a, t)* = (a*, k.t).
// ---------------------------------------------------------------------------

struct ActionBundle {
    std::shared_ptr<const FellBundle> base;
    std::shared_ptr<const SpaceAction> space;
    ActionGroupoid agpd;
    std::shared_ptr<const FellBundle> bun;
};

inline ActionBundle make_action_bundle(std::shared_ptr<const FellBundle> base,
                                       std::shared_ptr<const SpaceAction> space) {
    if (base->gpd->n_arrows != space->gpd->n_arrows)
        throw InvalidInstance("action bundle: base and space do not match");
    ActionBundle out;
    out.base = base;
    out.space = space;
    out.agpd = action_groupoid(space);
    const FiniteGroupoid& m = *out.agpd.gpd;
    auto bun = std::make_shared<FellBundle>();
    bun->gpd = out.agpd.gpd;
    std::size_t n = m.n_arrows;
    bun->dim.resize(n);
    bun->invol.resize(n);
    bun->mult.assign(n * n, Matrix());
    for (std::size_t a = 0; a < n; ++a) {
        auto [k, t] = out.agpd.parts[a];
        bun->dim[a] = base->dim[k];
        bun->invol[a] = base->invol[k];
    }
    for (std::size_t a = 0; a < n; ++a) {
        auto [k1, t1] = out.agpd.parts[a];
        for (std::size_t c = 0; c < n; ++c) {
            if (!m.composable(a, c)) continue;
            auto [k2, t2] = out.agpd.parts[c];
            bun->mult[a * n + c] = base->mult_at(k1, k2);
        }
    }
    out.bun = bun;
    return out;
}

// ---------------------------------------------------------------------------
// Translation action: the translation structure of the space acts on the
// action bundle with identity fiber maps, moving only the space coordinate.
// ---------------------------------------------------------------------------

inline std::shared_ptr<const BundleIsoAction> translation_action(const ActionBundle& ab) {
    if (!ab.space->translate)
        throw InvalidInstance("translation action needs a translation structure");
    const auto& tr = *ab.space->translate;
    const FiniteGroupoid& g = *tr.gpd;
    const FiniteGroupoid& m = *ab.agpd.gpd;
    auto iso = std::make_shared<IsoAction>();
    iso->g = tr.gpd;
    iso->h = ab.agpd.gpd;
    iso->rho = tr.moment;
    iso->sigma.assign(g.n_arrows, std::vector<std::ptrdiff_t>(m.n_arrows, -1));
    auto act = std::make_shared<BundleIsoAction>();
    act->bun = ab.bun;
    act->alpha.assign(g.n_arrows, std::vector<Matrix>(m.n_arrows));
    for (std::size_t x = 0; x < g.n_arrows; ++x)
        for (std::size_t a = 0; a < m.n_arrows; ++a) {
            auto [k, t] = ab.agpd.parts[a];
            std::ptrdiff_t xt = tr.act[x][t];
            if (xt < 0) continue;
            iso->sigma[x][a] =
                ab.agpd.index[k][static_cast<std::size_t>(xt)];
            act->alpha[x][a] = Matrix::identity(ab.bun->dim[a]);
        }
    act->act = iso;
    return act;
}

// ---------------------------------------------------------------------------
// Orbit bundle of a bundle action whose base action is free on objects:
// fiber at an orbit is the fiber at its representative; products align the
// representatives through the unique connecting arrow and transport back.
// ---------------------------------------------------------------------------

struct OrbitBundle {
    std::shared_ptr<const BundleIsoAction> action;
    OrbitGroupoid ogpd;
    std::shared_ptr<const FellBundle> bun;
};

inline OrbitBundle orbit_bundle(std::shared_ptr<const BundleIsoAction> a) {
    const FellBundle& b = *a->bun;
    const IsoAction& act = *a->act;
    const FiniteGroupoid& g = *act.g;
    const FiniteGroupoid& h = *act.h;
    OrbitBundle out;
    out.action = a;
    out.ogpd = orbit_groupoid(a->act);
    const OrbitGroupoid& og = out.ogpd;
    const FiniteGroupoid& q = *og.gpd;
    auto bun = std::make_shared<FellBundle>();
    bun->gpd = og.gpd;
    std::size_t n = q.n_arrows;
    bun->dim.resize(n);
    bun->invol.resize(n);
    bun->mult.assign(n * n, Matrix());
    for (std::size_t k = 0; k < n; ++k) bun->dim[k] = b.dim[og.rep_arrow[k]];
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t rk = og.rep_arrow[k];
        std::size_t irk = h.inv[rk];
        // Transport the involution image onto the representative of [rk^-1].
        bun->invol[k] = a->alpha[og.to_rep_x[irk]][irk] * b.invol[rk];
        for (std::size_t l = 0; l < n; ++l) {
            if (!q.composable(k, l)) continue;
            std::size_t rl = og.rep_arrow[l];
            // Unique x aligning rng(rl) onto src(rk), by object-freeness.
            std::ptrdiff_t found = -1;
            for (std::size_t x = 0; x < g.n_arrows; ++x)
                if (act.sigma_object(x, h.rng[rl]) ==
                    static_cast<std::ptrdiff_t>(h.src[rk])) {
                    found = static_cast<std::ptrdiff_t>(x);
                    break;
                }
            if (found < 0) throw InvalidInstance("orbit product has no aligning arrow");
            auto x = static_cast<std::size_t>(found);
            std::size_t moved = act.sigma_apply(x, rl);
            std::size_t c = h.comp(rk, moved);
            bun->mult[k * n + l] =
                a->alpha[og.to_rep_x[c]][c] * b.mult_at(rk, moved) *
                kron(Matrix::identity(b.dim[rk]), a->alpha[x][rl]);
        }
    }
    out.bun = bun;
    return out;
}

// ---------------------------------------------------------------------------
// Elementary bundles.
// ---------------------------------------------------------------------------

// One-dimensional fibers, product = plain multiplication, involution = conj.
inline FellBundle line_bundle(std::shared_ptr<const FiniteGroupoid> g) {
    FellBundle b;
    b.gpd = g;
    std::size_t n = g->n_arrows;
    b.dim.assign(n, 1);
    b.invol.assign(n, Matrix::identity(1));
    b.mult.assign(n * n, Matrix());
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y)
            if (g->composable(x, y)) b.mult[x * n + y] = Matrix::identity(1);
    return b;
}

// One-dimensional fibers twisted by a 2-cocycle sigma (unimodular values):
// product multiplies by sigma(x, y), involution by conj(sigma(x^-1, x)).
inline FellBundle cocycle_line_bundle(std::shared_ptr<const FiniteGroupoid> g,
                                      const std::vector<std::vector<Scalar>>& sigma) {
    FellBundle b;
    b.gpd = g;
    std::size_t n = g->n_arrows;
    b.dim.assign(n, 1);
    b.invol.resize(n);
    b.mult.assign(n * n, Matrix());
    for (std::size_t x = 0; x < n; ++x) {
        Matrix iv(1, 1);
        iv.at(0, 0) = sigma[g->inv[x]][x].conj();
        b.invol[x] = iv;
        for (std::size_t y = 0; y < n; ++y)
            if (g->composable(x, y)) {
                Matrix m(1, 1);
                m.at(0, 0) = sigma[x][y];
                b.mult[x * n + y] = m;
            }
    }
    return b;
}

// Bundle over a discrete groupoid with the given unit-fiber algebras.
inline FellBundle algebras_bundle(std::shared_ptr<const FiniteGroupoid> g,
                                  const std::vector<StarAlgebra>& algs) {
    for (std::size_t a = 0; a < g->n_arrows; ++a)
        if (!g->is_unit(a))
            throw InvalidInstance("algebras_bundle needs a discrete base");
    if (algs.size() != g->n_objects)
        throw InvalidInstance("algebras_bundle: one algebra per object required");
    FellBundle b;
    b.gpd = g;
    std::size_t n = g->n_arrows;
    b.dim.resize(n);
    b.invol.resize(n);
    b.mult.assign(n * n, Matrix());
    for (std::size_t u = 0; u < g->n_objects; ++u) {
        std::size_t e = g->unit_arrow[u];
        const StarAlgebra& a = algs[u];
        b.dim[e] = a.dim;
        b.invol[e] = a.invol;
        Matrix m(a.dim, a.dim * a.dim);
        for (std::size_t i = 0; i < a.dim; ++i)
            for (std::size_t j = 0; j < a.dim; ++j)
                for (std::size_t k = 0; k < a.dim; ++k)
                    m.at(k, i * a.dim + j) = a.mult[i][j][k];
        b.mult[e * n + e] = m;
    }
    return b;
}

// ---------------------------------------------------------------------------
// Sections of the whole bundle as one algebra: the direct sum of all fibers
// with the bundle product and involution. Over a group this is the twisted
// group algebra; it serves as an independent cross-check.
// ---------------------------------------------------------------------------

inline std::vector<std::size_t> fiber_offsets(const FellBundle& b) {
    std::vector<std::size_t> off(b.gpd->n_arrows + 1, 0);
    for (std::size_t g = 0; g < b.gpd->n_arrows; ++g) off[g + 1] = off[g] + b.dim[g];
    return off;
}

inline StarAlgebra total_algebra(const FellBundle& b) {
    const FiniteGroupoid& g = *b.gpd;
    std::vector<std::size_t> off = fiber_offsets(b);
    StarAlgebra a = StarAlgebra::make(off.back());
    a.invol = Matrix(off.back(), off.back());
    for (std::size_t x = 0; x < g.n_arrows; ++x) {
        for (std::size_t i = 0; i < b.dim[x]; ++i)
            for (std::size_t k = 0; k < b.dim[g.inv[x]]; ++k)
                a.invol.at(off[g.inv[x]] + k, off[x] + i) = b.invol[x].at(k, i);
        for (std::size_t y = 0; y < g.n_arrows; ++y) {
            if (!g.composable(x, y)) continue;
            std::size_t xy = g.comp(x, y);
            const Matrix& m = b.mult_at(x, y);
            for (std::size_t i = 0; i < b.dim[x]; ++i)
                for (std::size_t j = 0; j < b.dim[y]; ++j)
                    for (std::size_t k = 0; k < b.dim[xy]; ++k)
                        a.mult[off[x] + i][off[y] + j][off[xy] + k] =
                            m.at(k, i * b.dim[y] + j);
        }
    }
    return a;
}

// Fiberwise axioms plus the global criterion on the section algebra.  The
// section-level trace form being positive definite rules out nonzero elements
// with v* v = 0, which the ideal machinery depends on.
inline ValidationReport validate_bundle_with_sections(const FellBundle& b) {
    ValidationReport rep = validate_bundle(b);
    if (!rep.empty()) return rep;
    StarAlgebra tot = total_algebra(b);
    ValidationReport sub;
    if (!cstar_criterion(tot, sub))
        for (const Violation& v : sub)
            rep.push_back({"bundle/sections", "[" + v.code + "] " + v.message});
    return rep;
}

// ---------------------------------------------------------------------------
// Structural comparison and isomorphism certificates.
// ---------------------------------------------------------------------------

inline bool same_presentation(const FellBundle& a, const FellBundle& b) {
    const FiniteGroupoid& p = *a.gpd;
    const FiniteGroupoid& q = *b.gpd;
    if (p.n_arrows != q.n_arrows || p.n_objects != q.n_objects) return false;
    if (p.src != q.src || p.rng != q.rng || p.inv != q.inv ||
        p.comp_table != q.comp_table || p.unit_arrow != q.unit_arrow)
        return false;
    if (a.dim != b.dim) return false;
    for (std::size_t x = 0; x < p.n_arrows; ++x) {
        if (!(a.invol[x] == b.invol[x])) return false;
        for (std::size_t y = 0; y < p.n_arrows; ++y)
            if (!(a.mult[x * p.n_arrows + y] == b.mult[x * p.n_arrows + y]))
                return false;
    }
    return true;
}

inline void assert_same_presentation(const FellBundle& a, const FellBundle& b,
                                     const std::string& what) {
    if (!same_presentation(a, b))
        throw Error("presentations differ: " + what);
}

// Isomorphism along an arrow bijection of the bases with linear fiber maps
// u[g] : A_g -> B_{map(g)}.
inline bool bundles_isomorphic_via(const FellBundle& a, const FellBundle& b,
                                   const std::vector<std::size_t>& arrow_map,
                                   const std::vector<Matrix>& u) {
    const FiniteGroupoid& p = *a.gpd;
    if (!groupoids_isomorphic_via(p, *b.gpd, arrow_map)) return false;
    if (u.size() != p.n_arrows) return false;
    for (std::size_t x = 0; x < p.n_arrows; ++x) {
        if (u[x].rows() != b.dim[arrow_map[x]] || u[x].cols() != a.dim[x])
            return false;
        Matrix r = u[x];
        if (rref_in_place(r) != u[x].cols()) return false;
        if (!(u[p.inv[x]] * a.invol[x] == b.invol[arrow_map[x]] * u[x].conj()))
            return false;
    }
    for (std::size_t x = 0; x < p.n_arrows; ++x)
        for (std::size_t y = 0; y < p.n_arrows; ++y) {
            if (!p.composable(x, y)) continue;
            std::size_t xy = p.comp(x, y);
            if (!(u[xy] * a.mult_at(x, y) ==
                  b.mult_at(arrow_map[x], arrow_map[y]) * kron(u[x], u[y])))
                return false;
        }
    return true;
}

// Re-indexing isomorphism with identity fiber maps.
inline bool bundles_isomorphic_via(const FellBundle& a, const FellBundle& b,
                                   const std::vector<std::size_t>& arrow_map) {
    std::vector<Matrix> u;
    for (std::size_t x = 0; x < a.gpd->n_arrows; ++x)
        u.push_back(Matrix::identity(a.dim[x]));
    return bundles_isomorphic_via(a, b, arrow_map, u);
}

}  // namespace fellb
