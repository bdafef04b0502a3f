#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fellb/star_algebra.hpp"

namespace fellb {

// ---------------------------------------------------------------------------
// Finite groupoid with explicit tables. Composition comp(g, h) = g after h,
// defined exactly when src(g) = rng(h).
// ---------------------------------------------------------------------------

struct FiniteGroupoid {
    std::size_t n_arrows = 0, n_objects = 0;
    std::vector<std::size_t> src, rng, inv;
    std::vector<std::ptrdiff_t> comp_table;      // n_arrows^2, -1 when undefined
    std::vector<std::size_t> unit_arrow;         // object -> its unit arrow
    std::vector<std::ptrdiff_t> unit_object;     // arrow -> object, -1 if not a unit
    std::vector<std::string> arrow_label, object_label;

    bool composable(std::size_t g, std::size_t h) const { return src[g] == rng[h]; }
    std::ptrdiff_t comp_raw(std::size_t g, std::size_t h) const {
        return comp_table[g * n_arrows + h];
    }
    std::size_t comp(std::size_t g, std::size_t h) const {
        std::ptrdiff_t c = comp_raw(g, h);
        if (c < 0)
            throw InvalidInstance("composition undefined: " + arrow_label[g] + " . " +
                                  arrow_label[h]);
        return static_cast<std::size_t>(c);
    }
    bool is_unit(std::size_t a) const { return unit_object[a] >= 0; }

    void set_comp(std::size_t g, std::size_t h, std::size_t gh) {
        comp_table[g * n_arrows + h] = static_cast<std::ptrdiff_t>(gh);
    }
};

inline ValidationReport validate_groupoid(const FiniteGroupoid& g) {
    ValidationReport rep;
    auto bail = [&rep](const std::string& code, const std::string& msg) {
        rep.push_back({code, msg});
    };
    std::size_t n = g.n_arrows, m = g.n_objects;
    if (g.src.size() != n || g.rng.size() != n || g.inv.size() != n ||
        g.comp_table.size() != n * n || g.unit_arrow.size() != m ||
        g.unit_object.size() != n || g.arrow_label.size() != n ||
        g.object_label.size() != m) {
        bail("groupoid/shape", "table sizes are inconsistent");
        return rep;
    }
    for (std::size_t a = 0; a < n; ++a) {
        if (g.src[a] >= m || g.rng[a] >= m) {
            bail("groupoid/range", "src/rng out of range at arrow " + g.arrow_label[a]);
            return rep;
        }
        if (g.inv[a] >= n) {
            bail("groupoid/range", "inv out of range at arrow " + g.arrow_label[a]);
            return rep;
        }
    }
    for (std::size_t u = 0; u < m; ++u) {
        std::size_t e = g.unit_arrow[u];
        if (e >= n || g.unit_object[e] != static_cast<std::ptrdiff_t>(u)) {
            bail("groupoid/units", "unit table broken at object " + g.object_label[u]);
            return rep;
        }
        if (g.src[e] != u || g.rng[e] != u)
            bail("groupoid/units",
                 "unit arrow of object " + g.object_label[u] + " is not a loop at it");
    }
    for (std::size_t a = 0; a < n; ++a) {
        std::ptrdiff_t u = g.unit_object[a];
        if (u >= 0 && g.unit_arrow[static_cast<std::size_t>(u)] != a)
            bail("groupoid/units", "arrow " + g.arrow_label[a] + " wrongly marked unit");
    }
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            std::ptrdiff_t c = g.comp_raw(a, b);
            bool want = g.composable(a, b);
            if (want != (c >= 0)) {
                bail("groupoid/composition",
                     "composition defined/undefined mismatch at " + g.arrow_label[a] +
                         " . " + g.arrow_label[b]);
                continue;
            }
            if (c < 0) continue;
            auto cc = static_cast<std::size_t>(c);
            if (cc >= n) {
                bail("groupoid/range", "composition out of range");
                return rep;
            }
            if (g.src[cc] != g.src[b] || g.rng[cc] != g.rng[a])
                bail("groupoid/composition",
                     "endpoints of " + g.arrow_label[a] + " . " + g.arrow_label[b] +
                         " are wrong");
        }
    if (!rep.empty()) return rep;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            if (!g.composable(a, b)) continue;
            std::size_t ab = g.comp(a, b);
            for (std::size_t c = 0; c < n; ++c) {
                if (!g.composable(b, c)) continue;
                std::size_t bc = g.comp(b, c);
                if (g.comp_raw(ab, c) != g.comp_raw(a, bc)) {
                    bail("groupoid/associativity",
                         "(" + g.arrow_label[a] + " " + g.arrow_label[b] + ") " +
                             g.arrow_label[c] + " != " + g.arrow_label[a] + " (" +
                             g.arrow_label[b] + " " + g.arrow_label[c] + ")");
                    if (rep.size() > 8) return rep;
                }
            }
        }
    for (std::size_t a = 0; a < n; ++a) {
        std::size_t e_r = g.unit_arrow[g.rng[a]], e_s = g.unit_arrow[g.src[a]];
        if (g.comp_raw(e_r, a) != static_cast<std::ptrdiff_t>(a) ||
            g.comp_raw(a, e_s) != static_cast<std::ptrdiff_t>(a))
            bail("groupoid/units", "units do not act trivially on " + g.arrow_label[a]);
    }
    for (std::size_t a = 0; a < n; ++a) {
        std::size_t ia = g.inv[a];
        if (g.inv[ia] != a)
            bail("groupoid/inverses", "inv is not involutive at " + g.arrow_label[a]);
        if (g.src[ia] != g.rng[a] || g.rng[ia] != g.src[a])
            bail("groupoid/inverses",
                 "inv swaps endpoints incorrectly at " + g.arrow_label[a]);
        if (g.comp_raw(a, ia) != static_cast<std::ptrdiff_t>(g.unit_arrow[g.rng[a]]) ||
            g.comp_raw(ia, a) != static_cast<std::ptrdiff_t>(g.unit_arrow[g.src[a]]))
            bail("groupoid/inverses",
                 g.arrow_label[a] + " composed with its inverse is not a unit");
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Builders.
// ---------------------------------------------------------------------------

inline FiniteGroupoid group_from_table(const std::vector<std::string>& labels,
                                       const std::vector<std::vector<std::size_t>>& table,
                                       std::size_t unit_index,
                                       const std::string& object_label = "*") {
    std::size_t n = labels.size();
    FiniteGroupoid g;
    g.n_arrows = n;
    g.n_objects = 1;
    g.src.assign(n, 0);
    g.rng.assign(n, 0);
    g.inv.assign(n, 0);
    g.comp_table.assign(n * n, -1);
    g.unit_arrow = {unit_index};
    g.unit_object.assign(n, -1);
    g.unit_object[unit_index] = 0;
    g.arrow_label = labels;
    g.object_label = {object_label};
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) g.set_comp(a, b, table[a][b]);
        bool found = false;
        for (std::size_t b = 0; b < n; ++b)
            if (table[a][b] == unit_index && table[b][a] == unit_index) {
                g.inv[a] = b;
                found = true;
                break;
            }
        if (!found) throw InvalidInstance("group table has no inverse for " + labels[a]);
    }
    return g;
}

inline FiniteGroupoid point_groupoid() { return group_from_table({"e"}, {{0}}, 0); }

inline FiniteGroupoid cyclic_group(std::size_t n) {
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < n; ++k)
        labels.push_back(k == 0 ? "e" : (k == 1 ? "g" : "g" + std::to_string(k)));
    std::vector<std::vector<std::size_t>> table(n, std::vector<std::size_t>(n));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) table[a][b] = (a + b) % n;
    return group_from_table(labels, table, 0);
}

// Klein four-group {e, a, b, ab}.
inline FiniteGroupoid klein_group() {
    auto x = [](std::size_t k, std::size_t l) { return (k ^ l); };
    std::vector<std::vector<std::size_t>> table(4, std::vector<std::size_t>(4));
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t l = 0; l < 4; ++l) table[k][l] = x(k, l);
    return group_from_table({"e", "a", "b", "ab"}, table, 0);
}

// Pair groupoid on n objects: arrows (i|j) from j to i, (i|j)(j|k) = (i|k).
inline FiniteGroupoid pair_groupoid(std::size_t n) {
    FiniteGroupoid g;
    g.n_arrows = n * n;
    g.n_objects = n;
    auto id = [n](std::size_t i, std::size_t j) { return i * n + j; };
    g.src.resize(n * n);
    g.rng.resize(n * n);
    g.inv.resize(n * n);
    g.comp_table.assign(n * n * n * n, -1);
    g.unit_arrow.resize(n);
    g.unit_object.assign(n * n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        g.object_label.push_back(std::to_string(i + 1));
        g.unit_arrow[i] = id(i, i);
        g.unit_object[id(i, i)] = static_cast<std::ptrdiff_t>(i);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            g.src[id(i, j)] = j;
            g.rng[id(i, j)] = i;
            g.arrow_label.push_back("(" + std::to_string(i + 1) + "|" +
                                    std::to_string(j + 1) + ")");
            g.inv[id(i, j)] = id(j, i);
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) g.set_comp(id(i, j), id(j, k), id(i, k));
    return g;
}

inline FiniteGroupoid opposite_groupoid(const FiniteGroupoid& g) {
    FiniteGroupoid o = g;
    std::swap(o.src, o.rng);
    for (std::size_t a = 0; a < g.n_arrows; ++a)
        for (std::size_t b = 0; b < g.n_arrows; ++b)
            o.comp_table[a * g.n_arrows + b] = g.comp_raw(b, a);
    return o;
}

// Structure-preserving arrow bijection test (same object count assumed via
// the induced object map; used for the on-the-nose identifications).
inline bool groupoids_isomorphic_via(const FiniteGroupoid& a, const FiniteGroupoid& b,
                                     const std::vector<std::size_t>& arrow_map) {
    if (a.n_arrows != b.n_arrows || arrow_map.size() != a.n_arrows) return false;
    std::vector<bool> hit(b.n_arrows, false);
    for (std::size_t x : arrow_map) {
        if (x >= b.n_arrows || hit[x]) return false;
        hit[x] = true;
    }
    if (a.n_objects != b.n_objects) return false;
    std::vector<std::ptrdiff_t> obj_map(a.n_objects, -1);
    for (std::size_t g = 0; g < a.n_arrows; ++g) {
        std::size_t s = a.src[g], t = b.src[arrow_map[g]];
        if (obj_map[s] < 0)
            obj_map[s] = static_cast<std::ptrdiff_t>(t);
        else if (obj_map[s] != static_cast<std::ptrdiff_t>(t))
            return false;
        std::size_t r = a.rng[g], tr = b.rng[arrow_map[g]];
        if (obj_map[r] < 0)
            obj_map[r] = static_cast<std::ptrdiff_t>(tr);
        else if (obj_map[r] != static_cast<std::ptrdiff_t>(tr))
            return false;
    }
    for (std::size_t g = 0; g < a.n_arrows; ++g) {
        if (arrow_map[a.inv[g]] != b.inv[arrow_map[g]]) return false;
        for (std::size_t h = 0; h < a.n_arrows; ++h) {
            std::ptrdiff_t c = a.comp_raw(g, h);
            std::ptrdiff_t d = b.comp_raw(arrow_map[g], arrow_map[h]);
            if ((c < 0) != (d < 0)) return false;
            if (c >= 0 && arrow_map[static_cast<std::size_t>(c)] !=
                              static_cast<std::size_t>(d))
                return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Subgroupoids (re-indexed views, closed under comp and inv).
// ---------------------------------------------------------------------------

struct Subgroupoid {
    std::shared_ptr<const FiniteGroupoid> parent;
    std::vector<std::size_t> arrows;              // sorted parent ids
    std::vector<std::ptrdiff_t> from_parent;      // parent arrow -> sub arrow
    std::vector<std::size_t> object_to_parent;    // sub object -> parent object
    std::vector<std::ptrdiff_t> object_from_parent;
    FiniteGroupoid gpd;

    bool wide() const { return object_to_parent.size() == parent->n_objects; }
};

inline Subgroupoid make_subgroupoid(std::shared_ptr<const FiniteGroupoid> parent,
                                    std::vector<std::size_t> arrow_subset) {
    std::sort(arrow_subset.begin(), arrow_subset.end());
    arrow_subset.erase(std::unique(arrow_subset.begin(), arrow_subset.end()),
                       arrow_subset.end());
    const FiniteGroupoid& p = *parent;
    for (std::size_t a : arrow_subset)
        if (a >= p.n_arrows) throw InvalidInstance("subgroupoid arrow out of range");
    std::vector<std::ptrdiff_t> from_parent(p.n_arrows, -1);
    for (std::size_t k = 0; k < arrow_subset.size(); ++k)
        from_parent[arrow_subset[k]] = static_cast<std::ptrdiff_t>(k);
    for (std::size_t a : arrow_subset) {
        if (from_parent[p.inv[a]] < 0)
            throw InvalidInstance("subgroupoid not closed under inverse at " +
                                  p.arrow_label[a]);
        for (std::size_t b : arrow_subset) {
            std::ptrdiff_t c = p.comp_raw(a, b);
            if (c >= 0 && from_parent[static_cast<std::size_t>(c)] < 0)
                throw InvalidInstance("subgroupoid not closed under composition at " +
                                      p.arrow_label[a] + " . " + p.arrow_label[b]);
        }
        // Units of touched objects arise as a . a^-1, so closure brings them in.
        if (from_parent[p.unit_arrow[p.rng[a]]] < 0 ||
            from_parent[p.unit_arrow[p.src[a]]] < 0)
            throw InvalidInstance("subgroupoid misses a unit at an endpoint of " +
                                  p.arrow_label[a]);
    }
    Subgroupoid s;
    s.parent = parent;
    s.arrows = arrow_subset;
    s.from_parent = std::move(from_parent);
    std::vector<bool> touched(p.n_objects, false);
    for (std::size_t a : s.arrows) touched[p.src[a]] = touched[p.rng[a]] = true;
    s.object_from_parent.assign(p.n_objects, -1);
    for (std::size_t u = 0; u < p.n_objects; ++u)
        if (touched[u]) {
            s.object_from_parent[u] = static_cast<std::ptrdiff_t>(s.object_to_parent.size());
            s.object_to_parent.push_back(u);
        }
    FiniteGroupoid& g = s.gpd;
    g.n_arrows = s.arrows.size();
    g.n_objects = s.object_to_parent.size();
    g.comp_table.assign(g.n_arrows * g.n_arrows, -1);
    g.unit_arrow.resize(g.n_objects);
    g.unit_object.assign(g.n_arrows, -1);
    for (std::size_t k = 0; k < g.n_arrows; ++k) {
        std::size_t a = s.arrows[k];
        g.src.push_back(static_cast<std::size_t>(s.object_from_parent[p.src[a]]));
        g.rng.push_back(static_cast<std::size_t>(s.object_from_parent[p.rng[a]]));
        g.inv.push_back(static_cast<std::size_t>(s.from_parent[p.inv[a]]));
        g.arrow_label.push_back(p.arrow_label[a]);
    }
    for (std::size_t u = 0; u < g.n_objects; ++u) {
        std::size_t pu = s.object_to_parent[u];
        g.object_label.push_back(p.object_label[pu]);
        g.unit_arrow[u] = static_cast<std::size_t>(s.from_parent[p.unit_arrow[pu]]);
        g.unit_object[g.unit_arrow[u]] = static_cast<std::ptrdiff_t>(u);
    }
    for (std::size_t k = 0; k < g.n_arrows; ++k)
        for (std::size_t l = 0; l < g.n_arrows; ++l) {
            std::ptrdiff_t c = p.comp_raw(s.arrows[k], s.arrows[l]);
            if (c >= 0)
                g.set_comp(k, l,
                           static_cast<std::size_t>(
                               s.from_parent[static_cast<std::size_t>(c)]));
        }
    return s;
}

inline Subgroupoid units_subgroupoid(std::shared_ptr<const FiniteGroupoid> parent) {
    std::vector<std::size_t> arrows;
    for (std::size_t u = 0; u < parent->n_objects; ++u)
        arrows.push_back(parent->unit_arrow[u]);
    return make_subgroupoid(parent, arrows);
}

// ---------------------------------------------------------------------------
// Left action of a groupoid on a finite space, with moment map. The optional
// `translate` is a second, commuting left action (used as the translation
// structure on quotient spaces); it must preserve the main moment map.
// ---------------------------------------------------------------------------

struct SpaceAction {
    std::shared_ptr<const FiniteGroupoid> gpd;
    std::size_t n_points = 0;
    std::vector<std::size_t> moment;                 // point -> object
    std::vector<std::vector<std::ptrdiff_t>> act;    // act[arrow][point]
    std::vector<std::string> point_label;

    struct Translate {
        std::shared_ptr<const FiniteGroupoid> gpd;
        std::vector<std::size_t> moment;
        std::vector<std::vector<std::ptrdiff_t>> act;
    };
    std::optional<Translate> translate;

    std::size_t apply(std::size_t arrow, std::size_t point) const {
        std::ptrdiff_t r = act[arrow][point];
        if (r < 0)
            throw InvalidInstance("action undefined: " + gpd->arrow_label[arrow] +
                                  " on " + point_label[point]);
        return static_cast<std::size_t>(r);
    }
};

namespace detail {

inline void validate_left_action_tables(
    const FiniteGroupoid& g, std::size_t n_points,
    const std::vector<std::size_t>& moment,
    const std::vector<std::vector<std::ptrdiff_t>>& act,
    const std::vector<std::string>& point_label, const std::string& prefix,
    ValidationReport& rep) {
    if (moment.size() != n_points || act.size() != g.n_arrows) {
        rep.push_back({prefix + "/shape", "action tables have wrong size"});
        return;
    }
    for (const auto& row : act)
        if (row.size() != n_points) {
            rep.push_back({prefix + "/shape", "action row has wrong size"});
            return;
        }
    for (std::size_t t = 0; t < n_points; ++t)
        if (moment[t] >= g.n_objects) {
            rep.push_back({prefix + "/range", "moment out of range"});
            return;
        }
    for (std::size_t k = 0; k < g.n_arrows; ++k)
        for (std::size_t t = 0; t < n_points; ++t) {
            bool want = (g.src[k] == moment[t]);
            std::ptrdiff_t r = act[k][t];
            if (want != (r >= 0)) {
                rep.push_back({prefix + "/domain",
                               "definedness mismatch for " + g.arrow_label[k] + " on " +
                                   point_label[t]});
                continue;
            }
            if (r < 0) continue;
            if (static_cast<std::size_t>(r) >= n_points) {
                rep.push_back({prefix + "/range", "action value out of range"});
                return;
            }
            if (moment[static_cast<std::size_t>(r)] != g.rng[k])
                rep.push_back({prefix + "/moment",
                               "moment of " + g.arrow_label[k] + "." + point_label[t] +
                                   " is not the range of the arrow"});
        }
    for (std::size_t u = 0; u < g.n_objects; ++u) {
        std::size_t e = g.unit_arrow[u];
        for (std::size_t t = 0; t < n_points; ++t)
            if (moment[t] == u && act[e][t] != static_cast<std::ptrdiff_t>(t))
                rep.push_back(
                    {prefix + "/units", "unit does not fix " + point_label[t]});
    }
    for (std::size_t k = 0; k < g.n_arrows; ++k)
        for (std::size_t l = 0; l < g.n_arrows; ++l) {
            std::ptrdiff_t kl = g.comp_raw(k, l);
            if (kl < 0) continue;
            for (std::size_t t = 0; t < n_points; ++t) {
                if (act[l][t] < 0) continue;
                std::ptrdiff_t lhs = act[static_cast<std::size_t>(kl)][t];
                std::ptrdiff_t rhs = act[k][static_cast<std::size_t>(act[l][t])];
                if (lhs != rhs)
                    rep.push_back({prefix + "/compatibility",
                                   "(" + g.arrow_label[k] + " " + g.arrow_label[l] +
                                       ")." + point_label[t] + " != " +
                                       g.arrow_label[k] + ".(" + g.arrow_label[l] +
                                       "." + point_label[t] + ")"});
            }
        }
}

}  // namespace detail

inline ValidationReport validate_space_action(const SpaceAction& a) {
    ValidationReport rep;
    if (a.point_label.size() != a.n_points) {
        rep.push_back({"action/shape", "point labels have wrong size"});
        return rep;
    }
    detail::validate_left_action_tables(*a.gpd, a.n_points, a.moment, a.act,
                                        a.point_label, "action", rep);
    if (!rep.empty()) return rep;
    if (a.translate) {
        const auto& tr = *a.translate;
        detail::validate_left_action_tables(*tr.gpd, a.n_points, tr.moment, tr.act,
                                            a.point_label, "translate", rep);
        if (!rep.empty()) return rep;
        for (std::size_t x = 0; x < tr.gpd->n_arrows; ++x)
            for (std::size_t t = 0; t < a.n_points; ++t) {
                if (tr.act[x][t] < 0) continue;
                auto xt = static_cast<std::size_t>(tr.act[x][t]);
                if (a.moment[xt] != a.moment[t])
                    rep.push_back({"translate/moment",
                                   "translation moves the main moment of " +
                                       a.point_label[t]});
                for (std::size_t k = 0; k < a.gpd->n_arrows; ++k) {
                    std::ptrdiff_t kt = a.act[k][t];
                    if (kt < 0) continue;
                    std::ptrdiff_t lhs = a.act[k][xt];
                    std::ptrdiff_t rhs = tr.act[x][static_cast<std::size_t>(kt)];
                    if (lhs < 0 || rhs < 0 || lhs != rhs)
                        rep.push_back({"translate/commute",
                                       "actions fail to commute at " +
                                           a.point_label[t]});
                }
            }
    }
    return rep;
}

inline bool space_action_free(const SpaceAction& a, std::string* witness = nullptr) {
    for (std::size_t k = 0; k < a.gpd->n_arrows; ++k) {
        if (a.gpd->is_unit(k)) continue;
        for (std::size_t t = 0; t < a.n_points; ++t)
            if (a.act[k][t] == static_cast<std::ptrdiff_t>(t)) {
                if (witness)
                    *witness = a.gpd->arrow_label[k] + " fixes " + a.point_label[t];
                return false;
            }
    }
    return true;
}

// Left translation of a groupoid on its own arrows (moment = rng), carrying
// the commuting right-translation structure x.t = t x^-1 as `translate`.
inline SpaceAction translation_space(std::shared_ptr<const FiniteGroupoid> g) {
    SpaceAction a;
    a.gpd = g;
    a.n_points = g->n_arrows;
    a.point_label = g->arrow_label;
    a.moment.resize(g->n_arrows);
    for (std::size_t t = 0; t < g->n_arrows; ++t) a.moment[t] = g->rng[t];
    a.act.assign(g->n_arrows, std::vector<std::ptrdiff_t>(g->n_arrows, -1));
    for (std::size_t k = 0; k < g->n_arrows; ++k)
        for (std::size_t t = 0; t < g->n_arrows; ++t)
            a.act[k][t] = g->comp_raw(k, t);
    SpaceAction::Translate tr;
    tr.gpd = g;
    tr.moment.resize(g->n_arrows);
    for (std::size_t t = 0; t < g->n_arrows; ++t) tr.moment[t] = g->src[t];
    tr.act.assign(g->n_arrows, std::vector<std::ptrdiff_t>(g->n_arrows, -1));
    for (std::size_t x = 0; x < g->n_arrows; ++x)
        for (std::size_t t = 0; t < g->n_arrows; ++t)
            tr.act[x][t] = g->comp_raw(t, g->inv[x]);
    a.translate = std::move(tr);
    return a;
}

// ---------------------------------------------------------------------------
// Action of a groupoid G on a groupoid H by partial isomorphisms: an anchor
// rho on objects and, for every G-arrow x, an isomorphism sigma_x from the
// fiber over src(x) onto the fiber over rng(x).
// ---------------------------------------------------------------------------

struct IsoAction {
    std::shared_ptr<const FiniteGroupoid> g, h;
    std::vector<std::size_t> rho;                       // H-object -> G-object
    std::vector<std::vector<std::ptrdiff_t>> sigma;     // sigma[x][h-arrow]

    std::size_t rho_arrow(std::size_t a) const { return rho[h->src[a]]; }

    std::size_t sigma_apply(std::size_t x, std::size_t a) const {
        std::ptrdiff_t r = sigma[x][a];
        if (r < 0)
            throw InvalidInstance("sigma undefined: " + g->arrow_label[x] + " on " +
                                  h->arrow_label[a]);
        return static_cast<std::size_t>(r);
    }

    std::ptrdiff_t sigma_object(std::size_t x, std::size_t u) const {
        std::ptrdiff_t r = sigma[x][h->unit_arrow[u]];
        if (r < 0) return -1;
        return h->unit_object[static_cast<std::size_t>(r)];
    }
};

inline ValidationReport validate_iso_action(const IsoAction& a) {
    ValidationReport rep;
    const FiniteGroupoid& g = *a.g;
    const FiniteGroupoid& h = *a.h;
    if (a.rho.size() != h.n_objects || a.sigma.size() != g.n_arrows) {
        rep.push_back({"isoaction/shape", "tables have wrong size"});
        return rep;
    }
    for (std::size_t u = 0; u < h.n_objects; ++u)
        if (a.rho[u] >= g.n_objects) {
            rep.push_back({"isoaction/range", "rho out of range"});
            return rep;
        }
    for (std::size_t t = 0; t < h.n_arrows; ++t)
        if (a.rho[h.src[t]] != a.rho[h.rng[t]])
            rep.push_back({"isoaction/fiber",
                           "arrow " + h.arrow_label[t] + " is not fiber-preserving"});
    if (!rep.empty()) return rep;
    for (std::size_t x = 0; x < g.n_arrows; ++x) {
        if (a.sigma[x].size() != h.n_arrows) {
            rep.push_back({"isoaction/shape", "sigma row has wrong size"});
            return rep;
        }
        for (std::size_t t = 0; t < h.n_arrows; ++t) {
            bool want = (a.rho_arrow(t) == g.src[x]);
            std::ptrdiff_t r = a.sigma[x][t];
            if (want != (r >= 0)) {
                rep.push_back({"isoaction/domain",
                               "sigma definedness mismatch: " + g.arrow_label[x] +
                                   " on " + h.arrow_label[t]});
                continue;
            }
            if (r < 0) continue;
            if (static_cast<std::size_t>(r) >= h.n_arrows) {
                rep.push_back({"isoaction/range", "sigma out of range"});
                return rep;
            }
            if (a.rho_arrow(static_cast<std::size_t>(r)) != g.rng[x])
                rep.push_back({"isoaction/fiber",
                               "sigma_" + g.arrow_label[x] + " does not land over " +
                                   "the range object"});
        }
    }
    if (!rep.empty()) return rep;
    // Each sigma_x is injective on its fiber (hence bijective by counting).
    for (std::size_t x = 0; x < g.n_arrows; ++x) {
        std::vector<bool> hit(h.n_arrows, false);
        for (std::size_t t = 0; t < h.n_arrows; ++t) {
            std::ptrdiff_t r = a.sigma[x][t];
            if (r < 0) continue;
            if (hit[static_cast<std::size_t>(r)])
                rep.push_back({"isoaction/bijective",
                               "sigma_" + g.arrow_label[x] + " is not injective"});
            hit[static_cast<std::size_t>(r)] = true;
        }
        std::size_t domain = 0, image_fiber = 0;
        for (std::size_t t = 0; t < h.n_arrows; ++t) {
            if (a.rho_arrow(t) == g.src[x]) ++domain;
            if (a.rho_arrow(t) == g.rng[x]) ++image_fiber;
        }
        if (domain != image_fiber)
            rep.push_back({"isoaction/bijective",
                           "fibers over src and rng of " + g.arrow_label[x] +
                               " have different sizes"});
    }
    // Morphism property.
    for (std::size_t x = 0; x < g.n_arrows; ++x)
        for (std::size_t s = 0; s < h.n_arrows; ++s) {
            if (a.sigma[x][s] < 0) continue;
            auto xs = static_cast<std::size_t>(a.sigma[x][s]);
            if (a.sigma[x][h.inv[s]] != static_cast<std::ptrdiff_t>(h.inv[xs]))
                rep.push_back({"isoaction/morphism",
                               "sigma_" + g.arrow_label[x] +
                                   " does not respect inverses at " + h.arrow_label[s]});
            for (std::size_t t = 0; t < h.n_arrows; ++t) {
                if (a.sigma[x][t] < 0) continue;
                auto xt = static_cast<std::size_t>(a.sigma[x][t]);
                std::ptrdiff_t st = h.comp_raw(s, t);
                std::ptrdiff_t xst = h.comp_raw(xs, xt);
                if ((st < 0) != (xst < 0)) {
                    rep.push_back({"isoaction/morphism",
                                   "sigma_" + g.arrow_label[x] +
                                       " changes composability"});
                    continue;
                }
                if (st >= 0 &&
                    a.sigma[x][static_cast<std::size_t>(st)] != xst)
                    rep.push_back({"isoaction/morphism",
                                   "sigma_" + g.arrow_label[x] +
                                       " is not multiplicative at " + h.arrow_label[s] +
                                       " . " + h.arrow_label[t]});
            }
        }
    // Functoriality in x.
    for (std::size_t x = 0; x < g.n_arrows; ++x)
        for (std::size_t y = 0; y < g.n_arrows; ++y) {
            std::ptrdiff_t xy = g.comp_raw(x, y);
            if (xy < 0) continue;
            for (std::size_t t = 0; t < h.n_arrows; ++t) {
                if (a.sigma[y][t] < 0) {
                    if (a.sigma[static_cast<std::size_t>(xy)][t] >= 0)
                        rep.push_back({"isoaction/functorial", "domain mismatch"});
                    continue;
                }
                auto yt = static_cast<std::size_t>(a.sigma[y][t]);
                if (a.sigma[static_cast<std::size_t>(xy)][t] != a.sigma[x][yt])
                    rep.push_back({"isoaction/functorial",
                                   "sigma_{" + g.arrow_label[x] + " " +
                                       g.arrow_label[y] + "} != sigma_" +
                                       g.arrow_label[x] + " sigma_" +
                                       g.arrow_label[y] + " at " + h.arrow_label[t]});
            }
        }
    for (std::size_t u = 0; u < g.n_objects; ++u) {
        std::size_t e = g.unit_arrow[u];
        for (std::size_t t = 0; t < h.n_arrows; ++t)
            if (a.sigma[e][t] >= 0 && a.sigma[e][t] != static_cast<std::ptrdiff_t>(t))
                rep.push_back({"isoaction/units",
                               "sigma of a unit is not the identity at " +
                                   h.arrow_label[t]});
    }
    return rep;
}

inline bool iso_action_free_on_objects(const IsoAction& a, std::string* witness = nullptr) {
    for (std::size_t x = 0; x < a.g->n_arrows; ++x) {
        if (a.g->is_unit(x)) continue;
        for (std::size_t u = 0; u < a.h->n_objects; ++u)
            if (a.sigma_object(x, u) == static_cast<std::ptrdiff_t>(u)) {
                if (witness)
                    *witness = a.g->arrow_label[x] + " fixes object " +
                               a.h->object_label[u];
                return false;
            }
    }
    return true;
}

// Trivial action of a one-object groupoid (a group) on h: rho constant,
// sigma_x identity for every x.
inline IsoAction trivial_iso_action(std::shared_ptr<const FiniteGroupoid> g,
                                    std::shared_ptr<const FiniteGroupoid> h) {
    if (g->n_objects != 1)
        throw InvalidInstance("trivial_iso_action: acting groupoid must be a group");
    IsoAction a;
    a.g = g;
    a.h = h;
    a.rho.assign(h->n_objects, 0);
    a.sigma.assign(g->n_arrows, std::vector<std::ptrdiff_t>(h->n_arrows));
    for (std::size_t x = 0; x < g->n_arrows; ++x)
        for (std::size_t t = 0; t < h->n_arrows; ++t)
            a.sigma[x][t] = static_cast<std::ptrdiff_t>(t);
    return a;
}

// ---------------------------------------------------------------------------
// Semidirect groupoid H x| G of an iso-action: arrows (h, x) with
// rho(rng-fiber of h) = rng(x), composition (h, x)(k, y) = (h sigma_x(k), xy),
// units the H-objects.
// ---------------------------------------------------------------------------

struct SemidirectGroupoid {
    std::shared_ptr<const IsoAction> action;
    std::shared_ptr<FiniteGroupoid> gpd;
    std::vector<std::pair<std::size_t, std::size_t>> parts;     // arrow -> (h, x)
    std::vector<std::vector<std::ptrdiff_t>> index;             // [h][x] -> arrow
    std::vector<std::size_t> embed;                             // H-arrow -> arrow

    std::size_t at(std::size_t h, std::size_t x) const {
        std::ptrdiff_t r = index[h][x];
        if (r < 0) throw InvalidInstance("no semidirect arrow for the given pair");
        return static_cast<std::size_t>(r);
    }
};

inline SemidirectGroupoid semidirect_groupoid(std::shared_ptr<const IsoAction> act) {
    const FiniteGroupoid& g = *act->g;
    const FiniteGroupoid& h = *act->h;
    SemidirectGroupoid sd;
    sd.action = act;
    sd.index.assign(h.n_arrows, std::vector<std::ptrdiff_t>(g.n_arrows, -1));
    for (std::size_t a = 0; a < h.n_arrows; ++a)
        for (std::size_t x = 0; x < g.n_arrows; ++x)
            if (act->rho_arrow(a) == g.rng[x]) {
                sd.index[a][x] = static_cast<std::ptrdiff_t>(sd.parts.size());
                sd.parts.emplace_back(a, x);
            }
    auto gpd = std::make_shared<FiniteGroupoid>();
    FiniteGroupoid& m = *gpd;
    std::size_t n = sd.parts.size();
    m.n_arrows = n;
    m.n_objects = h.n_objects;
    m.object_label = h.object_label;
    m.src.resize(n);
    m.rng.resize(n);
    m.inv.resize(n);
    m.comp_table.assign(n * n, -1);
    m.unit_arrow.resize(m.n_objects);
    m.unit_object.assign(n, -1);
    for (std::size_t k = 0; k < n; ++k) {
        auto [a, x] = sd.parts[k];
        m.arrow_label.push_back("(" + h.arrow_label[a] + "|" + g.arrow_label[x] + ")");
        m.rng[k] = h.rng[a];
        std::ptrdiff_t u = act->sigma_object(g.inv[x], h.src[a]);
        if (u < 0) throw InvalidInstance("semidirect source transport undefined");
        m.src[k] = static_cast<std::size_t>(u);
        std::size_t ha_inv = h.inv[a];
        std::size_t inv_a = act->sigma_apply(g.inv[x], ha_inv);
        m.inv[k] = sd.at(inv_a, g.inv[x]);
    }
    for (std::size_t u = 0; u < h.n_objects; ++u) {
        std::size_t e = sd.at(h.unit_arrow[u], g.unit_arrow[act->rho[u]]);
        m.unit_arrow[u] = e;
        m.unit_object[e] = static_cast<std::ptrdiff_t>(u);
    }
    for (std::size_t k = 0; k < n; ++k) {
        auto [a, x] = sd.parts[k];
        for (std::size_t l = 0; l < n; ++l) {
            auto [b, y] = sd.parts[l];
            if (!g.composable(x, y)) continue;
            std::ptrdiff_t sb = act->sigma[x][b];
            if (sb < 0) continue;
            std::ptrdiff_t ab = h.comp_raw(a, static_cast<std::size_t>(sb));
            if (ab < 0) continue;
            m.set_comp(k, l,
                       sd.at(static_cast<std::size_t>(ab), g.comp(x, y)));
        }
    }
    sd.gpd = gpd;
    sd.embed.resize(h.n_arrows);
    for (std::size_t a = 0; a < h.n_arrows; ++a)
        sd.embed[a] = sd.at(a, g.unit_arrow[act->rho_arrow(a)]);
    return sd;
}

// ---------------------------------------------------------------------------
// Action groupoid K |x T of a space action: arrows (k, t) with k.t defined,
// from t to k.t, composition (k', k.t)(k, t) = (k'k, t).
// ---------------------------------------------------------------------------

struct ActionGroupoid {
    std::shared_ptr<const SpaceAction> action;
    std::shared_ptr<FiniteGroupoid> gpd;
    std::vector<std::pair<std::size_t, std::size_t>> parts;    // arrow -> (k, t)
    std::vector<std::vector<std::ptrdiff_t>> index;            // [k][t] -> arrow

    std::size_t at(std::size_t k, std::size_t t) const {
        std::ptrdiff_t r = index[k][t];
        if (r < 0) throw InvalidInstance("no action-groupoid arrow for the given pair");
        return static_cast<std::size_t>(r);
    }
};

inline ActionGroupoid action_groupoid(std::shared_ptr<const SpaceAction> act) {
    const FiniteGroupoid& k = *act->gpd;
    ActionGroupoid ag;
    ag.action = act;
    ag.index.assign(k.n_arrows, std::vector<std::ptrdiff_t>(act->n_points, -1));
    for (std::size_t a = 0; a < k.n_arrows; ++a)
        for (std::size_t t = 0; t < act->n_points; ++t)
            if (act->act[a][t] >= 0) {
                ag.index[a][t] = static_cast<std::ptrdiff_t>(ag.parts.size());
                ag.parts.emplace_back(a, t);
            }
    auto gpd = std::make_shared<FiniteGroupoid>();
    FiniteGroupoid& m = *gpd;
    std::size_t n = ag.parts.size();
    m.n_arrows = n;
    m.n_objects = act->n_points;
    m.object_label = act->point_label;
    m.src.resize(n);
    m.rng.resize(n);
    m.inv.resize(n);
    m.comp_table.assign(n * n, -1);
    m.unit_arrow.resize(m.n_objects);
    m.unit_object.assign(n, -1);
    for (std::size_t a = 0; a < n; ++a) {
        auto [kk, t] = ag.parts[a];
        m.arrow_label.push_back("(" + k.arrow_label[kk] + "|" + act->point_label[t] +
                                ")");
        m.src[a] = t;
        m.rng[a] = act->apply(kk, t);
        m.inv[a] = ag.at(k.inv[kk], m.rng[a]);
    }
    for (std::size_t t = 0; t < act->n_points; ++t) {
        std::size_t e = ag.at(k.unit_arrow[act->moment[t]], t);
        m.unit_arrow[t] = e;
        m.unit_object[e] = static_cast<std::ptrdiff_t>(t);
    }
    for (std::size_t a = 0; a < n; ++a) {
        auto [k1, t1] = ag.parts[a];
        for (std::size_t b = 0; b < n; ++b) {
            auto [k2, t2] = ag.parts[b];
            if (t1 != static_cast<std::size_t>(act->act[k2][t2])) continue;
            std::ptrdiff_t kk = k.comp_raw(k1, k2);
            if (kk < 0) continue;
            m.set_comp(a, b, ag.at(static_cast<std::size_t>(kk), t2));
        }
    }
    ag.gpd = gpd;
    return ag;
}

// ---------------------------------------------------------------------------
// Canonical quotient of a semidirect groupoid M = H x| G by the embedded
// wide copy of H: points are the right-multiplication orbits m H, M acts on
// the left, and G translates on the right ([m].x = [m (unit, x)],
// exposed as the commuting left action x.t = t.x^-1).
// ---------------------------------------------------------------------------

struct QuotientPoints {
    std::vector<std::size_t> orbit_of;   // M-arrow -> point
    std::vector<std::size_t> rep;        // point -> least M-arrow
};

inline QuotientPoints right_orbits(const FiniteGroupoid& m,
                                   const std::vector<std::size_t>& sub_arrows) {
    QuotientPoints q;
    q.orbit_of.assign(m.n_arrows, m.n_arrows);
    for (std::size_t a = 0; a < m.n_arrows; ++a) {
        if (q.orbit_of[a] != m.n_arrows) continue;
        std::size_t id = q.rep.size();
        q.rep.push_back(a);
        std::vector<std::size_t> stack{a};
        q.orbit_of[a] = id;
        while (!stack.empty()) {
            std::size_t cur = stack.back();
            stack.pop_back();
            for (std::size_t h : sub_arrows) {
                std::ptrdiff_t next = m.comp_raw(cur, h);
                if (next < 0) continue;
                auto nx = static_cast<std::size_t>(next);
                if (q.orbit_of[nx] == m.n_arrows) {
                    q.orbit_of[nx] = id;
                    stack.push_back(nx);
                }
            }
        }
    }
    return q;
}

inline SpaceAction semidirect_quotient_space(const SemidirectGroupoid& sd) {
    const FiniteGroupoid& m = *sd.gpd;
    const FiniteGroupoid& g = *sd.action->g;
    const FiniteGroupoid& h = *sd.action->h;
    std::vector<std::size_t> emb(sd.embed.begin(), sd.embed.end());
    QuotientPoints q = right_orbits(m, emb);
    SpaceAction a;
    a.gpd = sd.gpd;
    a.n_points = q.rep.size();
    a.moment.resize(a.n_points);
    a.point_label.resize(a.n_points);
    for (std::size_t t = 0; t < a.n_points; ++t) {
        a.moment[t] = m.rng[q.rep[t]];
        a.point_label[t] = "[" + m.arrow_label[q.rep[t]] + "]";
    }
    a.act.assign(m.n_arrows, std::vector<std::ptrdiff_t>(a.n_points, -1));
    for (std::size_t k = 0; k < m.n_arrows; ++k)
        for (std::size_t t = 0; t < a.n_points; ++t) {
            std::ptrdiff_t c = m.comp_raw(k, q.rep[t]);
            if (c >= 0) a.act[k][t] = static_cast<std::ptrdiff_t>(
                q.orbit_of[static_cast<std::size_t>(c)]);
        }
    SpaceAction::Translate tr;
    tr.gpd = sd.action->g;
    tr.moment.resize(a.n_points);
    tr.act.assign(g.n_arrows, std::vector<std::ptrdiff_t>(a.n_points, -1));
    for (std::size_t t = 0; t < a.n_points; ++t) {
        std::size_t rep = q.rep[t];
        tr.moment[t] = g.src[sd.parts[rep].second];
        for (std::size_t x = 0; x < g.n_arrows; ++x) {
            if (g.src[x] != tr.moment[t]) continue;
            // t.x^-1: append the unit-over-src completion of x^-1.
            std::size_t u = m.src[rep];
            std::size_t y = g.inv[x];
            if (sd.action->rho[u] != g.rng[y]) continue;
            std::ptrdiff_t w = sd.index[h.unit_arrow[u]][y];
            if (w < 0) continue;
            std::ptrdiff_t c = m.comp_raw(rep, static_cast<std::size_t>(w));
            if (c >= 0)
                tr.act[x][t] = static_cast<std::ptrdiff_t>(
                    q.orbit_of[static_cast<std::size_t>(c)]);
        }
    }
    a.translate = std::move(tr);
    return a;
}

// ---------------------------------------------------------------------------
// Orbit groupoid G\H of an iso-action that is free on objects; composition
// aligns representatives through the unique connecting G-arrow.
// ---------------------------------------------------------------------------

struct OrbitGroupoid {
    std::shared_ptr<const IsoAction> action;
    std::shared_ptr<FiniteGroupoid> gpd;
    std::vector<std::size_t> orbit_of_arrow, rep_arrow;
    std::vector<std::size_t> orbit_of_object, rep_object;
    // to_rep_x[a] = the G-arrow x with sigma_x(a) = rep of [a].
    std::vector<std::size_t> to_rep_x;
};

inline OrbitGroupoid orbit_groupoid(std::shared_ptr<const IsoAction> act) {
    const FiniteGroupoid& g = *act->g;
    const FiniteGroupoid& h = *act->h;
    std::string witness;
    if (!iso_action_free_on_objects(*act, &witness))
        throw InvalidInstance("orbit groupoid needs an action free on objects: " +
                              witness);
    OrbitGroupoid og;
    og.action = act;
    og.orbit_of_arrow.assign(h.n_arrows, h.n_arrows);
    og.to_rep_x.assign(h.n_arrows, 0);
    // from_rep[b] = y with sigma_y(rep) = b, maintained during the closure.
    std::vector<std::size_t> from_rep(h.n_arrows, 0);
    for (std::size_t a = 0; a < h.n_arrows; ++a) {
        if (og.orbit_of_arrow[a] != h.n_arrows) continue;
        std::size_t id = og.rep_arrow.size();
        og.rep_arrow.push_back(a);
        og.orbit_of_arrow[a] = id;
        from_rep[a] = g.unit_arrow[act->rho_arrow(a)];
        og.to_rep_x[a] = from_rep[a];
        std::vector<std::size_t> stack{a};
        while (!stack.empty()) {
            std::size_t cur = stack.back();
            stack.pop_back();
            for (std::size_t x = 0; x < g.n_arrows; ++x) {
                std::ptrdiff_t im = act->sigma[x][cur];
                if (im < 0) continue;
                auto b = static_cast<std::size_t>(im);
                if (og.orbit_of_arrow[b] != h.n_arrows) continue;
                og.orbit_of_arrow[b] = id;
                std::ptrdiff_t y = g.comp_raw(x, from_rep[cur]);
                if (y < 0) throw InvalidInstance("orbit transport not composable");
                from_rep[b] = static_cast<std::size_t>(y);
                og.to_rep_x[b] = g.inv[from_rep[b]];
                stack.push_back(b);
            }
        }
    }
    // Object orbits inherit ids from the orbits of unit arrows; sigma maps
    // units to units, so the least representative of such an orbit is a unit.
    og.orbit_of_object.assign(h.n_objects, h.n_objects);
    std::vector<std::ptrdiff_t> unit_orbit_to_object(og.rep_arrow.size(), -1);
    for (std::size_t u = 0; u < h.n_objects; ++u) {
        std::size_t oe = og.orbit_of_arrow[h.unit_arrow[u]];
        if (unit_orbit_to_object[oe] < 0) {
            std::size_t re = og.rep_arrow[oe];
            if (h.unit_object[re] < 0)
                throw InvalidInstance("orbit of a unit is not represented by a unit");
            unit_orbit_to_object[oe] = static_cast<std::ptrdiff_t>(og.rep_object.size());
            og.rep_object.push_back(static_cast<std::size_t>(h.unit_object[re]));
        }
        og.orbit_of_object[u] = static_cast<std::size_t>(unit_orbit_to_object[oe]);
    }
    auto gpd = std::make_shared<FiniteGroupoid>();
    FiniteGroupoid& q = *gpd;
    q.n_arrows = og.rep_arrow.size();
    q.n_objects = og.rep_object.size();
    q.src.resize(q.n_arrows);
    q.rng.resize(q.n_arrows);
    q.inv.resize(q.n_arrows);
    q.comp_table.assign(q.n_arrows * q.n_arrows, -1);
    q.unit_arrow.resize(q.n_objects);
    q.unit_object.assign(q.n_arrows, -1);
    for (std::size_t u = 0; u < q.n_objects; ++u) {
        q.object_label.push_back("[" + h.object_label[og.rep_object[u]] + "]");
        q.unit_arrow[u] = og.orbit_of_arrow[h.unit_arrow[og.rep_object[u]]];
        q.unit_object[q.unit_arrow[u]] = static_cast<std::ptrdiff_t>(u);
    }
    for (std::size_t a = 0; a < q.n_arrows; ++a) {
        std::size_t r = og.rep_arrow[a];
        q.arrow_label.push_back("[" + h.arrow_label[r] + "]");
        q.src[a] = og.orbit_of_object[h.src[r]];
        q.rng[a] = og.orbit_of_object[h.rng[r]];
        q.inv[a] = og.orbit_of_arrow[h.inv[r]];
    }
    for (std::size_t a = 0; a < q.n_arrows; ++a) {
        std::size_t ra = og.rep_arrow[a];
        for (std::size_t b = 0; b < q.n_arrows; ++b) {
            if (q.src[a] != q.rng[b]) continue;
            std::size_t rb = og.rep_arrow[b];
            // Unique x with sigma_x(rng(rb)) = src(ra), by object-freeness.
            std::ptrdiff_t found = -1;
            for (std::size_t x = 0; x < g.n_arrows; ++x)
                if (act->sigma_object(x, h.rng[rb]) ==
                    static_cast<std::ptrdiff_t>(h.src[ra])) {
                    found = static_cast<std::ptrdiff_t>(x);
                    break;
                }
            if (found < 0)
                throw InvalidInstance("orbit composition has no aligning arrow");
            std::size_t moved = act->sigma_apply(static_cast<std::size_t>(found), rb);
            std::ptrdiff_t c = h.comp_raw(ra, moved);
            if (c < 0) throw InvalidInstance("orbit composition failed to align");
            q.set_comp(a, b, og.orbit_of_arrow[static_cast<std::size_t>(c)]);
        }
    }
    og.gpd = gpd;
    return og;
}

// ---------------------------------------------------------------------------
// Equivalence space between two groupoids: Z carries a free left action of
// `left` and a free, commuting right action of `right`; the left moment map
// identifies Z/right with the left objects and the right moment map
// identifies left\Z with the right objects. The pairings recover the unique
// connecting arrows: lpair[z][w] = g with g.w = z (same right moment),
// rpair[z][w] = h with z.h = w (same left moment).
// ---------------------------------------------------------------------------

struct GroupoidEquivalence {
    std::shared_ptr<const FiniteGroupoid> left, right;
    std::size_t n_points = 0;
    std::vector<std::string> point_label;
    std::vector<std::size_t> lmoment;                 // point -> left object
    std::vector<std::size_t> rmoment;                 // point -> right object
    std::vector<std::vector<std::ptrdiff_t>> lact;    // [left arrow][z]
    std::vector<std::vector<std::ptrdiff_t>> ract;    // [z][right arrow]
    std::vector<std::vector<std::ptrdiff_t>> lpair;   // [z][w] -> left arrow
    std::vector<std::vector<std::ptrdiff_t>> rpair;   // [z][w] -> right arrow

    std::size_t lapply(std::size_t g, std::size_t z) const {
        std::ptrdiff_t r = lact[g][z];
        if (r < 0) throw InvalidInstance("left action undefined on the equivalence");
        return static_cast<std::size_t>(r);
    }
    std::size_t rapply(std::size_t z, std::size_t h) const {
        std::ptrdiff_t r = ract[z][h];
        if (r < 0) throw InvalidInstance("right action undefined on the equivalence");
        return static_cast<std::size_t>(r);
    }
    std::size_t lpair_at(std::size_t z, std::size_t w) const {
        std::ptrdiff_t r = lpair[z][w];
        if (r < 0) throw InvalidInstance("left pairing undefined");
        return static_cast<std::size_t>(r);
    }
    std::size_t rpair_at(std::size_t z, std::size_t w) const {
        std::ptrdiff_t r = rpair[z][w];
        if (r < 0) throw InvalidInstance("right pairing undefined");
        return static_cast<std::size_t>(r);
    }
};

// Fills lpair/rpair by search; missing entries stay -1 and are reported by
// validation as failures of fiberwise transitivity.
inline void equivalence_compute_pairings(GroupoidEquivalence& e) {
    std::size_t n = e.n_points;
    e.lpair.assign(n, std::vector<std::ptrdiff_t>(n, -1));
    e.rpair.assign(n, std::vector<std::ptrdiff_t>(n, -1));
    for (std::size_t z = 0; z < n; ++z)
        for (std::size_t w = 0; w < n; ++w) {
            if (e.rmoment[z] == e.rmoment[w])
                for (std::size_t g = 0; g < e.left->n_arrows; ++g)
                    if (e.lact[g][w] == static_cast<std::ptrdiff_t>(z)) {
                        e.lpair[z][w] = static_cast<std::ptrdiff_t>(g);
                        break;
                    }
            if (e.lmoment[z] == e.lmoment[w])
                for (std::size_t h = 0; h < e.right->n_arrows; ++h)
                    if (e.ract[z][h] == static_cast<std::ptrdiff_t>(w)) {
                        e.rpair[z][w] = static_cast<std::ptrdiff_t>(h);
                        break;
                    }
        }
}

inline ValidationReport validate_equivalence_space(const GroupoidEquivalence& e) {
    ValidationReport rep;
    const FiniteGroupoid& g = *e.left;
    const FiniteGroupoid& h = *e.right;
    if (e.point_label.size() != e.n_points || e.lmoment.size() != e.n_points ||
        e.rmoment.size() != e.n_points) {
        rep.push_back({"equivalence/shape", "point tables have wrong size"});
        return rep;
    }
    detail::validate_left_action_tables(g, e.n_points, e.lmoment, e.lact,
                                        e.point_label, "equivalence/left", rep);
    if (!rep.empty()) return rep;
    // Right action laws for ract (definedness against rng, moment to src).
    if (e.ract.size() != e.n_points) {
        rep.push_back({"equivalence/shape", "right action table has wrong size"});
        return rep;
    }
    for (std::size_t z = 0; z < e.n_points; ++z) {
        if (e.ract[z].size() != h.n_arrows) {
            rep.push_back({"equivalence/shape", "right action row has wrong size"});
            return rep;
        }
        if (e.rmoment[z] >= h.n_objects) {
            rep.push_back({"equivalence/range", "right moment out of range"});
            return rep;
        }
        for (std::size_t a = 0; a < h.n_arrows; ++a) {
            bool want = (h.rng[a] == e.rmoment[z]);
            std::ptrdiff_t r = e.ract[z][a];
            if (want != (r >= 0)) {
                rep.push_back({"equivalence/right",
                               "definedness mismatch for " + e.point_label[z] + " . " +
                                   h.arrow_label[a]});
                continue;
            }
            if (r < 0) continue;
            if (static_cast<std::size_t>(r) >= e.n_points) {
                rep.push_back({"equivalence/range", "right action out of range"});
                return rep;
            }
            if (e.rmoment[static_cast<std::size_t>(r)] != h.src[a])
                rep.push_back({"equivalence/right",
                               "right moment of " + e.point_label[z] + " . " +
                                   h.arrow_label[a] + " is wrong"});
        }
    }
    if (!rep.empty()) return rep;
    for (std::size_t z = 0; z < e.n_points; ++z) {
        std::size_t eu = h.unit_arrow[e.rmoment[z]];
        if (e.ract[z][eu] != static_cast<std::ptrdiff_t>(z))
            rep.push_back({"equivalence/right",
                           "right unit does not fix " + e.point_label[z]});
        for (std::size_t a = 0; a < h.n_arrows; ++a) {
            if (e.ract[z][a] < 0) continue;
            auto za = static_cast<std::size_t>(e.ract[z][a]);
            for (std::size_t b = 0; b < h.n_arrows; ++b) {
                std::ptrdiff_t ab = h.comp_raw(a, b);
                if (ab < 0) continue;
                if (e.ract[z][static_cast<std::size_t>(ab)] != e.ract[za][b])
                    rep.push_back({"equivalence/right",
                                   "right action not associative at " +
                                       e.point_label[z]});
            }
        }
    }
    // Commutation and moment preservation.
    for (std::size_t x = 0; x < g.n_arrows; ++x)
        for (std::size_t z = 0; z < e.n_points; ++z) {
            if (e.lact[x][z] < 0) continue;
            auto xz = static_cast<std::size_t>(e.lact[x][z]);
            if (e.rmoment[xz] != e.rmoment[z])
                rep.push_back({"equivalence/commute",
                               "left action moves the right moment of " +
                                   e.point_label[z]});
            for (std::size_t a = 0; a < h.n_arrows; ++a) {
                if (e.ract[z][a] < 0) continue;
                if (e.lact[x][static_cast<std::size_t>(e.ract[z][a])] !=
                    e.ract[xz][a])
                    rep.push_back({"equivalence/commute",
                                   "actions fail to commute at " + e.point_label[z]});
            }
        }
    for (std::size_t z = 0; z < e.n_points; ++z)
        for (std::size_t a = 0; a < h.n_arrows; ++a) {
            if (e.ract[z][a] < 0) continue;
            if (e.lmoment[static_cast<std::size_t>(e.ract[z][a])] != e.lmoment[z])
                rep.push_back({"equivalence/commute",
                               "right action moves the left moment of " +
                                   e.point_label[z]});
        }
    // Freeness of both actions.
    for (std::size_t x = 0; x < g.n_arrows; ++x) {
        if (g.is_unit(x)) continue;
        for (std::size_t z = 0; z < e.n_points; ++z)
            if (e.lact[x][z] == static_cast<std::ptrdiff_t>(z))
                rep.push_back({"equivalence/free",
                               g.arrow_label[x] + " fixes " + e.point_label[z]});
    }
    for (std::size_t a = 0; a < h.n_arrows; ++a) {
        if (h.is_unit(a)) continue;
        for (std::size_t z = 0; z < e.n_points; ++z)
            if (e.ract[z][a] == static_cast<std::ptrdiff_t>(z))
                rep.push_back({"equivalence/free",
                               h.arrow_label[a] + " fixes " + e.point_label[z] +
                                   " on the right"});
    }
    // Surjectivity of both moment maps.
    {
        std::vector<bool> lhit(g.n_objects, false), rhit(h.n_objects, false);
        for (std::size_t z = 0; z < e.n_points; ++z) {
            lhit[e.lmoment[z]] = true;
            rhit[e.rmoment[z]] = true;
        }
        for (std::size_t u = 0; u < g.n_objects; ++u)
            if (!lhit[u])
                rep.push_back({"equivalence/surjective",
                               "left object " + g.object_label[u] + " is not hit"});
        for (std::size_t u = 0; u < h.n_objects; ++u)
            if (!rhit[u])
                rep.push_back({"equivalence/surjective",
                               "right object " + h.object_label[u] + " is not hit"});
    }
    // Pairing tables: present exactly on equal-moment pairs, and correct.
    if (e.lpair.size() != e.n_points || e.rpair.size() != e.n_points) {
        rep.push_back({"equivalence/shape", "pairing tables missing"});
        return rep;
    }
    for (std::size_t z = 0; z < e.n_points; ++z)
        for (std::size_t w = 0; w < e.n_points; ++w) {
            std::ptrdiff_t lg = e.lpair[z][w];
            if (e.rmoment[z] == e.rmoment[w]) {
                if (lg < 0)
                    rep.push_back({"equivalence/transitive",
                                   "no left arrow carries " + e.point_label[w] +
                                       " to " + e.point_label[z]});
                else if (e.lact[static_cast<std::size_t>(lg)][w] !=
                         static_cast<std::ptrdiff_t>(z))
                    rep.push_back({"equivalence/pairing",
                                   "left pairing entry is wrong at " +
                                       e.point_label[z] + ", " + e.point_label[w]});
            } else if (lg >= 0) {
                rep.push_back({"equivalence/pairing",
                               "left pairing defined off its domain"});
            }
            std::ptrdiff_t rh = e.rpair[z][w];
            if (e.lmoment[z] == e.lmoment[w]) {
                if (rh < 0)
                    rep.push_back({"equivalence/transitive",
                                   "no right arrow carries " + e.point_label[z] +
                                       " to " + e.point_label[w]});
                else if (e.ract[z][static_cast<std::size_t>(rh)] !=
                         static_cast<std::ptrdiff_t>(w))
                    rep.push_back({"equivalence/pairing",
                                   "right pairing entry is wrong at " +
                                       e.point_label[z] + ", " + e.point_label[w]});
            } else if (rh >= 0) {
                rep.push_back({"equivalence/pairing",
                               "right pairing defined off its domain"});
            }
        }
    if (!rep.empty()) return rep;
    // The two pairings satisfy lpair(z,w).v = z.rpair(w,v) whenever both
    // sides are defined; this is the space-level imprimitivity identity.
    for (std::size_t z = 0; z < e.n_points; ++z)
        for (std::size_t w = 0; w < e.n_points; ++w) {
            if (e.rmoment[z] != e.rmoment[w]) continue;
            for (std::size_t v = 0; v < e.n_points; ++v) {
                if (e.lmoment[w] != e.lmoment[v]) continue;
                std::size_t lhs = e.lapply(e.lpair_at(z, w), v);
                std::size_t rhs = e.rapply(z, e.rpair_at(w, v));
                if (lhs != rhs)
                    rep.push_back({"equivalence/imprimitivity",
                                   "pairing identity fails at " + e.point_label[z] +
                                       ", " + e.point_label[w] + ", " +
                                       e.point_label[v]});
            }
        }
    return rep;
}

// ---------------------------------------------------------------------------
// The canonical equivalence attached to a wide subgroupoid H of M: the
// arrows of M link the action groupoid M |x M/H to H. Left action by
// composition through the quotient marker, right action by composition.
// An externally built quotient space (carrying translation structure) can be
// supplied; it must match the one computed from the subgroupoid.
// ---------------------------------------------------------------------------

struct SubgroupoidEquivalence {
    std::shared_ptr<SpaceAction> quotient;      // M acting on M/H
    ActionGroupoid left;                        // M |x M/H
    Subgroupoid right;                          // H as a groupoid
    QuotientPoints points;
    GroupoidEquivalence eq;                     // Z = arrows of M
};

inline SubgroupoidEquivalence canonical_subgroupoid_equivalence(
    std::shared_ptr<const FiniteGroupoid> m, Subgroupoid sub,
    std::optional<SpaceAction> prebuilt_quotient = std::nullopt) {
    if (!sub.wide())
        throw InvalidInstance("canonical equivalence needs a wide subgroupoid");
    const FiniteGroupoid& mm = *m;
    SubgroupoidEquivalence r;
    r.points = right_orbits(mm, sub.arrows);
    if (prebuilt_quotient) {
        r.quotient = std::make_shared<SpaceAction>(std::move(*prebuilt_quotient));
    } else {
        SpaceAction a;
        a.gpd = m;
        a.n_points = r.points.rep.size();
        a.moment.resize(a.n_points);
        a.point_label.resize(a.n_points);
        for (std::size_t t = 0; t < a.n_points; ++t) {
            a.moment[t] = mm.rng[r.points.rep[t]];
            a.point_label[t] = "[" + mm.arrow_label[r.points.rep[t]] + "]";
        }
        a.act.assign(mm.n_arrows, std::vector<std::ptrdiff_t>(a.n_points, -1));
        for (std::size_t k = 0; k < mm.n_arrows; ++k)
            for (std::size_t t = 0; t < a.n_points; ++t) {
                std::ptrdiff_t c = mm.comp_raw(k, r.points.rep[t]);
                if (c >= 0)
                    a.act[k][t] = static_cast<std::ptrdiff_t>(
                        r.points.orbit_of[static_cast<std::size_t>(c)]);
            }
        r.quotient = std::make_shared<SpaceAction>(std::move(a));
    }
    if (r.quotient->n_points != r.points.rep.size())
        throw InvalidInstance("supplied quotient has the wrong number of points");
    for (std::size_t t = 0; t < r.quotient->n_points; ++t)
        if (r.quotient->moment[t] != mm.rng[r.points.rep[t]])
            throw InvalidInstance("supplied quotient disagrees with the orbits");
    r.left = action_groupoid(r.quotient);
    r.right = std::move(sub);
    GroupoidEquivalence& e = r.eq;
    e.left = r.left.gpd;
    e.right = std::make_shared<FiniteGroupoid>(r.right.gpd);
    e.n_points = mm.n_arrows;
    e.point_label = mm.arrow_label;
    e.lmoment.resize(mm.n_arrows);
    e.rmoment.resize(mm.n_arrows);
    for (std::size_t z = 0; z < mm.n_arrows; ++z) {
        e.lmoment[z] = r.points.orbit_of[z];
        std::ptrdiff_t u = r.right.object_from_parent[mm.src[z]];
        if (u < 0) throw InvalidInstance("wide subgroupoid misses an object");
        e.rmoment[z] = static_cast<std::size_t>(u);
    }
    e.lact.assign(r.left.gpd->n_arrows,
                  std::vector<std::ptrdiff_t>(mm.n_arrows, -1));
    for (std::size_t a = 0; a < r.left.gpd->n_arrows; ++a) {
        auto [k, t] = r.left.parts[a];
        for (std::size_t z = 0; z < mm.n_arrows; ++z) {
            if (r.points.orbit_of[z] != t) continue;
            std::ptrdiff_t c = mm.comp_raw(k, z);
            if (c >= 0) e.lact[a][z] = c;
        }
    }
    e.ract.assign(mm.n_arrows,
                  std::vector<std::ptrdiff_t>(r.right.gpd.n_arrows, -1));
    for (std::size_t z = 0; z < mm.n_arrows; ++z)
        for (std::size_t a = 0; a < r.right.gpd.n_arrows; ++a) {
            std::ptrdiff_t c = mm.comp_raw(z, r.right.arrows[a]);
            if (c >= 0) e.ract[z][a] = c;
        }
    equivalence_compute_pairings(e);
    return r;
}

}  // namespace fellb
