#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fellb/bundle.hpp"
#include "fellb/groupoid.hpp"
#include "fellb/instances.hpp"

namespace fellb::io {

using json = nlohmann::ordered_json;

// Structural defect in an instance file, carrying the JSON path at fault.
struct SchemaError : Error {
    std::string where;
    SchemaError(const std::string& what, std::string where_)
        : Error(what + " at " + where_), where(std::move(where_)) {}
};

// ---------------------------------------------------------------------------
// Scalars print and parse as "a/b+c/d*i" with both parts optional.
// ---------------------------------------------------------------------------

inline std::string scalar_to_string(const Scalar& v) {
    std::string re = v.re.get_str();
    std::string im = v.im.get_str();
    if (v.im == 0) return re;
    std::string tail = im + "*i";
    if (v.re == 0) return tail;
    return re + (v.im > 0 ? "+" : "") + tail;
}

inline Scalar parse_scalar(std::string s, const std::string& where) {
    s.erase(std::remove_if(s.begin(), s.end(),
                           [](unsigned char c) { return c == ' ' || c == '\t'; }),
            s.end());
    if (s.empty()) throw SchemaError("empty scalar", where);
    auto rational = [&where](const std::string& t) {
        if (t.empty() || t == "+") return mpq_class(1);
        if (t == "-") return mpq_class(-1);
        // mpq accepts [-]digits[/digits]; screen the rest out ourselves.
        for (std::size_t k = 0; k < t.size(); ++k) {
            char c = t[k];
            bool sign_ok = (c == '-' || c == '+') && k == 0;
            if (!sign_ok && c != '/' && (c < '0' || c > '9'))
                throw SchemaError("unparsable scalar part '" + t + "'", where);
        }
        try {
            mpq_class q(t[0] == '+' ? t.substr(1) : t);
            if (q.get_den() == 0)
                throw SchemaError("zero denominator in scalar '" + t + "'", where);
            q.canonicalize();
            return q;
        } catch (const SchemaError&) {
            throw;
        } catch (const std::exception&) {
            throw SchemaError("unparsable scalar part '" + t + "'", where);
        }
    };
    Scalar v;
    std::size_t ipos = s.find('i');
    if (ipos == std::string::npos) {
        v.re = rational(s);
        return v;
    }
    if (ipos + 1 != s.size()) throw SchemaError("text after 'i' in scalar", where);
    std::string head = s.substr(0, ipos);
    bool starred = !head.empty() && head.back() == '*';
    if (starred) head.pop_back();
    // The imaginary term starts at the last top-level sign, if any.
    std::size_t split = 0;
    for (std::size_t k = 1; k < head.size(); ++k)
        if (head[k] == '+' || head[k] == '-') split = k;
    std::string imt = head.substr(split == 0 ? 0 : split);
    bool bare = imt.empty() || imt == "+" || imt == "-";
    if (!bare && !starred)
        throw SchemaError("missing '*' before 'i' in scalar", where);
    if (split > 0) v.re = rational(head.substr(0, split));
    v.im = rational(imt);
    return v;
}

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j)
            row.push_back(scalar_to_string(m.at(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Typed JSON access with path-carrying errors.
// ---------------------------------------------------------------------------

namespace detail {

inline const json& need(const json& j, const std::string& key,
                        const std::string& where) {
    if (!j.is_object() || !j.contains(key))
        throw SchemaError("missing field", where + "/" + key);
    return j.at(key);
}

inline std::string need_string(const json& j, const std::string& key,
                               const std::string& where) {
    const json& v = need(j, key, where);
    if (!v.is_string()) throw SchemaError("expected a string", where + "/" + key);
    return v.get<std::string>();
}

inline std::size_t need_index(const json& j, const std::string& key,
                              const std::string& where, std::size_t bound) {
    const json& v = need(j, key, where);
    if (!v.is_number_integer() || v.get<long long>() < 0 ||
        static_cast<std::size_t>(v.get<long long>()) >= bound)
        throw SchemaError("dangling reference (index out of range)", where + "/" + key);
    return static_cast<std::size_t>(v.get<long long>());
}

inline const json& need_array(const json& j, const std::string& key,
                              const std::string& where) {
    const json& v = need(j, key, where);
    if (!v.is_array()) throw SchemaError("expected an array", where + "/" + key);
    return v;
}

inline void check_keys(const json& j, const std::vector<std::string>& allowed,
                       const std::string& where) {
    if (!j.is_object()) throw SchemaError("expected an object", where);
    for (const auto& [k, v] : j.items())
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw SchemaError("unknown field '" + k + "'", where);
}

inline Matrix parse_matrix(const json& j, std::size_t rows, std::size_t cols,
                           const std::string& where) {
    if (!j.is_array() || j.size() != rows)
        throw SchemaError("expected a matrix with " + std::to_string(rows) + " rows",
                          where);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const json& row = j.at(i);
        if (!row.is_array() || row.size() != cols)
            throw SchemaError("expected " + std::to_string(cols) + " columns",
                              where + "/" + std::to_string(i));
        for (std::size_t k = 0; k < cols; ++k) {
            const json& cell = row.at(k);
            if (!cell.is_string())
                throw SchemaError("matrix entries must be scalar strings",
                                  where + "/" + std::to_string(i) + "/" +
                                      std::to_string(k));
            m.at(i, k) = parse_scalar(cell.get<std::string>(),
                                      where + "/" + std::to_string(i) + "/" +
                                          std::to_string(k));
        }
    }
    return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Groupoid section.  Kinds: cyclic, klein, pair, discrete, point, table.
// ---------------------------------------------------------------------------

inline FiniteGroupoid groupoid_from_json(const json& j, const std::string& where) {
    using namespace detail;
    std::string kind = need_string(j, "kind", where);
    if (kind == "cyclic") {
        check_keys(j, {"kind", "order"}, where);
        return cyclic_group(need_index(j, "order", where, 1 << 20));
    }
    if (kind == "klein") {
        check_keys(j, {"kind"}, where);
        return klein_group();
    }
    if (kind == "pair") {
        check_keys(j, {"kind", "objects"}, where);
        return pair_groupoid(need_index(j, "objects", where, 1 << 10));
    }
    if (kind == "discrete") {
        check_keys(j, {"kind", "objects"}, where);
        return instances::discrete_groupoid(need_index(j, "objects", where, 1 << 10));
    }
    if (kind == "point") {
        check_keys(j, {"kind"}, where);
        return point_groupoid();
    }
    if (kind != "table") throw SchemaError("unknown groupoid kind '" + kind + "'", where);
    check_keys(j, {"kind", "objects", "arrows", "units", "comp"}, where);

    FiniteGroupoid g;
    const json& objects = need_array(j, "objects", where);
    g.n_objects = objects.size();
    for (std::size_t o = 0; o < g.n_objects; ++o) {
        const json& lbl = objects.at(o);
        if (!lbl.is_string())
            throw SchemaError("object labels must be strings",
                              where + "/objects/" + std::to_string(o));
        g.object_label.push_back(lbl.get<std::string>());
    }
    const json& arrows = need_array(j, "arrows", where);
    g.n_arrows = arrows.size();
    for (std::size_t a = 0; a < g.n_arrows; ++a) {
        std::string aw = where + "/arrows/" + std::to_string(a);
        const json& arrow = arrows.at(a);
        check_keys(arrow, {"name", "src", "rng", "inv"}, aw);
        g.arrow_label.push_back(need_string(arrow, "name", aw));
        g.src.push_back(need_index(arrow, "src", aw, g.n_objects));
        g.rng.push_back(need_index(arrow, "rng", aw, g.n_objects));
        g.inv.push_back(need_index(arrow, "inv", aw, g.n_arrows));
    }
    const json& units = need_array(j, "units", where);
    if (units.size() != g.n_objects)
        throw SchemaError("need one unit arrow per object", where + "/units");
    g.unit_object.assign(g.n_arrows, -1);
    for (std::size_t o = 0; o < g.n_objects; ++o) {
        const json& v = units.at(o);
        std::string uw = where + "/units/" + std::to_string(o);
        if (!v.is_number_integer() || v.get<long long>() < 0 ||
            static_cast<std::size_t>(v.get<long long>()) >= g.n_arrows)
            throw SchemaError("dangling reference (index out of range)", uw);
        std::size_t u = static_cast<std::size_t>(v.get<long long>());
        g.unit_arrow.push_back(u);
        g.unit_object[u] = static_cast<std::ptrdiff_t>(o);
    }
    const json& comp = need_array(j, "comp", where);
    if (comp.size() != g.n_arrows)
        throw SchemaError("composition table needs one row per arrow", where + "/comp");
    g.comp_table.assign(g.n_arrows * g.n_arrows, -1);
    for (std::size_t a = 0; a < g.n_arrows; ++a) {
        const json& row = comp.at(a);
        std::string rw = where + "/comp/" + std::to_string(a);
        if (!row.is_array() || row.size() != g.n_arrows)
            throw SchemaError("composition table must be square", rw);
        for (std::size_t b = 0; b < g.n_arrows; ++b) {
            const json& cell = row.at(b);
            if (!cell.is_number_integer())
                throw SchemaError("expected an arrow id or -1",
                                  rw + "/" + std::to_string(b));
            long long c = cell.get<long long>();
            if (c < -1 || c >= static_cast<long long>(g.n_arrows))
                throw SchemaError("dangling reference (index out of range)",
                                  rw + "/" + std::to_string(b));
            if (c >= 0) g.set_comp(a, b, static_cast<std::size_t>(c));
        }
    }
    return g;
}

inline json groupoid_to_json(const FiniteGroupoid& g) {
    json j;
    j["kind"] = "table";
    j["objects"] = g.object_label;
    json arrows = json::array();
    for (std::size_t a = 0; a < g.n_arrows; ++a)
        arrows.push_back({{"name", g.arrow_label[a]},
                          {"src", g.src[a]},
                          {"rng", g.rng[a]},
                          {"inv", g.inv[a]}});
    j["arrows"] = std::move(arrows);
    j["units"] = g.unit_arrow;
    json comp = json::array();
    for (std::size_t a = 0; a < g.n_arrows; ++a) {
        json row = json::array();
        for (std::size_t b = 0; b < g.n_arrows; ++b) row.push_back(g.comp_raw(a, b));
        comp.push_back(std::move(row));
    }
    j["comp"] = std::move(comp);
    return j;
}

// ---------------------------------------------------------------------------
// Action section.  Kinds: trivial, permutation, table.
// ---------------------------------------------------------------------------

inline IsoAction action_from_json(const json& j,
                                  std::shared_ptr<const FiniteGroupoid> group,
                                  std::shared_ptr<const FiniteGroupoid> gpd,
                                  const std::string& where) {
    using namespace detail;
    std::string kind = need_string(j, "kind", where);
    if (kind == "trivial") {
        check_keys(j, {"kind"}, where);
        return trivial_iso_action(group, gpd);
    }
    if (kind == "permutation") {
        check_keys(j, {"kind", "perm"}, where);
        const json& perm = need_array(j, "perm", where);
        if (perm.size() != group->n_arrows)
            throw SchemaError("need one permutation per group arrow", where + "/perm");
        std::vector<std::vector<std::size_t>> p(group->n_arrows);
        for (std::size_t x = 0; x < group->n_arrows; ++x) {
            std::string pw = where + "/perm/" + std::to_string(x);
            const json& row = perm.at(x);
            if (!row.is_array() || row.size() != gpd->n_objects)
                throw SchemaError("permutation must list every object", pw);
            for (std::size_t o = 0; o < gpd->n_objects; ++o) {
                const json& cell = row.at(o);
                if (!cell.is_number_integer() || cell.get<long long>() < 0 ||
                    static_cast<std::size_t>(cell.get<long long>()) >= gpd->n_objects)
                    throw SchemaError("dangling reference (index out of range)",
                                      pw + "/" + std::to_string(o));
                p[x].push_back(static_cast<std::size_t>(cell.get<long long>()));
            }
        }
        return instances::permutation_action(group, gpd, p);
    }
    if (kind != "table") throw SchemaError("unknown action kind '" + kind + "'", where);
    check_keys(j, {"kind", "rho", "sigma"}, where);
    IsoAction a;
    a.g = group;
    a.h = gpd;
    const json& rho = need_array(j, "rho", where);
    if (rho.size() != gpd->n_objects)
        throw SchemaError("rho needs one entry per object", where + "/rho");
    for (std::size_t o = 0; o < gpd->n_objects; ++o) {
        const json& cell = rho.at(o);
        if (!cell.is_number_integer() || cell.get<long long>() < 0 ||
            static_cast<std::size_t>(cell.get<long long>()) >= group->n_objects)
            throw SchemaError("dangling reference (index out of range)",
                              where + "/rho/" + std::to_string(o));
        a.rho.push_back(static_cast<std::size_t>(cell.get<long long>()));
    }
    const json& sigma = need_array(j, "sigma", where);
    if (sigma.size() != group->n_arrows)
        throw SchemaError("sigma needs one row per group arrow", where + "/sigma");
    for (std::size_t x = 0; x < group->n_arrows; ++x) {
        std::string sw = where + "/sigma/" + std::to_string(x);
        const json& row = sigma.at(x);
        if (!row.is_array() || row.size() != gpd->n_arrows)
            throw SchemaError("sigma rows must list every arrow", sw);
        std::vector<std::ptrdiff_t> out;
        for (std::size_t t = 0; t < gpd->n_arrows; ++t) {
            const json& cell = row.at(t);
            if (!cell.is_number_integer())
                throw SchemaError("expected an arrow id or -1",
                                  sw + "/" + std::to_string(t));
            long long c = cell.get<long long>();
            if (c < -1 || c >= static_cast<long long>(gpd->n_arrows))
                throw SchemaError("dangling reference (index out of range)",
                                  sw + "/" + std::to_string(t));
            out.push_back(static_cast<std::ptrdiff_t>(c));
        }
        a.sigma.push_back(std::move(out));
    }
    return a;
}

inline json action_to_json(const IsoAction& a) {
    json j;
    j["kind"] = "table";
    j["rho"] = a.rho;
    j["sigma"] = a.sigma;
    return j;
}

// ---------------------------------------------------------------------------
// Bundle section.  Kinds: line, cocycle_line, group_algebra, table.
// ---------------------------------------------------------------------------

inline FellBundle bundle_from_json(const json& j,
                                   std::shared_ptr<const FiniteGroupoid> gpd,
                                   const std::string& where) {
    using namespace detail;
    std::string kind = need_string(j, "kind", where);
    if (kind == "line") {
        check_keys(j, {"kind"}, where);
        return line_bundle(gpd);
    }
    if (kind == "cocycle_line") {
        check_keys(j, {"kind", "cocycle"}, where);
        const json& c = need_array(j, "cocycle", where);
        std::size_t n = gpd->n_arrows;
        if (c.size() != n)
            throw SchemaError("cocycle table needs one row per arrow",
                              where + "/cocycle");
        std::vector<std::vector<Scalar>> sigma(n, std::vector<Scalar>(n));
        for (std::size_t x = 0; x < n; ++x) {
            const json& row = c.at(x);
            std::string rw = where + "/cocycle/" + std::to_string(x);
            if (!row.is_array() || row.size() != n)
                throw SchemaError("cocycle table must be square", rw);
            for (std::size_t y = 0; y < n; ++y) {
                const json& cell = row.at(y);
                if (!cell.is_string())
                    throw SchemaError("cocycle entries must be scalar strings",
                                      rw + "/" + std::to_string(y));
                sigma[x][y] = parse_scalar(cell.get<std::string>(),
                                           rw + "/" + std::to_string(y));
            }
        }
        return cocycle_line_bundle(gpd, sigma);
    }
    if (kind == "group_algebra") {
        check_keys(j, {"kind", "tables"}, where);
        const json& tables = need_array(j, "tables", where);
        if (tables.size() != gpd->n_objects)
            throw SchemaError("need one group table per object", where + "/tables");
        std::vector<StarAlgebra> algs;
        for (std::size_t o = 0; o < gpd->n_objects; ++o) {
            std::string tw = where + "/tables/" + std::to_string(o);
            const json& entry = tables.at(o);
            check_keys(entry, {"table", "inv"}, tw);
            const json& table = need_array(entry, "table", tw);
            std::size_t n = table.size();
            std::vector<std::vector<std::size_t>> t(n);
            for (std::size_t g = 0; g < n; ++g) {
                const json& row = table.at(g);
                if (!row.is_array() || row.size() != n)
                    throw SchemaError("group table must be square",
                                      tw + "/table/" + std::to_string(g));
                for (std::size_t h = 0; h < n; ++h) {
                    const json& cell = row.at(h);
                    if (!cell.is_number_integer() || cell.get<long long>() < 0 ||
                        static_cast<std::size_t>(cell.get<long long>()) >= n)
                        throw SchemaError("dangling reference (index out of range)",
                                          tw + "/table/" + std::to_string(g) + "/" +
                                              std::to_string(h));
                    t[g].push_back(static_cast<std::size_t>(cell.get<long long>()));
                }
            }
            const json& inv = need_array(entry, "inv", tw);
            if (inv.size() != n)
                throw SchemaError("inv needs one entry per element", tw + "/inv");
            std::vector<std::size_t> iv;
            for (std::size_t g = 0; g < n; ++g) {
                const json& cell = inv.at(g);
                if (!cell.is_number_integer() || cell.get<long long>() < 0 ||
                    static_cast<std::size_t>(cell.get<long long>()) >= n)
                    throw SchemaError("dangling reference (index out of range)",
                                      tw + "/inv/" + std::to_string(g));
                iv.push_back(static_cast<std::size_t>(cell.get<long long>()));
            }
            algs.push_back(instances::group_algebra(t, iv));
        }
        return algebras_bundle(gpd, algs);
    }
    if (kind != "table") throw SchemaError("unknown bundle kind '" + kind + "'", where);
    check_keys(j, {"kind", "dim", "invol", "mult"}, where);
    FellBundle b;
    b.gpd = gpd;
    const json& dim = need_array(j, "dim", where);
    if (dim.size() != gpd->n_arrows)
        throw SchemaError("dim needs one entry per arrow", where + "/dim");
    for (std::size_t a = 0; a < gpd->n_arrows; ++a) {
        const json& cell = dim.at(a);
        if (!cell.is_number_integer() || cell.get<long long>() < 0)
            throw SchemaError("fiber dimensions must be nonnegative",
                              where + "/dim/" + std::to_string(a));
        b.dim.push_back(static_cast<std::size_t>(cell.get<long long>()));
    }
    const json& invol = need_array(j, "invol", where);
    if (invol.size() != gpd->n_arrows)
        throw SchemaError("invol needs one matrix per arrow", where + "/invol");
    for (std::size_t a = 0; a < gpd->n_arrows; ++a)
        b.invol.push_back(parse_matrix(invol.at(a), b.dim[gpd->inv[a]], b.dim[a],
                                       where + "/invol/" + std::to_string(a)));
    b.mult.assign(gpd->n_arrows * gpd->n_arrows, Matrix(0, 0));
    const json& mult = need_array(j, "mult", where);
    for (std::size_t k = 0; k < mult.size(); ++k) {
        std::string mw = where + "/mult/" + std::to_string(k);
        const json& e = mult.at(k);
        check_keys(e, {"g", "h", "matrix"}, mw);
        std::size_t g = need_index(e, "g", mw, gpd->n_arrows);
        std::size_t h = need_index(e, "h", mw, gpd->n_arrows);
        if (!gpd->composable(g, h))
            throw SchemaError("product entry for a non-composable pair", mw);
        std::size_t gh = gpd->comp(g, h);
        b.mult[g * gpd->n_arrows + h] = parse_matrix(
            need(e, "matrix", mw), b.dim[gh], b.dim[g] * b.dim[h], mw + "/matrix");
    }
    for (std::size_t g = 0; g < gpd->n_arrows; ++g)
        for (std::size_t h = 0; h < gpd->n_arrows; ++h)
            if (gpd->composable(g, h) && b.mult[g * gpd->n_arrows + h].rows() == 0 &&
                b.dim[gpd->comp(g, h)] * b.dim[g] * b.dim[h] != 0)
                throw SchemaError("missing product entry for composable pair (" +
                                      std::to_string(g) + "," + std::to_string(h) + ")",
                                  where + "/mult");
    return b;
}

inline json bundle_to_json(const FellBundle& b) {
    json j;
    j["kind"] = "table";
    j["dim"] = b.dim;
    json invol = json::array();
    for (std::size_t a = 0; a < b.gpd->n_arrows; ++a)
        invol.push_back(matrix_to_json(b.invol[a]));
    j["invol"] = std::move(invol);
    json mult = json::array();
    for (std::size_t g = 0; g < b.gpd->n_arrows; ++g)
        for (std::size_t h = 0; h < b.gpd->n_arrows; ++h)
            if (b.gpd->composable(g, h))
                mult.push_back({{"g", g},
                                {"h", h},
                                {"matrix", matrix_to_json(b.mult_at(g, h))}});
    j["mult"] = std::move(mult);
    return j;
}

// ---------------------------------------------------------------------------
// Bundle action section.  Kinds: identity, table.
// ---------------------------------------------------------------------------

inline std::shared_ptr<const BundleIsoAction> bundle_action_from_json(
    const json& j, std::shared_ptr<const FellBundle> bun,
    std::shared_ptr<const IsoAction> act, const std::string& where) {
    using namespace detail;
    std::string kind = need_string(j, "kind", where);
    if (kind == "identity") {
        check_keys(j, {"kind"}, where);
        try {
            return instances::identity_bundle_action(bun, act);
        } catch (const InvalidInstance& e) {
            throw SchemaError(e.what(), where);
        }
    }
    if (kind != "table")
        throw SchemaError("unknown bundle action kind '" + kind + "'", where);
    check_keys(j, {"kind", "alpha"}, where);
    auto a = std::make_shared<BundleIsoAction>();
    a->bun = bun;
    a->act = act;
    const FiniteGroupoid& g = *act->g;
    const FiniteGroupoid& h = *act->h;
    a->alpha.assign(g.n_arrows, std::vector<Matrix>(h.n_arrows));
    const json& alpha = need_array(j, "alpha", where);
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        std::string aw = where + "/alpha/" + std::to_string(k);
        const json& e = alpha.at(k);
        check_keys(e, {"x", "t", "matrix"}, aw);
        std::size_t x = need_index(e, "x", aw, g.n_arrows);
        std::size_t t = need_index(e, "t", aw, h.n_arrows);
        if (act->sigma[x][t] < 0)
            throw SchemaError("fiber map where the action is undefined", aw);
        std::size_t im = static_cast<std::size_t>(act->sigma[x][t]);
        a->alpha[x][t] = parse_matrix(need(e, "matrix", aw), bun->dim[im],
                                      bun->dim[t], aw + "/matrix");
    }
    for (std::size_t x = 0; x < g.n_arrows; ++x)
        for (std::size_t t = 0; t < h.n_arrows; ++t)
            if (act->sigma[x][t] >= 0 && a->alpha[x][t].rows() == 0 &&
                bun->dim[static_cast<std::size_t>(act->sigma[x][t])] != 0)
                throw SchemaError("missing fiber map for a defined action pair",
                                  where + "/alpha");
    return a;
}

inline json bundle_action_to_json(const BundleIsoAction& a) {
    json j;
    j["kind"] = "table";
    json alpha = json::array();
    for (std::size_t x = 0; x < a.act->g->n_arrows; ++x)
        for (std::size_t t = 0; t < a.act->h->n_arrows; ++t)
            if (a.act->sigma[x][t] >= 0)
                alpha.push_back(
                    {{"x", x}, {"t", t}, {"matrix", matrix_to_json(a.alpha[x][t])}});
    j["alpha"] = std::move(alpha);
    return j;
}

// ---------------------------------------------------------------------------
// Whole instance files.
// ---------------------------------------------------------------------------

struct Instance {
    std::string name;
    std::shared_ptr<const FiniteGroupoid> gpd;
    std::optional<Subgroupoid> sub;
    std::shared_ptr<const FiniteGroupoid> group;
    std::shared_ptr<const IsoAction> action;
    std::shared_ptr<const FellBundle> bundle;
    std::shared_ptr<const BundleIsoAction> bundle_action;
    json claims = json::object();
};

namespace detail {

inline void check_claims(const json& c, const std::string& where) {
    check_keys(c,
               {"blocks", "ideals", "invariant_ideals", "ladder_left", "ladder_right",
                "rieffel", "unsupported", "violations"},
               where);
    for (const char* key : {"blocks", "ideals", "invariant_ideals"})
        if (c.contains(key) && !c.at(key).is_number_integer())
            throw SchemaError("expected an integer", where + "/" + key);
    for (const char* key : {"ladder_left", "ladder_right"})
        if (c.contains(key)) {
            const json& v = c.at(key);
            if (!v.is_array() || v.size() != 4)
                throw SchemaError("expected four node counts", where + "/" + key);
            for (const json& n : v)
                if (!n.is_number_integer())
                    throw SchemaError("expected an integer", where + "/" + key);
        }
    if (c.contains("rieffel")) {
        check_keys(c.at("rieffel"), {"left", "right", "subgroupoid", "principal"},
                   where + "/rieffel");
        for (const auto& [k, v] : c.at("rieffel").items())
            if (!v.is_number_integer())
                throw SchemaError("expected an integer", where + "/rieffel/" + k);
    }
    if (c.contains("unsupported") && !c.at("unsupported").is_boolean())
        throw SchemaError("expected a boolean", where + "/unsupported");
    if (c.contains("violations")) {
        const json& v = c.at("violations");
        if (!v.is_array()) throw SchemaError("expected an array", where + "/violations");
        for (const json& s : v)
            if (!s.is_string())
                throw SchemaError("expected code strings", where + "/violations");
    }
}

}  // namespace detail

inline Instance instance_from_json(const json& j, std::string name) {
    using namespace detail;
    check_keys(j,
               {"format", "name", "groupoid", "subgroupoid", "group", "action",
                "bundle", "bundle_action", "claims"},
               "");
    if (j.contains("format") && j.at("format") != "fellb-instance-1")
        throw SchemaError("unknown format tag", "/format");
    Instance r;
    r.name = j.contains("name") ? need_string(j, "name", "") : std::move(name);
    r.gpd = std::make_shared<const FiniteGroupoid>(
        groupoid_from_json(need(j, "groupoid", ""), "/groupoid"));
    if (j.contains("subgroupoid")) {
        const json& s = j.at("subgroupoid");
        check_keys(s, {"arrows"}, "/subgroupoid");
        const json& arrows = need_array(s, "arrows", "/subgroupoid");
        std::vector<std::size_t> ids;
        for (std::size_t k = 0; k < arrows.size(); ++k) {
            const json& cell = arrows.at(k);
            if (!cell.is_number_integer() || cell.get<long long>() < 0 ||
                static_cast<std::size_t>(cell.get<long long>()) >= r.gpd->n_arrows)
                throw SchemaError("dangling reference (index out of range)",
                                  "/subgroupoid/arrows/" + std::to_string(k));
            ids.push_back(static_cast<std::size_t>(cell.get<long long>()));
        }
        try {
            r.sub = make_subgroupoid(r.gpd, ids);
        } catch (const InvalidInstance& e) {
            throw SchemaError(e.what(), "/subgroupoid/arrows");
        }
    }
    if (j.contains("group"))
        r.group = std::make_shared<const FiniteGroupoid>(
            groupoid_from_json(j.at("group"), "/group"));
    if (j.contains("action")) {
        if (!r.group) throw SchemaError("action needs a group section", "/action");
        r.action = std::make_shared<const IsoAction>(
            action_from_json(j.at("action"), r.group, r.gpd, "/action"));
    }
    if (j.contains("bundle"))
        r.bundle = std::make_shared<const FellBundle>(
            bundle_from_json(j.at("bundle"), r.gpd, "/bundle"));
    if (j.contains("bundle_action")) {
        if (!r.bundle || !r.action)
            throw SchemaError("bundle action needs bundle and action sections",
                              "/bundle_action");
        r.bundle_action = bundle_action_from_json(j.at("bundle_action"), r.bundle,
                                                  r.action, "/bundle_action");
    }
    if (j.contains("claims")) {
        check_claims(j.at("claims"), "/claims");
        r.claims = j.at("claims");
    }
    return r;
}

inline json instance_to_json(const Instance& r) {
    json j;
    j["format"] = "fellb-instance-1";
    j["name"] = r.name;
    j["groupoid"] = groupoid_to_json(*r.gpd);
    if (r.sub) j["subgroupoid"] = {{"arrows", r.sub->arrows}};
    if (r.group) j["group"] = groupoid_to_json(*r.group);
    if (r.action) j["action"] = action_to_json(*r.action);
    if (r.bundle) j["bundle"] = bundle_to_json(*r.bundle);
    if (r.bundle_action) j["bundle_action"] = bundle_action_to_json(*r.bundle_action);
    if (!r.claims.empty()) j["claims"] = r.claims;
    return j;
}

inline std::string instance_basename(const std::string& path) {
    std::size_t slash = path.find_last_of('/');
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    std::size_t dot = base.find_last_of('.');
    return dot == std::string::npos ? base : base.substr(0, dot);
}

inline Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open file", path);
    json j;
    try {
        j = json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(e.what(), path);
    }
    return instance_from_json(j, instance_basename(path));
}

inline void save_instance(const Instance& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot open file for writing", path);
    out << instance_to_json(r).dump(2) << "\n";
}

}  // namespace fellb::io
