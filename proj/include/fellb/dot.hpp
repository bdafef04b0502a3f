#pragma once

#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "fellb/ladder.hpp"

namespace fellb {

namespace detail {

inline std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

inline std::string block_set(std::uint64_t mask, std::size_t n_blocks) {
    std::string out = "{";
    bool first = true;
    for (std::size_t b = 0; b < n_blocks; ++b)
        if (mask >> b & 1) {
            if (!first) out += ",";
            out += std::to_string(b);
            first = false;
        }
    return out + "}";
}

inline std::string map_images(const std::vector<std::size_t>& m) {
    std::string out = "[";
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) out += " ";
        out += std::to_string(m[i]);
    }
    return out + "]";
}

}  // namespace detail

// Hasse diagram of an ideal lattice: nodes are ideals named by their block
// sets, edges are covering relations, the zero ideal at the bottom.
inline std::string lattice_dot(const IdealLattice& lat, const std::string& title) {
    auto leq = [&lat](std::size_t i, std::size_t j) { return lat.meet[i][j] == i; };
    std::ostringstream out;
    out << "digraph lattice {\n";
    out << "  rankdir=BT;\n";
    out << "  node [shape=box, fontname=\"monospace\"];\n";
    out << "  label=\"" << detail::dot_escape(title) << "\";\n";
    for (std::size_t i = 0; i < lat.size(); ++i)
        out << "  i" << i << " [label=\"I" << i << " = "
            << detail::block_set(lat.mask[i], lat.n_blocks) << "\"];\n";
    for (std::size_t i = 0; i < lat.size(); ++i)
        for (std::size_t j = 0; j < lat.size(); ++j) {
            if (i == j || !leq(i, j)) continue;
            bool covered = true;
            for (std::size_t k = 0; k < lat.size(); ++k)
                if (k != i && k != j && leq(i, k) && leq(k, j)) {
                    covered = false;
                    break;
                }
            if (covered) out << "  i" << i << " -> i" << j << ";\n";
        }
    out << "}\n";
    return out.str();
}

// The four-node diagram with rungs across and struts beneath, each map
// printed as its list of images.
inline std::string ladder_dot(const LadderCore& c, const std::string& title) {
    const char* id[4] = {"x", "y", "z", "w"};
    const std::size_t size[4] = {c.x.size(), c.y.size(), c.z.size(), c.w.size()};
    std::ostringstream out;
    out << "digraph ladder {\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=box, fontname=\"monospace\"];\n";
    out << "  label=\"" << detail::dot_escape(title) << "\";\n";
    for (std::size_t n = 0; n < 4; ++n)
        out << "  " << id[n] << " [label=\"" << detail::dot_escape(c.node_label[n])
            << " (" << size[n] << ")\"];\n";
    const struct {
        const char *from, *to, *name;
        const std::vector<std::size_t>* m;
        std::size_t label;
        bool strut;
    } edges[] = {{"x", "y", "f", &c.set.f, 0, false}, {"y", "z", "g", &c.set.g, 1, false},
                 {"z", "w", "h", &c.set.h, 2, false}, {"x", "z", "u", &c.set.u, 3, true},
                 {"y", "w", "v", &c.set.v, 4, true}};
    for (const auto& e : edges) {
        out << "  " << e.from << " -> " << e.to << " [label=\"" << e.name << ": "
            << detail::dot_escape(c.map_label[e.label]) << " "
            << detail::map_images(*e.m) << "\"";
        if (e.strut) out << ", style=dashed, constraint=false";
        out << "];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace fellb
