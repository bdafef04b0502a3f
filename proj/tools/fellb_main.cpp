#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <iostream>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fellb/dot.hpp"
#include "fellb/equivalence.hpp"
#include "fellb/io.hpp"
#include "fellb/ladder.hpp"

using namespace fellb;
using io::Instance;
using io::json;

namespace {

// Accumulates named checks; the exit code is 2 if anything failed, else 3 if
// anything was unsupported, else 0.
struct Reporter {
    json checks = json::array();
    bool any_fail = false;
    bool any_unsupported = false;
    std::size_t claims_checked = 0;

    void pass(const std::string& name, json details = nullptr) {
        json c{{"name", name}, {"status", "pass"}, {"witness", nullptr}};
        if (!details.is_null()) c["details"] = std::move(details);
        checks.push_back(std::move(c));
    }
    void fail(const std::string& name, json witness) {
        any_fail = true;
        checks.push_back({{"name", name}, {"status", "fail"}, {"witness", witness}});
    }
    void unsupported(const std::string& name, json witness) {
        any_unsupported = true;
        checks.push_back(
            {{"name", name}, {"status", "unsupported"}, {"witness", witness}});
    }
    int exit_code() const { return any_fail ? 2 : any_unsupported ? 3 : 0; }
    std::string status() const {
        return any_fail ? "fail" : any_unsupported ? "unsupported" : "pass";
    }
};

// Turns a validator report into one named check, one witness per violation.
void suite(Reporter& rep, const std::string& name, const ValidationReport& r,
           std::vector<std::string>* seen_codes = nullptr) {
    if (r.empty()) {
        rep.pass(name);
        return;
    }
    json w = json::array();
    for (const Violation& v : r) {
        w.push_back({{"code", v.code}, {"message", v.message}});
        if (seen_codes) seen_codes->push_back(v.code);
    }
    rep.fail(name, std::move(w));
}

void claim_count(Reporter& rep, const Instance& inst, const std::string& key,
                 std::size_t actual) {
    if (!inst.claims.contains(key)) return;
    ++rep.claims_checked;
    auto expected = inst.claims.at(key).get<long long>();
    if (expected == static_cast<long long>(actual))
        rep.pass("claim:" + key);
    else
        rep.fail("claim:" + key, {{"expected", expected}, {"actual", actual}});
}

void claim_nodes(Reporter& rep, const Instance& inst, const std::string& key,
                 const std::vector<std::size_t>& actual) {
    if (!inst.claims.contains(key)) return;
    ++rep.claims_checked;
    auto expected = inst.claims.at(key).get<std::vector<long long>>();
    std::vector<long long> got(actual.begin(), actual.end());
    if (expected == got)
        rep.pass("claim:" + key);
    else
        rep.fail("claim:" + key, {{"expected", expected}, {"actual", got}});
}

std::size_t total_dim(const FellBundle& b) {
    return std::accumulate(b.dim.begin(), b.dim.end(), std::size_t{0});
}

json bundle_counts(const FellBundle& b) {
    return {{"arrows", b.gpd->n_arrows},
            {"objects", b.gpd->n_objects},
            {"total_dim", total_dim(b)}};
}

std::vector<std::size_t> node_sizes(const LadderCore& c) {
    return {c.x.size(), c.y.size(), c.z.size(), c.w.size()};
}

json size_list(const std::vector<std::size_t>& v) {
    json a = json::array();
    for (std::size_t n : v) a.push_back(n);
    return a;
}

const FiniteGroupoid& need_gpd(const Instance& inst) { return *inst.gpd; }

const FellBundle& need_bundle(const Instance& inst) {
    if (!inst.bundle) throw InvalidInstance("instance has no bundle section");
    return *inst.bundle;
}

const BundleIsoAction& need_bundle_action(const Instance& inst) {
    if (!inst.bundle_action)
        throw InvalidInstance("instance has no bundle_action section");
    return *inst.bundle_action;
}

const Subgroupoid& need_sub(const Instance& inst) {
    if (!inst.sub) throw InvalidInstance("instance has no subgroupoid section");
    return *inst.sub;
}

// ---------------------------------------------------------------------------
// Command bodies.  Each fills checks, counts, and possibly a DOT document.
// ---------------------------------------------------------------------------

void cmd_validate(const Instance& inst, Reporter& rep, json& counts, std::string&) {
    std::vector<std::string> codes;
    suite(rep, "groupoid", validate_groupoid(*inst.gpd), &codes);
    if (inst.sub) suite(rep, "subgroupoid", validate_groupoid(inst.sub->gpd), &codes);
    if (inst.group) suite(rep, "group", validate_groupoid(*inst.group), &codes);
    if (inst.action) suite(rep, "action", validate_iso_action(*inst.action), &codes);
    if (inst.bundle)
        suite(rep, "bundle", validate_bundle_with_sections(*inst.bundle), &codes);
    if (inst.bundle_action)
        suite(rep, "bundle_action", validate_bundle_action(*inst.bundle_action),
              &codes);
    if (inst.claims.contains("violations")) {
        ++rep.claims_checked;
        json missing = json::array();
        for (const auto& want : inst.claims.at("violations")) {
            std::string prefix = want.get<std::string>();
            bool hit = false;
            for (const std::string& c : codes)
                if (c.rfind(prefix, 0) == 0) hit = true;
            if (!hit) missing.push_back(prefix);
        }
        if (missing.empty())
            rep.pass("claim:violations");
        else
            rep.fail("claim:violations", {{"missing", missing}, {"seen", codes}});
    }
    counts = {{"arrows", inst.gpd->n_arrows}, {"objects", inst.gpd->n_objects}};
    if (inst.bundle) counts["total_dim"] = total_dim(*inst.bundle);
}

void cmd_product(const Instance& inst, Reporter& rep, json& counts, std::string&,
                 const std::string& kind) {
    std::shared_ptr<const FellBundle> built;
    if (kind == "semidirect") {
        need_bundle_action(inst);
        built = semidirect_bundle(inst.bundle_action).bun;
    } else if (kind == "action") {
        need_bundle(inst);
        auto space =
            std::make_shared<const SpaceAction>(translation_space(inst.gpd));
        built = make_action_bundle(inst.bundle, space).bun;
    } else if (kind == "restrict") {
        need_bundle(inst);
        built = std::make_shared<const FellBundle>(
            restrict_bundle(*inst.bundle, need_sub(inst)));
    } else {
        need_bundle_action(inst);
        built = orbit_bundle(inst.bundle_action).bun;
    }
    suite(rep, "product-axioms", validate_bundle(*built));
    counts = bundle_counts(*built);
}

IdealLattice enumerate_for(const Instance& inst, bool invariant) {
    if (invariant) return enumerate_invariant_ideals(need_bundle_action(inst));
    need_bundle(inst);
    return enumerate_ideals(inst.bundle);
}

void cmd_ideals(const Instance& inst, Reporter& rep, json& counts, std::string& dot,
                bool invariant) {
    IdealLattice lat = enumerate_for(inst, invariant);
    const FellBundle& b = *lat.bun;
    bool all_valid = true;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        ValidationReport r = validate_ideal(b, lat.ideals[i]);
        if (!r.empty()) {
            all_valid = false;
            rep.fail("ideal-laws",
                     {{"ideal", i}, {"code", r.front().code},
                      {"message", r.front().message}});
        }
    }
    if (all_valid) rep.pass("ideal-laws", {{"checked", lat.size()}});
    json masks = json::array();
    for (std::size_t i = 0; i < lat.size(); ++i)
        masks.push_back(fellb::detail::block_set(lat.mask[i], lat.n_blocks));
    counts = {{"blocks", lat.n_blocks},
              {"ideals", lat.size()},
              {"block_sets", std::move(masks)}};
    claim_count(rep, inst, "blocks", lat.n_blocks);
    claim_count(rep, inst, invariant ? "invariant_ideals" : "ideals", lat.size());
    dot = lattice_dot(lat, inst.name);
}

void rieffel_roundtrip(Reporter& rep, const EquivalenceBundle& eq, json& counts) {
    suite(rep, "linking-space", validate_equivalence_space(*eq.space));
    suite(rep, "equivalence-axioms", validate_equivalence_bundle(eq));
    IdealLattice left = enumerate_ideals(eq.left);
    IdealLattice right = enumerate_ideals(eq.right);
    std::vector<std::size_t> l2r = rieffel_map_left_to_right(eq, left, right);
    std::vector<std::size_t> r2l = rieffel_map_right_to_left(eq, right, left);
    bool inverse = left.size() == right.size();
    for (std::size_t i = 0; inverse && i < left.size(); ++i)
        if (r2l[l2r[i]] != i) inverse = false;
    for (std::size_t i = 0; inverse && i < right.size(); ++i)
        if (l2r[r2l[i]] != i) inverse = false;
    if (inverse)
        rep.pass("correspondence-inverse");
    else
        rep.fail("correspondence-inverse",
                 {{"left_to_right", size_list(l2r)}, {"right_to_left", size_list(r2l)}});
    std::string why;
    if (lattice_isomorphic_via(left, right, l2r, &why))
        rep.pass("lattice-isomorphism");
    else
        rep.fail("lattice-isomorphism", {{"why", why}});
    counts = {{"left_ideals", left.size()}, {"right_ideals", right.size()}};
}

void cmd_rieffel(const Instance& inst, Reporter& rep, json& counts, std::string&,
                 const std::string& construction) {
    EquivalenceBundle eq;
    if (construction == "left") {
        need_bundle_action(inst);
        eq = semidirect_equivalence(inst.bundle_action).core.eq;
    } else if (construction == "right") {
        need_bundle(inst);
        eq = arrow_space_equivalence(inst.bundle).eq;
    } else if (construction == "subgroupoid") {
        need_bundle(inst);
        eq = subgroupoid_equivalence_bundle(inst.bundle, need_sub(inst)).eq;
    } else {
        need_bundle_action(inst);
        eq = principal_equivalence(inst.bundle_action).eq;
    }
    rieffel_roundtrip(rep, eq, counts);
    if (inst.claims.contains("rieffel") &&
        inst.claims.at("rieffel").contains(construction)) {
        ++rep.claims_checked;
        auto expected = inst.claims.at("rieffel").at(construction).get<long long>();
        auto l = counts.at("left_ideals").get<long long>();
        auto r = counts.at("right_ideals").get<long long>();
        if (expected == l && expected == r)
            rep.pass("claim:rieffel." + construction);
        else
            rep.fail("claim:rieffel." + construction,
                     {{"expected", expected}, {"left", l}, {"right", r}});
    }
}

void certificate(Reporter& rep, const std::string& name, const LadderCore& core) {
    std::string why;
    if (certify_ladder(core, &why))
        rep.pass(name, {{"maps",
                         {{"f", size_list(core.set.f)},
                          {"g", size_list(core.set.g)},
                          {"h", size_list(core.set.h)},
                          {"u", size_list(core.set.u)},
                          {"v", size_list(core.set.v)}}}});
    else
        rep.fail(name, {{"why", why}});
}

void cmd_ladder(const Instance& inst, Reporter& rep, json& counts, std::string& dot,
                const std::string& side, bool extend) {
    LadderCore core;
    std::optional<LadderCore> up_core;
    if (side == "left") {
        need_bundle_action(inst);
        LeftLadder l = build_left_ladder(inst.bundle_action);
        // One level up the ladder repeats with the translation action; the
        // extension builder asserts the overlap with the level below.
        if (extend) up_core = extend_left_ladder(l).core;
        core = std::move(l.core);
    } else {
        need_bundle(inst);
        RightLadder r = build_right_ladder(inst.bundle);
        if (extend) up_core = extend_right_ladder(r).core;
        core = std::move(r.core);
    }
    rep.pass("construction", {{"nodes",
                               {{"x", core.node_label[0]},
                                {"y", core.node_label[1]},
                                {"z", core.node_label[2]},
                                {"w", core.node_label[3]}}}});
    certificate(rep, "certificate", core);
    counts = {{"nodes", size_list(node_sizes(core))}};
    claim_nodes(rep, inst, side == "left" ? "ladder_left" : "ladder_right",
                node_sizes(core));
    if (up_core) {
        certificate(rep, "extension-certificate", *up_core);
        counts["extended_nodes"] = size_list(node_sizes(*up_core));
    }
    dot = ladder_dot(core, inst.name);
}

// ---------------------------------------------------------------------------
// Dispatch, reporting, exit codes.
// ---------------------------------------------------------------------------

using Body = std::function<void(const Instance&, Reporter&, json&, std::string&)>;

int run_command(const std::string& command, const std::string& path, json flags,
                bool timing, bool dot_only, const Body& body) {
    auto start = std::chrono::steady_clock::now();
    Reporter rep;
    json counts;
    std::string dot;
    Instance inst;
    bool loaded = false;
    try {
        inst = io::load_instance(path);
        loaded = true;
        rep.pass("load");
    } catch (const io::SchemaError& e) {
        rep.fail("load", {{"message", e.what()}, {"where", e.where}});
    }
    if (loaded) {
        try {
            body(inst, rep, counts, dot);
        } catch (const UnsupportedInstance& e) {
            rep.unsupported("supported",
                            {{"message", e.what()}, {"witness", e.witness}});
        } catch (const io::SchemaError& e) {
            rep.fail("schema", {{"message", e.what()}, {"where", e.where}});
        } catch (const Error& e) {
            rep.fail("internal-consistency", {{"message", e.what()}});
        }
        if (inst.claims.contains("unsupported") &&
            inst.claims.at("unsupported").get<bool>()) {
            ++rep.claims_checked;
            if (rep.any_unsupported)
                rep.pass("claim:unsupported");
            else
                rep.fail("claim:unsupported",
                         {{"expected", "unsupported"}, {"actual", rep.status()}});
        }
    }
    if (dot_only && rep.exit_code() == 0) {
        std::cout << dot;
        return 0;
    }
    json report;
    report["command"] = command;
    report["instance"] = loaded ? inst.name : io::instance_basename(path);
    report["flags"] = std::move(flags);
    report["checks"] = std::move(rep.checks);
    if (!counts.is_null()) report["counts"] = std::move(counts);
    report["claims_checked"] = rep.claims_checked;
    report["status"] = rep.status();
    if (timing) {
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
        report["timing_ms"] = ms;
    } else {
        report["timing_ms"] = nullptr;
    }
    report["exit"] = rep.exit_code();
    std::cout << report.dump(2) << "\n";
    return rep.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact ideal-lattice workbench for Fell bundles over finite groupoids"};
    app.require_subcommand(1);
    bool timing = false;
    app.add_flag("--timing", timing,
                 "fill timing_ms in reports (breaks byte determinism)");

    std::string path, kind = "semidirect", construction = "subgroupoid";
    std::string side = "left", what = "lattice";
    bool invariant = false, extend = false;

    CLI::App* validate = app.add_subcommand("validate", "run every axiom suite");
    validate->add_option("file", path, "instance file")->required();

    CLI::App* product = app.add_subcommand("product", "build a product bundle");
    product->add_option("file", path, "instance file")->required();
    product->add_option("--kind", kind, "semidirect|action|restrict|orbit")
        ->required()
        ->check(CLI::IsMember({"semidirect", "action", "restrict", "orbit"}));

    CLI::App* ideals = app.add_subcommand("ideals", "enumerate the ideal lattice");
    ideals->add_option("file", path, "instance file")->required();
    ideals->add_flag("--invariant", invariant, "invariant ideals of the bundle action");

    CLI::App* rieffel =
        app.add_subcommand("rieffel", "equivalence axioms and the ideal correspondence");
    rieffel->add_option("file", path, "instance file")->required();
    rieffel->add_option("--construction", construction,
                        "left|right|subgroupoid|principal")
        ->required()
        ->check(CLI::IsMember({"left", "right", "subgroupoid", "principal"}));

    CLI::App* ladder = app.add_subcommand("ladder", "build and certify a ladder");
    ladder->add_option("file", path, "instance file")->required();
    ladder->add_option("--side", side, "left|right")
        ->required()
        ->check(CLI::IsMember({"left", "right"}));
    ladder->add_flag("--extend", extend, "also certify one level upward");

    CLI::App* export_dot = app.add_subcommand("export-dot", "print a DOT document");
    export_dot->add_option("file", path, "instance file")->required();
    export_dot->add_option("--what", what, "lattice|ladder")
        ->required()
        ->check(CLI::IsMember({"lattice", "ladder"}));
    export_dot->add_flag("--invariant", invariant,
                         "lattice: invariant ideals of the bundle action");
    export_dot->add_option("--side", side, "ladder: left|right")
        ->check(CLI::IsMember({"left", "right"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (validate->parsed())
        return run_command("validate", path, json::object(), timing, false,
                           cmd_validate);
    if (product->parsed())
        return run_command("product", path, {{"kind", kind}}, timing, false,
                           [&](const Instance& i, Reporter& r, json& c,
                               std::string& d) { cmd_product(i, r, c, d, kind); });
    if (ideals->parsed())
        return run_command("ideals", path, {{"invariant", invariant}}, timing, false,
                           [&](const Instance& i, Reporter& r, json& c,
                               std::string& d) { cmd_ideals(i, r, c, d, invariant); });
    if (rieffel->parsed())
        return run_command(
            "rieffel", path, {{"construction", construction}}, timing, false,
            [&](const Instance& i, Reporter& r, json& c, std::string& d) {
                cmd_rieffel(i, r, c, d, construction);
            });
    if (ladder->parsed())
        return run_command("ladder", path, {{"side", side}, {"extend", extend}},
                           timing, false,
                           [&](const Instance& i, Reporter& r, json& c,
                               std::string& d) { cmd_ladder(i, r, c, d, side, extend); });
    if (export_dot->parsed()) {
        if (what == "lattice")
            return run_command("export-dot", path,
                               {{"what", what}, {"invariant", invariant}}, timing,
                               true,
                               [&](const Instance& i, Reporter& r, json& c,
                                   std::string& d) { cmd_ideals(i, r, c, d, invariant); });
        return run_command("export-dot", path, {{"what", what}, {"side", side}},
                           timing, true,
                           [&](const Instance& i, Reporter& r, json& c,
                               std::string& d) { cmd_ladder(i, r, c, d, side, false); });
    }
    return 2;
}
