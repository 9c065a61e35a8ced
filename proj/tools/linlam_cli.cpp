// linlam: command-line front end for the linear lambda toolchain.
//
// Subcommands:
//   typecheck FILE              infer the type of a closed term
//   eval FILE                   value distribution of a closed term
//   bisim FILE FILE             distinguishing game between two terms
//   bisim --relation FILE       verify a candidate (bi)simulation relation
//   bisim --lmc FILE            check / refine an explicit finite chain
//   ctx-search FILE FILE        search for a separating context
//   propose FILE FILE           derive a candidate relation for two terms
//
// Exit codes: 0 success / property holds, 1 property refuted or check failed,
// 2 usage, parse, type, mode or input error, 3 internal invariant breach.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "linlam/applmc.hpp"
#include "linlam/context.hpp"
#include "linlam/errors.hpp"
#include "linlam/eval.hpp"
#include "linlam/game.hpp"
#include "linlam/lmc.hpp"
#include "linlam/parser.hpp"
#include "linlam/pretty.hpp"
#include "linlam/quantum.hpp"
#include "linlam/typecheck.hpp"

using nlohmann::json;
using namespace linlam;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json_file(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

std::string fmt_double(double v) {
    std::ostringstream ss;
    ss << std::setprecision(9) << v;
    return ss.str();
}

std::string fmt_fingerprint(std::uint64_t fp) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
    return buf;
}

Mode mode_of(const std::string& name) {
    auto m = mode_from_name(name);
    if (!m) throw InputError("unknown mode: " + name);
    return *m;
}

// Gate table plus the two derived views the parser and checker need.
struct GateSetup {
    GateTable table;
    std::set<std::string> names;
    std::map<std::string, int> arities;
};

GateSetup gate_setup(const std::string& file) {
    GateSetup g;
    g.table = file.empty() ? builtin_gates() : load_gates_json(read_file(file));
    for (const auto& [n, gate] : g.table) {
        g.names.insert(n);
        g.arities[n] = gate.arity;
    }
    return g;
}

TermPtr parse_closed(const std::string& path, Mode mode, const GateSetup& g) {
    TermPtr t = parse(read_file(path), mode, g.names);
    if (count_holes(t) > 0)
        throw TypeError(TypeError::Kind::HoleInTerm, path + ": contexts have no value here");
    return t;
}

// Display order for value distributions: tt, ff, then everything else in
// canonical-key order (the map order entries() already provides).
template <class Entries>
std::vector<std::pair<std::string, typename Entries::mapped_type::second_type>>
ordered_entries(const Entries& entries) {
    using P = typename Entries::mapped_type::second_type;
    std::vector<std::pair<int, std::pair<std::string, P>>> rows;
    for (const auto& [key, e] : entries) {
        (void)key;
        int rank = 2;
        if (const auto* b = as<BoolN>(e.first)) rank = b->value ? 0 : 1;
        rows.push_back({rank, {pretty(e.first), e.second}});
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<std::string, P>> out;
    for (auto& r : rows) out.push_back(std::move(r.second));
    return out;
}

std::string closure_display(const QuantumClosure& c) {
    StateInfo si;
    si.is_value = false;
    si.term = c.term;
    si.reg = c.reg;
    return state_display(si);
}

// ---------------------------------------------------------------------------
// typecheck

json derivation_to_json(const Derivation& d) {
    json j{{"rule", d.rule}, {"term", d.term}, {"type", d.type}};
    j["children"] = json::array();
    for (const auto& c : d.children) j["children"].push_back(derivation_to_json(*c));
    return j;
}

int cmd_typecheck(const std::string& file, const std::string& mode_name,
                  const std::string& gates_file, bool as_json) {
    Mode mode = mode_of(mode_name);
    GateSetup g = gate_setup(gates_file);
    TermPtr term;
    std::shared_ptr<Derivation> deriv;
    TypePtr ty;
    try {
        term = parse_closed(file, mode, g);
        ty = typecheck({}, term, mode, g.arities, &deriv);
    } catch (const TypeError& e) {
        if (as_json)
            std::cout << json{{"ok", false}, {"error", e.what()}}.dump(2) << "\n";
        else
            std::cout << e.what() << "\n";
        return 1;
    }
    if (as_json) {
        json j{{"ok", true}, {"type", type_to_string(ty)}};
        if (deriv) j["derivation"] = derivation_to_json(*deriv);
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << type_to_string(ty) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// eval

int cmd_eval(const std::string& file, const std::string& mode_name,
             const std::string& gates_file, bool as_json, bool trace, int max_rounds) {
    Mode mode = mode_of(mode_name);
    GateSetup g = gate_setup(gates_file);
    TermPtr term = parse_closed(file, mode, g);
    typecheck({}, term, mode, g.arities);

    json jout;
    std::vector<std::string> lines;
    auto emit = [&](const std::string& line) { lines.push_back(line); };

    if (mode == Mode::Quantum) {
        QuantumClosure c{QuantumRegister{}, term};
        if (trace) {
            ClosureDist cur = ClosureDist::dirac(c);
            for (int round = 0;; ++round) {
                std::string line = "step " + std::to_string(round) + ":";
                bool any = false;
                ClosureDist next;
                for (const auto* e : cur.entries()) {
                    line += std::string(any ? "," : "") + " " + closure_display(e->closure) +
                            ": " + fmt_double(e->prob);
                    any = true;
                    if (auto stepped = step_closure(e->closure, g.table))
                        next.add_scaled(*stepped, e->prob);
                    else
                        next.add(e->closure, e->prob);
                }
                if (!any) line += " (empty)";
                emit(line);
                bool done = true;
                for (const auto* e : cur.entries())
                    if (!is_value(e->closure.term)) done = false;
                if (done || round >= max_rounds) break;
                cur = std::move(next);
            }
        }
        ClosureDist out = eval_closure_big(c, g.table);
        std::string line;
        json entries = json::array();
        for (const auto* e : out.entries()) {
            std::string disp = closure_display(e->closure);
            line += disp + ": " + fmt_double(e->prob) + ", ";
            entries.push_back({{"value", disp}, {"prob", e->prob}});
        }
        line += "mass " + fmt_double(out.mass());
        emit(line);
        jout = {{"entries", entries}, {"mass", out.mass()}};
    } else {
        if (trace) {
            RatDist cur = RatDist::dirac(term);
            for (int round = 0;; ++round) {
                std::string line = "step " + std::to_string(round) + ":";
                bool any = false, done = true;
                RatDist next;
                for (const auto& [k, e] : cur.entries()) {
                    (void)k;
                    line += std::string(any ? "," : "") + " " + pretty(e.first) + ": " +
                            rational_to_string(e.second);
                    any = true;
                    if (auto stepped = step(e.first, mode)) {
                        next.add_scaled(*stepped, e.second);
                        done = false;
                    } else {
                        next.add(e.first, e.second);
                    }
                }
                if (!any) line += " (empty)";
                emit(line);
                if (done || round >= max_rounds) break;
                cur = std::move(next);
            }
        }
        RatDist out = eval_big(term, mode);
        std::string line;
        json entries = json::array();
        for (const auto& [disp, p] : ordered_entries(out.entries())) {
            line += disp + ": " + rational_to_string(p) + ", ";
            entries.push_back({{"value", disp}, {"prob", rational_to_string(p)}});
        }
        line += "mass " + rational_to_string(out.mass());
        emit(line);
        jout = {{"entries", entries}, {"mass", rational_to_string(out.mass())}};
    }

    if (as_json) {
        if (trace) jout["trace"] = lines;
        std::cout << jout.dump(2) << "\n";
    } else {
        for (const auto& l : lines) std::cout << l << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// bisim

void print_game_trace(const GameResult& gr, int start_round, bool quantum) {
    for (size_t i = 0; i < gr.trace.size(); ++i) {
        const GameMove& mv = gr.trace[i];
        std::cout << "  round " << (start_round - static_cast<int>(i)) << ": label '" << mv.label
                  << "'\n";
        std::cout << "    left : " << mv.left_state << "\n";
        std::cout << "    right: " << mv.right_state << "\n";
        std::string lp = quantum ? fmt_double(mv.left_prob) : mv.left_exact;
        std::string rp = quantum ? fmt_double(mv.right_prob) : mv.right_exact;
        if (mv.cls.empty()) {
            std::cout << "    probability of emitting the label: " << lp << " vs " << rp
                      << "\n";
            continue;
        }
        std::cout << "    probability into class below: " << lp << " vs " << rp << "\n";
        size_t shown = std::min<size_t>(mv.cls.size(), 4);
        for (size_t k = 0; k < shown; ++k) std::cout << "      { " << mv.cls[k] << " }\n";
        if (shown < mv.cls.size())
            std::cout << "      ... (" << (mv.cls.size() - shown) << " more)\n";
    }
}

json game_to_json(const GameResult& gr, const std::string& verdict) {
    json trace = json::array();
    for (const auto& mv : gr.trace) {
        trace.push_back({{"left", mv.left_state},
                         {"right", mv.right_state},
                         {"label", mv.label},
                         {"class", mv.cls},
                         {"left_prob", mv.left_prob},
                         {"right_prob", mv.right_prob},
                         {"left_exact", mv.left_exact},
                         {"right_exact", mv.right_exact}});
    }
    return json{{"verdict", verdict},
                {"rounds", gr.rounds},
                {"exhaustive", gr.exhaustive},
                {"basis_fingerprint", fmt_fingerprint(gr.basis_fingerprint)},
                {"basis_entries", gr.basis_entries},
                {"trace", trace}};
}

struct BisimConfig {
    std::string left_file, right_file;
    std::string relation_file, lmc_file, pairs_file;
    std::string mode_name = "prob";
    std::string type_text;
    std::string check = "bisim"; // bisim | sim | refine (refine: --lmc only)
    std::string gates_file;
    int basis_size = 5;
    int depth = -1;
    int max_states = 20000;
    double tol = kLmcDefaultTol;
    bool use_float = false;
    bool as_json = false;
};

template <class P>
int run_lmc_check(const json& chain, const BisimConfig& cfg) {
    FiniteLmc<P> m = lmc_from_json<P>(chain);
    if (cfg.check == "refine") {
        std::vector<int> part = partition_refine(m, cfg.tol);
        std::map<int, std::vector<std::string>> blocks;
        for (size_t s = 0; s < part.size(); ++s) blocks[part[s]].push_back(m.states[s]);
        if (cfg.as_json) {
            json j = json::array();
            for (const auto& [b, ms] : blocks) {
                (void)b;
                j.push_back(ms);
            }
            std::cout << json{{"blocks", j}}.dump(2) << "\n";
        } else {
            for (const auto& [b, ms] : blocks) {
                std::cout << "block " << b << ": {";
                for (size_t i = 0; i < ms.size(); ++i) std::cout << (i ? ", " : "") << ms[i];
                std::cout << "}\n";
            }
        }
        return 0;
    }

    if (cfg.pairs_file.empty())
        throw InputError("--lmc with --check " + cfg.check + " needs --pairs FILE");
    auto pairs = state_pairs_from_json<P>(read_json_file(cfg.pairs_file), m);

    std::string detail;
    bool holds;
    if (cfg.check == "sim") {
        auto f = check_simulation(m, pairs, cfg.tol);
        holds = !f.has_value();
        if (f) {
            detail = "simulation fails: " + m.states[f->left] + " -> " + m.states[f->right] +
                     " on label '" + m.labels[f->label] + "': " +
                     ProbPolicy<P>::to_string(f->left_prob) + " > " +
                     ProbPolicy<P>::to_string(f->right_prob) + " into the closure of {";
            for (size_t i = 0; i < f->subset.size(); ++i)
                detail += std::string(i ? ", " : "") + m.states[f->subset[i]];
            detail += "}";
        }
    } else {
        auto f = check_bisimulation(m, pairs, cfg.tol);
        holds = !f.has_value();
        if (f) {
            detail = "bisimulation fails: " + m.states[f->left] + " vs " + m.states[f->right] +
                     " on label '" + m.labels[f->label] + "': " +
                     ProbPolicy<P>::to_string(f->left_prob) + " vs " +
                     ProbPolicy<P>::to_string(f->right_prob) + " into class {";
            for (size_t i = 0; i < f->cls.size(); ++i)
                detail += std::string(i ? ", " : "") + m.states[f->cls[i]];
            detail += "}";
        }
    }
    if (cfg.as_json)
        std::cout << json{{"verdict", holds ? "HOLDS" : "FAILS"}, {"detail", detail}}.dump(2)
                  << "\n";
    else
        std::cout << (holds ? "HOLDS" : ("FAILS\n  " + detail)) << "\n";
    return holds ? 0 : 1;
}

int cmd_bisim(const BisimConfig& cfg, bool depth_given) {
    if (!cfg.lmc_file.empty()) {
        json chain = read_json_file(cfg.lmc_file);
        return cfg.use_float ? run_lmc_check<double>(chain, cfg)
                             : run_lmc_check<Rational>(chain, cfg);
    }

    GateSetup g = gate_setup(cfg.gates_file);

    if (!cfg.relation_file.empty()) {
        RelationSpec spec = relation_from_json(read_json_file(cfg.relation_file), g.table);
        TestBasis basis(spec.mode, BasisOptions{cfg.basis_size}, g.table);
        ExploreOptions eo;
        if (depth_given) eo.max_depth = cfg.depth;
        eo.max_states = cfg.max_states;
        eo.tol = cfg.tol;
        eo.gates = g.table;
        CheckReport rep = verify_relation(spec, cfg.check == "sim", basis, eo);
        std::string fp = fmt_fingerprint(basis.fingerprint());
        if (cfg.as_json)
            std::cout << json{{"verdict", rep.holds ? "HOLDS" : "FAILS"},
                              {"detail", rep.detail},
                              {"basis_fingerprint", fp},
                              {"basis_entries", basis.entries_served()}}
                             .dump(2)
                      << "\n";
        else {
            std::cout << (rep.holds ? "HOLDS" : "FAILS") << " (" << cfg.check
                      << "); basis " << fp << ", " << basis.entries_served() << " entries\n";
            if (!rep.detail.empty()) std::cout << rep.detail << "\n";
        }
        return rep.holds ? 0 : 1;
    }

    if (cfg.left_file.empty() || cfg.right_file.empty())
        throw InputError("bisim needs two term files, --relation FILE, or --lmc FILE");

    Mode mode = mode_of(cfg.mode_name);
    TermPtr left = parse_closed(cfg.left_file, mode, g);
    TermPtr right = parse_closed(cfg.right_file, mode, g);
    TypePtr ty;
    if (!cfg.type_text.empty()) {
        ty = parse_type(cfg.type_text, mode);
        typecheck_expect({}, left, ty, mode, g.arities);
        typecheck_expect({}, right, ty, mode, g.arities);
    } else {
        TypePtr tl = typecheck({}, left, mode, g.arities);
        TypePtr tr = typecheck({}, right, mode, g.arities);
        ty = type_join(tl, tr);
        if (!ty)
            throw TypeError(TypeError::Kind::TypeMismatch,
                            "the two terms have different types: " + type_to_string(tl) +
                                " vs " + type_to_string(tr));
        if (contains_any(ty))
            throw InputError("type is ambiguous (omega at top level); pass --type");
    }

    TestBasis basis(mode, BasisOptions{cfg.basis_size}, g.table);
    ExploreOptions eo;
    // D game rounds need D+1 raw refinement levels, hence exploration D+1 deep.
    if (depth_given) eo.max_depth = cfg.depth + 1;
    eo.max_states = cfg.max_states;
    eo.tol = cfg.tol;
    eo.gates = g.table;
    std::vector<std::pair<TermPtr, TypePtr>> roots{{left, ty}, {right, ty}};

    GameResult gr;
    int game_rounds = depth_given ? cfg.depth : -1;
    if (mode == Mode::Quantum) {
        Explored<double> ex = explore_quantum(roots, basis, eo);
        gr = game_distinguish(ex, basis, game_rounds, cfg.tol);
    } else {
        Explored<Rational> ex = explore_classical(roots, mode, basis, eo);
        gr = game_distinguish(ex, basis, game_rounds, cfg.tol);
    }

    std::string fp = fmt_fingerprint(gr.basis_fingerprint);
    if (gr.distinguished) {
        std::string verdict = "DISTINGUISHED";
        if (cfg.as_json) {
            std::cout << game_to_json(gr, verdict).dump(2) << "\n";
        } else {
            std::cout << verdict << " in " << gr.rounds << " round(s); basis " << fp << ", "
                      << gr.basis_entries << " entries\n";
            print_game_trace(gr, gr.rounds, mode == Mode::Quantum);
        }
        return 1;
    }
    std::string verdict;
    if (gr.exhaustive && !depth_given)
        verdict = "BISIMILAR";
    else
        verdict = "INDISTINGUISHABLE-UP-TO depth=" + std::to_string(gr.rounds);
    if (cfg.as_json) {
        std::cout << game_to_json(gr, verdict).dump(2) << "\n";
    } else {
        std::cout << verdict;
        if (gr.exhaustive)
            std::cout << " (exhaustive: the full reachable space reached its fixpoint)";
        std::cout << "; basis " << fp << ", " << gr.basis_entries << " entries\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// ctx-search

int cmd_ctx_search(const std::string& left_file, const std::string& right_file,
                   const std::string& mode_name, const std::string& type_text,
                   const std::string& result_text, int bound, int jobs, double tol,
                   const std::string& gates_file, bool as_json) {
    Mode mode = mode_of(mode_name);
    GateSetup g = gate_setup(gates_file);
    TermPtr left = parse_closed(left_file, mode, g);
    TermPtr right = parse_closed(right_file, mode, g);

    TypePtr hole_ty;
    if (!type_text.empty()) {
        hole_ty = parse_type(type_text, mode);
        typecheck_expect({}, left, hole_ty, mode, g.arities);
        typecheck_expect({}, right, hole_ty, mode, g.arities);
    } else {
        TypePtr tl = typecheck({}, left, mode, g.arities);
        TypePtr tr = typecheck({}, right, mode, g.arities);
        hole_ty = type_join(tl, tr);
        if (!hole_ty)
            throw TypeError(TypeError::Kind::TypeMismatch,
                            "the two terms have different types: " + type_to_string(tl) +
                                " vs " + type_to_string(tr));
        if (contains_any(hole_ty))
            throw InputError("type is ambiguous (omega at top level); pass --type");
    }
    TypePtr result_ty = parse_type(result_text, mode);

    EnumOptions opts;
    opts.size_bound = bound;
    opts.mode = mode;
    if (!gates_file.empty())
        for (const auto& [n, gate] : g.table)
            if (gate.arity == 1) opts.gate_names.push_back(n);

    SeparationSearchResult r =
        search_separating_context(left, right, hole_ty, result_ty, opts, jobs, tol, g.table);

    if (r.witness) {
        const SeparationWitness& w = *r.witness;
        std::string ls = mode == Mode::Quantum ? fmt_double(w.left_prob) : w.left_exact;
        std::string rs = mode == Mode::Quantum ? fmt_double(w.right_prob) : w.right_exact;
        if (as_json) {
            std::cout << json{{"verdict", "SEPARATED"},
                              {"context", pretty(w.context)},
                              {"observations", {{"left", ls}, {"right", rs}}},
                              {"bound", bound},
                              {"index", w.index},
                              {"contexts_checked", r.contexts_checked}}
                             .dump(2)
                      << "\n";
        } else {
            std::cout << "SEPARATED by " << pretty(w.context) << "\n";
            std::cout << "  halting probability: " << ls << " vs " << rs << " (context #"
                      << w.index << ")\n";
        }
        return 1;
    }
    if (as_json)
        std::cout << json{{"verdict", "NONE-UP-TO"},
                          {"context", nullptr},
                          {"observations", nullptr},
                          {"bound", bound},
                          {"contexts_checked", r.contexts_checked}}
                         .dump(2)
                  << "\n";
    else
        std::cout << "NONE-UP-TO " << bound << " (" << r.contexts_checked
                  << " contexts checked)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// propose

int cmd_propose(const std::string& left_file, const std::string& right_file,
                const std::string& mode_name, const std::string& type_text, int basis_size,
                int depth, bool depth_given, int max_states, double tol,
                const std::string& gates_file, const std::string& out_file) {
    Mode mode = mode_of(mode_name);
    GateSetup g = gate_setup(gates_file);
    TermPtr left = parse_closed(left_file, mode, g);
    TermPtr right = parse_closed(right_file, mode, g);
    TypePtr ty;
    if (!type_text.empty()) {
        ty = parse_type(type_text, mode);
        typecheck_expect({}, left, ty, mode, g.arities);
        typecheck_expect({}, right, ty, mode, g.arities);
    } else {
        TypePtr tl = typecheck({}, left, mode, g.arities);
        TypePtr tr = typecheck({}, right, mode, g.arities);
        ty = type_join(tl, tr);
        if (!ty || contains_any(ty))
            throw InputError("cannot infer a shared concrete type; pass --type");
    }

    TestBasis basis(mode, BasisOptions{basis_size}, g.table);
    ExploreOptions eo;
    if (depth_given) eo.max_depth = depth;
    eo.max_states = max_states;
    eo.tol = tol;
    eo.gates = g.table;
    auto spec = propose_relation(left, right, ty, mode, basis, eo);
    if (!spec) {
        std::cerr << "the two terms are distinguished; no candidate relation exists\n";
        return 1;
    }
    std::string text = relation_to_json(*spec).dump(2) + "\n";
    if (out_file.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_file, std::ios::binary);
        if (!out) throw InputError("cannot write " + out_file);
        out << text;
        std::cout << "wrote " << spec->pairs.size() << " pair(s) to " << out_file << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"linear lambda toolchain: typing, evaluation, bisimulation, context search"};
    app.require_subcommand(1);
    auto mode_validator = CLI::IsMember({"det", "prob", "quantum"});

    // typecheck
    auto* tc = app.add_subcommand("typecheck", "infer the type of a closed term");
    std::string tc_file, tc_mode = "prob", tc_gates;
    bool tc_json = false;
    tc->add_option("file", tc_file, "term file")->required();
    tc->add_option("--mode", tc_mode, "calculus (det|prob|quantum)")->check(mode_validator);
    tc->add_option("--gates", tc_gates, "JSON file with extra gates");
    tc->add_flag("--json", tc_json, "machine-readable output with the derivation");

    // eval
    auto* ev = app.add_subcommand("eval", "value distribution of a closed term");
    std::string ev_file, ev_mode = "prob", ev_gates;
    bool ev_json = false, ev_trace = false;
    int ev_rounds = 1000;
    ev->add_option("file", ev_file, "term file")->required();
    ev->add_option("--mode", ev_mode, "calculus (det|prob|quantum)")->check(mode_validator);
    ev->add_option("--gates", ev_gates, "JSON file with extra gates");
    ev->add_flag("--json", ev_json, "machine-readable output");
    ev->add_flag("--trace", ev_trace, "print the small-step distribution sequence");
    ev->add_option("--max-steps", ev_rounds, "trace length cap")->check(CLI::NonNegativeNumber);

    // bisim
    auto* bs = app.add_subcommand("bisim",
                                  "distinguishing game / relation check / explicit chains");
    BisimConfig bc;
    bs->add_option("left", bc.left_file, "left term file");
    bs->add_option("right", bc.right_file, "right term file");
    bs->add_option("--relation", bc.relation_file, "candidate relation JSON");
    bs->add_option("--lmc", bc.lmc_file, "explicit finite chain JSON");
    bs->add_option("--pairs", bc.pairs_file, "state pairs JSON (with --lmc)");
    bs->add_option("--check", bc.check, "bisim | sim | refine")
        ->check(CLI::IsMember({"bisim", "sim", "refine"}));
    bs->add_option("--mode", bc.mode_name, "calculus (det|prob|quantum)")->check(mode_validator);
    bs->add_option("--type", bc.type_text, "type the two terms share");
    bs->add_option("--basis-size", bc.basis_size, "size bound for function-typed basis values")
        ->check(CLI::PositiveNumber);
    auto* bs_depth = bs->add_option("--depth", bc.depth, "exploration / game round bound")
                         ->check(CLI::NonNegativeNumber);
    bs->add_option("--max-states", bc.max_states, "state cap for exploration")
        ->check(CLI::PositiveNumber);
    bs->add_option("--tol", bc.tol, "probability tolerance (quantum / float chains)");
    bs->add_flag("--float", bc.use_float, "explicit chains: floating probabilities");
    bs->add_flag("--json", bc.as_json, "machine-readable output");

    // ctx-search
    auto* cs = app.add_subcommand("ctx-search", "search for a separating context");
    std::string cs_left, cs_right, cs_mode = "prob", cs_type, cs_result = "bool", cs_gates;
    int cs_bound = 7, cs_jobs = 1;
    double cs_tol = kQuantumTol;
    bool cs_json = false;
    cs->add_option("left", cs_left, "left term file")->required();
    cs->add_option("right", cs_right, "right term file")->required();
    cs->add_option("--mode", cs_mode, "calculus (det|prob|quantum)")->check(mode_validator);
    cs->add_option("--type", cs_type, "hole type (default: inferred)");
    cs->add_option("--result-type", cs_result, "context result type");
    cs->add_option("--ctx-bound", cs_bound, "maximum context size")->check(CLI::PositiveNumber);
    cs->add_option("--jobs", cs_jobs, "parallel workers")->check(CLI::PositiveNumber);
    cs->add_option("--tol", cs_tol, "observation tolerance (quantum)");
    cs->add_option("--gates", cs_gates, "JSON file with extra gates");
    cs->add_flag("--json", cs_json, "machine-readable output");

    // propose
    auto* pr = app.add_subcommand("propose", "derive a candidate relation for two terms");
    std::string pr_left, pr_right, pr_mode = "prob", pr_type, pr_gates, pr_out;
    int pr_basis = 5, pr_depth = -1, pr_states = 20000;
    double pr_tol = kLmcDefaultTol;
    pr->add_option("left", pr_left, "left term file")->required();
    pr->add_option("right", pr_right, "right term file")->required();
    pr->add_option("--mode", pr_mode, "calculus (det|prob|quantum)")->check(mode_validator);
    pr->add_option("--type", pr_type, "type the two terms share");
    pr->add_option("--basis-size", pr_basis, "size bound for function-typed basis values")
        ->check(CLI::PositiveNumber);
    auto* pr_depth_opt = pr->add_option("--depth", pr_depth, "exploration depth bound")
                             ->check(CLI::NonNegativeNumber);
    pr->add_option("--max-states", pr_states, "state cap")->check(CLI::PositiveNumber);
    pr->add_option("--tol", pr_tol, "probability tolerance");
    pr->add_option("--gates", pr_gates, "JSON file with extra gates");
    pr->add_option("-o,--output", pr_out, "write the relation here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (tc->parsed()) return cmd_typecheck(tc_file, tc_mode, tc_gates, tc_json);
        if (ev->parsed()) return cmd_eval(ev_file, ev_mode, ev_gates, ev_json, ev_trace, ev_rounds);
        if (bs->parsed()) return cmd_bisim(bc, bs_depth->count() > 0);
        if (cs->parsed())
            return cmd_ctx_search(cs_left, cs_right, cs_mode, cs_type, cs_result, cs_bound,
                                  cs_jobs, cs_tol, cs_gates, cs_json);
        if (pr->parsed())
            return cmd_propose(pr_left, pr_right, pr_mode, pr_type, pr_basis, pr_depth,
                               pr_depth_opt->count() > 0, pr_states, pr_tol, pr_gates, pr_out);
    } catch (const InternalError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
