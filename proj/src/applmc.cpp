#include "linlam/applmc.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <sstream>
#include <tuple>

#include "linlam/errors.hpp"
#include "linlam/eval.hpp"
#include "linlam/parser.hpp"
#include "linlam/pretty.hpp"
#include "linlam/typecheck.hpp"

namespace linlam {

namespace {

std::string fmt_amp(double v) {
    if (v == 0.0) v = 0.0; // flush -0 so keys are stable
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}

struct KeyedState {
    std::string key;
    StateInfo info;
};

// Canonical state identity. Quantum closures canonicalize first (register
// variables renamed, phase fixed), and their amplitudes join the key.
KeyedState keyed(bool is_value, const TermPtr& term, const QuantumRegister& reg,
                 const TypePtr& type, bool quantum) {
    KeyedState ks;
    ks.info.is_value = is_value;
    ks.info.type = type;
    std::string suffix;
    if (quantum) {
        QuantumClosure c = canonicalize_closure({reg, term});
        suffix = canonical_key(c.term);
        if (!c.reg.vars.empty()) {
            suffix += "@";
            for (const auto& a : c.reg.amps)
                suffix += fmt_amp(a.real()) + "," + fmt_amp(a.imag()) + ";";
        }
        ks.info.term = c.term;
        ks.info.reg = std::move(c.reg);
    } else {
        ks.info.term = term;
        suffix = canonical_key(term);
    }
    ks.key = std::string(is_value ? "v|" : "t|") + type_to_string(type) + "|" + suffix;
    return ks;
}

// eval_state: StateInfo -> vector of (value term, register, probability)
template <class P, class EvalFn>
Explored<P> explore_core(const std::vector<std::pair<TermPtr, TypePtr>>& roots, bool quantum,
                         TestBasis& basis, const ExploreOptions& opts, EvalFn eval_state) {
    Explored<P> ex;
    ex.done_state = ex.lmc.add_state("#done");
    StateInfo sink;
    sink.sink = true;
    ex.info.push_back(sink);
    std::vector<int> depth{0};
    std::vector<char> expanded{1};
    std::deque<int> queue;

    auto ensure = [&](bool is_value, const TermPtr& t, const QuantumRegister& reg,
                      const TypePtr& ty, int d) -> int {
        KeyedState ks = keyed(is_value, t, reg, ty, quantum);
        auto it = ex.lmc.state_index.find(ks.key);
        if (it != ex.lmc.state_index.end()) return it->second;
        int id = ex.lmc.add_state(ks.key);
        ex.info.push_back(std::move(ks.info));
        depth.push_back(d);
        expanded.push_back(0);
        queue.push_back(id);
        return id;
    };

    for (const auto& [t, ty] : roots)
        ex.roots.push_back(ensure(false, t, QuantumRegister{}, ty, 0));

    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        if (expanded[s]) continue;
        int d = depth[s];
        if (d >= opts.max_depth || static_cast<int>(ex.lmc.states.size()) >= opts.max_states) {
            ex.truncated = true;
            ex.explored_depth = std::min(ex.explored_depth, d);
            continue; // left unexpanded; verdicts beyond this depth are not claimed
        }
        expanded[s] = 1;
        const StateInfo si = ex.info[s]; // copy: ensure() may reallocate info
        if (!si.is_value) {
            ex.lmc.add_edge(s, ex.lmc.add_label("type:" + type_to_string(si.type)),
                            ex.done_state, P(1));
            int l = ex.lmc.add_label("eval");
            for (const auto& [vt, vreg, p] : eval_state(si))
                ex.lmc.add_edge(s, l, ensure(true, vt, vreg, si.type, d + 1), p);
            continue;
        }
        ex.lmc.add_edge(s, ex.lmc.add_label("vtype:" + type_to_string(si.type)), ex.done_state,
                        P(1));
        switch (si.type->kind()) {
        case Type::Kind::Bool: {
            const auto* b = as<BoolN>(si.term);
            if (!b) throw InternalError("boolean value-state is not a constant");
            ex.lmc.add_edge(s, ex.lmc.add_label(b->value ? "tt" : "ff"), ex.done_state, P(1));
            break;
        }
        case Type::Kind::Arrow: {
            // Handing an argument to a lambda lands on the substituted body,
            // a term-state; evaluation is a separate move.  Quantum basis
            // entries are preparation terms, not syntactic values; for those
            // the application form lets the (single) evaluation step prepare
            // the qubits first — same distribution, same depth.
            const auto* lam = as<LamN>(si.term);
            if (!lam) throw InternalError("arrow value-state is not a lambda");
            for (const auto& w : basis.args_for(si.type->left())) {
                TermPtr next = is_value(w.term) ? subst(lam->body, lam->binder, w.term)
                                                : mk_app(si.term, w.term);
                ex.lmc.add_edge(s, ex.lmc.add_label("arg:" + w.key),
                                ensure(false, next, si.reg, si.type->right(), d + 1), P(1));
            }
            break;
        }
        case Type::Kind::Tensor:
        case Type::Kind::Qbit:
            for (const auto& dt : basis.destructors_for(si.type))
                ex.lmc.add_edge(s, ex.lmc.add_label("destruct:" + dt.key),
                                ensure(false, mk_app(dt.term, si.term), si.reg,
                                       Type::boolean(), d + 1),
                                P(1));
            break;
        default:
            break; // placeholder type: no interactions
        }
    }
    return ex;
}

} // namespace

std::string state_display(const StateInfo& s) {
    if (s.sink) return "#done";
    std::string out = s.is_value ? "value " : "";
    out += pretty(s.term);
    if (!s.reg.vars.empty()) {
        out += " @ (";
        for (size_t i = 0; i < s.reg.vars.size(); ++i)
            out += (i ? "," : "") + s.reg.vars[i];
        out += ")[";
        for (size_t i = 0; i < s.reg.amps.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%g%+gi", s.reg.amps[i].real(),
                          s.reg.amps[i].imag());
            out += std::string(i ? ", " : "") + buf;
        }
        out += "]";
    }
    return out;
}

Explored<Rational> explore_classical(const std::vector<std::pair<TermPtr, TypePtr>>& roots,
                                     Mode mode, TestBasis& basis, const ExploreOptions& opts) {
    if (mode == Mode::Quantum)
        throw InternalError("explore_classical called with the quantum mode");
    EvalCache cache;
    auto eval_state = [&cache, mode](const StateInfo& si) {
        std::vector<std::tuple<TermPtr, QuantumRegister, Rational>> out;
        RatDist d = eval_big(si.term, mode, &cache);
        for (const auto& [k, e] : d.entries()) {
            (void)k;
            out.push_back({e.first, QuantumRegister{}, e.second});
        }
        return out;
    };
    return explore_core<Rational>(roots, false, basis, opts, eval_state);
}

Explored<double> explore_quantum(const std::vector<std::pair<TermPtr, TypePtr>>& roots,
                                 TestBasis& basis, const ExploreOptions& opts) {
    auto eval_state = [&opts](const StateInfo& si) {
        std::vector<std::tuple<TermPtr, QuantumRegister, double>> out;
        ClosureDist d = eval_closure_big({si.reg, si.term}, opts.gates);
        for (const auto* en : d.entries())
            if (en->prob > opts.tol)
                out.push_back({en->closure.term, en->closure.reg, en->prob});
        return out;
    };
    return explore_core<double>(roots, true, basis, opts, eval_state);
}

// ---------------------------------------------------------------------------
// Test basis

TestBasis::TestBasis(Mode mode, BasisOptions opts, const GateTable& gates)
    : mode_(mode), opts_(opts), gates_(gates) {
    for (const auto& [n, g] : gates_) {
        gate_names_.insert(n);
        arities_[n] = g.arity;
    }
}

TestBasis::Entry TestBasis::make(const std::string& src, const TypePtr& expect) {
    return make_term(parse(src, mode_, gate_names_), expect, src);
}

TestBasis::Entry TestBasis::make_term(TermPtr t, const TypePtr& expect, const std::string& key) {
    TypingContext empty;
    typecheck_expect(empty, t, expect, mode_, arities_);
    return Entry{std::move(t), expect, key};
}

const std::vector<TestBasis::Entry>& TestBasis::args_for(const TypePtr& ty) {
    std::string k = type_to_string(ty);
    auto it = args_.find(k);
    if (it != args_.end()) return it->second;
    std::vector<Entry> out;
    switch (ty->kind()) {
    case Type::Kind::Bool:
        for (const auto& a : opts_.bool_atoms) out.push_back(make(a, ty));
        break;
    case Type::Kind::Qbit:
        out.push_back(make("new(ff)", ty));
        out.push_back(make("new(tt)", ty));
        out.push_back(make("H<new(ff)>", ty));
        out.push_back(make("H<new(tt)>", ty));
        break;
    case Type::Kind::Tensor: {
        const auto& ls = args_for(ty->left());
        const auto& rs = args_for(ty->right());
        for (const auto& l : ls)
            for (const auto& r : rs)
                out.push_back(make_term(desugar_pair(l.term, r.term), ty,
                                        "<" + l.key + ", " + r.key + ">"));
        if (ty->left()->kind() == Type::Kind::Qbit && ty->right()->kind() == Type::Kind::Qbit)
            out.push_back(make("CNOT<H<new(ff)>, new(ff)>", ty));
        break;
    }
    case Type::Kind::Arrow: {
        EnumOptions eo;
        eo.size_bound = opts_.value_size_bound;
        eo.mode = mode_;
        for (const auto& v : enumerate_values(ty, eo))
            out.push_back(make_term(v, ty, pretty(v)));
        break;
    }
    default:
        break;
    }
    return args_.emplace(std::move(k), std::move(out)).first->second;
}

const std::vector<TestBasis::Entry>& TestBasis::destructors_for(const TypePtr& ty) {
    std::string k = type_to_string(ty);
    auto it = dtors_.find(k);
    if (it != dtors_.end()) return it->second;
    TypePtr dty = Type::arrow(ty, Type::boolean());
    std::vector<Entry> out;
    switch (ty->kind()) {
    case Type::Kind::Bool:
        out.push_back(make("\\x:bool. x", dty));
        out.push_back(make("\\x:bool. if x then ff else tt", dty));
        break;
    case Type::Kind::Qbit:
        out.push_back(make("\\x:qbit. meas(x)", dty));
        out.push_back(make("\\x:qbit. meas(H<x>)", dty));
        break;
    case Type::Kind::Tensor: {
        const auto& ls = destructors_for(ty->left());
        const auto& rs = destructors_for(ty->right());
        auto split = [&](const TermPtr& body) {
            return mk_lam("pp", ty, mk_letpair("pa", "pb", mk_var("pp"), body));
        };
        auto ca = [](const Entry& d, const char* v) { return mk_app(d.term, mk_var(v)); };
        for (const auto& d1 : ls) {
            for (const auto& d2 : rs) {
                // both components must be consumed in every branch
                out.push_back(make_term(
                    split(mk_if(ca(d1, "pa"), ca(d2, "pb"),
                                mk_if(ca(d2, "pb"), mk_bool(false), mk_bool(false)))),
                    dty, "and(" + d1.key + ", " + d2.key + ")"));
                out.push_back(make_term(
                    split(mk_if(ca(d1, "pa"), mk_if(ca(d2, "pb"), mk_bool(false), mk_bool(true)),
                                ca(d2, "pb"))),
                    dty, "xor(" + d1.key + ", " + d2.key + ")"));
            }
        }
        for (const auto& d1 : ls)
            out.push_back(make_term(
                split(mk_if(ca(rs.front(), "pb"), ca(d1, "pa"), ca(d1, "pa"))), dty,
                "left(" + d1.key + ")"));
        for (const auto& d2 : rs)
            out.push_back(make_term(
                split(mk_if(ca(ls.front(), "pa"), ca(d2, "pb"), ca(d2, "pb"))), dty,
                "right(" + d2.key + ")"));
        break;
    }
    case Type::Kind::Arrow: {
        const auto& ws = args_for(ty->left());
        const auto& cs = destructors_for(ty->right());
        for (const auto& w : ws)
            for (const auto& c : cs)
                out.push_back(make_term(
                    mk_lam("pf", ty, mk_app(c.term, mk_app(mk_var("pf"), w.term))), dty,
                    "after(" + w.key + "; " + c.key + ")"));
        break;
    }
    default:
        break;
    }
    return dtors_.emplace(std::move(k), std::move(out)).first->second;
}

std::uint64_t TestBasis::fingerprint() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    for (const auto& [t, es] : args_) {
        mix("A|" + t);
        for (const auto& e : es) mix("|" + e.key);
        mix("\n");
    }
    for (const auto& [t, es] : dtors_) {
        mix("D|" + t);
        for (const auto& e : es) mix("|" + e.key);
        mix("\n");
    }
    return h;
}

std::size_t TestBasis::entries_served() const {
    std::size_t n = 0;
    for (const auto& [t, es] : args_) {
        (void)t;
        n += es.size();
    }
    for (const auto& [t, es] : dtors_) {
        (void)t;
        n += es.size();
    }
    return n;
}

// ---------------------------------------------------------------------------
// Candidate relations

RelationSpec relation_from_json(const nlohmann::json& j, const GateTable& gates) {
    if (!j.is_object() || !j.contains("mode") || !j.contains("pairs") || !j["pairs"].is_array())
        throw InputError("relation file: expected {\"mode\": ..., \"pairs\": [...]}");
    auto mode = mode_from_name(j["mode"].get<std::string>());
    if (!mode) throw InputError("relation file: unknown mode " + j["mode"].get<std::string>());
    RelationSpec spec;
    spec.mode = *mode;
    std::set<std::string> names;
    std::map<std::string, int> arities;
    for (const auto& [n, g] : gates) {
        names.insert(n);
        arities[n] = g.arity;
    }
    TypingContext empty;
    for (const auto& pj : j["pairs"]) {
        if (!pj.is_object() || !pj.contains("left") || !pj.contains("right"))
            throw InputError("relation file: each pair needs \"left\" and \"right\" terms");
        RelPair rp;
        rp.left = parse(pj["left"].get<std::string>(), spec.mode, names);
        rp.right = parse(pj["right"].get<std::string>(), spec.mode, names);
        if (pj.contains("type")) {
            rp.type = parse_type(pj["type"].get<std::string>(), spec.mode);
            typecheck_expect(empty, rp.left, rp.type, spec.mode, arities);
            typecheck_expect(empty, rp.right, rp.type, spec.mode, arities);
        } else {
            TypePtr tl = typecheck(empty, rp.left, spec.mode, arities);
            TypePtr tr = typecheck(empty, rp.right, spec.mode, arities);
            if (!type_compatible(tl, tr))
                throw InputError("relation file: pair sides have different types: " +
                                 type_to_string(tl) + " vs " + type_to_string(tr));
            rp.type = type_join(tl, tr);
            if (contains_any(rp.type))
                throw InputError(
                    "relation file: pair type is underdetermined; add a \"type\" field");
        }
        spec.pairs.push_back(std::move(rp));
    }
    return spec;
}

nlohmann::json relation_to_json(const RelationSpec& spec) {
    nlohmann::json j;
    j["mode"] = mode_name(spec.mode);
    j["pairs"] = nlohmann::json::array();
    for (const auto& rp : spec.pairs) {
        std::string l = pretty(rp.left), r = pretty(rp.right);
        // The file must parse back to the same terms.
        for (const auto& [src, t] : {std::pair{l, rp.left}, {r, rp.right}}) {
            TermPtr back;
            try {
                back = parse(src, spec.mode, builtin_gate_names());
            } catch (const Error& e) {
                throw InputError("relation term does not round-trip through the printer: " +
                                 src + " (" + e.what() + ")");
            }
            if (!alpha_eq(back, t))
                throw InputError("relation term does not round-trip through the printer: " + src);
        }
        j["pairs"].push_back(
            {{"left", l}, {"right", r}, {"type", type_to_string(rp.type)}});
    }
    return j;
}

namespace {

template <class P>
std::vector<std::pair<int, int>> relation_state_pairs(const Explored<P>& ex,
                                                      const RelationSpec& spec, bool quantum) {
    std::vector<std::pair<int, int>> out;
    for (const auto& rp : spec.pairs) {
        auto find = [&](bool isv, const TermPtr& t) {
            auto it = ex.lmc.state_index.find(keyed(isv, t, QuantumRegister{}, rp.type, quantum).key);
            return it == ex.lmc.state_index.end() ? -1 : it->second;
        };
        int a = find(false, rp.left), b = find(false, rp.right);
        if (a >= 0 && b >= 0) out.push_back({a, b});
        // Listed values also relate the corresponding value-states.
        if (is_value(rp.left) && is_value(rp.right)) {
            int va = find(true, rp.left), vb = find(true, rp.right);
            if (va >= 0 && vb >= 0) out.push_back({va, vb});
        }
    }
    return out;
}

template <class P>
std::string class_members(const Explored<P>& ex, const std::vector<int>& cls) {
    std::string s = "{";
    for (size_t i = 0; i < cls.size(); ++i)
        s += (i ? "; " : "") + state_display(ex.info[cls[i]]);
    return s + "}";
}

template <class P>
CheckReport verify_on(const Explored<P>& ex, const std::vector<std::pair<int, int>>& pairs,
                      bool simulation, double tol) {
    CheckReport rep;
    std::ostringstream os;
    if (simulation) {
        if (auto f = check_simulation(ex.lmc, pairs, tol)) {
            rep.holds = false;
            os << "simulation condition fails for\n  " << state_display(ex.info[f->left])
               << "\n  " << state_display(ex.info[f->right]) << "\n"
               << "label " << ex.lmc.labels[f->label] << ", successor set "
               << class_members(ex, f->subset) << ":\n"
               << "  " << ProbPolicy<P>::to_string(f->left_prob) << " on the left exceeds "
               << ProbPolicy<P>::to_string(f->right_prob) << " on the closure of the set\n";
        }
    } else {
        if (auto f = check_bisimulation(ex.lmc, pairs, tol)) {
            rep.holds = false;
            os << "bisimulation condition fails for\n  " << state_display(ex.info[f->left])
               << "\n  " << state_display(ex.info[f->right]) << "\n"
               << "label " << ex.lmc.labels[f->label] << ", class "
               << class_members(ex, f->cls) << ":\n"
               << "  " << ProbPolicy<P>::to_string(f->left_prob) << " vs "
               << ProbPolicy<P>::to_string(f->right_prob) << "\n";
        }
    }
    if (ex.truncated)
        os << "(exploration truncated at depth " << ex.explored_depth
           << "; the verdict covers the explored fragment only)\n";
    rep.detail = os.str();
    return rep;
}

} // namespace

CheckReport verify_relation(const RelationSpec& spec, bool simulation, TestBasis& basis,
                            const ExploreOptions& opts) {
    std::vector<std::pair<TermPtr, TypePtr>> roots;
    for (const auto& rp : spec.pairs) {
        roots.push_back({rp.left, rp.type});
        roots.push_back({rp.right, rp.type});
    }
    if (spec.mode == Mode::Quantum) {
        Explored<double> ex = explore_quantum(roots, basis, opts);
        return verify_on(ex, relation_state_pairs(ex, spec, true), simulation, opts.tol);
    }
    Explored<Rational> ex = explore_classical(roots, spec.mode, basis, opts);
    return verify_on(ex, relation_state_pairs(ex, spec, false), simulation, opts.tol);
}

namespace {

template <class P>
std::optional<RelationSpec> propose_on(const Explored<P>& ex, Mode mode, double tol) {
    std::vector<int> block = partition_refine(ex.lmc, tol);
    if (block[ex.roots[0]] != block[ex.roots[1]]) return std::nullopt;
    std::map<int, std::vector<int>> members;
    for (size_t s = 0; s < block.size(); ++s) members[block[s]].push_back(static_cast<int>(s));
    RelationSpec spec;
    spec.mode = mode;
    std::set<std::string> seen;
    for (const auto& [b, cls] : members) {
        (void)b;
        // Pair every expressible member with one representative of its
        // (value-kind, type) group; the checker's reflexive-symmetric-
        // transitive closure recovers the all-pairs relation.
        std::map<std::string, int> reps;
        for (int s : cls) {
            const StateInfo& a = ex.info[s];
            if (a.sink) continue;
            if (!a.reg.vars.empty()) continue; // not expressible as a closed term
            std::string g = (a.is_value ? "v|" : "t|") + type_to_string(a.type);
            auto [it, fresh] = reps.emplace(g, s);
            if (fresh) continue;
            const StateInfo& r = ex.info[it->second];
            std::string key = pretty(r.term) + "\x01" + pretty(a.term);
            if (!seen.insert(key).second) continue;
            spec.pairs.push_back({r.term, a.term, a.type});
        }
    }
    return spec;
}

} // namespace

std::optional<RelationSpec> propose_relation(const TermPtr& left, const TermPtr& right,
                                             const TypePtr& type, Mode mode, TestBasis& basis,
                                             const ExploreOptions& opts) {
    std::vector<std::pair<TermPtr, TypePtr>> roots{{left, type}, {right, type}};
    if (mode == Mode::Quantum)
        return propose_on(explore_quantum(roots, basis, opts), mode, opts.tol);
    return propose_on(explore_classical(roots, mode, basis, opts), mode, opts.tol);
}

} // namespace linlam
