#include "linlam/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "linlam/errors.hpp"
#include "linlam/pretty.hpp"

namespace linlam {

namespace {

using nlohmann::json;

size_t dim_of(const QuantumRegister& reg) { return size_t{1} << reg.vars.size(); }

void check_register(const QuantumRegister& reg, const char* op) {
    if (reg.amps.size() != dim_of(reg))
        throw InternalError(std::string(op) + ": register has " + std::to_string(reg.amps.size()) +
                            " amplitudes for " + std::to_string(reg.vars.size()) + " qubits");
    if (!reg.normalized())
        throw InternalError(std::string(op) + ": register is not normalized");
}

int bit_weight_shift(const QuantumRegister& reg, int pos) {
    return static_cast<int>(reg.vars.size()) - 1 - pos;
}

[[noreturn]] void stuck(const QuantumClosure& c, const std::string& why) {
    throw InternalError("quantum evaluation stuck on " + pretty(c.term) + ": " + why);
}

} // namespace

int QuantumRegister::index_of(const std::string& var) const {
    for (size_t i = 0; i < vars.size(); ++i)
        if (vars[i] == var) return static_cast<int>(i);
    return -1;
}

bool QuantumRegister::normalized(double tol) const {
    double s = 0;
    for (const auto& a : amps) s += std::norm(a);
    return std::abs(s - 1.0) <= tol;
}

void QvarSource::absorb(const QuantumRegister& reg) {
    for (const auto& v : reg.vars) {
        if (v.size() < 2 || v[0] != 'q') continue;
        bool digits = std::all_of(v.begin() + 1, v.end(),
                                  [](char c) { return c >= '0' && c <= '9'; });
        if (!digits) continue;
        int k = std::stoi(v.substr(1));
        if (k + 1 > next) next = k + 1;
    }
}

std::pair<QuantumRegister, std::string> new_qubit(const QuantumRegister& reg, bool b,
                                                  QvarSource* names) {
    check_register(reg, "new_qubit");
    QvarSource local;
    if (!names) {
        local.absorb(reg);
        names = &local;
    }
    std::string r = names->fresh();
    while (reg.index_of(r) >= 0) r = names->fresh();
    QuantumRegister out;
    out.vars = reg.vars;
    out.vars.push_back(r);
    out.amps.assign(reg.amps.size() * 2, Cplx(0, 0));
    int bit = b ? 1 : 0;
    for (size_t i = 0; i < reg.amps.size(); ++i) out.amps[2 * i + bit] = reg.amps[i];
    return {std::move(out), std::move(r)};
}

double measure_prob(const QuantumRegister& reg, const std::string& r, bool b) {
    check_register(reg, "measure_prob");
    int pos = reg.index_of(r);
    if (pos < 0) throw InternalError("measure_prob: unknown qubit " + r);
    int shift = bit_weight_shift(reg, pos);
    int want = b ? 1 : 0;
    double p = 0;
    for (size_t i = 0; i < reg.amps.size(); ++i)
        if (((i >> shift) & 1) == static_cast<size_t>(want)) p += std::norm(reg.amps[i]);
    return p;
}

QuantumRegister project(const QuantumRegister& reg, const std::string& r, bool b) {
    check_register(reg, "project");
    int pos = reg.index_of(r);
    if (pos < 0) throw InternalError("project: unknown qubit " + r);
    double p = measure_prob(reg, r, b);
    if (p <= 1e-12)
        throw InputError("projection of " + r + " onto a zero-probability outcome");
    double scale = 1.0 / std::sqrt(p);
    int shift = bit_weight_shift(reg, pos);
    int want = b ? 1 : 0;
    QuantumRegister out;
    out.vars = reg.vars;
    out.vars.erase(out.vars.begin() + pos);
    out.amps.assign(reg.amps.size() / 2, Cplx(0, 0));
    // Reduced index = original index with the bit at `shift` deleted.
    size_t low_mask = (size_t{1} << shift) - 1;
    for (size_t i = 0; i < reg.amps.size(); ++i) {
        if (((i >> shift) & 1) != static_cast<size_t>(want)) continue;
        size_t j = ((i >> (shift + 1)) << shift) | (i & low_mask);
        out.amps[j] = reg.amps[i] * scale;
    }
    return out;
}

QuantumRegister apply_unitary(const QuantumRegister& reg,
                              const std::vector<std::string>& targets, const Matrix& u) {
    check_register(reg, "apply_unitary");
    size_t k = targets.size();
    size_t d = size_t{1} << k;
    if (u.size() != d)
        throw InputError("unitary has dimension " + std::to_string(u.size()) + ", expected " +
                         std::to_string(d));
    for (const auto& row : u)
        if (row.size() != d) throw InputError("unitary matrix is not square");
    std::vector<int> shifts(k);
    for (size_t i = 0; i < k; ++i) {
        int pos = reg.index_of(targets[i]);
        if (pos < 0) throw InternalError("apply_unitary: unknown qubit " + targets[i]);
        for (size_t j = 0; j < i; ++j)
            if (targets[j] == targets[i])
                throw InternalError("apply_unitary: duplicate target " + targets[i]);
        shifts[i] = bit_weight_shift(reg, pos);
    }
    QuantumRegister out;
    out.vars = reg.vars;
    out.amps.assign(reg.amps.size(), Cplx(0, 0));
    for (size_t i = 0; i < reg.amps.size(); ++i) {
        if (reg.amps[i] == Cplx(0, 0)) continue;
        size_t lin = 0;
        for (size_t t = 0; t < k; ++t) lin = (lin << 1) | ((i >> shifts[t]) & 1);
        for (size_t lout = 0; lout < d; ++lout) {
            Cplx coef = u[lout][lin];
            if (coef == Cplx(0, 0)) continue;
            size_t j = i;
            for (size_t t = 0; t < k; ++t) {
                size_t bit = (lout >> (k - 1 - t)) & 1;
                j = (j & ~(size_t{1} << shifts[t])) | (bit << shifts[t]);
            }
            out.amps[j] += coef * reg.amps[i];
        }
    }
    return out;
}

QuantumRegister merge_registers(const QuantumRegister& a, const QuantumRegister& b) {
    check_register(a, "merge_registers");
    check_register(b, "merge_registers");
    for (const auto& v : b.vars)
        if (a.index_of(v) >= 0)
            throw InternalError("merge_registers: name collision on " + v);
    QuantumRegister out;
    out.vars = a.vars;
    out.vars.insert(out.vars.end(), b.vars.begin(), b.vars.end());
    out.amps.assign(a.amps.size() * b.amps.size(), Cplx(0, 0));
    for (size_t i = 0; i < a.amps.size(); ++i)
        for (size_t j = 0; j < b.amps.size(); ++j)
            out.amps[i * b.amps.size() + j] = a.amps[i] * b.amps[j];
    return out;
}

const GateTable& builtin_gates() {
    static const GateTable table = [] {
        const double s = 1.0 / std::sqrt(2.0);
        GateTable t;
        t["X"] = {1, {{0, 1}, {1, 0}}};
        t["Z"] = {1, {{1, 0}, {0, -1}}};
        t["H"] = {1, {{s, s}, {s, -s}}};
        t["S"] = {1, {{1, 0}, {0, Cplx(0, 1)}}};
        t["T"] = {1, {{1, 0}, {0, std::polar(1.0, M_PI / 4)}}};
        t["CNOT"] = {2,
                     {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}}};
        return t;
    }();
    return table;
}

namespace {

void check_unitary(const std::string& name, const Gate& g) {
    size_t d = size_t{1} << g.arity;
    if (g.matrix.size() != d)
        throw InputError("gate " + name + ": matrix dimension does not match arity");
    for (const auto& row : g.matrix)
        if (row.size() != d) throw InputError("gate " + name + ": matrix is not square");
    for (size_t i = 0; i < d; ++i) {
        for (size_t j = 0; j < d; ++j) {
            Cplx dot(0, 0);
            for (size_t k = 0; k < d; ++k)
                dot += std::conj(g.matrix[k][i]) * g.matrix[k][j];
            Cplx want = i == j ? Cplx(1, 0) : Cplx(0, 0);
            if (std::abs(dot - want) > kQuantumTol)
                throw InputError("gate " + name + " is not unitary (tolerance 1e-9)");
        }
    }
}

Gate gate_from_json(const json& e, std::string& name_out) {
    if (!e.is_object() || !e.contains("name") || !e.contains("arity") || !e.contains("matrix"))
        throw InputError("gate entries need name, arity, and matrix fields");
    std::string name = e["name"].get<std::string>();
    if (name.empty() || !std::isupper(static_cast<unsigned char>(name[0])))
        throw InputError("gate names must start with an uppercase letter: '" + name + "'");
    Gate g;
    g.arity = e["arity"].get<int>();
    if (g.arity < 1 || g.arity > 4)
        throw InputError("gate " + name + ": arity must be between 1 and 4");
    for (const auto& row : e["matrix"]) {
        std::vector<Cplx> r;
        for (const auto& cell : row) {
            if (cell.is_number()) {
                r.emplace_back(cell.get<double>(), 0.0);
            } else if (cell.is_array() && cell.size() == 2) {
                r.emplace_back(cell[0].get<double>(), cell[1].get<double>());
            } else {
                throw InputError("gate " + name + ": matrix cells are numbers or [re, im]");
            }
        }
        g.matrix.push_back(std::move(r));
    }
    check_unitary(name, g);
    name_out = std::move(name);
    return g;
}

} // namespace

GateTable load_gates_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& ex) {
        throw InputError(std::string("gate file: ") + ex.what());
    }
    GateTable table = builtin_gates();
    auto add = [&table](const json& e) {
        std::string name;
        Gate g = gate_from_json(e, name);
        table[name] = std::move(g);
    };
    if (doc.is_array())
        for (const auto& e : doc) add(e);
    else
        add(doc);
    return table;
}

QuantumClosure canonicalize_closure(const QuantumClosure& c) {
    check_register(c.reg, "canonicalize_closure");
    std::vector<std::string> head = free_qvars(c.term);
    for (const auto& r : head)
        if (c.reg.index_of(r) < 0)
            throw InternalError("closure term references qubit " + r + " outside its register");
    std::vector<std::string> leftovers;
    for (const auto& v : c.reg.vars) {
        if (std::find(head.begin(), head.end(), v) == head.end()) leftovers.push_back(v);
    }

    auto permuted_amps = [&](const std::vector<std::string>& order) {
        size_t n = order.size();
        std::vector<int> old_shift(n);
        for (size_t i = 0; i < n; ++i)
            old_shift[i] = bit_weight_shift(c.reg, c.reg.index_of(order[i]));
        std::vector<Cplx> out(c.reg.amps.size());
        for (size_t j = 0; j < out.size(); ++j) {
            size_t i = 0;
            for (size_t t = 0; t < n; ++t) {
                size_t bit = (j >> (n - 1 - t)) & 1;
                i |= bit << old_shift[t];
            }
            out[j] = c.reg.amps[i];
        }
        // Global phase: first non-negligible amplitude becomes real positive.
        for (const auto& a : out) {
            if (std::abs(a) > kQuantumTol) {
                Cplx rot = std::conj(a) / std::abs(a);
                for (auto& x : out) x *= rot;
                break;
            }
        }
        return out;
    };

    auto lex_less = [](const std::vector<Cplx>& a, const std::vector<Cplx>& b) {
        for (size_t i = 0; i < a.size(); ++i) {
            if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
            if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
        }
        return false;
    };

    // Leftover qubits have no term-induced order; pick the permutation with
    // the smallest amplitude vector so equal states canonicalize alike.
    std::sort(leftovers.begin(), leftovers.end());
    std::vector<std::string> best_order;
    std::vector<Cplx> best_amps;
    std::vector<std::string> perm = leftovers;
    do {
        std::vector<std::string> order = head;
        order.insert(order.end(), perm.begin(), perm.end());
        std::vector<Cplx> amps = permuted_amps(order);
        if (best_order.empty() || lex_less(amps, best_amps)) {
            best_order = std::move(order);
            best_amps = std::move(amps);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    std::map<std::string, std::string> ren;
    QuantumRegister reg;
    for (size_t i = 0; i < best_order.size(); ++i) {
        std::string nm = "q" + std::to_string(i);
        ren[best_order[i]] = nm;
        reg.vars.push_back(nm);
    }
    reg.amps = std::move(best_amps);
    return {std::move(reg), rename_qvars(c.term, ren)};
}

bool closures_equal(const QuantumClosure& a, const QuantumClosure& b, double tol) {
    QuantumClosure ca = canonicalize_closure(a);
    QuantumClosure cb = canonicalize_closure(b);
    if (canonical_key(ca.term) != canonical_key(cb.term)) return false;
    if (ca.reg.vars.size() != cb.reg.vars.size()) return false;
    for (size_t i = 0; i < ca.reg.amps.size(); ++i)
        if (std::abs(ca.reg.amps[i] - cb.reg.amps[i]) > tol) return false;
    return true;
}

ClosureDist ClosureDist::dirac(const QuantumClosure& c) {
    ClosureDist d;
    d.add(c, 1.0);
    return d;
}

void ClosureDist::add(const QuantumClosure& c, double p) {
    if (p == 0.0) return;
    QuantumClosure canon = canonicalize_closure(c);
    std::string key = canonical_key(canon.term);
    auto& bucket = buckets_[key];
    for (auto& e : bucket) {
        if (e.closure.reg.vars.size() != canon.reg.vars.size()) continue;
        bool same = true;
        for (size_t i = 0; i < canon.reg.amps.size() && same; ++i)
            if (std::abs(e.closure.reg.amps[i] - canon.reg.amps[i]) > tol_) same = false;
        if (same) {
            e.prob += p;
            return;
        }
    }
    bucket.push_back({std::move(canon), p});
    ++count_;
}

void ClosureDist::add_scaled(const ClosureDist& other, double scale) {
    if (scale == 0.0) return;
    for (const auto* e : other.entries()) add(e->closure, e->prob * scale);
}

double ClosureDist::mass() const {
    double m = 0;
    for (const auto& [k, bucket] : buckets_) {
        (void)k;
        for (const auto& e : bucket) m += e.prob;
    }
    return m;
}

std::vector<const ClosureDist::Entry*> ClosureDist::entries() const {
    std::vector<const Entry*> out;
    out.reserve(count_);
    for (const auto& [k, bucket] : buckets_) {
        (void)k;
        for (const auto& e : bucket) out.push_back(&e);
    }
    return out;
}

double ClosureDist::prob_of(const QuantumClosure& c) const {
    QuantumClosure canon = canonicalize_closure(c);
    auto it = buckets_.find(canonical_key(canon.term));
    if (it == buckets_.end()) return 0.0;
    for (const auto& e : it->second) {
        if (e.closure.reg.vars.size() != canon.reg.vars.size()) continue;
        bool same = true;
        for (size_t i = 0; i < canon.reg.amps.size() && same; ++i)
            if (std::abs(e.closure.reg.amps[i] - canon.reg.amps[i]) > tol_) same = false;
        if (same) return e.prob;
    }
    return 0.0;
}

namespace {

// Right-nested pair of quantum variables -> target list.
std::vector<std::string> gate_targets(const QuantumClosure& c, const TermPtr& v) {
    std::vector<std::string> out;
    TermPtr cur = v;
    while (const auto* p = as<PairN>(cur)) {
        const auto* q = as<QVarN>(p->first);
        if (!q) stuck(c, "gate argument component is not a quantum variable");
        out.push_back(q->name);
        cur = p->second;
    }
    const auto* q = as<QVarN>(cur);
    if (!q) stuck(c, "gate argument is not a quantum variable");
    out.push_back(q->name);
    return out;
}

// Intermediate results keep their original qubit names: the caller still
// holds term context (the pending argument, a lambda body) that refers to
// them. Canonicalization happens only in ClosureDist, at the point where a
// closure is self-contained.
using RawDist = std::vector<std::pair<QuantumClosure, double>>;

RawDist eval_closure_rec(const QuantumClosure& c, const GateTable& gates, QvarSource& names) {
    if (is_value(c.term)) return {{c, 1.0}};
    const QuantumRegister& q = c.reg;
    // Operation operands are values in parsed terms (the parser desugars the
    // rest), but programmatically built terms (filled contexts) may carry
    // arbitrary operands: evaluate those first, then apply the operation.
    auto through = [&](const TermPtr& opnd, auto rebuild) -> RawDist {
        RawDist sub = eval_closure_rec({q, opnd}, gates, names);
        RawDist out;
        for (const auto& [sc, sp] : sub) {
            RawDist rest = eval_closure_rec({sc.reg, rebuild(sc.term)}, gates, names);
            for (const auto& [rc, rp] : rest) out.push_back({rc, rp * sp});
        }
        return out;
    };
    return std::visit(
        [&](const auto& n) -> RawDist {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, OmegaN>) {
                return {};
            } else if constexpr (std::is_same_v<N, MeasN>) {
                if (!is_value(n.arg))
                    return through(n.arg, [](const TermPtr& v) { return mk_meas(v); });
                const auto* r = as<QVarN>(n.arg);
                if (!r) stuck(c, "meas argument is not a quantum variable");
                RawDist out;
                for (bool b : {false, true}) {
                    double p = measure_prob(q, r->name, b);
                    if (p > kQuantumTol) out.push_back({{project(q, r->name, b), mk_bool(b)}, p});
                }
                return out;
            } else if constexpr (std::is_same_v<N, NewN>) {
                if (!is_value(n.arg))
                    return through(n.arg, [](const TermPtr& v) { return mk_new(v); });
                const auto* b = as<BoolN>(n.arg);
                if (!b) stuck(c, "new argument is not a boolean constant");
                auto [reg, name] = new_qubit(q, b->value, &names);
                return {{{std::move(reg), mk_qvar(name)}, 1.0}};
            } else if constexpr (std::is_same_v<N, GateN>) {
                if (!is_value(n.arg))
                    return through(n.arg,
                                   [&n](const TermPtr& v) { return mk_gate(n.gate, v); });
                auto it = gates.find(n.gate);
                if (it == gates.end()) stuck(c, "unknown gate " + n.gate);
                auto targets = gate_targets(c, n.arg);
                if (static_cast<int>(targets.size()) != it->second.arity)
                    stuck(c, "gate arity mismatch");
                return {{{apply_unitary(q, targets, it->second.matrix), n.arg}, 1.0}};
            } else if constexpr (std::is_same_v<N, AppN>) {
                RawDist fun = eval_closure_rec({q, n.fun}, gates, names);
                RawDist out;
                for (const auto& [fc, fp] : fun) {
                    const auto* lam = as<LamN>(fc.term);
                    if (!lam) stuck(c, "application of a non-function value");
                    RawDist arg = eval_closure_rec({fc.reg, n.arg}, gates, names);
                    for (const auto& [ac, ap] : arg) {
                        double w = fp * ap;
                        if (w == 0) continue;
                        RawDist body = eval_closure_rec(
                            {ac.reg, subst(lam->body, lam->binder, ac.term)}, gates, names);
                        for (const auto& [bc, bp] : body) out.push_back({bc, bp * w});
                    }
                }
                return out;
            } else if constexpr (std::is_same_v<N, IfN>) {
                RawDist cond = eval_closure_rec({q, n.cond}, gates, names);
                RawDist out;
                for (const auto& [cc, cp] : cond) {
                    const auto* b = as<BoolN>(cc.term);
                    if (!b) stuck(c, "if condition evaluated to a non-boolean");
                    RawDist branch =
                        eval_closure_rec({cc.reg, b->value ? n.thn : n.els}, gates, names);
                    for (const auto& [bc, bp] : branch) out.push_back({bc, bp * cp});
                }
                return out;
            } else if constexpr (std::is_same_v<N, LetPairN>) {
                RawDist scrut = eval_closure_rec({q, n.scrut}, gates, names);
                RawDist out;
                for (const auto& [sc, sp] : scrut) {
                    const auto* pair = as<PairN>(sc.term);
                    if (!pair) stuck(c, "let scrutinee evaluated to a non-pair");
                    TermPtr body =
                        subst(n.body, {{n.left, pair->first}, {n.right, pair->second}});
                    RawDist rest = eval_closure_rec({sc.reg, body}, gates, names);
                    for (const auto& [bc, bp] : rest) out.push_back({bc, bp * sp});
                }
                return out;
            } else {
                stuck(c, "construct outside the quantum calculus");
            }
        },
        c.term->node());
}

std::optional<RawDist> step_closure_raw(const QuantumClosure& c, const GateTable& gates) {
    if (is_value(c.term)) return std::nullopt;
    const QuantumRegister& q = c.reg;
    auto lift = [&](const TermPtr& sub, auto rebuild) -> RawDist {
        RawDist inner = *step_closure_raw({q, sub}, gates);
        RawDist out;
        for (auto& [ic, ip] : inner) out.push_back({{ic.reg, rebuild(ic.term)}, ip});
        return out;
    };
    return std::visit(
        [&](const auto& n) -> std::optional<RawDist> {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, OmegaN>) {
                return RawDist{};
            } else if constexpr (std::is_same_v<N, MeasN>) {
                if (!is_value(n.arg))
                    return lift(n.arg, [](const TermPtr& v) { return mk_meas(v); });
                const auto* r = as<QVarN>(n.arg);
                if (!r) stuck(c, "meas argument is not a quantum variable");
                RawDist out;
                for (bool b : {false, true}) {
                    double p = measure_prob(q, r->name, b);
                    if (p > kQuantumTol) out.push_back({{project(q, r->name, b), mk_bool(b)}, p});
                }
                return out;
            } else if constexpr (std::is_same_v<N, NewN>) {
                if (!is_value(n.arg))
                    return lift(n.arg, [](const TermPtr& v) { return mk_new(v); });
                const auto* b = as<BoolN>(n.arg);
                if (!b) stuck(c, "new argument is not a boolean constant");
                QvarSource names;
                names.absorb(q);
                auto [reg, name] = new_qubit(q, b->value, &names);
                return RawDist{{{std::move(reg), mk_qvar(name)}, 1.0}};
            } else if constexpr (std::is_same_v<N, GateN>) {
                if (!is_value(n.arg))
                    return lift(n.arg, [&n](const TermPtr& v) { return mk_gate(n.gate, v); });
                auto it = gates.find(n.gate);
                if (it == gates.end()) stuck(c, "unknown gate " + n.gate);
                auto targets = gate_targets(c, n.arg);
                if (static_cast<int>(targets.size()) != it->second.arity)
                    stuck(c, "gate arity mismatch");
                return RawDist{{{apply_unitary(q, targets, it->second.matrix), n.arg}, 1.0}};
            } else if constexpr (std::is_same_v<N, AppN>) {
                if (!is_value(n.fun))
                    return lift(n.fun, [&](const TermPtr& f) { return mk_app(f, n.arg); });
                if (!is_value(n.arg))
                    return lift(n.arg, [&](const TermPtr& a) { return mk_app(n.fun, a); });
                const auto* lam = as<LamN>(n.fun);
                if (!lam) stuck(c, "application of a non-function value");
                return RawDist{{{q, subst(lam->body, lam->binder, n.arg)}, 1.0}};
            } else if constexpr (std::is_same_v<N, IfN>) {
                if (!is_value(n.cond))
                    return lift(n.cond, [&](const TermPtr& t) { return mk_if(t, n.thn, n.els); });
                const auto* b = as<BoolN>(n.cond);
                if (!b) stuck(c, "if condition is a non-boolean value");
                return RawDist{{{q, b->value ? n.thn : n.els}, 1.0}};
            } else if constexpr (std::is_same_v<N, LetPairN>) {
                if (!is_value(n.scrut))
                    return lift(n.scrut, [&](const TermPtr& s) {
                        return mk_letpair(n.left, n.right, s, n.body);
                    });
                const auto* pair = as<PairN>(n.scrut);
                if (!pair) stuck(c, "let scrutinee is a non-pair value");
                return RawDist{
                    {{q, subst(n.body, {{n.left, pair->first}, {n.right, pair->second}})}, 1.0}};
            } else {
                stuck(c, "construct outside the quantum calculus");
            }
        },
        c.term->node());
}

} // namespace

ClosureDist eval_closure_big(const QuantumClosure& c, const GateTable& gates) {
    QvarSource names;
    names.absorb(c.reg);
    ClosureDist out;
    for (const auto& [rc, rp] : eval_closure_rec(c, gates, names)) out.add(rc, rp);
    if (out.mass() > 1.0 + kQuantumTol)
        throw InternalError("closure distribution mass exceeds 1 for " + pretty(c.term));
    return out;
}

std::optional<ClosureDist> step_closure(const QuantumClosure& c, const GateTable& gates) {
    auto raw = step_closure_raw(c, gates);
    if (!raw) return std::nullopt;
    ClosureDist out;
    for (const auto& [rc, rp] : *raw) out.add(rc, rp);
    return out;
}

ClosureDist normalize_closure_by_steps(const QuantumClosure& c, const GateTable& gates,
                                       int max_rounds) {
    ClosureDist frontier = ClosureDist::dirac(c);
    ClosureDist values;
    for (int round = 0; round < max_rounds; ++round) {
        ClosureDist next;
        bool progressed = false;
        for (const auto* e : frontier.entries()) {
            if (is_value(e->closure.term)) {
                values.add(e->closure, e->prob);
                continue;
            }
            progressed = true;
            next.add_scaled(*step_closure(e->closure, gates), e->prob);
        }
        if (!progressed) return values;
        frontier = std::move(next);
    }
    throw InternalError("normalize_closure_by_steps did not terminate within the round limit");
}

double observe_closure(const QuantumClosure& c, const GateTable& gates) {
    return eval_closure_big(c, gates).mass();
}

} // namespace linlam
