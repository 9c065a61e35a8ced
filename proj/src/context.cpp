#include "linlam/context.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <thread>

#include "linlam/errors.hpp"
#include "linlam/eval.hpp"
#include "linlam/typecheck.hpp"

namespace linlam {

namespace {

TermPtr fill_rec(const TermPtr& t, const TermPtr& filler) {
    return std::visit(
        [&](const auto& n) -> TermPtr {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, HoleN>) {
                return filler;
            } else if constexpr (std::is_same_v<N, LamN>) {
                return mk_lam(n.binder, n.ann, fill_rec(n.body, filler));
            } else if constexpr (std::is_same_v<N, AppN>) {
                return mk_app(fill_rec(n.fun, filler), fill_rec(n.arg, filler));
            } else if constexpr (std::is_same_v<N, IfN>) {
                return mk_if(fill_rec(n.cond, filler), fill_rec(n.thn, filler),
                             fill_rec(n.els, filler));
            } else if constexpr (std::is_same_v<N, LetPairN>) {
                return mk_letpair(n.left, n.right, fill_rec(n.scrut, filler),
                                  fill_rec(n.body, filler));
            } else if constexpr (std::is_same_v<N, PairN>) {
                return mk_pair(fill_rec(n.first, filler), fill_rec(n.second, filler));
            } else if constexpr (std::is_same_v<N, ChoiceN>) {
                return mk_choice(fill_rec(n.left, filler), fill_rec(n.right, filler));
            } else if constexpr (std::is_same_v<N, GateN>) {
                return mk_gate(n.gate, fill_rec(n.arg, filler));
            } else if constexpr (std::is_same_v<N, MeasN>) {
                return mk_meas(fill_rec(n.arg, filler));
            } else if constexpr (std::is_same_v<N, NewN>) {
                return mk_new(fill_rec(n.arg, filler));
            } else {
                return t;
            }
        },
        t->node());
}

// Linear environment during generation: names with their types, kept sorted.
using Env = std::vector<std::pair<std::string, TypePtr>>;

std::string env_key(const Env& env) {
    std::string k;
    for (const auto& [n, t] : env) k += n + ":" + type_to_string(t) + ";";
    return k;
}

class Generator {
public:
    Generator(const TypePtr& hole_type, const EnumOptions& opts)
        : hole_type_(hole_type), opts_(opts) {}

    // Finite type menu: subterm closure of the seeds plus bool (and qbit when
    // quantum). Applications only introduce function types from this menu.
    void seed_menu(const std::vector<TypePtr>& seeds) {
        std::vector<TypePtr> frontier = seeds;
        frontier.push_back(Type::boolean());
        if (opts_.mode == Mode::Quantum) frontier.push_back(Type::qbit());
        while (!frontier.empty()) {
            TypePtr t = frontier.back();
            frontier.pop_back();
            bool known = false;
            for (const auto& m : menu_)
                if (type_equal(m, t)) known = true;
            if (known) continue;
            menu_.push_back(t);
            if (t->kind() == Type::Kind::Arrow || t->kind() == Type::Kind::Tensor) {
                frontier.push_back(t->left());
                frontier.push_back(t->right());
            }
        }
    }

    // All terms of exactly `size` nodes, type `ty`, consuming `env` exactly,
    // with `hole` holes (0 or 1).
    const std::vector<TermPtr>& gen(const TypePtr& ty, const Env& env, bool hole, int size) {
        std::string key = type_to_string(ty) + "|" + env_key(env) + "|" +
                          (hole ? "1" : "0") + "|" + std::to_string(size);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        std::vector<TermPtr> out;
        build(ty, env, hole, size, out);
        return memo_.emplace(std::move(key), std::move(out)).first->second;
    }

private:
    void build(const TypePtr& ty, const Env& env, bool hole, int size,
               std::vector<TermPtr>& out) {
        if (size <= 0) return;
        bool is_bool = ty->kind() == Type::Kind::Bool;
        bool is_qbit = ty->kind() == Type::Kind::Qbit;

        if (size == 1) {
            if (hole) {
                if (env.empty() && type_equal(ty, hole_type_)) out.push_back(mk_hole());
                return;
            }
            if (env.size() == 1 && type_equal(env[0].second, ty))
                out.push_back(mk_var(env[0].first));
            if (is_bool && env.empty()) {
                out.push_back(mk_bool(true));
                out.push_back(mk_bool(false));
            }
            out.push_back(mk_omega()); // absorbs any environment at any type
            return;
        }

        // lambda
        if (ty->kind() == Type::Kind::Arrow) {
            Env inner = env;
            std::string b = "c" + std::to_string(env.size());
            inner.push_back({b, ty->left()});
            std::sort(inner.begin(), inner.end());
            for (const auto& body : gen(ty->right(), inner, hole, size - 1))
                out.push_back(mk_lam(b, ty->left(), body));
        }

        // application: function type drawn from the menu
        for (const auto& ft : menu_) {
            if (ft->kind() != Type::Kind::Arrow || !type_equal(ft->right(), ty)) continue;
            for_env_splits(env, [&](const Env& e0, const Env& e1) {
                for (int s1 = 1; s1 <= size - 2; ++s1) {
                    int s2 = size - 1 - s1;
                    for (int hf = 0; hf <= (hole ? 1 : 0); ++hf) {
                        for (const auto& f : gen(ft, e0, hole && hf == 1, s1))
                            for (const auto& a : gen(ft->left(), e1, hole && hf == 0, s2))
                                out.push_back(mk_app(f, a));
                        if (!hole) break;
                    }
                }
            });
        }

        // if-then-else: branches share the same environment part
        for_env_splits(env, [&](const Env& e0, const Env& e1) {
            for (int sc = 1; sc <= size - 3; ++sc) {
                for (int st = 1; st <= size - 2 - sc; ++st) {
                    int se = size - 1 - sc - st;
                    // hole placement: 0 = cond, 1 = then, 2 = else, -1 = none
                    for (int hp = hole ? 0 : -1; hp <= (hole ? 2 : -1); ++hp) {
                        for (const auto& c : gen(Type::boolean(), e0, hp == 0, sc))
                            for (const auto& t : gen(ty, e1, hp == 1, st))
                                for (const auto& e : gen(ty, e1, hp == 2, se))
                                    out.push_back(mk_if(c, t, e));
                    }
                }
            }
        });

        // probabilistic choice
        if (opts_.mode == Mode::Prob) {
            for_env_splits(env, [&](const Env& e0, const Env& e1) {
                for (int s1 = 1; s1 <= size - 2; ++s1) {
                    int s2 = size - 1 - s1;
                    for (int hf = 0; hf <= (hole ? 1 : 0); ++hf) {
                        for (const auto& l : gen(ty, e0, hole && hf == 0, s1))
                            for (const auto& r : gen(ty, e1, hole && hf == 1, s2))
                                out.push_back(mk_choice(l, r));
                        if (!hole) break;
                    }
                }
            });
        }

        // pair values (no holes inside values)
        if (ty->kind() == Type::Kind::Tensor && !hole) {
            for_env_splits(env, [&](const Env& e0, const Env& e1) {
                for (int s1 = 1; s1 <= size - 2; ++s1) {
                    int s2 = size - 1 - s1;
                    for (const auto& l : gen(ty->left(), e0, false, s1)) {
                        if (!is_value(l)) continue;
                        for (const auto& r : gen(ty->right(), e1, false, s2))
                            if (is_value(r)) out.push_back(mk_pair(l, r));
                    }
                }
            });
        }

        // pair destruction, for every tensor type in the menu
        for (const auto& tt : menu_) {
            if (tt->kind() != Type::Kind::Tensor) continue;
            for_env_splits(env, [&](const Env& e0, const Env& e1) {
                std::string bl = "c" + std::to_string(env.size());
                std::string br = "c" + std::to_string(env.size() + 1);
                Env inner = e1;
                inner.push_back({bl, tt->left()});
                inner.push_back({br, tt->right()});
                std::sort(inner.begin(), inner.end());
                for (int s1 = 1; s1 <= size - 2; ++s1) {
                    int s2 = size - 1 - s1;
                    for (int hf = 0; hf <= (hole ? 1 : 0); ++hf) {
                        for (const auto& s : gen(tt, e0, hole && hf == 0, s1))
                            for (const auto& b : gen(ty, inner, hole && hf == 1, s2))
                                out.push_back(mk_letpair(bl, br, s, b));
                        if (!hole) break;
                    }
                }
            });
        }

        if (opts_.mode == Mode::Quantum) {
            // measurement of any qubit-typed subterm (the hole may sit inside)
            if (is_bool) {
                for (const auto& a : gen(Type::qbit(), env, hole, size - 1))
                    out.push_back(mk_meas(a));
            }
            // single-qubit gate applied to any qubit-typed subterm
            if (is_qbit) {
                for (const auto& g : opts_.gate_names)
                    for (const auto& a : gen(Type::qbit(), env, hole, size - 1))
                        out.push_back(mk_gate(g, a));
            }
            // qubit allocation from any boolean subterm
            if (is_qbit) {
                for (const auto& a : gen(Type::boolean(), env, hole, size - 1))
                    out.push_back(mk_new(a));
            }
        }
    }

    // All ways to split env into two disjoint sub-environments, in a fixed
    // order (ascending bitmask over the sorted environment).
    template <class F>
    void for_env_splits(const Env& env, F&& f) {
        int n = static_cast<int>(env.size());
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            Env e0, e1;
            for (int i = 0; i < n; ++i) (mask & (1u << i) ? e0 : e1).push_back(env[i]);
            f(e0, e1);
        }
    }

    TypePtr hole_type_;
    EnumOptions opts_;
    std::vector<TypePtr> menu_;
    std::map<std::string, std::vector<TermPtr>> memo_;
};

std::vector<std::string> default_gen_gates(const EnumOptions& opts) {
    if (!opts.gate_names.empty()) return opts.gate_names;
    return {"X", "H"};
}

} // namespace

TermPtr fill(const TermPtr& context, const TermPtr& filler) {
    int holes = count_holes(context);
    if (holes == 0) throw TypeError(TypeError::Kind::NoHole, "context has no hole");
    if (holes > 1) throw TypeError(TypeError::Kind::MultipleHoles, "context has several holes");
    return fill_rec(context, filler);
}

std::vector<TermPtr> enumerate_contexts(const TypePtr& hole_type, const TypePtr& result_type,
                                        const EnumOptions& opts) {
    EnumOptions o = opts;
    o.gate_names = default_gen_gates(opts);
    Generator g(hole_type, o);
    g.seed_menu({hole_type, result_type});

    TypingContext empty;
    TypingContext hole_env;
    std::vector<TermPtr> out;
    std::set<std::string> seen;
    for (int s = 1; s <= o.size_bound; ++s) {
        for (const auto& c : g.gen(result_type, {}, true, s)) {
            if (count_holes(c) != 1) continue;
            if (!seen.insert(canonical_key(c)).second) continue;
            try {
                typecheck_context_hole(c, empty, hole_env, hole_type, o.mode);
            } catch (const Error&) {
                continue; // generator over-approximates; the checker decides
            }
            out.push_back(c);
        }
    }
    return out;
}

std::vector<TermPtr> enumerate_values(const TypePtr& type, const EnumOptions& opts) {
    EnumOptions o = opts;
    o.gate_names = default_gen_gates(opts);
    Generator g(Type::boolean(), o); // hole type irrelevant: no holes requested
    g.seed_menu({type});

    TypingContext empty;
    std::vector<TermPtr> out;
    std::set<std::string> seen;
    for (int s = 1; s <= o.size_bound; ++s) {
        for (const auto& v : g.gen(type, {}, false, s)) {
            if (!is_value(v)) continue;
            if (!seen.insert(canonical_key(v)).second) continue;
            try {
                typecheck_expect(empty, v, type, o.mode);
            } catch (const Error&) {
                continue;
            }
            out.push_back(v);
        }
    }
    return out;
}

SeparationSearchResult search_separating_context(const TermPtr& left, const TermPtr& right,
                                                 const TypePtr& hole_type,
                                                 const TypePtr& result_type,
                                                 const EnumOptions& opts, int jobs,
                                                 double tol, const GateTable& gates) {
    std::vector<TermPtr> contexts = enumerate_contexts(hole_type, result_type, opts);
    SeparationSearchResult res;
    res.contexts_checked = contexts.size();

    auto probe = [&](const TermPtr& ctx) -> std::optional<SeparationWitness> {
        SeparationWitness w;
        w.context = ctx;
        if (opts.mode == Mode::Quantum) {
            double pl = observe_closure({QuantumRegister{}, fill(ctx, left)}, gates);
            double pr = observe_closure({QuantumRegister{}, fill(ctx, right)}, gates);
            if (std::abs(pl - pr) <= tol) return std::nullopt;
            w.left_prob = pl;
            w.right_prob = pr;
        } else {
            Rational pl = observe(fill(ctx, left), opts.mode);
            Rational pr = observe(fill(ctx, right), opts.mode);
            if (pl == pr) return std::nullopt;
            w.left_prob = rational_to_double(pl);
            w.right_prob = rational_to_double(pr);
            w.left_exact = rational_to_string(pl);
            w.right_exact = rational_to_string(pr);
        }
        return w;
    };

    if (jobs <= 1) {
        for (size_t i = 0; i < contexts.size(); ++i) {
            if (auto w = probe(contexts[i])) {
                w->index = i;
                res.witness = std::move(w);
                res.contexts_checked = i + 1;
                return res;
            }
        }
        return res;
    }

    // Parallel scan: every worker records the least separating index of its
    // stride; the overall witness is the least across workers, so the result
    // does not depend on scheduling.
    std::atomic<size_t> best(contexts.size());
    std::vector<std::thread> workers;
    for (int j = 0; j < jobs; ++j) {
        workers.emplace_back([&, j]() {
            for (size_t i = j; i < contexts.size(); i += jobs) {
                if (i >= best.load()) break;
                if (probe(contexts[i])) {
                    size_t cur = best.load();
                    while (i < cur && !best.compare_exchange_weak(cur, i)) {
                    }
                    break;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (best.load() < contexts.size()) {
        auto w = probe(contexts[best.load()]);
        w->index = best.load();
        res.witness = std::move(w);
        res.contexts_checked = best.load() + 1;
    }
    return res;
}

} // namespace linlam
