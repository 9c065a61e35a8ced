#include "linlam/typecheck.hpp"

#include <algorithm>
#include <cassert>
#include <optional>

#include "linlam/errors.hpp"
#include "linlam/pretty.hpp"

namespace linlam {

std::map<std::string, int> builtin_gate_arities() {
    return {{"X", 1}, {"Z", 1}, {"H", 1}, {"S", 1}, {"T", 1}, {"CNOT", 2}};
}

namespace {

// Linearity summary of a subterm: the variables it must consume, and whether
// it can absorb arbitrary extra ones (it contains Omega positioned to do so).
// The set of valid contexts of any term is either exactly {required} or the
// up-closure of required; `flexible` distinguishes the two.
struct Usage {
    TypePtr type;
    std::set<std::string> required;
    bool flexible = false;
};

std::string show(const TermPtr& t) { return pretty(t); }

class Checker {
public:
    Checker(Mode mode, const std::map<std::string, int>& gate_arities,
            const TypingContext* hole_ctx, const TypePtr& hole_type, bool collect)
        : mode_(mode), gates_(gate_arities), hole_ctx_(hole_ctx), hole_type_(hole_type),
          collect_(collect) {}

    Usage check(const TermPtr& t, std::shared_ptr<Derivation>* dv) {
        return std::visit([&](const auto& n) { return check_node(t, n, dv); }, t->node());
    }

    void bind(const std::string& name, const TypePtr& ty) { scope_[name].push_back(ty); }
    void unbind(const std::string& name) {
        auto it = scope_.find(name);
        it->second.pop_back();
        if (it->second.empty()) scope_.erase(it);
    }
    void bind_qvar(const std::string& name) { qscope_.insert(name); }

private:
    [[noreturn]] void err(TypeError::Kind k, const std::string& msg) { throw TypeError(k, msg); }

    void require_mode(Mode m, const std::string& what) {
        if (mode_ != m)
            throw ModeError(what + " is not part of the " + mode_name(mode_) + " calculus");
    }

    std::shared_ptr<Derivation> node_deriv(const std::string& rule, const TermPtr& t,
                                           const TypePtr& ty,
                                           std::vector<std::shared_ptr<Derivation>> kids) {
        if (!collect_) return nullptr;
        auto d = std::make_shared<Derivation>();
        d->rule = rule;
        d->term = show(t);
        d->type = type_to_string(ty);
        d->children = std::move(kids);
        return d;
    }

    // Disjoint union of usage sets; a shared variable is a double use.
    static std::set<std::string> merge_disjoint(const std::set<std::string>& a,
                                                const std::set<std::string>& b,
                                                const TermPtr& at) {
        std::set<std::string> out = a;
        for (const auto& v : b) {
            if (!out.insert(v).second)
                throw TypeError(TypeError::Kind::DuplicatedUse,
                                "variable '" + v + "' used more than once in " + show(at));
        }
        return out;
    }

    // Removes a binder from the body usage; the binder must be consumed
    // unless the body is flexible.
    static void drop_binder(Usage& u, const std::string& binder, const TermPtr& at) {
        if (u.required.erase(binder) == 0 && !u.flexible)
            throw TypeError(TypeError::Kind::UnusedVariable,
                            "linear variable '" + binder + "' is not used in " + show(at));
    }

    template <class N>
    Usage check_node(const TermPtr& t, const N& n, std::shared_ptr<Derivation>* dv) {
        if constexpr (std::is_same_v<N, VarN>) {
            auto it = scope_.find(n.name);
            if (it == scope_.end() || it->second.empty())
                err(TypeError::Kind::UnknownVariable, "unknown variable '" + n.name + "'");
            Usage u{it->second.back(), {n.name}, false};
            if (dv) *dv = node_deriv("var", t, u.type, {});
            return u;
        } else if constexpr (std::is_same_v<N, BoolN>) {
            Usage u{Type::boolean(), {}, false};
            if (dv) *dv = node_deriv("const", t, u.type, {});
            return u;
        } else if constexpr (std::is_same_v<N, OmegaN>) {
            Usage u{Type::any(), {}, true};
            if (dv) *dv = node_deriv("omega", t, u.type, {});
            return u;
        } else if constexpr (std::is_same_v<N, HoleN>) {
            if (!hole_ctx_)
                err(TypeError::Kind::HoleInTerm, "hole [.] outside a context judgment");
            Usage u{hole_type_, {}, false};
            for (const auto& [v, ty] : hole_ctx_->vars) {
                auto it = scope_.find(v);
                if (it == scope_.end() || it->second.empty())
                    err(TypeError::Kind::UnknownVariable,
                        "hole context variable '" + v + "' is not in scope at the hole");
                if (!type_compatible(it->second.back(), ty))
                    err(TypeError::Kind::TypeMismatch,
                        "hole context variable '" + v + "' has type " +
                            type_to_string(it->second.back()) + ", expected " + type_to_string(ty));
                u.required.insert(v);
            }
            for (const auto& q : hole_ctx_->qvars) {
                if (!qscope_.count(q))
                    err(TypeError::Kind::UnknownVariable,
                        "hole context quantum variable '" + q + "' is not in scope");
                u.required.insert(q);
            }
            if (dv) *dv = node_deriv("hole", t, u.type, {});
            return u;
        } else if constexpr (std::is_same_v<N, LamN>) {
            if (!n.ann)
                err(TypeError::Kind::AnnotationRequired,
                    "unannotated lambda outside applied position: " + show(t));
            bind(n.binder, n.ann);
            std::shared_ptr<Derivation> kid;
            Usage body = check(n.body, collect_ ? &kid : nullptr);
            unbind(n.binder);
            drop_binder(body, n.binder, t);
            Usage u{Type::arrow(n.ann, body.type), std::move(body.required), body.flexible};
            if (dv) *dv = node_deriv("lam", t, u.type, {kid});
            return u;
        } else if constexpr (std::is_same_v<N, AppN>) {
            // Unannotated lambdas (pair sugar) are typed from their argument.
            if (const auto* lam = as<LamN>(n.fun); lam && !lam->ann) {
                std::shared_ptr<Derivation> karg, kbody;
                Usage arg = check(n.arg, collect_ ? &karg : nullptr);
                bind(lam->binder, arg.type);
                Usage body = check(lam->body, collect_ ? &kbody : nullptr);
                unbind(lam->binder);
                drop_binder(body, lam->binder, n.fun);
                Usage u{body.type, merge_disjoint(body.required, arg.required, t),
                        body.flexible || arg.flexible};
                if (dv) *dv = node_deriv("app", t, u.type, {kbody, karg});
                return u;
            }
            std::shared_ptr<Derivation> kf, ka;
            Usage fun = check(n.fun, collect_ ? &kf : nullptr);
            Usage arg = check(n.arg, collect_ ? &ka : nullptr);
            TypePtr res;
            if (fun.type->kind() == Type::Kind::Any) {
                res = Type::any();
            } else if (fun.type->kind() == Type::Kind::Arrow) {
                if (!type_compatible(fun.type->left(), arg.type))
                    err(TypeError::Kind::TypeMismatch,
                        "argument of type " + type_to_string(arg.type) + " does not fit " +
                            type_to_string(fun.type) + " in " + show(t));
                res = fun.type->right();
            } else {
                err(TypeError::Kind::TypeMismatch,
                    "applied term has non-function type " + type_to_string(fun.type) + " in " +
                        show(t));
            }
            Usage u{res, merge_disjoint(fun.required, arg.required, t),
                    fun.flexible || arg.flexible};
            if (dv) *dv = node_deriv("app", t, u.type, {kf, ka});
            return u;
        } else if constexpr (std::is_same_v<N, IfN>) {
            std::shared_ptr<Derivation> kc, kt, ke;
            Usage cond = check(n.cond, collect_ ? &kc : nullptr);
            if (!type_compatible(cond.type, Type::boolean()))
                err(TypeError::Kind::TypeMismatch,
                    "if condition has type " + type_to_string(cond.type) + " in " + show(t));
            Usage thn = check(n.thn, collect_ ? &kt : nullptr);
            Usage els = check(n.els, collect_ ? &ke : nullptr);
            TypePtr res = type_join(thn.type, els.type);
            if (!res)
                err(TypeError::Kind::TypeMismatch,
                    "if branches have types " + type_to_string(thn.type) + " and " +
                        type_to_string(els.type));
            // Both branches must admit one shared context Delta.
            std::set<std::string> delta;
            bool delta_flex = false;
            if (thn.required == els.required) {
                delta = thn.required;
                delta_flex = thn.flexible && els.flexible;
            } else if (thn.flexible &&
                       std::includes(els.required.begin(), els.required.end(),
                                     thn.required.begin(), thn.required.end())) {
                delta = els.required;
                delta_flex = els.flexible;
            } else if (els.flexible &&
                       std::includes(thn.required.begin(), thn.required.end(),
                                     els.required.begin(), els.required.end())) {
                delta = thn.required;
                delta_flex = thn.flexible;
            } else if (thn.flexible && els.flexible) {
                delta = thn.required;
                delta.insert(els.required.begin(), els.required.end());
                delta_flex = true;
            } else {
                std::string witness;
                for (const auto& v : thn.required)
                    if (!els.required.count(v)) { witness = v; break; }
                if (witness.empty())
                    for (const auto& v : els.required)
                        if (!thn.required.count(v)) { witness = v; break; }
                err(TypeError::Kind::UnusedVariable,
                    "variable '" + witness + "' is used in only one branch of " + show(t));
            }
            Usage u{res, merge_disjoint(cond.required, delta, t), cond.flexible || delta_flex};
            if (dv) *dv = node_deriv("if", t, u.type, {kc, kt, ke});
            return u;
        } else if constexpr (std::is_same_v<N, LetPairN>) {
            std::shared_ptr<Derivation> ks, kb;
            Usage scrut = check(n.scrut, collect_ ? &ks : nullptr);
            TypePtr xt, yt;
            if (scrut.type->kind() == Type::Kind::Tensor) {
                xt = scrut.type->left();
                yt = scrut.type->right();
            } else if (scrut.type->kind() == Type::Kind::Any) {
                xt = Type::any();
                yt = Type::any();
            } else {
                err(TypeError::Kind::TypeMismatch,
                    "let scrutinee has non-pair type " + type_to_string(scrut.type) + " in " +
                        show(t));
            }
            bind(n.left, xt);
            bind(n.right, yt);
            Usage body = check(n.body, collect_ ? &kb : nullptr);
            unbind(n.right);
            unbind(n.left);
            drop_binder(body, n.left, t);
            drop_binder(body, n.right, t);
            Usage u{body.type, merge_disjoint(scrut.required, body.required, t),
                    scrut.flexible || body.flexible};
            if (dv) *dv = node_deriv("let", t, u.type, {ks, kb});
            return u;
        } else if constexpr (std::is_same_v<N, PairN>) {
            std::shared_ptr<Derivation> ka, kb;
            Usage a = check(n.first, collect_ ? &ka : nullptr);
            Usage b = check(n.second, collect_ ? &kb : nullptr);
            Usage u{Type::tensor(a.type, b.type), merge_disjoint(a.required, b.required, t),
                    a.flexible || b.flexible};
            if (dv) *dv = node_deriv("pair", t, u.type, {ka, kb});
            return u;
        } else if constexpr (std::is_same_v<N, ChoiceN>) {
            require_mode(Mode::Prob, "probabilistic choice (+)");
            std::shared_ptr<Derivation> ka, kb;
            Usage a = check(n.left, collect_ ? &ka : nullptr);
            Usage b = check(n.right, collect_ ? &kb : nullptr);
            TypePtr res = type_join(a.type, b.type);
            if (!res)
                err(TypeError::Kind::TypeMismatch,
                    "choice operands have types " + type_to_string(a.type) + " and " +
                        type_to_string(b.type));
            Usage u{res, merge_disjoint(a.required, b.required, t), a.flexible || b.flexible};
            if (dv) *dv = node_deriv("choice", t, u.type, {ka, kb});
            return u;
        } else if constexpr (std::is_same_v<N, QVarN>) {
            require_mode(Mode::Quantum, "quantum variable");
            if (!qscope_.count(n.name))
                err(TypeError::Kind::UnknownVariable, "unknown quantum variable '" + n.name + "'");
            Usage u{Type::qbit(), {n.name}, false};
            if (dv) *dv = node_deriv("qvar", t, u.type, {});
            return u;
        } else if constexpr (std::is_same_v<N, GateN>) {
            require_mode(Mode::Quantum, "gate application");
            auto it = gates_.find(n.gate);
            if (it == gates_.end())
                err(TypeError::Kind::UnknownGate, "unknown gate '" + n.gate + "'");
            std::shared_ptr<Derivation> ka;
            Usage a = check(n.arg, collect_ ? &ka : nullptr);
            if (!type_compatible(a.type, qbit_tensor(it->second)))
                err(TypeError::Kind::GateArity,
                    "gate " + n.gate + " needs a qbit argument of width " +
                        std::to_string(it->second) + ", got " + type_to_string(a.type));
            Usage u{qbit_tensor(it->second), std::move(a.required), a.flexible};
            if (dv) *dv = node_deriv("gate", t, u.type, {ka});
            return u;
        } else if constexpr (std::is_same_v<N, MeasN>) {
            require_mode(Mode::Quantum, "meas");
            std::shared_ptr<Derivation> ka;
            Usage a = check(n.arg, collect_ ? &ka : nullptr);
            if (!type_compatible(a.type, Type::qbit()))
                err(TypeError::Kind::TypeMismatch,
                    "meas needs a qbit, got " + type_to_string(a.type));
            Usage u{Type::boolean(), std::move(a.required), a.flexible};
            if (dv) *dv = node_deriv("meas", t, u.type, {ka});
            return u;
        } else if constexpr (std::is_same_v<N, NewN>) {
            require_mode(Mode::Quantum, "new");
            std::shared_ptr<Derivation> ka;
            Usage a = check(n.arg, collect_ ? &ka : nullptr);
            if (!type_compatible(a.type, Type::boolean()))
                err(TypeError::Kind::TypeMismatch,
                    "new needs a bool, got " + type_to_string(a.type));
            Usage u{Type::qbit(), std::move(a.required), a.flexible};
            if (dv) *dv = node_deriv("new", t, u.type, {ka});
            return u;
        } else {
            err(TypeError::Kind::TypeMismatch, "unhandled construct");
        }
    }

    Mode mode_;
    const std::map<std::string, int>& gates_;
    const TypingContext* hole_ctx_;
    TypePtr hole_type_;
    bool collect_;
    std::map<std::string, std::vector<TypePtr>> scope_;
    std::set<std::string> qscope_;
};

// Shared driver: checks the (uniquified) term under ctx and verifies that
// ctx is consumed exactly (up to Omega flexibility).
Usage run_check(const TypingContext& ctx, const TermPtr& e, Mode mode,
                const std::map<std::string, int>& gate_arities, const TypingContext* hole_ctx,
                const TypePtr& hole_type, std::shared_ptr<Derivation>* deriv) {
    // Scopes are stacks, so shadowed binders resolve innermost-first; no
    // renaming pass is needed (and none is wanted: context binders must stay
    // as written so that filling a hole captures as intended).
    Checker ck(mode, gate_arities, hole_ctx, hole_type, deriv != nullptr);
    for (const auto& [v, ty] : ctx.vars) ck.bind(v, ty);
    for (const auto& q : ctx.qvars) ck.bind_qvar(q);
    Usage u = ck.check(e, deriv);
    for (const auto& v : u.required) {
        if (!ctx.vars.count(v) && !ctx.qvars.count(v))
            throw InternalError("usage tracking leaked binder '" + v + "'");
    }
    if (!u.flexible) {
        for (const auto& [v, ty] : ctx.vars) {
            (void)ty;
            if (!u.required.count(v))
                throw TypeError(TypeError::Kind::UnusedVariable,
                                "linear context variable '" + v + "' is not used");
        }
        for (const auto& q : ctx.qvars) {
            if (!u.required.count(q))
                throw TypeError(TypeError::Kind::UnusedVariable,
                                "quantum variable '" + q + "' is not used");
        }
    }
    return u;
}

} // namespace

TypePtr typecheck(const TypingContext& ctx, const TermPtr& e, Mode mode,
                  const std::map<std::string, int>& gate_arities,
                  std::shared_ptr<Derivation>* deriv) {
    if (count_holes(e) > 0)
        throw TypeError(TypeError::Kind::HoleInTerm, "term contains a context hole");
    return run_check(ctx, e, mode, gate_arities, nullptr, nullptr, deriv).type;
}

TypePtr typecheck_expect(const TypingContext& ctx, const TermPtr& e, const TypePtr& expected,
                         Mode mode, const std::map<std::string, int>& gate_arities) {
    TypePtr got = typecheck(ctx, e, mode, gate_arities);
    TypePtr j = type_join(got, expected);
    if (!j)
        throw TypeError(TypeError::Kind::TypeMismatch,
                        "term has type " + type_to_string(got) + ", expected " +
                            type_to_string(expected));
    return j;
}

TypePtr typecheck_context_hole(const TermPtr& context, const TypingContext& outer,
                               const TypingContext& hole_ctx, const TypePtr& hole_type,
                               Mode mode, const std::map<std::string, int>& gate_arities) {
    int holes = count_holes(context);
    if (holes == 0) throw TypeError(TypeError::Kind::NoHole, "context has no hole");
    if (holes > 1) throw TypeError(TypeError::Kind::MultipleHoles, "context has multiple holes");
    return run_check(outer, context, mode, gate_arities, &hole_ctx, hole_type, nullptr).type;
}

} // namespace linlam
