#include "linlam/term.hpp"

#include <cassert>
#include <optional>
#include <stdexcept>

namespace linlam {

TermPtr mk_var(std::string name) { return std::make_shared<Term>(VarN{std::move(name)}); }
TermPtr mk_bool(bool value) { return std::make_shared<Term>(BoolN{value}); }
TermPtr mk_omega() { return std::make_shared<Term>(OmegaN{}); }
TermPtr mk_lam(std::string binder, TypePtr ann, TermPtr body) {
    return std::make_shared<Term>(LamN{std::move(binder), std::move(ann), std::move(body)});
}
TermPtr mk_app(TermPtr fun, TermPtr arg) {
    return std::make_shared<Term>(AppN{std::move(fun), std::move(arg)});
}
TermPtr mk_if(TermPtr cond, TermPtr thn, TermPtr els) {
    return std::make_shared<Term>(IfN{std::move(cond), std::move(thn), std::move(els)});
}
TermPtr mk_letpair(std::string left, std::string right, TermPtr scrut, TermPtr body) {
    return std::make_shared<Term>(LetPairN{std::move(left), std::move(right), std::move(scrut), std::move(body)});
}
TermPtr mk_pair(TermPtr first, TermPtr second) {
    assert(is_value(first) && is_value(second) && "pair components must be values");
    return std::make_shared<Term>(PairN{std::move(first), std::move(second)});
}
TermPtr mk_choice(TermPtr left, TermPtr right) {
    return std::make_shared<Term>(ChoiceN{std::move(left), std::move(right)});
}
TermPtr mk_qvar(std::string name) { return std::make_shared<Term>(QVarN{std::move(name)}); }
TermPtr mk_gate(std::string gate, TermPtr arg) {
    return std::make_shared<Term>(GateN{std::move(gate), std::move(arg)});
}
TermPtr mk_meas(TermPtr arg) { return std::make_shared<Term>(MeasN{std::move(arg)}); }
TermPtr mk_new(TermPtr arg) { return std::make_shared<Term>(NewN{std::move(arg)}); }
TermPtr mk_hole() { return std::make_shared<Term>(HoleN{}); }

bool is_value(const TermPtr& t) {
    return std::visit(
        [](const auto& n) -> bool {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, VarN> || std::is_same_v<N, BoolN> ||
                          std::is_same_v<N, LamN> || std::is_same_v<N, QVarN>) {
                return true;
            } else if constexpr (std::is_same_v<N, PairN>) {
                return is_value(n.first) && is_value(n.second);
            } else {
                return false;
            }
        },
        t->node());
}

int term_size(const TermPtr& t) {
    return std::visit(
        [](const auto& n) -> int {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, LamN>) return 1 + term_size(n.body);
            else if constexpr (std::is_same_v<N, AppN>) return 1 + term_size(n.fun) + term_size(n.arg);
            else if constexpr (std::is_same_v<N, IfN>)
                return 1 + term_size(n.cond) + term_size(n.thn) + term_size(n.els);
            else if constexpr (std::is_same_v<N, LetPairN>)
                return 1 + term_size(n.scrut) + term_size(n.body);
            else if constexpr (std::is_same_v<N, PairN>)
                return 1 + term_size(n.first) + term_size(n.second);
            else if constexpr (std::is_same_v<N, ChoiceN>)
                return 1 + term_size(n.left) + term_size(n.right);
            else if constexpr (std::is_same_v<N, GateN>) return 1 + term_size(n.arg);
            else if constexpr (std::is_same_v<N, MeasN>) return 1 + term_size(n.arg);
            else if constexpr (std::is_same_v<N, NewN>) return 1 + term_size(n.arg);
            else return 1;
        },
        t->node());
}

int count_holes(const TermPtr& t) {
    return std::visit(
        [](const auto& n) -> int {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, HoleN>) return 1;
            else if constexpr (std::is_same_v<N, LamN>) return count_holes(n.body);
            else if constexpr (std::is_same_v<N, AppN>) return count_holes(n.fun) + count_holes(n.arg);
            else if constexpr (std::is_same_v<N, IfN>)
                return count_holes(n.cond) + count_holes(n.thn) + count_holes(n.els);
            else if constexpr (std::is_same_v<N, LetPairN>)
                return count_holes(n.scrut) + count_holes(n.body);
            else if constexpr (std::is_same_v<N, PairN>)
                return count_holes(n.first) + count_holes(n.second);
            else if constexpr (std::is_same_v<N, ChoiceN>)
                return count_holes(n.left) + count_holes(n.right);
            else if constexpr (std::is_same_v<N, GateN>) return count_holes(n.arg);
            else if constexpr (std::is_same_v<N, MeasN>) return count_holes(n.arg);
            else if constexpr (std::is_same_v<N, NewN>) return count_holes(n.arg);
            else return 0;
        },
        t->node());
}

namespace {

void collect_free_vars(const TermPtr& t, std::set<std::string>& bound, std::set<std::string>& out) {
    std::visit(
        [&](const auto& n) {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, VarN>) {
                if (!bound.count(n.name)) out.insert(n.name);
            } else if constexpr (std::is_same_v<N, LamN>) {
                bool added = bound.insert(n.binder).second;
                collect_free_vars(n.body, bound, out);
                if (added) bound.erase(n.binder);
            } else if constexpr (std::is_same_v<N, AppN>) {
                collect_free_vars(n.fun, bound, out);
                collect_free_vars(n.arg, bound, out);
            } else if constexpr (std::is_same_v<N, IfN>) {
                collect_free_vars(n.cond, bound, out);
                collect_free_vars(n.thn, bound, out);
                collect_free_vars(n.els, bound, out);
            } else if constexpr (std::is_same_v<N, LetPairN>) {
                collect_free_vars(n.scrut, bound, out);
                bool al = bound.insert(n.left).second;
                bool ar = bound.insert(n.right).second;
                collect_free_vars(n.body, bound, out);
                if (al) bound.erase(n.left);
                if (ar) bound.erase(n.right);
            } else if constexpr (std::is_same_v<N, PairN>) {
                collect_free_vars(n.first, bound, out);
                collect_free_vars(n.second, bound, out);
            } else if constexpr (std::is_same_v<N, ChoiceN>) {
                collect_free_vars(n.left, bound, out);
                collect_free_vars(n.right, bound, out);
            } else if constexpr (std::is_same_v<N, GateN>) {
                collect_free_vars(n.arg, bound, out);
            } else if constexpr (std::is_same_v<N, MeasN>) {
                collect_free_vars(n.arg, bound, out);
            } else if constexpr (std::is_same_v<N, NewN>) {
                collect_free_vars(n.arg, bound, out);
            }
        },
        t->node());
}

void collect_free_qvars(const TermPtr& t, std::set<std::string>& seen, std::vector<std::string>& out) {
    std::visit(
        [&](const auto& n) {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, QVarN>) {
                if (seen.insert(n.name).second) out.push_back(n.name);
            } else if constexpr (std::is_same_v<N, LamN>) {
                collect_free_qvars(n.body, seen, out);
            } else if constexpr (std::is_same_v<N, AppN>) {
                collect_free_qvars(n.fun, seen, out);
                collect_free_qvars(n.arg, seen, out);
            } else if constexpr (std::is_same_v<N, IfN>) {
                collect_free_qvars(n.cond, seen, out);
                collect_free_qvars(n.thn, seen, out);
                collect_free_qvars(n.els, seen, out);
            } else if constexpr (std::is_same_v<N, LetPairN>) {
                collect_free_qvars(n.scrut, seen, out);
                collect_free_qvars(n.body, seen, out);
            } else if constexpr (std::is_same_v<N, PairN>) {
                collect_free_qvars(n.first, seen, out);
                collect_free_qvars(n.second, seen, out);
            } else if constexpr (std::is_same_v<N, ChoiceN>) {
                collect_free_qvars(n.left, seen, out);
                collect_free_qvars(n.right, seen, out);
            } else if constexpr (std::is_same_v<N, GateN>) {
                collect_free_qvars(n.arg, seen, out);
            } else if constexpr (std::is_same_v<N, MeasN>) {
                collect_free_qvars(n.arg, seen, out);
            } else if constexpr (std::is_same_v<N, NewN>) {
                collect_free_qvars(n.arg, seen, out);
            }
        },
        t->node());
}

void collect_all_names(const TermPtr& t, std::set<std::string>& out) {
    std::visit(
        [&](const auto& n) {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, VarN>) {
                out.insert(n.name);
            } else if constexpr (std::is_same_v<N, LamN>) {
                out.insert(n.binder);
                collect_all_names(n.body, out);
            } else if constexpr (std::is_same_v<N, AppN>) {
                collect_all_names(n.fun, out);
                collect_all_names(n.arg, out);
            } else if constexpr (std::is_same_v<N, IfN>) {
                collect_all_names(n.cond, out);
                collect_all_names(n.thn, out);
                collect_all_names(n.els, out);
            } else if constexpr (std::is_same_v<N, LetPairN>) {
                out.insert(n.left);
                out.insert(n.right);
                collect_all_names(n.scrut, out);
                collect_all_names(n.body, out);
            } else if constexpr (std::is_same_v<N, PairN>) {
                collect_all_names(n.first, out);
                collect_all_names(n.second, out);
            } else if constexpr (std::is_same_v<N, ChoiceN>) {
                collect_all_names(n.left, out);
                collect_all_names(n.right, out);
            } else if constexpr (std::is_same_v<N, GateN>) {
                collect_all_names(n.arg, out);
            } else if constexpr (std::is_same_v<N, MeasN>) {
                collect_all_names(n.arg, out);
            } else if constexpr (std::is_same_v<N, NewN>) {
                collect_all_names(n.arg, out);
            }
        },
        t->node());
}

// Renames every binder in t to a name fresh w.r.t. `used`.
TermPtr refresh_binders(const TermPtr& t, std::map<std::string, TermPtr>& ren,
                        std::set<std::string>& used) {
    return std::visit(
        [&](const auto& n) -> TermPtr {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, VarN>) {
                auto it = ren.find(n.name);
                return it == ren.end() ? mk_var(n.name) : it->second;
            } else if constexpr (std::is_same_v<N, LamN>) {
                std::string nb = fresh_name(n.binder, used);
                auto saved = ren.find(n.binder) == ren.end()
                                 ? std::optional<TermPtr>()
                                 : std::optional<TermPtr>(ren[n.binder]);
                ren[n.binder] = mk_var(nb);
                TermPtr body = refresh_binders(n.body, ren, used);
                if (saved) ren[n.binder] = *saved; else ren.erase(n.binder);
                return mk_lam(nb, n.ann, body);
            } else if constexpr (std::is_same_v<N, AppN>) {
                return mk_app(refresh_binders(n.fun, ren, used), refresh_binders(n.arg, ren, used));
            } else if constexpr (std::is_same_v<N, IfN>) {
                return mk_if(refresh_binders(n.cond, ren, used),
                             refresh_binders(n.thn, ren, used),
                             refresh_binders(n.els, ren, used));
            } else if constexpr (std::is_same_v<N, LetPairN>) {
                TermPtr scrut = refresh_binders(n.scrut, ren, used);
                std::string nl = fresh_name(n.left, used);
                std::string nr = fresh_name(n.right, used);
                auto sl = ren.find(n.left) == ren.end() ? std::optional<TermPtr>()
                                                        : std::optional<TermPtr>(ren[n.left]);
                auto sr = ren.find(n.right) == ren.end() ? std::optional<TermPtr>()
                                                         : std::optional<TermPtr>(ren[n.right]);
                ren[n.left] = mk_var(nl);
                ren[n.right] = mk_var(nr);
                TermPtr body = refresh_binders(n.body, ren, used);
                if (sl) ren[n.left] = *sl; else ren.erase(n.left);
                if (sr) ren[n.right] = *sr; else ren.erase(n.right);
                return mk_letpair(nl, nr, scrut, body);
            } else if constexpr (std::is_same_v<N, PairN>) {
                return mk_pair(refresh_binders(n.first, ren, used),
                               refresh_binders(n.second, ren, used));
            } else if constexpr (std::is_same_v<N, ChoiceN>) {
                return mk_choice(refresh_binders(n.left, ren, used),
                                 refresh_binders(n.right, ren, used));
            } else if constexpr (std::is_same_v<N, GateN>) {
                return mk_gate(n.gate, refresh_binders(n.arg, ren, used));
            } else if constexpr (std::is_same_v<N, MeasN>) {
                return mk_meas(refresh_binders(n.arg, ren, used));
            } else if constexpr (std::is_same_v<N, NewN>) {
                return mk_new(refresh_binders(n.arg, ren, used));
            } else {
                return std::make_shared<Term>(n);
            }
        },
        t->node());
}

TermPtr subst_rec(const TermPtr& t, const std::map<std::string, TermPtr>& repl,
                  std::set<std::string>& used) {
    return std::visit(
        [&](const auto& n) -> TermPtr {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, VarN>) {
                auto it = repl.find(n.name);
                if (it == repl.end()) return mk_var(n.name);
                std::map<std::string, TermPtr> ren;
                return refresh_binders(it->second, ren, used);
            } else if constexpr (std::is_same_v<N, LamN>) {
                auto inner = repl;
                inner.erase(n.binder);
                if (inner.empty()) return mk_lam(n.binder, n.ann, n.body);
                bool captures = false;
                for (const auto& [k, v] : inner) {
                    (void)k;
                    if (free_vars(v).count(n.binder)) { captures = true; break; }
                }
                if (!captures) return mk_lam(n.binder, n.ann, subst_rec(n.body, inner, used));
                std::string nb = fresh_name(n.binder, used);
                inner[n.binder] = mk_var(nb);
                return mk_lam(nb, n.ann, subst_rec(n.body, inner, used));
            } else if constexpr (std::is_same_v<N, AppN>) {
                return mk_app(subst_rec(n.fun, repl, used), subst_rec(n.arg, repl, used));
            } else if constexpr (std::is_same_v<N, IfN>) {
                return mk_if(subst_rec(n.cond, repl, used), subst_rec(n.thn, repl, used),
                             subst_rec(n.els, repl, used));
            } else if constexpr (std::is_same_v<N, LetPairN>) {
                auto inner = repl;
                inner.erase(n.left);
                inner.erase(n.right);
                TermPtr scrut = subst_rec(n.scrut, repl, used);
                if (inner.empty()) return mk_letpair(n.left, n.right, scrut, n.body);
                bool captures = false;
                for (const auto& [k, v] : inner) {
                    (void)k;
                    auto fv = free_vars(v);
                    if (fv.count(n.left) || fv.count(n.right)) { captures = true; break; }
                }
                std::string nl = n.left, nr = n.right;
                if (captures) {
                    nl = fresh_name(n.left, used);
                    nr = fresh_name(n.right, used);
                    inner[n.left] = mk_var(nl);
                    inner[n.right] = mk_var(nr);
                }
                return mk_letpair(nl, nr, scrut, subst_rec(n.body, inner, used));
            } else if constexpr (std::is_same_v<N, PairN>) {
                return mk_pair(subst_rec(n.first, repl, used), subst_rec(n.second, repl, used));
            } else if constexpr (std::is_same_v<N, ChoiceN>) {
                return mk_choice(subst_rec(n.left, repl, used), subst_rec(n.right, repl, used));
            } else if constexpr (std::is_same_v<N, GateN>) {
                return mk_gate(n.gate, subst_rec(n.arg, repl, used));
            } else if constexpr (std::is_same_v<N, MeasN>) {
                return mk_meas(subst_rec(n.arg, repl, used));
            } else if constexpr (std::is_same_v<N, NewN>) {
                return mk_new(subst_rec(n.arg, repl, used));
            } else {
                return std::make_shared<Term>(n);
            }
        },
        t->node());
}

} // namespace

std::set<std::string> free_vars(const TermPtr& t) {
    std::set<std::string> bound, out;
    collect_free_vars(t, bound, out);
    return out;
}

std::vector<std::string> free_qvars(const TermPtr& t) {
    std::set<std::string> seen;
    std::vector<std::string> out;
    collect_free_qvars(t, seen, out);
    return out;
}

std::string fresh_name(const std::string& base, std::set<std::string>& used) {
    if (used.insert(base).second) return base;
    for (int k = 2;; ++k) {
        std::string cand = base + "_" + std::to_string(k);
        if (used.insert(cand).second) return cand;
    }
}

TermPtr subst(const TermPtr& t, const std::map<std::string, TermPtr>& repl) {
    if (repl.empty()) return t;
    std::set<std::string> used;
    collect_all_names(t, used);
    for (const auto& [k, v] : repl) {
        (void)k;
        collect_all_names(v, used);
    }
    return subst_rec(t, repl, used);
}

TermPtr subst(const TermPtr& t, const std::string& var, const TermPtr& value) {
    return subst(t, std::map<std::string, TermPtr>{{var, value}});
}

TermPtr rename_qvars(const TermPtr& t, const std::map<std::string, std::string>& ren) {
    return std::visit(
        [&](const auto& n) -> TermPtr {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, QVarN>) {
                auto it = ren.find(n.name);
                return it == ren.end() ? mk_qvar(n.name) : mk_qvar(it->second);
            } else if constexpr (std::is_same_v<N, LamN>) {
                return mk_lam(n.binder, n.ann, rename_qvars(n.body, ren));
            } else if constexpr (std::is_same_v<N, AppN>) {
                return mk_app(rename_qvars(n.fun, ren), rename_qvars(n.arg, ren));
            } else if constexpr (std::is_same_v<N, IfN>) {
                return mk_if(rename_qvars(n.cond, ren), rename_qvars(n.thn, ren),
                             rename_qvars(n.els, ren));
            } else if constexpr (std::is_same_v<N, LetPairN>) {
                return mk_letpair(n.left, n.right, rename_qvars(n.scrut, ren),
                                  rename_qvars(n.body, ren));
            } else if constexpr (std::is_same_v<N, PairN>) {
                return mk_pair(rename_qvars(n.first, ren), rename_qvars(n.second, ren));
            } else if constexpr (std::is_same_v<N, ChoiceN>) {
                return mk_choice(rename_qvars(n.left, ren), rename_qvars(n.right, ren));
            } else if constexpr (std::is_same_v<N, GateN>) {
                return mk_gate(n.gate, rename_qvars(n.arg, ren));
            } else if constexpr (std::is_same_v<N, MeasN>) {
                return mk_meas(rename_qvars(n.arg, ren));
            } else if constexpr (std::is_same_v<N, NewN>) {
                return mk_new(rename_qvars(n.arg, ren));
            } else {
                return std::make_shared<Term>(n);
            }
        },
        t->node());
}

namespace {

bool alpha_rec(const TermPtr& a, const TermPtr& b, std::map<std::string, int>& ea,
               std::map<std::string, int>& eb, int& depth) {
    const auto& na = a->node();
    const auto& nb = b->node();
    if (na.index() != nb.index()) return false;
    if (const auto* va = std::get_if<VarN>(&na)) {
        const auto* vb = std::get_if<VarN>(&nb);
        auto ia = ea.find(va->name);
        auto ib = eb.find(vb->name);
        if (ia == ea.end() && ib == eb.end()) return va->name == vb->name;
        if (ia == ea.end() || ib == eb.end()) return false;
        return ia->second == ib->second;
    }
    if (const auto* ba = std::get_if<BoolN>(&na)) {
        return ba->value == std::get_if<BoolN>(&nb)->value;
    }
    if (std::get_if<OmegaN>(&na) || std::get_if<HoleN>(&na)) return true;
    if (const auto* qa = std::get_if<QVarN>(&na)) {
        return qa->name == std::get_if<QVarN>(&nb)->name;
    }
    if (const auto* la = std::get_if<LamN>(&na)) {
        const auto* lb = std::get_if<LamN>(&nb);
        if (la->ann && lb->ann && !type_equal(la->ann, lb->ann)) return false;
        int d = depth++;
        auto sa = ea.find(la->binder) == ea.end() ? std::optional<int>() : std::optional<int>(ea[la->binder]);
        auto sb = eb.find(lb->binder) == eb.end() ? std::optional<int>() : std::optional<int>(eb[lb->binder]);
        ea[la->binder] = d;
        eb[lb->binder] = d;
        bool ok = alpha_rec(la->body, lb->body, ea, eb, depth);
        if (sa) ea[la->binder] = *sa; else ea.erase(la->binder);
        if (sb) eb[lb->binder] = *sb; else eb.erase(lb->binder);
        return ok;
    }
    if (const auto* pa = std::get_if<AppN>(&na)) {
        const auto* pb = std::get_if<AppN>(&nb);
        return alpha_rec(pa->fun, pb->fun, ea, eb, depth) &&
               alpha_rec(pa->arg, pb->arg, ea, eb, depth);
    }
    if (const auto* ia = std::get_if<IfN>(&na)) {
        const auto* ib = std::get_if<IfN>(&nb);
        return alpha_rec(ia->cond, ib->cond, ea, eb, depth) &&
               alpha_rec(ia->thn, ib->thn, ea, eb, depth) &&
               alpha_rec(ia->els, ib->els, ea, eb, depth);
    }
    if (const auto* la = std::get_if<LetPairN>(&na)) {
        const auto* lb = std::get_if<LetPairN>(&nb);
        if (!alpha_rec(la->scrut, lb->scrut, ea, eb, depth)) return false;
        int dl = depth++;
        int dr = depth++;
        auto sal = ea.find(la->left) == ea.end() ? std::optional<int>() : std::optional<int>(ea[la->left]);
        auto sar = ea.find(la->right) == ea.end() ? std::optional<int>() : std::optional<int>(ea[la->right]);
        auto sbl = eb.find(lb->left) == eb.end() ? std::optional<int>() : std::optional<int>(eb[lb->left]);
        auto sbr = eb.find(lb->right) == eb.end() ? std::optional<int>() : std::optional<int>(eb[lb->right]);
        ea[la->left] = dl;
        ea[la->right] = dr;
        eb[lb->left] = dl;
        eb[lb->right] = dr;
        bool ok = alpha_rec(la->body, lb->body, ea, eb, depth);
        if (sal) ea[la->left] = *sal; else ea.erase(la->left);
        if (sar) ea[la->right] = *sar; else ea.erase(la->right);
        if (sbl) eb[lb->left] = *sbl; else eb.erase(lb->left);
        if (sbr) eb[lb->right] = *sbr; else eb.erase(lb->right);
        return ok;
    }
    if (const auto* pa = std::get_if<PairN>(&na)) {
        const auto* pb = std::get_if<PairN>(&nb);
        return alpha_rec(pa->first, pb->first, ea, eb, depth) &&
               alpha_rec(pa->second, pb->second, ea, eb, depth);
    }
    if (const auto* ca = std::get_if<ChoiceN>(&na)) {
        const auto* cb = std::get_if<ChoiceN>(&nb);
        return alpha_rec(ca->left, cb->left, ea, eb, depth) &&
               alpha_rec(ca->right, cb->right, ea, eb, depth);
    }
    if (const auto* ga = std::get_if<GateN>(&na)) {
        const auto* gb = std::get_if<GateN>(&nb);
        return ga->gate == gb->gate && alpha_rec(ga->arg, gb->arg, ea, eb, depth);
    }
    if (const auto* ma = std::get_if<MeasN>(&na)) {
        return alpha_rec(ma->arg, std::get_if<MeasN>(&nb)->arg, ea, eb, depth);
    }
    if (const auto* wa = std::get_if<NewN>(&na)) {
        return alpha_rec(wa->arg, std::get_if<NewN>(&nb)->arg, ea, eb, depth);
    }
    return false;
}

void canon_rec(const TermPtr& t, std::map<std::string, std::string>& env, int& next,
               std::string& out) {
    std::visit(
        [&](const auto& n) {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, VarN>) {
                auto it = env.find(n.name);
                out += "(var ";
                out += it == env.end() ? n.name : it->second;
                out += ")";
            } else if constexpr (std::is_same_v<N, BoolN>) {
                out += n.value ? "(bool tt)" : "(bool ff)";
            } else if constexpr (std::is_same_v<N, OmegaN>) {
                out += "(omega)";
            } else if constexpr (std::is_same_v<N, HoleN>) {
                out += "(hole)";
            } else if constexpr (std::is_same_v<N, LamN>) {
                std::string c = "%" + std::to_string(next++);
                auto saved = env.find(n.binder) == env.end()
                                 ? std::optional<std::string>()
                                 : std::optional<std::string>(env[n.binder]);
                env[n.binder] = c;
                out += "(lam " + c + " ";
                canon_rec(n.body, env, next, out);
                out += ")";
                if (saved) env[n.binder] = *saved; else env.erase(n.binder);
            } else if constexpr (std::is_same_v<N, AppN>) {
                out += "(app ";
                canon_rec(n.fun, env, next, out);
                out += " ";
                canon_rec(n.arg, env, next, out);
                out += ")";
            } else if constexpr (std::is_same_v<N, IfN>) {
                out += "(if ";
                canon_rec(n.cond, env, next, out);
                out += " ";
                canon_rec(n.thn, env, next, out);
                out += " ";
                canon_rec(n.els, env, next, out);
                out += ")";
            } else if constexpr (std::is_same_v<N, LetPairN>) {
                out += "(let ";
                canon_rec(n.scrut, env, next, out);
                std::string cl = "%" + std::to_string(next++);
                std::string cr = "%" + std::to_string(next++);
                auto sl = env.find(n.left) == env.end() ? std::optional<std::string>()
                                                        : std::optional<std::string>(env[n.left]);
                auto sr = env.find(n.right) == env.end() ? std::optional<std::string>()
                                                         : std::optional<std::string>(env[n.right]);
                env[n.left] = cl;
                env[n.right] = cr;
                out += " " + cl + " " + cr + " ";
                canon_rec(n.body, env, next, out);
                out += ")";
                if (sl) env[n.left] = *sl; else env.erase(n.left);
                if (sr) env[n.right] = *sr; else env.erase(n.right);
            } else if constexpr (std::is_same_v<N, PairN>) {
                out += "(pair ";
                canon_rec(n.first, env, next, out);
                out += " ";
                canon_rec(n.second, env, next, out);
                out += ")";
            } else if constexpr (std::is_same_v<N, ChoiceN>) {
                out += "(choice ";
                canon_rec(n.left, env, next, out);
                out += " ";
                canon_rec(n.right, env, next, out);
                out += ")";
            } else if constexpr (std::is_same_v<N, QVarN>) {
                out += "(qvar " + n.name + ")";
            } else if constexpr (std::is_same_v<N, GateN>) {
                out += "(gate " + n.gate + " ";
                canon_rec(n.arg, env, next, out);
                out += ")";
            } else if constexpr (std::is_same_v<N, MeasN>) {
                out += "(meas ";
                canon_rec(n.arg, env, next, out);
                out += ")";
            } else if constexpr (std::is_same_v<N, NewN>) {
                out += "(new ";
                canon_rec(n.arg, env, next, out);
                out += ")";
            }
        },
        t->node());
}

} // namespace

bool alpha_eq(const TermPtr& a, const TermPtr& b) {
    std::map<std::string, int> ea, eb;
    int depth = 0;
    return alpha_rec(a, b, ea, eb, depth);
}

std::string canonical_key(const TermPtr& t) {
    std::map<std::string, std::string> env;
    int next = 0;
    std::string out;
    canon_rec(t, env, next, out);
    return out;
}

namespace {

TermPtr uniquify_rec(const TermPtr& t, std::map<std::string, std::string>& env,
                     std::set<std::string>& used) {
    return std::visit(
        [&](const auto& n) -> TermPtr {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, VarN>) {
                auto it = env.find(n.name);
                return it == env.end() ? mk_var(n.name) : mk_var(it->second);
            } else if constexpr (std::is_same_v<N, LamN>) {
                std::string nb = fresh_name(n.binder, used);
                auto saved = env.count(n.binder) ? std::optional<std::string>(env[n.binder])
                                                 : std::optional<std::string>();
                env[n.binder] = nb;
                TermPtr body = uniquify_rec(n.body, env, used);
                if (saved) env[n.binder] = *saved; else env.erase(n.binder);
                return mk_lam(nb, n.ann, body);
            } else if constexpr (std::is_same_v<N, AppN>) {
                return mk_app(uniquify_rec(n.fun, env, used), uniquify_rec(n.arg, env, used));
            } else if constexpr (std::is_same_v<N, IfN>) {
                return mk_if(uniquify_rec(n.cond, env, used), uniquify_rec(n.thn, env, used),
                             uniquify_rec(n.els, env, used));
            } else if constexpr (std::is_same_v<N, LetPairN>) {
                TermPtr scrut = uniquify_rec(n.scrut, env, used);
                std::string nl = fresh_name(n.left, used);
                auto sl = env.count(n.left) ? std::optional<std::string>(env[n.left])
                                            : std::optional<std::string>();
                env[n.left] = nl;
                std::string nr = fresh_name(n.right, used);
                auto sr = env.count(n.right) ? std::optional<std::string>(env[n.right])
                                             : std::optional<std::string>();
                env[n.right] = nr;
                TermPtr body = uniquify_rec(n.body, env, used);
                if (sr) env[n.right] = *sr; else env.erase(n.right);
                if (sl) env[n.left] = *sl; else env.erase(n.left);
                return mk_letpair(nl, nr, scrut, body);
            } else if constexpr (std::is_same_v<N, PairN>) {
                return mk_pair(uniquify_rec(n.first, env, used), uniquify_rec(n.second, env, used));
            } else if constexpr (std::is_same_v<N, ChoiceN>) {
                return mk_choice(uniquify_rec(n.left, env, used), uniquify_rec(n.right, env, used));
            } else if constexpr (std::is_same_v<N, GateN>) {
                return mk_gate(n.gate, uniquify_rec(n.arg, env, used));
            } else if constexpr (std::is_same_v<N, MeasN>) {
                return mk_meas(uniquify_rec(n.arg, env, used));
            } else if constexpr (std::is_same_v<N, NewN>) {
                return mk_new(uniquify_rec(n.arg, env, used));
            } else {
                return std::make_shared<Term>(n);
            }
        },
        t->node());
}

} // namespace

TermPtr uniquify_binders(const TermPtr& t) {
    std::map<std::string, std::string> env;
    std::set<std::string> used = free_vars(t);
    return uniquify_rec(t, env, used);
}

TermPtr desugar_pair(const TermPtr& e, const TermPtr& f, bool force_expansion) {
    if (!force_expansion && is_value(e) && is_value(f)) return mk_pair(e, f);
    std::set<std::string> used = free_vars(e);
    for (const auto& v : free_vars(f)) used.insert(v);
    std::string x = fresh_name("px", used);
    std::string y = fresh_name("py", used);
    // Right-nested so each unannotated lambda sits directly under its
    // application: the checker infers binder types only in that position.
    TermPtr inner = mk_app(mk_lam(y, nullptr, mk_pair(mk_var(x), mk_var(y))), f);
    return mk_app(mk_lam(x, nullptr, inner), e);
}

TermPtr desugar_weak(const std::string& var, const TermPtr& e) {
    return mk_if(mk_var(var), e, e);
}

} // namespace linlam
