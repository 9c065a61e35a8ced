#include "linlam/eval.hpp"

#include "linlam/errors.hpp"
#include "linlam/pretty.hpp"

namespace linlam {

namespace {

const Rational kHalf(1, 2);

[[noreturn]] void stuck(const TermPtr& e, const std::string& why) {
    throw InternalError("evaluation stuck on " + pretty(e) + ": " + why);
}

RatDist eval_rec(const TermPtr& e, Mode mode, EvalCache* cache) {
    if (is_value(e)) return RatDist::dirac(e);

    std::string key;
    if (cache) {
        key = canonical_key(e);
        auto it = cache->memo.find(key);
        if (it != cache->memo.end()) return it->second;
    }

    RatDist out = std::visit(
        [&](const auto& n) -> RatDist {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, OmegaN>) {
                return RatDist();
            } else if constexpr (std::is_same_v<N, AppN>) {
                RatDist fun = eval_rec(n.fun, mode, cache);
                RatDist arg = eval_rec(n.arg, mode, cache);
                RatDist out;
                for (const auto& [fk, fe] : fun.entries()) {
                    (void)fk;
                    const auto* lam = as<LamN>(fe.first);
                    if (!lam) stuck(e, "application of a non-function value");
                    for (const auto& [ak, ae] : arg.entries()) {
                        (void)ak;
                        Rational w = fe.second * ae.second;
                        if (w == 0) continue;
                        RatDist body =
                            eval_rec(subst(lam->body, lam->binder, ae.first), mode, cache);
                        out.add_scaled(body, w);
                    }
                }
                return out;
            } else if constexpr (std::is_same_v<N, IfN>) {
                RatDist cond = eval_rec(n.cond, mode, cache);
                RatDist out;
                Rational pt = cond.prob_of(mk_bool(true));
                Rational pf = cond.prob_of(mk_bool(false));
                if (pt + pf != cond.mass()) stuck(e, "if condition evaluated to a non-boolean");
                if (pt != 0) out.add_scaled(eval_rec(n.thn, mode, cache), pt);
                if (pf != 0) out.add_scaled(eval_rec(n.els, mode, cache), pf);
                return out;
            } else if constexpr (std::is_same_v<N, LetPairN>) {
                RatDist scrut = eval_rec(n.scrut, mode, cache);
                RatDist out;
                for (const auto& [sk, se] : scrut.entries()) {
                    (void)sk;
                    const auto* pair = as<PairN>(se.first);
                    if (!pair) stuck(e, "let scrutinee evaluated to a non-pair");
                    TermPtr body = subst(n.body, {{n.left, pair->first}, {n.right, pair->second}});
                    out.add_scaled(eval_rec(body, mode, cache), se.second);
                }
                return out;
            } else if constexpr (std::is_same_v<N, ChoiceN>) {
                RatDist out;
                out.add_scaled(eval_rec(n.left, mode, cache), kHalf);
                out.add_scaled(eval_rec(n.right, mode, cache), kHalf);
                return out;
            } else {
                stuck(e, "construct outside the deterministic/probabilistic fragment");
            }
        },
        e->node());

    if (out.mass() > 1) throw InternalError("distribution mass exceeds 1 for " + pretty(e));
    if (cache) cache->memo.emplace(std::move(key), out);
    return out;
}

} // namespace

RatDist eval_big(const TermPtr& e, Mode mode, EvalCache* cache) {
    return eval_rec(e, mode, cache);
}

std::optional<RatDist> step(const TermPtr& e, Mode mode) {
    if (is_value(e)) return std::nullopt;
    return std::visit(
        [&](const auto& n) -> std::optional<RatDist> {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, OmegaN>) {
                return RatDist();
            } else if constexpr (std::is_same_v<N, AppN>) {
                if (!is_value(n.fun)) {
                    RatDist inner = *step(n.fun, mode);
                    RatDist out;
                    for (const auto& [k, se] : inner.entries()) {
                        (void)k;
                        out.add(mk_app(se.first, n.arg), se.second);
                    }
                    return out;
                }
                if (!is_value(n.arg)) {
                    RatDist inner = *step(n.arg, mode);
                    RatDist out;
                    for (const auto& [k, se] : inner.entries()) {
                        (void)k;
                        out.add(mk_app(n.fun, se.first), se.second);
                    }
                    return out;
                }
                const auto* lam = as<LamN>(n.fun);
                if (!lam) stuck(e, "application of a non-function value");
                return RatDist::dirac(subst(lam->body, lam->binder, n.arg));
            } else if constexpr (std::is_same_v<N, IfN>) {
                if (!is_value(n.cond)) {
                    RatDist inner = *step(n.cond, mode);
                    RatDist out;
                    for (const auto& [k, se] : inner.entries()) {
                        (void)k;
                        out.add(mk_if(se.first, n.thn, n.els), se.second);
                    }
                    return out;
                }
                const auto* b = as<BoolN>(n.cond);
                if (!b) stuck(e, "if condition is a non-boolean value");
                return RatDist::dirac(b->value ? n.thn : n.els);
            } else if constexpr (std::is_same_v<N, LetPairN>) {
                if (!is_value(n.scrut)) {
                    RatDist inner = *step(n.scrut, mode);
                    RatDist out;
                    for (const auto& [k, se] : inner.entries()) {
                        (void)k;
                        out.add(mk_letpair(n.left, n.right, se.first, n.body), se.second);
                    }
                    return out;
                }
                const auto* pair = as<PairN>(n.scrut);
                if (!pair) stuck(e, "let scrutinee is a non-pair value");
                return RatDist::dirac(
                    subst(n.body, {{n.left, pair->first}, {n.right, pair->second}}));
            } else if constexpr (std::is_same_v<N, ChoiceN>) {
                RatDist out;
                out.add(n.left, kHalf);
                out.add(n.right, kHalf);
                return out;
            } else {
                stuck(e, "construct outside the deterministic/probabilistic fragment");
            }
        },
        e->node());
}

RatDist normalize_by_steps(const TermPtr& e, Mode mode, int max_rounds) {
    RatDist frontier = RatDist::dirac(e);
    RatDist values;
    for (int round = 0; round < max_rounds; ++round) {
        RatDist next;
        bool progressed = false;
        for (const auto& [k, se] : frontier.entries()) {
            (void)k;
            if (is_value(se.first)) {
                values.add(se.first, se.second);
                continue;
            }
            progressed = true;
            next.add_scaled(*step(se.first, mode), se.second);
        }
        if (!progressed) return values;
        frontier = std::move(next);
    }
    throw InternalError("normalize_by_steps did not terminate within the round limit");
}

Rational observe(const TermPtr& e, Mode mode, EvalCache* cache) {
    return eval_big(e, mode, cache).mass();
}

} // namespace linlam
