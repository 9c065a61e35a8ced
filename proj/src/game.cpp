#include "linlam/game.hpp"

#include <algorithm>
#include <limits>

#include "linlam/errors.hpp"

namespace linlam {

namespace {

template <class P>
GameResult run_game(const Explored<P>& ex, const TestBasis& basis, int max_rounds, double tol) {
    GameResult gr;
    gr.basis_fingerprint = basis.fingerprint();
    gr.basis_entries = basis.entries_served();
    if (ex.roots.size() < 2) throw InternalError("distinguishing game needs two roots");

    // Budgets are in raw refinement levels; the public round count is one
    // less (the base partition by directly observable labels is free).
    int budget = ex.explored_depth == std::numeric_limits<int>::max() ? -1 : ex.explored_depth;
    if (max_rounds >= 0) {
        int raw = max_rounds + 1;
        if (budget < 0 || raw < budget) budget = raw;
    }

    auto levels = partition_refine_levels(ex.lmc, budget, tol);
    int L = -1;
    for (size_t k = 0; k < levels.size(); ++k) {
        if (levels[k][ex.roots[0]] != levels[k][ex.roots[1]]) {
            L = static_cast<int>(k);
            break;
        }
    }

    if (L < 0) {
        // A fixpoint before the budget extends validity to the whole budget.
        int raw = budget >= 0 ? budget : static_cast<int>(levels.size()) - 1;
        gr.rounds = std::max(0, raw - 1);
        bool fixpoint = refine_once(ex.lmc, levels.back(), tol) == levels.back();
        gr.exhaustive = fixpoint && !ex.truncated;
        return gr;
    }

    gr.distinguished = true;
    // A split at raw level 1 is a direct observation and still takes the one
    // move that reveals it.
    gr.rounds = std::max(1, L - 1);

    // Walk from the roots to a direct observable difference. Invariant: the
    // current pair is split at level k and together at level k-1.
    int s = ex.roots[0], t = ex.roots[1];
    for (int k = L; k >= 1; --k) {
        const auto& prev = levels[k - 1];
        auto sig_s = detail::block_signature(ex.lmc, s, prev);
        auto sig_t = detail::block_signature(ex.lmc, t, prev);
        int bad_l = -1, bad_b = -1;
        P ps{}, pt{};
        if (detail::signatures_equal(sig_s, sig_t, tol, &bad_l, &bad_b, &ps, &pt))
            throw InternalError("refinement split without a signature witness");
        GameMove mv;
        mv.left_state = state_display(ex.info[s]);
        mv.right_state = state_display(ex.info[t]);
        mv.label = ex.lmc.labels[bad_l];
        // Against the trivial partition the "class" is the whole space; leave
        // it empty, the mismatch is the probability of emitting the label.
        bool trivial = true;
        for (int b : prev)
            if (b != prev[0]) trivial = false;
        if (!trivial)
            for (size_t u = 0; u < prev.size(); ++u)
                if (prev[u] == bad_b) mv.cls.push_back(state_display(ex.info[u]));
        mv.left_prob = ProbPolicy<P>::to_double(ps);
        mv.right_prob = ProbPolicy<P>::to_double(pt);
        if constexpr (std::is_same_v<P, Rational>) {
            mv.left_exact = rational_to_string(ps);
            mv.right_exact = rational_to_string(pt);
        }
        gr.trace.push_back(std::move(mv));

        if (k == 1) break;
        // Next pair: successors that split exactly at level k-1.
        const auto& prev2 = levels[k - 2];
        const auto* rs = ex.lmc.succ(s, bad_l);
        const auto* rt = ex.lmc.succ(t, bad_l);
        int ns = -1, nt = -1;
        if (rs && rt) {
            for (const auto& [a, pa] : *rs) {
                (void)pa;
                for (const auto& [b, pb] : *rt) {
                    (void)pb;
                    if (prev[a] != prev[b] && prev2[a] == prev2[b]) {
                        ns = a;
                        nt = b;
                        break;
                    }
                }
                if (ns >= 0) break;
            }
        }
        if (ns < 0) break; // pure mass difference over already-separated classes
        s = ns;
        t = nt;
    }
    return gr;
}

} // namespace

GameResult game_distinguish(const Explored<Rational>& ex, const TestBasis& basis, int max_rounds,
                            double tol) {
    return run_game(ex, basis, max_rounds, tol);
}

GameResult game_distinguish(const Explored<double>& ex, const TestBasis& basis, int max_rounds,
                            double tol) {
    return run_game(ex, basis, max_rounds, tol);
}

} // namespace linlam
