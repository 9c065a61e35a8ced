#pragma once

#include <map>
#include <optional>
#include <string>

#include "linlam/distribution.hpp"

namespace linlam {

// Memo for big-step results, keyed by canonical form. Optional; exploration
// and context search share one across many closed terms.
struct EvalCache {
    std::map<std::string, RatDist> memo;
};

// Big-step evaluation of a closed well-typed term of the deterministic or
// probabilistic calculus: the (sub)distribution over values it converges to.
// Quantum closures have their own evaluator (quantum.hpp).
RatDist eval_big(const TermPtr& e, Mode mode, EvalCache* cache = nullptr);

// One small step under the leftmost call-by-value strategy. nullopt when e
// is already a value; Omega steps to the empty distribution; choice steps to
// the uniform two-point distribution.
std::optional<RatDist> step(const TermPtr& e, Mode mode);

// Iterates `step` on the whole distribution until only values remain and
// returns that value distribution; agrees with eval_big exactly.
RatDist normalize_by_steps(const TermPtr& e, Mode mode, int max_rounds = 100000);

// Convergence probability: total mass of eval_big.
Rational observe(const TermPtr& e, Mode mode, EvalCache* cache = nullptr);

} // namespace linlam
