#pragma once

// Enumeration of typed linear contexts (terms with a single hole) and closed
// values, and the search for a context separating two closed terms by their
// convergence probability.
//
// Enumeration is type-directed over a finite menu of types: the subterm
// closure of the hole type and the result type, plus bool (and qbit in
// quantum mode).  Applications only use function types from the menu, which
// keeps the space finite; everything produced is re-checked with the real
// typechecker, so the generator can never disagree with it.  Holes stand for
// closed fillers and therefore carry an empty linear environment; pair
// values cannot contain holes (pairs are values and values contain no
// redexes for the hole to create).
//
// Order is deterministic: by term size, then by a fixed structural order.
// Results are deduplicated up to alpha-equivalence.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "linlam/quantum.hpp"
#include "linlam/term.hpp"
#include "linlam/type.hpp"

namespace linlam {

// Replace the unique hole of `context` by `filler` (textually; binders of the
// context are allowed to capture, which is what makes it a context and not a
// substitution).  Throws TypeError if there is no hole or more than one.
TermPtr fill(const TermPtr& context, const TermPtr& filler);

struct EnumOptions {
    int size_bound = 7;       // maximum term size (AST nodes)
    Mode mode = Mode::Prob;
    std::vector<std::string> gate_names; // quantum: single-qubit gates usable in terms
};

// All closed contexts C : result_type whose hole accepts a closed term of
// type hole_type, up to the size bound.
std::vector<TermPtr> enumerate_contexts(const TypePtr& hole_type, const TypePtr& result_type,
                                        const EnumOptions& opts);

// All closed values of the given type, up to the size bound.
std::vector<TermPtr> enumerate_values(const TypePtr& type, const EnumOptions& opts);

struct SeparationWitness {
    TermPtr context;
    double left_prob = 0, right_prob = 0;   // convergence probabilities, C[e] and C[f]
    std::string left_exact, right_exact;    // exact rationals when the mode is classical
    std::size_t index = 0;                  // position in enumeration order
};

struct SeparationSearchResult {
    std::optional<SeparationWitness> witness; // empty: no separating context found
    std::size_t contexts_checked = 0;
};

// Scan enumerate_contexts(hole_type, result_type) in order and return the
// first context on which the convergence probabilities of C[left] and
// C[right] differ (exactly in classical modes, beyond `tol` in quantum
// mode).  `jobs` > 1 splits the scan into deterministic chunks; the witness
// is still the least-index one.
SeparationSearchResult search_separating_context(const TermPtr& left, const TermPtr& right,
                                                 const TypePtr& hole_type,
                                                 const TypePtr& result_type,
                                                 const EnumOptions& opts, int jobs = 1,
                                                 double tol = kQuantumTol,
                                                 const GateTable& gates = builtin_gates());

} // namespace linlam
