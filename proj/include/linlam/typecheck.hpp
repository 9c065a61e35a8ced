#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "linlam/term.hpp"

namespace linlam {

// Linear typing context: classical variables with their types, plus quantum
// variables (always of type qbit). Every entry must be consumed exactly once
// (Omega absorbs arbitrary leftovers).
struct TypingContext {
    std::map<std::string, TypePtr> vars;
    std::set<std::string> qvars;
};

// Node of a typing derivation, for diagnostic JSON output.
struct Derivation {
    std::string rule;
    std::string term;
    std::string type;
    std::vector<std::shared_ptr<Derivation>> children;
};

std::map<std::string, int> builtin_gate_arities();

// Synthesizes the type of e under ctx; throws TypeError / ModeError on
// failure. Omega synthesizes the placeholder "any" when unconstrained.
// If deriv is non-null it receives the derivation tree.
TypePtr typecheck(const TypingContext& ctx, const TermPtr& e, Mode mode,
                  const std::map<std::string, int>& gate_arities = builtin_gate_arities(),
                  std::shared_ptr<Derivation>* deriv = nullptr);

// typecheck + compatibility check against an expected type; returns the
// join (so Omega checks at any requested type). Throws on mismatch.
TypePtr typecheck_expect(const TypingContext& ctx, const TermPtr& e, const TypePtr& expected,
                         Mode mode,
                         const std::map<std::string, int>& gate_arities = builtin_gate_arities());

// Types a one-hole context: the hole consumes exactly hole_ctx and has type
// hole_type. Returns the type of the whole context term under outer. Throws
// NoHole / MultipleHoles / the usual type errors.
TypePtr typecheck_context_hole(const TermPtr& context, const TypingContext& outer,
                               const TypingContext& hole_ctx, const TypePtr& hole_type,
                               Mode mode,
                               const std::map<std::string, int>& gate_arities = builtin_gate_arities());

} // namespace linlam
