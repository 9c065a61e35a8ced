#pragma once

#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "linlam/type.hpp"

namespace linlam {

class Term;
using TermPtr = std::shared_ptr<const Term>;

struct VarN { std::string name; };
struct BoolN { bool value; };
struct OmegaN {};
// ann is null only for internally generated lambdas (pair sugar); those are
// always in applied position, where the checker synthesizes the domain from
// the argument.
struct LamN { std::string binder; TypePtr ann; TermPtr body; };
struct AppN { TermPtr fun, arg; };
struct IfN { TermPtr cond, thn, els; };
struct LetPairN { std::string left, right; TermPtr scrut, body; };
// Invariant: both components are syntactic values. Arbitrary-component
// pairs exist only as the desugared application form.
struct PairN { TermPtr first, second; };
struct ChoiceN { TermPtr left, right; };
// Quantum register variable; never written in source, created by new().
struct QVarN { std::string name; };
struct GateN { std::string gate; TermPtr arg; };
struct MeasN { TermPtr arg; };
struct NewN { TermPtr arg; };
// Context hole; a context is a Term with exactly one of these.
struct HoleN {};

class Term {
public:
    using Node = std::variant<VarN, BoolN, OmegaN, LamN, AppN, IfN, LetPairN,
                              PairN, ChoiceN, QVarN, GateN, MeasN, NewN, HoleN>;

    explicit Term(Node n) : node_(std::move(n)) {}
    const Node& node() const { return node_; }
    template <class N> const N* get() const { return std::get_if<N>(&node_); }

private:
    Node node_;
};

// Free-function node access; usable without the `template` keyword at
// dependent call sites inside generic visitors: as<LamN>(t).
template <class N> const N* as(const TermPtr& t) {
    return t ? std::get_if<N>(&t->node()) : nullptr;
}

TermPtr mk_var(std::string name);
TermPtr mk_bool(bool value);
TermPtr mk_omega();
TermPtr mk_lam(std::string binder, TypePtr ann, TermPtr body);
TermPtr mk_app(TermPtr fun, TermPtr arg);
TermPtr mk_if(TermPtr cond, TermPtr thn, TermPtr els);
TermPtr mk_letpair(std::string left, std::string right, TermPtr scrut, TermPtr body);
TermPtr mk_pair(TermPtr first, TermPtr second); // asserts both values
TermPtr mk_choice(TermPtr left, TermPtr right);
TermPtr mk_qvar(std::string name);
TermPtr mk_gate(std::string gate, TermPtr arg);
TermPtr mk_meas(TermPtr arg);
TermPtr mk_new(TermPtr arg);
TermPtr mk_hole();

// Values: x | tt | ff | \x.e | <v,w> | quantum variables.
bool is_value(const TermPtr& t);

// Number of AST nodes (binders not counted separately).
int term_size(const TermPtr& t);

int count_holes(const TermPtr& t);

// Free classical variables.
std::set<std::string> free_vars(const TermPtr& t);
// Free quantum variables in first-occurrence (pre-order) order.
std::vector<std::string> free_qvars(const TermPtr& t);

// Capture-avoiding simultaneous substitution of classical variables.
// Binders inside the inserted replacements are freshened, so the result
// keeps binder names unique if the input had them unique.
TermPtr subst(const TermPtr& t, const std::map<std::string, TermPtr>& repl);
TermPtr subst(const TermPtr& t, const std::string& var, const TermPtr& value);

// Renames quantum variables according to the map (names not in the map are
// kept).
TermPtr rename_qvars(const TermPtr& t, const std::map<std::string, std::string>& ren);

// Alpha equivalence. Binder annotations are compared loosely: they must be
// equal when both are present; a missing annotation (sugar lambdas) matches
// anything.
bool alpha_eq(const TermPtr& a, const TermPtr& b);

// Canonical printing with binders renamed %0, %1, ... in traversal order and
// annotations erased; used as a distribution/state key among terms of equal
// type. alpha_eq(a,b) implies canonical_key(a) == canonical_key(b).
std::string canonical_key(const TermPtr& t);

// "base" if unused, else base_2, base_3, ... distinct from every name in
// `used`; the chosen name is added to `used`.
std::string fresh_name(const std::string& base, std::set<std::string>& used);

// Renames duplicate binders so every binder in the term is distinct from all
// other binders and from the free variables (Barendregt convention).
TermPtr uniquify_binders(const TermPtr& t);

// Expansion of <e,f> for non-value components: (\x.\y.<x,y>) e f with fresh
// x, y (the lambdas are unannotated). With force_expansion false and both
// components values, returns the primitive pair value instead.
TermPtr desugar_pair(const TermPtr& e, const TermPtr& f, bool force_expansion = false);

// weak{x}{e} = if x then e else e: consumes boolean x and behaves like e.
TermPtr desugar_weak(const std::string& var, const TermPtr& e);

} // namespace linlam
