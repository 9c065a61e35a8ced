#pragma once

// Applicative labelled Markov chains extracted from closed programs.
//
// States are closed terms (with their quantum register in quantum mode) in
// one of two polarities: a term-state waits to be evaluated, a value-state
// offers interactions to the environment.  Labels:
//
//   eval          term-state -> distribution of value-states (mass = halting
//                 probability)
//   tt / ff       boolean value-state -> sink
//   type:T        term-state -> sink   (dirac; makes the type observable)
//   vtype:T       value-state -> sink
//   arg:w         function value-state -> term-state applying it to the
//                 closed basis argument w
//   destruct:d    pair or qubit value-state -> term-state applying the
//                 closed basis consumer d (of type T -o bool) to it
//
// Two states are applicatively bisimilar (relative to the argument basis)
// iff no sequence of these labels reveals different probabilities; the
// machinery in lmc.hpp runs on the explored chain.
//
// Arguments and consumers are closed *terms* in every mode: quantum basis
// states are prepared inside the term with new(..) and gates (e.g. the
// "plus" state is H<new(ff)>), so no register plumbing is needed when the
// environment hands a function an argument.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "linlam/context.hpp"
#include "linlam/lmc.hpp"
#include "linlam/quantum.hpp"
#include "linlam/term.hpp"
#include "linlam/type.hpp"

namespace linlam {

struct BasisOptions {
    int value_size_bound = 5; // enumeration bound for function-typed arguments
    // Boolean argument constants served; shrink to probe with a smaller basis
    // (a difference found with fewer arguments stays found with more).
    std::vector<std::string> bool_atoms = {"tt", "ff"};
};

// Finite menu of closed observer terms, built on demand per type and cached.
//   args_for(T): closed values handed to functions with domain T.
//     bool: tt, ff.  qbit: new(ff), new(tt), H<new(ff)>, H<new(tt)>.
//     qbit*qbit additionally gets an entangled pair CNOT<H<new(ff)>, new(ff)>.
//     tensors: pairs of component arguments.  arrows: enumerated closed
//     values up to the size bound.
//   destructors_for(T): closed consumers of type T -o bool.
//     bool: identity and negation.  qbit: measure, measure after H.
//     tensors: and / xor / both marginals of component consumers.
//     arrows: feed a basis argument, consume the result.
class TestBasis {
public:
    struct Entry {
        TermPtr term;
        TypePtr type;
        std::string key; // label suffix; source syntax
    };

    explicit TestBasis(Mode mode, BasisOptions opts = {},
                       const GateTable& gates = builtin_gates());

    const std::vector<Entry>& args_for(const TypePtr& domain);
    const std::vector<Entry>& destructors_for(const TypePtr& type);

    Mode mode() const { return mode_; }
    // Stable digest and count of everything this basis has served, so a
    // "no difference found" verdict can state which tests backed it.
    std::uint64_t fingerprint() const;
    std::size_t entries_served() const;

private:
    Entry make(const std::string& src, const TypePtr& expect);
    Entry make_term(TermPtr t, const TypePtr& expect, const std::string& key);

    Mode mode_;
    BasisOptions opts_;
    GateTable gates_;
    std::set<std::string> gate_names_;
    std::map<std::string, int> arities_;
    std::map<std::string, std::vector<Entry>> args_, dtors_;
};

struct StateInfo {
    bool is_value = false;
    bool sink = false;
    TermPtr term;        // canonical closure term in quantum mode; null for sink
    QuantumRegister reg; // scalar register outside quantum mode
    TypePtr type;        // null for sink
};

std::string state_display(const StateInfo& s);

template <class P>
struct Explored {
    FiniteLmc<P> lmc;
    std::vector<StateInfo> info; // parallel to lmc.states
    std::vector<int> roots;      // term-state ids of the requested roots
    int done_state = -1;
    bool truncated = false;
    // Refinement rounds that the exploration fully supports; INT_MAX when the
    // reachable space was exhausted.
    int explored_depth = std::numeric_limits<int>::max();
};

struct ExploreOptions {
    int max_depth = 64;
    int max_states = 20000;
    double tol = kQuantumTol;
    GateTable gates = builtin_gates();
};

// Builds the chain reachable from the given closed roots.  Classical modes
// use exact probabilities; the quantum mode squares amplitudes into doubles.
Explored<Rational> explore_classical(const std::vector<std::pair<TermPtr, TypePtr>>& roots,
                                     Mode mode, TestBasis& basis,
                                     const ExploreOptions& opts = {});
Explored<double> explore_quantum(const std::vector<std::pair<TermPtr, TypePtr>>& roots,
                                 TestBasis& basis, const ExploreOptions& opts = {});

// ---------------------------------------------------------------------------
// Candidate relations over terms
//
// File form: { "mode": "det|prob|quantum",
//              "pairs": [ {"left": "...", "right": "...", "type": "..."} ] }
// Each pair relates the term-states of the two sides; when both sides are
// syntactic values their value-states are related as well.  The "type" field
// is optional; both sides must agree on it either way.

struct RelPair {
    TermPtr left, right;
    TypePtr type;
};

struct RelationSpec {
    Mode mode = Mode::Prob;
    std::vector<RelPair> pairs;
};

RelationSpec relation_from_json(const nlohmann::json& j, const GateTable& gates = builtin_gates());
nlohmann::json relation_to_json(const RelationSpec& spec);

struct CheckReport {
    bool holds = true;
    std::string detail; // human-readable counterexample / caveats
};

// Verifies that the candidate relation (its equivalence closure for
// bisimulation, its reflexive-transitive closure for simulation) is an
// applicative (bi)simulation on the chain reachable from the listed terms.
CheckReport verify_relation(const RelationSpec& spec, bool simulation, TestBasis& basis,
                            const ExploreOptions& opts = {});

// Explores from the two roots and, when the refinement fixpoint keeps them
// together, returns the induced candidate relation restricted to pairs that
// can be written down as closed terms (register-free states).  nullopt when
// the roots are told apart.
std::optional<RelationSpec> propose_relation(const TermPtr& left, const TermPtr& right,
                                             const TypePtr& type, Mode mode, TestBasis& basis,
                                             const ExploreOptions& opts = {});

} // namespace linlam
