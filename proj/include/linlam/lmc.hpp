#pragma once

// Finite labelled Markov chains with subprobability transition rows, shared
// by the explicit-chain tooling (exact rational probabilities) and the
// applicative chains extracted from programs (floating amplitudes-squared).
//
// The three algorithms below are all parameterised by a probability type P
// (Rational or double) through ProbPolicy:
//   * partition_refine      coarsest probabilistic bisimulation partition
//   * check_bisimulation    verify a candidate equivalence is a bisimulation
//   * check_simulation      verify a candidate preorder is a simulation
//
// A candidate equivalence R is a bisimulation iff for all s R t, every label
// l and every R-class E: P(s, l, E) = P(t, l, E).  A candidate preorder R is
// a simulation iff for all s R t, every label l and every subset X of the
// successor support of s: P(s, l, X) <= P(t, l, R(X)).  Ranging over subsets
// of the support is complete because enlarging X outside the support leaves
// the left side unchanged and can only grow the right side.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "linlam/errors.hpp"
#include "linlam/rational.hpp"

namespace linlam {

inline constexpr double kLmcDefaultTol = 1e-9;

// Comparison / conversion policy per probability representation.  Rational
// entries compare exactly (the tolerance argument is ignored); doubles
// compare within an absolute tolerance.
template <class P> struct ProbPolicy;

template <> struct ProbPolicy<Rational> {
    static bool eq(const Rational& a, const Rational& b, double) { return a == b; }
    static bool leq(const Rational& a, const Rational& b, double) { return a <= b; }
    static bool mass_ok(const Rational& m, double) { return m <= 1; }
    static double to_double(const Rational& p) { return rational_to_double(p); }
    static std::string to_string(const Rational& p) { return rational_to_string(p); }
    static Rational from_json(const nlohmann::json& j);
    static nlohmann::json to_json(const Rational& p);
};

template <> struct ProbPolicy<double> {
    static bool eq(double a, double b, double tol) { return a - b <= tol && b - a <= tol; }
    static bool leq(double a, double b, double tol) { return a <= b + tol; }
    static bool mass_ok(double m, double tol) { return m <= 1.0 + tol; }
    static double to_double(double p) { return p; }
    static std::string to_string(double p);
    static double from_json(const nlohmann::json& j);
    static nlohmann::json to_json(double p) { return p; }
};

template <class P>
struct FiniteLmc {
    std::vector<std::string> states;
    std::vector<std::string> labels;
    // transitions[s][l] = successor subdistribution of state s under label l.
    // An absent entry and an empty map both denote the zero subdistribution.
    std::vector<std::map<int, std::map<int, P>>> transitions;

    std::map<std::string, int> state_index;
    std::map<std::string, int> label_index;

    int add_state(const std::string& name) {
        auto it = state_index.find(name);
        if (it != state_index.end()) return it->second;
        int id = static_cast<int>(states.size());
        states.push_back(name);
        transitions.emplace_back();
        state_index[name] = id;
        return id;
    }

    int add_label(const std::string& name) {
        auto it = label_index.find(name);
        if (it != label_index.end()) return it->second;
        int id = static_cast<int>(labels.size());
        labels.push_back(name);
        label_index[name] = id;
        return id;
    }

    void add_edge(int from, int label, int to, const P& p) {
        transitions[from][label][to] += p;
    }

    const std::map<int, P>* succ(int s, int l) const {
        auto it = transitions[s].find(l);
        return it == transitions[s].end() ? nullptr : &it->second;
    }

    // Total probability from s under l into the set marked by `inset`.
    P prob_to_set(int s, int l, const std::vector<char>& inset) const {
        P total{};
        if (const auto* row = succ(s, l))
            for (const auto& [to, p] : *row)
                if (inset[to]) total += p;
        return total;
    }

    void validate(double tol = kLmcDefaultTol) const {
        for (size_t s = 0; s < transitions.size(); ++s) {
            for (const auto& [l, row] : transitions[s]) {
                P mass{};
                for (const auto& [to, p] : row) {
                    if (!ProbPolicy<P>::leq(P{}, p, 0))
                        throw InputError("negative probability on state " + states[s] +
                                         " label " + labels[l]);
                    mass += p;
                }
                if (!ProbPolicy<P>::mass_ok(mass, tol))
                    throw InputError("transition row mass exceeds 1 on state " + states[s] +
                                     " label " + labels[l]);
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Candidate relations

// Union-find closure of `pairs` into equivalence class ids, one per state;
// class ids are renumbered in order of their smallest member.
std::vector<int> equivalence_classes(int n, const std::vector<std::pair<int, int>>& pairs);

// Reflexive-transitive closure of `pairs` as per-state reachable sets.
std::vector<std::vector<char>> preorder_closure(int n,
                                                const std::vector<std::pair<int, int>>& pairs);

template <class P>
struct BisimFailure {
    int left = -1, right = -1; // the related states that disagree
    int label = -1;
    std::vector<int> cls;      // the equivalence class they disagree on
    P left_prob{}, right_prob{};
};

template <class P>
struct SimFailure {
    int left = -1, right = -1;
    int label = -1;
    std::vector<int> subset;   // successor subset X with P(left,l,X) > P(right,l,R(X))
    P left_prob{}, right_prob{};
};

// ---------------------------------------------------------------------------
// Checking a candidate equivalence

namespace detail {

// Per-state signature against a fixed partition: label -> block -> mass.
template <class P>
std::map<int, std::map<int, P>> block_signature(const FiniteLmc<P>& m, int s,
                                                const std::vector<int>& block) {
    std::map<int, std::map<int, P>> sig;
    for (const auto& [l, row] : m.transitions[s])
        for (const auto& [to, p] : row) sig[l][block[to]] += p;
    return sig;
}

template <class P>
bool signatures_equal(const std::map<int, std::map<int, P>>& a,
                      const std::map<int, std::map<int, P>>& b, double tol,
                      int* bad_label = nullptr, int* bad_block = nullptr, P* pa = nullptr,
                      P* pb = nullptr) {
    std::set<int> ls;
    for (const auto& [l, _] : a) ls.insert(l);
    for (const auto& [l, _] : b) ls.insert(l);
    for (int l : ls) {
        auto ia = a.find(l);
        auto ib = b.find(l);
        std::set<int> blocks;
        if (ia != a.end())
            for (const auto& [e, _] : ia->second) blocks.insert(e);
        if (ib != b.end())
            for (const auto& [e, _] : ib->second) blocks.insert(e);
        for (int e : blocks) {
            P va{}, vb{};
            if (ia != a.end()) {
                auto it = ia->second.find(e);
                if (it != ia->second.end()) va = it->second;
            }
            if (ib != b.end()) {
                auto it = ib->second.find(e);
                if (it != ib->second.end()) vb = it->second;
            }
            if (!ProbPolicy<P>::eq(va, vb, tol)) {
                if (bad_label) *bad_label = l;
                if (bad_block) *bad_block = e;
                if (pa) *pa = va;
                if (pb) *pb = vb;
                return false;
            }
        }
    }
    return true;
}

} // namespace detail

template <class P>
std::optional<BisimFailure<P>> check_bisimulation(const FiniteLmc<P>& m,
                                                  const std::vector<std::pair<int, int>>& pairs,
                                                  double tol = kLmcDefaultTol) {
    int n = static_cast<int>(m.states.size());
    std::vector<int> block = equivalence_classes(n, pairs);
    std::vector<std::map<int, std::map<int, P>>> sig(n);
    for (int s = 0; s < n; ++s) sig[s] = detail::block_signature(m, s, block);

    std::map<int, std::vector<int>> members;
    for (int s = 0; s < n; ++s) members[block[s]].push_back(s);

    for (const auto& [_, cls] : members) {
        for (size_t i = 0; i < cls.size(); ++i) {
            for (size_t j = i + 1; j < cls.size(); ++j) {
                BisimFailure<P> f;
                int bad_block = -1;
                if (!detail::signatures_equal(sig[cls[i]], sig[cls[j]], tol, &f.label,
                                              &bad_block, &f.left_prob, &f.right_prob)) {
                    f.left = cls[i];
                    f.right = cls[j];
                    f.cls = members.at(bad_block);
                    return f;
                }
            }
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Checking a candidate preorder

template <class P>
std::optional<SimFailure<P>> check_simulation(const FiniteLmc<P>& m,
                                              const std::vector<std::pair<int, int>>& pairs,
                                              double tol = kLmcDefaultTol) {
    int n = static_cast<int>(m.states.size());
    std::vector<std::vector<char>> reach = preorder_closure(n, pairs);

    for (int s = 0; s < n; ++s) {
        for (int t = 0; t < n; ++t) {
            if (!reach[s][t] || s == t) continue;
            for (const auto& [l, row] : m.transitions[s]) {
                std::vector<int> supp;
                for (const auto& [to, p] : row) {
                    (void)p;
                    supp.push_back(to);
                }
                if (supp.size() > 20)
                    throw InternalError("simulation subset check: successor support of " +
                                        m.states[s] + " is too large");
                const auto* trow = m.succ(t, l);
                for (std::uint32_t mask = 1; mask < (1u << supp.size()); ++mask) {
                    P lhs{};
                    std::vector<char> rx(n, 0);
                    for (size_t k = 0; k < supp.size(); ++k) {
                        if (!(mask & (1u << k))) continue;
                        lhs += row.at(supp[k]);
                        for (int u = 0; u < n; ++u)
                            if (reach[supp[k]][u]) rx[u] = 1;
                    }
                    P rhs{};
                    if (trow)
                        for (const auto& [to, p] : *trow)
                            if (rx[to]) rhs += p;
                    if (!ProbPolicy<P>::leq(lhs, rhs, tol)) {
                        SimFailure<P> f;
                        f.left = s;
                        f.right = t;
                        f.label = l;
                        for (size_t k = 0; k < supp.size(); ++k)
                            if (mask & (1u << k)) f.subset.push_back(supp[k]);
                        f.left_prob = lhs;
                        f.right_prob = rhs;
                        return f;
                    }
                }
            }
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Partition refinement

// One refinement round: split every block of `block` by signature equality
// against `block` itself.  Tolerance comparison is not transitive, so states
// whose signatures are pairwise within tolerance are chained together via
// connected components, which keeps the split deterministic.
template <class P>
std::vector<int> refine_once(const FiniteLmc<P>& m, const std::vector<int>& block, double tol) {
    int n = static_cast<int>(m.states.size());
    std::vector<std::map<int, std::map<int, P>>> sig(n);
    for (int s = 0; s < n; ++s) sig[s] = detail::block_signature(m, s, block);

    std::map<int, std::vector<int>> members;
    for (int s = 0; s < n; ++s) members[block[s]].push_back(s);

    std::vector<int> next(n, -1);
    int next_id = 0;
    for (const auto& [_, cls] : members) {
        // Connected components of the "signatures equal" graph inside cls.
        std::vector<int> comp(cls.size(), -1);
        for (size_t i = 0; i < cls.size(); ++i) {
            if (comp[i] != -1) continue;
            comp[i] = next_id;
            std::vector<size_t> frontier{i};
            while (!frontier.empty()) {
                size_t a = frontier.back();
                frontier.pop_back();
                for (size_t b = 0; b < cls.size(); ++b) {
                    if (comp[b] != -1) continue;
                    if (detail::signatures_equal(sig[cls[a]], sig[cls[b]], tol)) {
                        comp[b] = next_id;
                        frontier.push_back(b);
                    }
                }
            }
            ++next_id;
        }
        for (size_t i = 0; i < cls.size(); ++i) next[cls[i]] = comp[i];
    }

    // Renumber blocks by smallest member for a canonical result.
    std::map<int, int> renum;
    std::vector<int> out(n, -1);
    for (int s = 0; s < n; ++s) {
        auto [it, fresh] = renum.try_emplace(next[s], static_cast<int>(renum.size()));
        (void)fresh;
        out[s] = it->second;
    }
    return out;
}

// Refinement sequence starting from `initial` (all states in one block when
// absent): result[0] is the starting partition, each following entry one
// round further, ending at the fixpoint or after max_levels rounds
// (max_levels < 0 means run to the fixpoint, which takes at most n rounds).
template <class P>
std::vector<std::vector<int>> partition_refine_levels(const FiniteLmc<P>& m, int max_levels = -1,
                                                      double tol = kLmcDefaultTol,
                                                      const std::vector<int>* initial = nullptr) {
    int n = static_cast<int>(m.states.size());
    std::vector<std::vector<int>> levels;
    levels.push_back(initial ? *initial : std::vector<int>(n, 0));
    while (max_levels < 0 || static_cast<int>(levels.size()) <= max_levels) {
        std::vector<int> next = refine_once(m, levels.back(), tol);
        if (next == levels.back()) break;
        levels.push_back(std::move(next));
    }
    return levels;
}

// Coarsest bisimulation partition (fixpoint of refinement).
template <class P>
std::vector<int> partition_refine(const FiniteLmc<P>& m, double tol = kLmcDefaultTol,
                                  const std::vector<int>* initial = nullptr) {
    return partition_refine_levels(m, -1, tol, initial).back();
}

// ---------------------------------------------------------------------------
// JSON import/export
//
// Chain files:
//   { "states": ["s0", "s1"],
//     "labels": ["a"],                      // optional
//     "transitions": [
//       { "from": "s0", "label": "a", "to": { "s0": "1/3", "s1": 0.5 } } ] }
// Probabilities may be integers, "num/den" strings, or decimals; decimals
// convert to exact dyadic rationals when loading a rational chain.
//
// Relation files over a chain:  { "pairs": [["s0", "s1"], ...] }

template <class P>
FiniteLmc<P> lmc_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("states") || !j["states"].is_array())
        throw InputError("chain file: expected an object with a \"states\" array");
    FiniteLmc<P> m;
    for (const auto& s : j["states"]) {
        if (!s.is_string()) throw InputError("chain file: state names must be strings");
        if (m.state_index.count(s.get<std::string>()))
            throw InputError("chain file: duplicate state " + s.get<std::string>());
        m.add_state(s.get<std::string>());
    }
    bool fixed_labels = j.contains("labels");
    if (fixed_labels) {
        if (!j["labels"].is_array()) throw InputError("chain file: \"labels\" must be an array");
        for (const auto& l : j["labels"]) {
            if (!l.is_string()) throw InputError("chain file: label names must be strings");
            m.add_label(l.get<std::string>());
        }
    }
    if (j.contains("transitions")) {
        if (!j["transitions"].is_array())
            throw InputError("chain file: \"transitions\" must be an array");
        std::set<std::pair<int, int>> seen;
        for (const auto& row : j["transitions"]) {
            if (!row.is_object() || !row.contains("from") || !row.contains("label") ||
                !row.contains("to") || !row["to"].is_object())
                throw InputError(
                    "chain file: each transition needs \"from\", \"label\" and a \"to\" object");
            auto sit = m.state_index.find(row["from"].get<std::string>());
            if (sit == m.state_index.end())
                throw InputError("chain file: unknown state " + row["from"].get<std::string>());
            std::string lname = row["label"].get<std::string>();
            if (fixed_labels && !m.label_index.count(lname))
                throw InputError("chain file: label " + lname + " is not in \"labels\"");
            int l = m.add_label(lname);
            if (!seen.insert({sit->second, l}).second)
                throw InputError("chain file: duplicate transition row for state " +
                                 row["from"].get<std::string>() + " label " + lname);
            m.transitions[sit->second][l]; // materialise even if all entries are zero
            for (const auto& [to, pj] : row["to"].items()) {
                auto tit = m.state_index.find(to);
                if (tit == m.state_index.end())
                    throw InputError("chain file: unknown state " + to);
                m.add_edge(sit->second, l, tit->second, ProbPolicy<P>::from_json(pj));
            }
        }
    }
    m.validate();
    return m;
}

template <class P>
nlohmann::json lmc_to_json(const FiniteLmc<P>& m) {
    nlohmann::json j;
    j["states"] = m.states;
    j["labels"] = m.labels;
    j["transitions"] = nlohmann::json::array();
    for (size_t s = 0; s < m.transitions.size(); ++s) {
        for (const auto& [l, row] : m.transitions[s]) {
            nlohmann::json to = nlohmann::json::object();
            for (const auto& [t, p] : row) to[m.states[t]] = ProbPolicy<P>::to_json(p);
            j["transitions"].push_back(
                {{"from", m.states[s]}, {"label", m.labels[l]}, {"to", to}});
        }
    }
    return j;
}

template <class P>
std::vector<std::pair<int, int>> state_pairs_from_json(const nlohmann::json& j,
                                                       const FiniteLmc<P>& m) {
    if (!j.is_object() || !j.contains("pairs") || !j["pairs"].is_array())
        throw InputError("relation file: expected an object with a \"pairs\" array");
    std::vector<std::pair<int, int>> out;
    for (const auto& pr : j["pairs"]) {
        if (!pr.is_array() || pr.size() != 2 || !pr[0].is_string() || !pr[1].is_string())
            throw InputError("relation file: each pair must be [\"state\", \"state\"]");
        auto a = m.state_index.find(pr[0].template get<std::string>());
        auto b = m.state_index.find(pr[1].template get<std::string>());
        if (a == m.state_index.end() || b == m.state_index.end())
            throw InputError("relation file: unknown state in pair");
        out.push_back({a->second, b->second});
    }
    return out;
}

using RatLmc = FiniteLmc<Rational>;
using DblLmc = FiniteLmc<double>;

} // namespace linlam
