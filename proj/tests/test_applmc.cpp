// Applicative labelled Markov chains: exploration structure, the argument
// transition contract, candidate-relation checking, and relation proposal.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "linlam/applmc.hpp"
#include "linlam/eval.hpp"
#include "linlam/parser.hpp"
#include "linlam/pretty.hpp"

using namespace linlam;

namespace {

int find_state(const Explored<Rational>& ex, const std::string& display) {
    for (size_t s = 0; s < ex.info.size(); ++s)
        if (state_display(ex.info[s]) == display) return static_cast<int>(s);
    return -1;
}

}  // namespace

TEST_CASE("handing tt to the identity lands on the substituted body") {
    TestBasis basis(Mode::Det, BasisOptions{5, {"tt"}});
    TermPtr id = parse("\\x:bool. x", Mode::Det);
    TypePtr ty = parse_type("bool -o bool", Mode::Det);
    Explored<Rational> ex = explore_classical({{id, ty}}, Mode::Det, basis);

    // the root term-state evaluates to the lambda's value-state with mass 1
    int root = ex.roots[0];
    CHECK_FALSE(ex.info[root].is_value);
    int eval = ex.lmc.label_index.at("eval");
    const auto* row = ex.lmc.succ(root, eval);
    REQUIRE(row);
    REQUIRE(row->size() == 1);
    int vstate = row->begin()->first;
    CHECK(row->begin()->second == Rational(1));
    CHECK(ex.info[vstate].is_value);

    // the value-state offers arg:tt into Dirac((tt, bool)) — the body with
    // the argument substituted, as a term-state of the codomain type
    REQUIRE(ex.lmc.label_index.count("arg:tt"));
    const auto* arow = ex.lmc.succ(vstate, ex.lmc.label_index.at("arg:tt"));
    REQUIRE(arow);
    REQUIRE(arow->size() == 1);
    CHECK(arow->begin()->second == Rational(1));
    const StateInfo& target = ex.info[arow->begin()->first];
    CHECK_FALSE(target.is_value);
    CHECK(alpha_eq(target.term, mk_bool(true)));
    CHECK(type_equal(target.type, Type::boolean()));
    // the restricted basis has no arg:ff label anywhere
    CHECK_FALSE(ex.lmc.label_index.count("arg:ff"));
}

TEST_CASE("boolean value states emit their constant as a label") {
    TestBasis basis(Mode::Det, BasisOptions{});
    Explored<Rational> ex =
        explore_classical({{parse("tt", Mode::Det), Type::boolean()}}, Mode::Det, basis);
    int v = find_state(ex, "value tt");
    REQUIRE(v >= 0);
    REQUIRE(ex.lmc.label_index.count("tt"));
    const auto* row = ex.lmc.succ(v, ex.lmc.label_index.at("tt"));
    REQUIRE(row);
    Rational mass(0);
    for (const auto& [to, p] : *row) {
        (void)to;
        mass += p;
    }
    CHECK(mass == Rational(1));
    CHECK_FALSE(ex.lmc.succ(v, ex.lmc.label_index.at("eval")));
}

TEST_CASE("probabilistic evaluation spreads the eval transition") {
    TestBasis basis(Mode::Prob, BasisOptions{});
    Explored<Rational> ex = explore_classical({{parse("tt (+) omega", Mode::Prob), Type::boolean()}},
                                              Mode::Prob, basis);
    const auto* row = ex.lmc.succ(ex.roots[0], ex.lmc.label_index.at("eval"));
    REQUIRE(row);
    REQUIRE(row->size() == 1);  // only the convergent half appears
    CHECK(row->begin()->second == Rational(1, 2));
}

TEST_CASE("tensor value states offer destructors") {
    TestBasis basis(Mode::Det, BasisOptions{});
    Explored<Rational> ex = explore_classical(
        {{parse("<tt, ff>", Mode::Det), parse_type("bool * bool", Mode::Det)}}, Mode::Det, basis);
    bool found = false;
    for (const auto& [name, l] : ex.lmc.label_index) {
        (void)l;
        if (name.rfind("destruct:", 0) == 0) found = true;
    }
    CHECK(found);
}

TEST_CASE("exploration is deterministic and respects its bounds") {
    TermPtr e = parse("\\x:bool. x (+) (ff (+) omega)", Mode::Prob);
    TypePtr ty = parse_type("bool -o bool", Mode::Prob);
    TestBasis b1(Mode::Prob, BasisOptions{});
    TestBasis b2(Mode::Prob, BasisOptions{});
    Explored<Rational> a = explore_classical({{e, ty}}, Mode::Prob, b1);
    Explored<Rational> b = explore_classical({{e, ty}}, Mode::Prob, b2);
    CHECK(a.lmc.states == b.lmc.states);
    CHECK(a.lmc.labels == b.lmc.labels);
    CHECK_FALSE(a.truncated);

    ExploreOptions tiny;
    tiny.max_depth = 1;
    TestBasis b3(Mode::Prob, BasisOptions{});
    Explored<Rational> t = explore_classical({{e, ty}}, Mode::Prob, b3, tiny);
    CHECK(t.truncated);
    CHECK(t.explored_depth <= 1);
    CHECK(t.lmc.states.size() <= a.lmc.states.size());
}

TEST_CASE("the test basis serves pinned argument menus") {
    TestBasis basis(Mode::Quantum, BasisOptions{});
    const auto& bools = basis.args_for(Type::boolean());
    REQUIRE(bools.size() == 2);
    CHECK(bools[0].key == "tt");
    CHECK(bools[1].key == "ff");
    const auto& qs = basis.args_for(Type::qbit());
    REQUIRE(qs.size() == 4);
    CHECK(qs[0].key == "new(ff)");
    const auto& pairs = basis.args_for(Type::tensor(Type::qbit(), Type::qbit()));
    CHECK(pairs.size() == 4 * 4 + 1);  // products plus one entangled pair
    const auto& fns =
        basis.args_for(Type::arrow(Type::boolean(), Type::boolean()));
    CHECK(fns.size() > 0);
    for (const auto& f : fns) CHECK(is_value(f.term));
    // fingerprints reflect everything served so far and are order-stable
    TestBasis again(Mode::Quantum, BasisOptions{});
    again.args_for(Type::boolean());
    TestBasis same(Mode::Quantum, BasisOptions{});
    same.args_for(Type::boolean());
    CHECK(again.fingerprint() == same.fingerprint());
    CHECK(again.fingerprint() != basis.fingerprint());
}

TEST_CASE("candidate relations verify or fail with a witness") {
    // A candidate must be transition-closed: the root pair alone is not a
    // bisimulation, it needs the pairs its argument transitions reach.
    RelationSpec spec;
    spec.mode = Mode::Prob;
    TypePtr b2b = parse_type("bool -o bool", Mode::Prob);
    spec.pairs.push_back(
        {parse("\\x:bool. x", Mode::Prob), parse("\\x:bool. if x then tt else ff", Mode::Prob),
         b2b});
    TestBasis basis0(Mode::Prob, BasisOptions{});
    CHECK_FALSE(verify_relation(spec, false, basis0).holds);
    spec.pairs.push_back(
        {parse("tt", Mode::Prob), parse("if tt then tt else ff", Mode::Prob), Type::boolean()});
    spec.pairs.push_back(
        {parse("ff", Mode::Prob), parse("if ff then tt else ff", Mode::Prob), Type::boolean()});
    TestBasis basis(Mode::Prob, BasisOptions{});
    CheckReport ok = verify_relation(spec, false, basis);
    CHECK(ok.holds);

    RelationSpec bad;
    bad.mode = Mode::Prob;
    bad.pairs.push_back({parse("tt", Mode::Prob), parse("ff", Mode::Prob), Type::boolean()});
    TestBasis basis2(Mode::Prob, BasisOptions{});
    CheckReport no = verify_relation(bad, false, basis2);
    CHECK_FALSE(no.holds);
    CHECK(no.detail.find("label") != std::string::npos);
}

TEST_CASE("asymmetric pairs pass simulation one way only") {
    // tt ⊕ Ω is simulated by tt, but not the other way around
    RelationSpec spec;
    spec.mode = Mode::Prob;
    spec.pairs.push_back(
        {parse("tt (+) omega", Mode::Prob), parse("tt", Mode::Prob), Type::boolean()});
    TestBasis b1(Mode::Prob, BasisOptions{});
    CHECK(verify_relation(spec, true, b1).holds);
    RelationSpec rev;
    rev.mode = Mode::Prob;
    rev.pairs.push_back(
        {parse("tt", Mode::Prob), parse("tt (+) omega", Mode::Prob), Type::boolean()});
    TestBasis b2(Mode::Prob, BasisOptions{});
    CHECK_FALSE(verify_relation(rev, true, b2).holds);
    // … and the bisimulation check refutes the pair in both orders
    TestBasis b3(Mode::Prob, BasisOptions{});
    CHECK_FALSE(verify_relation(spec, false, b3).holds);
}

TEST_CASE("relation JSON round-trips") {
    RelationSpec spec;
    spec.mode = Mode::Quantum;
    spec.pairs.push_back({parse("\\x:qbit. if meas(x) then ff else tt", Mode::Quantum),
                          parse("\\x:qbit. meas(X<x>)", Mode::Quantum),
                          parse_type("qbit -o bool", Mode::Quantum)});
    nlohmann::json j = relation_to_json(spec);
    RelationSpec back = relation_from_json(j);
    CHECK(back.mode == Mode::Quantum);
    REQUIRE(back.pairs.size() == 1);
    CHECK(alpha_eq(back.pairs[0].left, spec.pairs[0].left));
    CHECK(alpha_eq(back.pairs[0].right, spec.pairs[0].right));
    CHECK(type_equal(back.pairs[0].type, spec.pairs[0].type));
    CHECK_THROWS_AS(relation_from_json(nlohmann::json::array()), InputError);
}

TEST_CASE("relation proposal: positive and negative cases") {
    TypePtr b2b = parse_type("bool -o bool", Mode::Prob);
    // observably equal lambdas: a relation is found and verifies
    TestBasis b1(Mode::Prob, BasisOptions{});
    auto rel = propose_relation(parse("\\x:bool. x", Mode::Prob),
                                parse("\\x:bool. if x then tt else ff", Mode::Prob), b2b,
                                Mode::Prob, b1);
    REQUIRE(rel.has_value());
    TestBasis b2(Mode::Prob, BasisOptions{});
    CHECK(verify_relation(*rel, false, b2).holds);
    REQUIRE(!rel->pairs.empty());
    CHECK(type_equal(rel->pairs[0].type, b2b));

    // the probabilistic counterexample pair admits no bisimulation
    TestBasis b3(Mode::Prob, BasisOptions{});
    auto none = propose_relation(
        parse("\\x:bool. if x then (tt (+) ff) else (tt (+) ff)", Mode::Prob),
        parse("(\\x:bool. if x then tt else tt) (+) (\\x:bool. if x then ff else ff)",
              Mode::Prob),
        b2b, Mode::Prob, b3);
    CHECK_FALSE(none.has_value());

    // the quantum X-flip pair: proposal exists and verifies at 1e-9
    TypePtr q2b = parse_type("qbit -o bool", Mode::Quantum);
    TestBasis b4(Mode::Quantum, BasisOptions{});
    auto qrel = propose_relation(parse("\\x:qbit. if meas(x) then ff else tt", Mode::Quantum),
                                 parse("\\x:qbit. meas(X<x>)", Mode::Quantum), q2b, Mode::Quantum,
                                 b4);
    REQUIRE(qrel.has_value());
    TestBasis b5(Mode::Quantum, BasisOptions{});
    CHECK(verify_relation(*qrel, false, b5).holds);
}

TEST_CASE("quantum exploration merges registers through application") {
    TestBasis basis(Mode::Quantum, BasisOptions{});
    TermPtr e = parse("\\x:qbit. meas(x)", Mode::Quantum);
    TypePtr ty = parse_type("qbit -o bool", Mode::Quantum);
    Explored<double> ex = explore_quantum({{e, ty}}, basis);
    CHECK_FALSE(ex.truncated);
    // one argument entry per qbit basis element
    int args = 0;
    for (const auto& [name, l] : ex.lmc.label_index) {
        (void)l;
        if (name.rfind("arg:", 0) == 0) ++args;
    }
    CHECK(args == 4);
    ex.lmc.validate();
}
