// Surface syntax: tokens, precedence, mode gating, error positions, and the
// pretty-printer round-trip.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "linlam/errors.hpp"
#include "linlam/parser.hpp"
#include "linlam/pretty.hpp"
#include "linlam/term.hpp"
#include "linlam/type.hpp"

using namespace linlam;

TEST_CASE("booleans, omega, variables under binders") {
    TermPtr t = parse("tt", Mode::Det);
    REQUIRE(as<BoolN>(t));
    CHECK(as<BoolN>(t)->value);
    CHECK(as<BoolN>(parse("ff", Mode::Det)));
    CHECK(as<OmegaN>(parse("omega", Mode::Det)));
    TermPtr id = parse("\\x:bool. x", Mode::Det);
    const auto* lam = as<LamN>(id);
    REQUIRE(lam);
    CHECK(lam->binder == "x");
    CHECK(type_equal(lam->ann, Type::boolean()));
    CHECK(as<VarN>(lam->body));
}

TEST_CASE("application is left-associative and binds tighter than if") {
    TermPtr t = parse("\\f:bool -o bool -o bool. \\a:bool. \\b:bool. f a b", Mode::Det);
    const auto* f = as<LamN>(t);
    REQUIRE(f);
    const auto* a = as<LamN>(f->body);
    REQUIRE(a);
    const auto* b = as<LamN>(a->body);
    REQUIRE(b);
    const auto* outer = as<AppN>(b->body);  // (f a) b
    REQUIRE(outer);
    const auto* inner = as<AppN>(outer->fun);
    REQUIRE(inner);
    CHECK(as<VarN>(inner->fun));
    CHECK(as<VarN>(inner->arg));
    CHECK(as<VarN>(outer->arg));
}

TEST_CASE("if-then-else and let-pair") {
    TermPtr t = parse("if tt then ff else tt", Mode::Det);
    REQUIRE(as<IfN>(t));
    TermPtr lp = parse("let <a, b> = <tt, ff> in if a then b else if b then ff else ff",
                       Mode::Det);
    const auto* l = as<LetPairN>(lp);
    REQUIRE(l);
    CHECK(l->left == "a");
    CHECK(l->right == "b");
    CHECK(as<PairN>(l->scrut));
}

TEST_CASE("choice parses in prob mode only, lowest precedence") {
    TermPtr t = parse("tt (+) ff", Mode::Prob);
    REQUIRE(as<ChoiceN>(t));
    // an else-branch extends as far right as possible, through (+)
    TermPtr u = parse("if tt then tt else ff (+) ff", Mode::Prob);
    const auto* ifn = as<IfN>(u);
    REQUIRE(ifn);
    CHECK(as<ChoiceN>(ifn->els));
    // parenthesized, the choice is the head connective
    CHECK(as<ChoiceN>(parse("(if tt then tt else ff) (+) ff", Mode::Prob)));
    CHECK_THROWS_AS(parse("tt (+) ff", Mode::Det), ModeError);
    CHECK_THROWS_AS(parse("tt (+) ff", Mode::Quantum), ModeError);
}

TEST_CASE("quantum constructs parse in quantum mode only") {
    TermPtr m = parse("\\x:qbit. meas(x)", Mode::Quantum);
    const auto* lam = as<LamN>(m);
    REQUIRE(lam);
    CHECK(as<MeasN>(lam->body));
    CHECK(as<NewN>(parse("new(ff)", Mode::Quantum)));
    // gate applied to a quantum variable stays a gate node …
    TermPtr g = parse("\\q:qbit. H<q>", Mode::Quantum);
    const auto* gl = as<LamN>(g);
    REQUIRE(gl);
    const auto* gn = as<GateN>(gl->body);
    REQUIRE(gn);
    CHECK(gn->gate == "H");
    // … but a gate applied to a preparation term desugars to an application
    // so that evaluation prepares the qubit first
    CHECK(as<AppN>(parse("H<new(tt)>", Mode::Quantum)));
    CHECK_THROWS_AS(parse("new(ff)", Mode::Det), ModeError);
    CHECK_THROWS_AS(parse("meas(new(ff))", Mode::Prob), ModeError);
    CHECK(as<VarN>(parse("qbit", Mode::Det)));  // a type keyword is still a term identifier
}

TEST_CASE("multi-qubit gates take a tuple argument") {
    TermPtr g = parse("CNOT<H<new(ff)>, new(ff)>", Mode::Quantum);
    // the tuple of preparation terms desugars to a term producing a pair
    CHECK(count_holes(g) == 0);
    CHECK(free_vars(g).empty());
}

TEST_CASE("unknown gate names are parse errors unless registered") {
    CHECK_THROWS_AS(parse("FOO<new(ff)>", Mode::Quantum), ParseError);
    std::set<std::string> names = builtin_gate_names();
    names.insert("FOO");
    TermPtr g = parse("\\q:qbit. FOO<q>", Mode::Quantum, names);
    const auto* lam = as<LamN>(g);
    REQUIRE(lam);
    REQUIRE(as<GateN>(lam->body));
    CHECK(as<GateN>(lam->body)->gate == "FOO");
}

TEST_CASE("parse errors carry positions") {
    try {
        parse("if tt then tt", Mode::Det);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line >= 1);
        CHECK(e.col >= 1);
    }
    CHECK_THROWS_AS(parse("(tt", Mode::Det), ParseError);
    CHECK_THROWS_AS(parse("", Mode::Det), ParseError);
    CHECK_THROWS_AS(parse("\\x. x", Mode::Det), ParseError);  // annotation required
    CHECK_THROWS_AS(parse("tt tt tt)", Mode::Det), ParseError);
}

TEST_CASE("comments and whitespace are skipped") {
    TermPtr t = parse("-- leading note\n  tt -- trailing\n", Mode::Det);
    CHECK(as<BoolN>(t));
}

TEST_CASE("holes parse and are counted") {
    TermPtr h = parse("if [.] then tt else omega", Mode::Prob);
    CHECK(count_holes(h) == 1);
    CHECK(count_holes(parse("[.] [.]", Mode::Det)) == 2);
    CHECK(count_holes(parse("tt", Mode::Det)) == 0);
}

TEST_CASE("type syntax: arrow right-associative, star binds tighter") {
    TypePtr t = parse_type("bool -o bool -o bool", Mode::Det);
    REQUIRE(t->kind() == Type::Kind::Arrow);
    CHECK(t->left()->kind() == Type::Kind::Bool);
    CHECK(t->right()->kind() == Type::Kind::Arrow);
    TypePtr u = parse_type("bool * bool -o bool", Mode::Det);
    REQUIRE(u->kind() == Type::Kind::Arrow);
    CHECK(u->left()->kind() == Type::Kind::Tensor);
    TypePtr q = parse_type("qbit * qbit", Mode::Quantum);
    CHECK(qbit_tensor_width(q) == 2);
    CHECK_THROWS_AS(parse_type("qbit", Mode::Det), ModeError);
    CHECK_THROWS_AS(parse_type("bool -o", Mode::Det), ParseError);
}

TEST_CASE("pretty output reparses to an alpha-equivalent term") {
    const char* samples[] = {
        "\\x:bool. if x then <tt, tt> else <ff, ff>",
        "\\f:(bool -o bool) -o bool. f (\\x:bool. x)",
        "let <a, b> = <tt, \\x:bool. x> in b a",
        "if tt then \\x:bool. x else \\y:bool. y",
    };
    for (const char* s : samples) {
        TermPtr t = parse(s, Mode::Det);
        TermPtr back = parse(pretty(t), Mode::Det);
        CHECK_MESSAGE(alpha_eq(t, back), "round-trip failed for: ", s);
    }
    TermPtr p = parse("tt (+) (ff (+) omega)", Mode::Prob);
    CHECK(alpha_eq(p, parse(pretty(p), Mode::Prob)));
    TermPtr q = parse("\\x:qbit. if meas(x) then ff else tt", Mode::Quantum);
    CHECK(alpha_eq(q, parse(pretty(q), Mode::Quantum)));
}

TEST_CASE("alpha equivalence ignores binder names only") {
    CHECK(alpha_eq(parse("\\x:bool. x", Mode::Det), parse("\\y:bool. y", Mode::Det)));
    CHECK_FALSE(alpha_eq(parse("\\x:bool. x", Mode::Det), parse("\\y:bool. tt", Mode::Det)));
    CHECK_FALSE(alpha_eq(parse("\\x:bool. x", Mode::Det),
                         parse("\\x:bool -o bool. x", Mode::Det)));
}

TEST_CASE("substitution avoids capture") {
    // (\y. x y)[x := \z. y-free term] keeps the free y distinct from the binder
    TermPtr body = parse("\\y:bool. x y", Mode::Det);
    TermPtr repl = mk_lam("z", Type::boolean(), mk_var("w"));  // free w
    TermPtr out = subst(body, "x", repl);
    auto fv = free_vars(out);
    CHECK(fv.count("w") == 1);
    CHECK(fv.count("x") == 0);
}
