// Distribution-valued evaluation: pinned distributions computed by hand,
// agreement between the big-step evaluator and small-step normalization,
// subject reduction, and determinism of the deterministic calculus.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "linlam/eval.hpp"
#include "linlam/parser.hpp"
#include "linlam/pretty.hpp"
#include "linlam/typecheck.hpp"
#include "support.hpp"

using namespace linlam;

namespace {

RatDist ev(const std::string& src, Mode mode = Mode::Prob) {
    return eval_big(parse(src, mode), mode);
}

bool dist_equal(const RatDist& a, const RatDist& b) {
    if (a.size() != b.size()) return false;
    auto ia = a.entries().begin();
    for (auto ib = b.entries().begin(); ib != b.entries().end(); ++ia, ++ib) {
        if (ia->first != ib->first) return false;
        if (ia->second.second != ib->second.second) return false;
    }
    return true;
}

Rational prob(const RatDist& d, const std::string& value_src, Mode mode = Mode::Prob) {
    return d.prob_of(parse(value_src, mode));
}

}  // namespace

TEST_CASE("fair coin: exactly one half each") {
    RatDist d = ev("tt (+) ff");
    CHECK(d.size() == 2);
    CHECK(prob(d, "tt") == Rational(1, 2));
    CHECK(prob(d, "ff") == Rational(1, 2));
    CHECK(d.mass() == Rational(1));
}

TEST_CASE("omega evaluates to the empty subdistribution") {
    CHECK(ev("omega").empty());
    CHECK(ev("omega", Mode::Det).empty());
    CHECK(ev("(\\x:bool. x) omega").empty());
}

TEST_CASE("hand-computed distributions are reproduced exactly") {
    // choice rule applied twice: ((tt ⊕ ff) ⊕ Ω) = ¼ tt + ¼ ff
    RatDist d1 = ev("(tt (+) ff) (+) omega");
    CHECK(prob(d1, "tt") == Rational(1, 4));
    CHECK(prob(d1, "ff") == Rational(1, 4));
    CHECK(d1.mass() == Rational(1, 2));
    // probabilistic function position: ½ identity + ½ constant-ff
    RatDist d2 = ev("((\\x:bool. x) (+) (\\x:bool. ff)) tt");
    CHECK(prob(d2, "tt") == Rational(1, 2));
    CHECK(prob(d2, "ff") == Rational(1, 2));
    // probabilistic condition with a diverging branch keeps half the mass
    RatDist d3 = ev("if tt (+) ff then tt else omega");
    CHECK(d3.size() == 1);
    CHECK(prob(d3, "tt") == Rational(1, 2));
    CHECK(d3.mass() == Rational(1, 2));
    // application rule: weighted sum over both supports
    //   E = {id ½, not ½}, F = {tt ½, ff ½}  =>  tt ½, ff ½
    RatDist d4 = ev("((\\x:bool. x) (+) (\\y:bool. if y then ff else tt)) (tt (+) ff)");
    CHECK(prob(d4, "tt") == Rational(1, 2));
    CHECK(prob(d4, "ff") == Rational(1, 2));
    // duplication combinator pushed through a coin
    RatDist d5 = ev("(\\x:bool. if x then <tt, tt> else <ff, ff>) (tt (+) ff)");
    CHECK(prob(d5, "<tt, tt>") == Rational(1, 2));
    CHECK(prob(d5, "<ff, ff>") == Rational(1, 2));
    // observation = total convergence mass
    CHECK(observe(parse("tt (+) omega", Mode::Prob), Mode::Prob) == Rational(1, 2));
}

TEST_CASE("deterministic evaluation is Dirac or empty") {
    RatDist d = ev("(\\x:bool. x) tt", Mode::Det);
    CHECK(d.size() == 1);
    CHECK(prob(d, "tt", Mode::Det) == Rational(1));
    RatDist lp = ev("let <a, b> = <tt, ff> in if a then b else if b then ff else ff", Mode::Det);
    CHECK(prob(lp, "ff", Mode::Det) == Rational(1));
    CHECK(ev("if tt then omega else tt", Mode::Det).empty());
}

TEST_CASE("single small steps match the pinned rules") {
    auto s = step(parse("tt (+) ff", Mode::Prob), Mode::Prob);
    REQUIRE(s.has_value());
    CHECK(prob(*s, "tt") == Rational(1, 2));
    CHECK(prob(*s, "ff") == Rational(1, 2));
    // values do not step
    CHECK_FALSE(step(parse("tt", Mode::Prob), Mode::Prob).has_value());
    CHECK_FALSE(step(parse("\\x:bool. x", Mode::Prob), Mode::Prob).has_value());
    // omega steps to the empty distribution
    auto so = step(parse("omega", Mode::Prob), Mode::Prob);
    REQUIRE(so.has_value());
    CHECK(so->empty());
    // beta is deterministic
    auto sb = step(parse("(\\x:bool. x) tt", Mode::Det), Mode::Det);
    REQUIRE(sb.has_value());
    CHECK(prob(*sb, "tt", Mode::Det) == Rational(1));
}

TEST_CASE("big-step equals small-step normalization on pinned terms") {
    for (const char* src : {"tt (+) ff", "(tt (+) ff) (+) omega",
                            "((\\x:bool. x) (+) (\\x:bool. ff)) tt",
                            "if tt (+) ff then tt else omega",
                            "(\\x:bool. if x then <tt, tt> else <ff, ff>) (tt (+) ff)"}) {
        TermPtr e = parse(src, Mode::Prob);
        CHECK_MESSAGE(dist_equal(eval_big(e, Mode::Prob), normalize_by_steps(e, Mode::Prob)),
                      "mismatch for ", src);
    }
}

TEST_CASE("random terms: big-step equals small-step, mass bounded, cache-stable") {
    testsupport::RandomTermGen gen(Mode::Prob, 20260814);
    EvalCache cache;
    int nontrivial = 0;
    for (int i = 0; i < 80; ++i) {
        TermPtr e = gen.closed_bool(3 + i % 9);
        CHECK_NOTHROW(typecheck({}, e, Mode::Prob));
        RatDist big = eval_big(e, Mode::Prob);
        CHECK(big.mass() <= Rational(1));
        CHECK(dist_equal(big, normalize_by_steps(e, Mode::Prob)));
        CHECK(dist_equal(big, eval_big(e, Mode::Prob, &cache)));
        if (!big.empty() && big.mass() < Rational(1)) ++nontrivial;
        for (const auto& [k, en] : big.entries()) {
            (void)k;
            CHECK(is_value(en.first));
            CHECK(en.second > Rational(0));
        }
    }
    // the generator must exercise genuine subdistributions
    CHECK(nontrivial > 3);
}

TEST_CASE("subject reduction along every small step") {
    testsupport::RandomTermGen gen(Mode::Prob, 7);
    for (int i = 0; i < 40; ++i) {
        TermPtr e0 = gen.closed_bool(3 + i % 8);
        TypePtr t0 = typecheck({}, e0, Mode::Prob);
        std::vector<TermPtr> frontier{e0};
        for (int round = 0; round < 12 && !frontier.empty(); ++round) {
            std::vector<TermPtr> next;
            for (const auto& e : frontier) {
                auto s = step(e, Mode::Prob);
                if (!s) continue;
                for (const auto& [k, en] : s->entries()) {
                    (void)k;
                    TypePtr ti = typecheck({}, en.first, Mode::Prob);
                    CHECK_MESSAGE(type_compatible(t0, ti), "type drifted: ", pretty(e0),
                                  " stepped to ", pretty(en.first));
                    next.push_back(en.first);
                }
            }
            frontier = std::move(next);
        }
    }
}

TEST_CASE("deterministic calculus: every step is a Dirac step") {
    testsupport::RandomTermGen gen(Mode::Det, 99);
    for (int i = 0; i < 60; ++i) {
        TermPtr e = gen.closed_bool(3 + i % 8);
        CHECK_NOTHROW(typecheck({}, e, Mode::Det));
        TermPtr cur = e;
        for (int round = 0; round < 50; ++round) {
            auto s = step(cur, Mode::Det);
            if (!s) break;  // reached a value
            CHECK(s->size() <= 1);
            if (s->empty()) break;  // diverged
            const auto& en = s->entries().begin()->second;
            CHECK(en.second == Rational(1));
            cur = en.first;
        }
        RatDist big = eval_big(e, Mode::Det);
        CHECK(big.size() <= 1);
        if (!big.empty()) CHECK(big.mass() == Rational(1));
    }
}
