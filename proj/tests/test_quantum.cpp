// Quantum registers and closures, cross-checked against the dense-matrix
// reference simulator in support.hpp and against hand-pinned states.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "linlam/parser.hpp"
#include "linlam/quantum.hpp"
#include "linlam/typecheck.hpp"
#include "support.hpp"

using namespace linlam;
using testsupport::DenseSim;

namespace {

constexpr double kTol = 1e-9;

ClosureDist evq(const std::string& src, const GateTable& gates = builtin_gates()) {
    std::set<std::string> names;
    for (const auto& [n, g] : gates) {
        (void)g;
        names.insert(n);
    }
    std::map<std::string, int> arities;
    for (const auto& [n, g] : gates) arities[n] = g.arity;
    TermPtr e = parse(src, Mode::Quantum, names);
    typecheck({}, e, Mode::Quantum, arities);
    return eval_closure_big({QuantumRegister{}, e}, gates);
}

double prob_of_bool(const ClosureDist& d, bool b) {
    return d.prob_of({QuantumRegister{}, mk_bool(b)});
}

bool dists_close(const ClosureDist& a, const ClosureDist& b, double tol = kTol) {
    if (std::abs(a.mass() - b.mass()) > tol) return false;
    for (const auto* en : a.entries())
        if (std::abs(b.prob_of(en->closure) - en->prob) > tol) return false;
    return true;
}

}  // namespace

TEST_CASE("qubit preparation pins the computational basis") {
    QuantumRegister reg;
    auto [r1, q0] = new_qubit(reg, true);
    CHECK(q0 == "q0");
    CHECK(r1.vars.size() == 1);
    CHECK(measure_prob(r1, q0, true) == doctest::Approx(1.0).epsilon(kTol));
    CHECK(measure_prob(r1, q0, false) == doctest::Approx(0.0).epsilon(kTol));
    CHECK(r1.normalized());
}

TEST_CASE("random gate sequences agree with the dense-matrix oracle") {
    std::mt19937 rng(414213);
    const std::vector<std::string> g1 = {"X", "Z", "H", "S", "T"};
    for (int trial = 0; trial < 100; ++trial) {
        QuantumRegister reg;
        QvarSource src;
        DenseSim oracle;
        std::vector<std::string> vars;
        auto add = [&](bool b) {
            auto [nr, name] = new_qubit(reg, b, &src);
            reg = nr;
            oracle.add_qubit(name, b);
            vars.push_back(name);
        };
        add(rng() % 2 == 0);
        const int ops = 3 + static_cast<int>(rng() % 8);
        for (int i = 0; i < ops; ++i) {
            const int kind = rng() % 4;
            if (kind == 0 && vars.size() < 4) {
                add(rng() % 2 == 0);
            } else if (kind == 1 && vars.size() >= 2) {
                std::string a = vars[rng() % vars.size()];
                std::string b = a;
                while (b == a) b = vars[rng() % vars.size()];
                reg = apply_unitary(reg, {a, b}, builtin_gates().at("CNOT").matrix);
                oracle.apply("CNOT", {a, b});
            } else {
                const std::string& g = g1[rng() % g1.size()];
                std::string a = vars[rng() % vars.size()];
                reg = apply_unitary(reg, {a}, builtin_gates().at(g).matrix);
                oracle.apply(g, {a});
            }
            // invariants after every operation
            REQUIRE(reg.normalized(kTol));
            REQUIRE(oracle.norm2() == doctest::Approx(1.0).epsilon(1e-9));
            for (const auto& v : vars) {
                const double pt = measure_prob(reg, v, true);
                const double pf = measure_prob(reg, v, false);
                REQUIRE(pt + pf == doctest::Approx(1.0).epsilon(1e-9));
                REQUIRE(pt == doctest::Approx(oracle.measure_prob(v, true)).epsilon(1e-9));
            }
        }
        // joint outcome distribution via chained projections matches the
        // oracle's direct amplitude sums
        auto joint = oracle.joint(vars);
        for (const auto& [key, p_oracle] : joint) {
            QuantumRegister cur = reg;
            double p = 1.0;
            bool dead = false;
            for (size_t i = 0; i < vars.size(); ++i) {
                const bool b = key[i] == '1';
                const double pb = measure_prob(cur, vars[i], b);
                p *= pb;
                if (pb <= kTol) {
                    dead = true;
                    break;
                }
                cur = project(cur, vars[i], b);
                REQUIRE(cur.normalized(1e-7));
            }
            if (dead)
                REQUIRE(p_oracle == doctest::Approx(0.0).epsilon(1e-7));
            else
                REQUIRE(p == doctest::Approx(p_oracle).epsilon(1e-7));
        }
        // applying H twice anywhere is the identity on the state
        if (!vars.empty()) {
            const std::string& v = vars[rng() % vars.size()];
            QuantumRegister hh = apply_unitary(reg, {v}, builtin_gates().at("H").matrix);
            hh = apply_unitary(hh, {v}, builtin_gates().at("H").matrix);
            TermPtr tag = mk_qvar(vars[0]);
            for (size_t i = 1; i < vars.size(); ++i) tag = mk_pair(tag, mk_qvar(vars[i]));
            REQUIRE(closures_equal({reg, tag}, {hh, tag}, 1e-7));
        }
    }
}

TEST_CASE("Bell pair: halves, correlation, collapse") {
    QuantumRegister reg;
    QvarSource src;
    auto [r1, a] = new_qubit(reg, false, &src);
    auto [r2, b] = new_qubit(r1, false, &src);
    QuantumRegister bell = apply_unitary(r2, {a}, builtin_gates().at("H").matrix);
    bell = apply_unitary(bell, {a, b}, builtin_gates().at("CNOT").matrix);
    CHECK(measure_prob(bell, a, true) == doctest::Approx(0.5).epsilon(kTol));
    CHECK(measure_prob(bell, b, true) == doctest::Approx(0.5).epsilon(kTol));
    // collapse: after seeing a = tt, b is certainly tt
    QuantumRegister up = project(bell, a, true);
    CHECK(up.normalized());
    CHECK(measure_prob(up, b, true) == doctest::Approx(1.0).epsilon(kTol));
    QuantumRegister down = project(bell, a, false);
    CHECK(measure_prob(down, b, true) == doctest::Approx(0.0).epsilon(kTol));
}

TEST_CASE("closure canonicalization: names, order, global phase") {
    // -|1⟩ and |1⟩ are the same closure once the global phase is fixed
    QuantumRegister reg;
    QvarSource src;
    auto [r1, q] = new_qubit(reg, true, &src);
    QuantumRegister minus = apply_unitary(r1, {q}, builtin_gates().at("Z").matrix);
    CHECK(closures_equal({r1, mk_qvar(q)}, {minus, mk_qvar(q)}));
    // different variable names for the same physics compare equal
    QuantumRegister other;
    QvarSource src2;
    src2.next = 7;
    auto [o1, p] = new_qubit(other, true, &src2);
    CHECK(closures_equal({r1, mk_qvar(q)}, {o1, mk_qvar(p)}));
    // |0⟩ and |1⟩ stay apart, as do H|0⟩ and H|1⟩ (relative phase)
    auto [z1, z] = new_qubit(QuantumRegister{}, false, nullptr);
    CHECK_FALSE(closures_equal({r1, mk_qvar(q)}, {z1, mk_qvar(z)}));
    QuantumRegister hp = apply_unitary(z1, {z}, builtin_gates().at("H").matrix);
    QuantumRegister hm = apply_unitary(r1, {q}, builtin_gates().at("H").matrix);
    CHECK_FALSE(closures_equal({hp, mk_qvar(z)}, {hm, mk_qvar(q)}));
}

TEST_CASE("register merging keeps both halves' statistics") {
    QvarSource src;
    auto [a1, a] = new_qubit(QuantumRegister{}, true, &src);
    auto [b1, b] = new_qubit(QuantumRegister{}, false, &src);
    QuantumRegister h = apply_unitary(b1, {b}, builtin_gates().at("H").matrix);
    QuantumRegister m = merge_registers(a1, h);
    CHECK(m.vars.size() == 2);
    CHECK(m.normalized());
    CHECK(measure_prob(m, a, true) == doctest::Approx(1.0).epsilon(kTol));
    CHECK(measure_prob(m, b, true) == doctest::Approx(0.5).epsilon(kTol));
}

TEST_CASE("closure evaluation: pinned measurement distributions") {
    // fair coin from a Hadamard qubit
    ClosureDist coin = evq("meas(H<new(ff)>)");
    CHECK(prob_of_bool(coin, true) == doctest::Approx(0.5).epsilon(kTol));
    CHECK(prob_of_bool(coin, false) == doctest::Approx(0.5).epsilon(kTol));
    CHECK(coin.mass() == doctest::Approx(1.0).epsilon(kTol));
    // measuring both halves of a Bell pair always agrees
    ClosureDist agree = evq(
        "let <a, b> = CNOT<H<new(ff)>, new(ff)> in "
        "if meas(a) then meas(b) else (if meas(b) then ff else tt)");
    CHECK(prob_of_bool(agree, true) == doctest::Approx(1.0).epsilon(kTol));
    // the same test on an unentangled product state is a coin flip
    ClosureDist indep = evq(
        "let <a, b> = <H<new(ff)>, H<new(ff)>> in "
        "if meas(a) then meas(b) else (if meas(b) then ff else tt)");
    CHECK(prob_of_bool(indep, true) == doctest::Approx(0.5).epsilon(kTol));
    // the X-flip pair agrees pointwise on basis and Hadamard inputs
    for (const char* arg : {"new(tt)", "new(ff)", "H<new(ff)>"}) {
        ClosureDist l = evq(std::string("(\\x:qbit. if meas(x) then ff else tt) ") + arg);
        ClosureDist r = evq(std::string("(\\x:qbit. meas(X<x>)) ") + arg);
        CHECK(dists_close(l, r));
    }
}

TEST_CASE("closure evaluation equals small-step normalization") {
    for (const char* src :
         {"meas(H<new(ff)>)", "if meas(new(tt)) then ff else tt",
          "let <a, b> = CNOT<H<new(ff)>, new(ff)> in if meas(a) then meas(b) else (if meas(b) "
          "then ff else tt)",
          "(\\x:qbit. meas(X<x>)) H<new(tt)>"}) {
        TermPtr e = parse(src, Mode::Quantum);
        QuantumClosure c{QuantumRegister{}, e};
        CHECK_MESSAGE(dists_close(eval_closure_big(c), normalize_closure_by_steps(c)),
                      "mismatch for ", src);
    }
}

TEST_CASE("custom gate tables load and evaluate") {
    // a real rotation with cos = 3/5: measuring R|0⟩ gives tt with p = 16/25
    const char* json = R"([{"name": "R", "arity": 1, "matrix": [[0.6, -0.8], [0.8, 0.6]]}])";
    GateTable table = load_gates_json(json);  // merged onto the builtin table
    REQUIRE(table.count("R") == 1);
    CHECK(table.at("R").arity == 1);
    CHECK(table.count("H") == 1);
    ClosureDist d = evq("meas(R<new(ff)>)", table);
    CHECK(prob_of_bool(d, true) == doctest::Approx(16.0 / 25.0).epsilon(kTol));
    CHECK(prob_of_bool(d, false) == doctest::Approx(9.0 / 25.0).epsilon(kTol));
    // complex cells spell [re, im]: S's matrix round-trips
    GateTable s2 = load_gates_json(
        R"({"name": "S2", "arity": 1, "matrix": [[1, 0], [0, [0, 1]]]})");
    CHECK(s2.at("S2").matrix[1][1] == Cplx(0.0, 1.0));
    // malformed tables are rejected
    CHECK_THROWS(load_gates_json("{\"bad\": 1}"));
    // non-unitary matrices are rejected
    CHECK_THROWS(load_gates_json(
        R"({"name": "B", "arity": 1, "matrix": [[1, 0], [0, 0]]})"));
}

TEST_CASE("distribution bucketing merges equal closures") {
    QvarSource src;
    auto [r1, q] = new_qubit(QuantumRegister{}, true, &src);
    ClosureDist d;
    d.add({r1, mk_qvar(q)}, 0.25);
    QuantumRegister z = apply_unitary(r1, {q}, builtin_gates().at("Z").matrix);
    d.add({z, mk_qvar(q)}, 0.25);  // same closure up to global phase
    CHECK(d.size() == 1);
    CHECK(d.prob_of({r1, mk_qvar(q)}) == doctest::Approx(0.5).epsilon(kTol));
}
