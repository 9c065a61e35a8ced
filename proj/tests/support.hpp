// Shared helpers for the test binaries.
//
// The checks in here are deliberately independent of the library code they
// exercise: the quantum reference simulator builds full 2^n x 2^n matrices
// from its own hard-coded gate definitions, the random LMC generator builds
// chains from first principles, and the random term generator produces
// well-typed linear terms by construction so the type checker and the
// evaluators can be cross-examined against it.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "linlam/lmc.hpp"
#include "linlam/term.hpp"
#include "linlam/type.hpp"

namespace testsupport {

// ---------------------------------------------------------------------------
// Reference quantum simulator (dense matrices, own gate table).
//
// Qubits are named; the joint state lives in a flat amplitude vector where
// the i-th named qubit owns bit (n-1-i) of the index, i.e. the first qubit
// added is the most significant bit.  Gates are expanded into explicit
// 2^n x 2^n matrices and applied by a full matrix-vector product — the slow
// textbook construction, kept on purpose so it shares nothing with the
// production register implementation.
// ---------------------------------------------------------------------------

using C = std::complex<double>;

struct DenseSim {
    std::vector<std::string> order;  // qubit names, most significant first
    std::vector<C> amps{C(1.0, 0.0)};

    int pos(const std::string& name) const {
        for (size_t i = 0; i < order.size(); ++i)
            if (order[i] == name) return static_cast<int>(i);
        throw std::runtime_error("dense sim: unknown qubit " + name);
    }

    void add_qubit(const std::string& name, bool one) {
        // state ⊗ |b⟩ : the new qubit becomes the least significant bit.
        std::vector<C> next(amps.size() * 2, C(0.0, 0.0));
        for (size_t i = 0; i < amps.size(); ++i) next[2 * i + (one ? 1 : 0)] = amps[i];
        order.push_back(name);
        amps = std::move(next);
    }

    // Small gate matrices, written out from their standard definitions.
    static std::vector<std::vector<C>> gate_matrix(const std::string& g) {
        const double s = 1.0 / std::sqrt(2.0);
        if (g == "X") return {{C(0), C(1)}, {C(1), C(0)}};
        if (g == "Z") return {{C(1), C(0)}, {C(0), C(-1)}};
        if (g == "H") return {{C(s), C(s)}, {C(s), C(-s)}};
        if (g == "S") return {{C(1), C(0)}, {C(0), C(0, 1)}};
        if (g == "T") return {{C(1), C(0)}, {C(0), C(s, s)}};
        if (g == "CNOT")
            return {{C(1), C(0), C(0), C(0)},
                    {C(0), C(1), C(0), C(0)},
                    {C(0), C(0), C(0), C(1)},
                    {C(0), C(0), C(1), C(0)}};
        throw std::runtime_error("dense sim: unknown gate " + g);
    }

    // Expand u (acting on `targets`, most significant first) to the full
    // space: entry (r, c) is u[r|targets][c|targets] when all other bits of
    // r and c agree, and 0 otherwise.
    void apply(const std::string& g, const std::vector<std::string>& targets) {
        auto u = gate_matrix(g);
        const int n = static_cast<int>(order.size());
        const size_t dim = amps.size();
        std::vector<int> shift;  // bit position of each target in the index
        for (const auto& t : targets) shift.push_back(n - 1 - pos(t));
        const size_t k = targets.size();
        std::vector<std::vector<C>> full(dim, std::vector<C>(dim, C(0.0, 0.0)));
        for (size_t r = 0; r < dim; ++r) {
            for (size_t c = 0; c < dim; ++c) {
                size_t rt = 0, ct = 0, rrest = r, crest = c;
                for (size_t i = 0; i < k; ++i) {
                    rt = (rt << 1) | ((r >> shift[i]) & 1);
                    ct = (ct << 1) | ((c >> shift[i]) & 1);
                    rrest &= ~(size_t(1) << shift[i]);
                    crest &= ~(size_t(1) << shift[i]);
                }
                if (rrest == crest) full[r][c] = u[rt][ct];
            }
        }
        std::vector<C> next(dim, C(0.0, 0.0));
        for (size_t r = 0; r < dim; ++r)
            for (size_t c = 0; c < dim; ++c) next[r] += full[r][c] * amps[c];
        amps = std::move(next);
    }

    double norm2() const {
        double s = 0;
        for (const auto& a : amps) s += std::norm(a);
        return s;
    }

    double measure_prob(const std::string& name, bool one) const {
        const int sh = static_cast<int>(order.size()) - 1 - pos(name);
        double s = 0;
        for (size_t i = 0; i < amps.size(); ++i)
            if (((i >> sh) & 1) == (one ? 1u : 0u)) s += std::norm(amps[i]);
        return s;
    }

    // Project onto `name == one` and renormalize; the qubit stays in place.
    void project(const std::string& name, bool one) {
        const double p = measure_prob(name, one);
        if (p <= 0) throw std::runtime_error("dense sim: projecting onto a zero branch");
        const int sh = static_cast<int>(order.size()) - 1 - pos(name);
        for (size_t i = 0; i < amps.size(); ++i) {
            if (((i >> sh) & 1) != (one ? 1u : 0u))
                amps[i] = C(0.0, 0.0);
            else
                amps[i] /= std::sqrt(p);
        }
    }

    // Joint outcome distribution keyed by the outcome bits of the qubits in
    // `names` order; independent of internal index layout.
    std::map<std::string, double> joint(const std::vector<std::string>& names) const {
        std::map<std::string, double> out;
        for (size_t i = 0; i < amps.size(); ++i) {
            std::string key;
            for (const auto& nm : names) {
                const int sh = static_cast<int>(order.size()) - 1 - pos(nm);
                key += ((i >> sh) & 1) ? '1' : '0';
            }
            out[key] += std::norm(amps[i]);
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// Random finite labelled Markov chains.
// ---------------------------------------------------------------------------

// A chain over <= max_states states and <= n_labels labels whose rows are
// exact rationals with mass <= 1.  Built directly from dice rolls; never
// touches the exploration machinery.
inline linlam::FiniteLmc<linlam::Rational> random_lmc(std::mt19937& rng, int max_states = 12,
                                                      int n_labels = 3) {
    using linlam::Rational;
    linlam::FiniteLmc<Rational> m;
    const int n = 2 + static_cast<int>(rng() % static_cast<unsigned>(max_states - 1));
    for (int s = 0; s < n; ++s) m.add_state("s" + std::to_string(s));
    for (int l = 0; l < n_labels; ++l) m.add_label("l" + std::to_string(l));
    for (int s = 0; s < n; ++s) {
        for (int l = 0; l < n_labels; ++l) {
            if (rng() % 10 < 3) continue;  // label absent at this state
            const int max_fan = n < 3 ? n : 3;
            const int fan = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_fan));
            std::set<int> succs;
            while (static_cast<int>(succs.size()) < fan) succs.insert(rng() % n);
            std::vector<int> weights;
            int total = 0;
            for (size_t i = 0; i < succs.size(); ++i) {
                const int w = 1 + static_cast<int>(rng() % 4);
                weights.push_back(w);
                total += w;
            }
            const int denom = total + static_cast<int>(rng() % 3);  // slack -> submass
            size_t i = 0;
            for (int to : succs) {
                m.add_edge(s, l, to, Rational(weights[i], denom));
                ++i;
            }
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Random well-typed linear terms.
// ---------------------------------------------------------------------------

// Generates closed terms that consume their environment exactly, so every
// output is well typed by construction.  Omega is the escape hatch: it
// absorbs any leftover environment at any type (exactly like the typing
// rule that makes it flexible).
class RandomTermGen {
public:
    RandomTermGen(linlam::Mode mode, unsigned seed) : mode_(mode), rng_(seed) {}

    linlam::TermPtr closed(const linlam::TypePtr& ty, int fuel) { return gen(ty, {}, fuel); }

    // A closed boolean term; the workhorse for the property suites.
    linlam::TermPtr closed_bool(int fuel) { return closed(linlam::Type::boolean(), fuel); }

private:
    using TypePtr = linlam::TypePtr;
    using TermPtr = linlam::TermPtr;
    struct Binding {
        std::string name;
        TypePtr type;
    };
    using Env = std::vector<Binding>;

    linlam::Mode mode_;
    std::mt19937 rng_;
    int next_ = 0;

    int roll(int n) { return static_cast<int>(rng_() % static_cast<unsigned>(n)); }
    std::string fresh() { return "g" + std::to_string(next_++); }

    void split(const Env& env, Env& a, Env& b) {
        for (const auto& e : env) (roll(2) ? a : b).push_back(e);
    }

    // Argument types offered to applications and let-pairs.
    TypePtr small_type() {
        using linlam::Type;
        switch (roll(mode_ == linlam::Mode::Quantum ? 4 : 3)) {
        case 0: return Type::boolean();
        case 1: return Type::arrow(Type::boolean(), Type::boolean());
        case 2: return Type::tensor(Type::boolean(), Type::boolean());
        default: return Type::qbit();
        }
    }

    TermPtr leaf(const TypePtr& ty, const Env& env) {
        using namespace linlam;
        if (env.size() == 1 && type_equal(env[0].type, ty)) return mk_var(env[0].name);
        if (env.empty() && ty->kind() == Type::Kind::Bool) return mk_bool(roll(2) == 0);
        if (env.empty() && mode_ == Mode::Quantum && ty->kind() == Type::Kind::Qbit)
            return mk_new(mk_bool(roll(2) == 0));
        return mk_omega();
    }

    TermPtr gen(const TypePtr& ty, const Env& env, int fuel) {
        using namespace linlam;
        if (fuel <= 1) return leaf(ty, env);
        for (int attempt = 0; attempt < 12; ++attempt) {
            switch (roll(9)) {
            case 0:
                if (attempt < 6) break;  // keep leaves rare while options remain
                return leaf(ty, env);
            case 1: {  // lambda
                if (ty->kind() != Type::Kind::Arrow) break;
                std::string x = fresh();
                Env inner = env;
                inner.push_back({x, ty->left()});
                return mk_lam(x, ty->left(), gen(ty->right(), inner, fuel - 1));
            }
            case 2: {  // conditional; both branches consume the same split
                Env e0, e1;
                split(env, e0, e1);
                int fc = 1 + roll(fuel > 2 ? fuel - 2 : 1);
                int fb = (fuel - fc) / 2 + 1;
                return mk_if(gen(Type::boolean(), e0, fc), gen(ty, e1, fb), gen(ty, e1, fb));
            }
            case 3: {  // application
                TypePtr a = small_type();
                Env e0, e1;
                split(env, e0, e1);
                int f1 = fuel / 2, f2 = fuel - f1;
                return mk_app(gen(Type::arrow(a, ty), e0, f1), gen(a, e1, f2));
            }
            case 4: {  // probabilistic choice splits its context
                if (mode_ != Mode::Prob) break;
                Env e0, e1;
                split(env, e0, e1);
                int f1 = fuel / 2, f2 = fuel - f1;
                return mk_choice(gen(ty, e0, f1), gen(ty, e1, f2));
            }
            case 5: {  // pair, via the value-pair combinator
                if (ty->kind() != Type::Kind::Tensor) break;
                Env e0, e1;
                split(env, e0, e1);
                int f1 = fuel / 2, f2 = fuel - f1;
                std::string a = fresh(), b = fresh();
                TermPtr mkp = mk_lam(a, ty->left(),
                                     mk_lam(b, ty->right(), mk_pair(mk_var(a), mk_var(b))));
                return mk_app(mk_app(mkp, gen(ty->left(), e0, f1)), gen(ty->right(), e1, f2));
            }
            case 6: {  // let-pair destruction
                TypePtr a = small_type(), b = small_type();
                Env e0, e1;
                split(env, e0, e1);
                std::string x = fresh(), y = fresh();
                e1.push_back({x, a});
                e1.push_back({y, b});
                int f1 = fuel / 2, f2 = fuel - f1;
                return mk_letpair(x, y, gen(Type::tensor(a, b), e0, f1), gen(ty, e1, f2));
            }
            case 7: {  // measurement
                if (mode_ != Mode::Quantum || ty->kind() != Type::Kind::Bool) break;
                return mk_meas(gen(Type::qbit(), env, fuel - 1));
            }
            case 8: {  // qubit preparation / single-qubit gate
                if (mode_ != Mode::Quantum || ty->kind() != Type::Kind::Qbit) break;
                if (roll(2)) return mk_new(gen(Type::boolean(), env, fuel - 1));
                return mk_gate(roll(2) ? "H" : "X", gen(Type::qbit(), env, fuel - 1));
            }
            default: break;
            }
        }
        return leaf(ty, env);
    }
};

// ---------------------------------------------------------------------------
// Subprocess helper for CLI tests.
// ---------------------------------------------------------------------------

struct CmdResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string shell_quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) {
        if (c == '\'')
            q += "'\\''";
        else
            q += c;
    }
    return q + "'";
}

inline CmdResult run_cmd(const std::string& bin, const std::vector<std::string>& args) {
    static int counter = 0;
    std::string errfile =
        "/tmp/linlam_test_err_" + std::to_string(getpid()) + "_" + std::to_string(counter++);
    std::string cmd = shell_quote(bin);
    for (const auto& a : args) cmd += " " + shell_quote(a);
    cmd += " 2>" + shell_quote(errfile);
    CmdResult r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) throw std::runtime_error("popen failed for: " + cmd);
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
    int status = pclose(p);
    r.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    std::ifstream ef(errfile);
    std::stringstream ss;
    ss << ef.rdbuf();
    r.err = ss.str();
    std::remove(errfile.c_str());
    return r;
}

inline std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

inline std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = "/tmp/linlam_test_" + std::to_string(getpid()) + "_" + name;
    std::ofstream f(path);
    f << content;
    return path;
}

}  // namespace testsupport
