#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "linlam/term.hpp"

namespace linlam {

using Cplx = std::complex<double>;
using Matrix = std::vector<std::vector<Cplx>>;

constexpr double kQuantumTol = 1e-9;

// State vector over named qubits. vars[0] carries the most significant bit
// of the amplitude index and tt = 1, so for vars {q0,q1} the basis order is
// |ff ff>, |ff tt>, |tt ff>, |tt tt>. A register with no qubits is the
// scalar 1.
struct QuantumRegister {
    std::vector<std::string> vars;
    std::vector<Cplx> amps{Cplx(1.0, 0.0)};

    int index_of(const std::string& var) const; // -1 if absent
    bool normalized(double tol = kQuantumTol) const;
};

// Allocates fresh q<k> names; seeded past every q<k> already in use.
struct QvarSource {
    int next = 0;
    std::string fresh() { return "q" + std::to_string(next++); }
    void absorb(const QuantumRegister& reg);
};

// Appends a qubit in basis state |b> as the least significant bit; returns
// the extended register and the fresh name used.
std::pair<QuantumRegister, std::string> new_qubit(const QuantumRegister& reg, bool b,
                                                  QvarSource* names = nullptr);

// Probability that measuring r yields b: sum of |amp|^2 over basis states
// with eta(r) = b.
double measure_prob(const QuantumRegister& reg, const std::string& r, bool b);

// Post-measurement register: r removed, amplitudes alpha_{eta[r:=b]} scaled
// by measure_prob^{-1/2}. Throws InputError when that probability is ~0.
QuantumRegister project(const QuantumRegister& reg, const std::string& r, bool b);

// Applies the 2^k x 2^k matrix to the (distinct, present) target qubits,
// identity elsewhere.
QuantumRegister apply_unitary(const QuantumRegister& reg,
                              const std::vector<std::string>& targets, const Matrix& u);

// Tensor product; variable names must be disjoint.
QuantumRegister merge_registers(const QuantumRegister& a, const QuantumRegister& b);

struct Gate {
    int arity;
    Matrix matrix;
};
using GateTable = std::map<std::string, Gate>;

// X, Z, H, S, T, CNOT (control = first target).
const GateTable& builtin_gates();

// Parses a JSON gate file: one object or a list of objects
//   {"name": "G", "arity": k, "matrix": [[[re,im], ...], ...]}
// and returns builtins + user gates. Validates shape and unitarity (1e-9).
GateTable load_gates_json(const std::string& json_text);

// A term paired with the register its free quantum variables live in.
struct QuantumClosure {
    QuantumRegister reg;
    TermPtr term;
};

// Canonical form: quantum variables renamed q0,q1,... in term first-occurrence
// order (register-only leftovers after, permuted to minimize the amplitude
// vector), amplitudes permuted accordingly, global phase fixed by making the
// first non-negligible amplitude real positive.
QuantumClosure canonicalize_closure(const QuantumClosure& c);

bool closures_equal(const QuantumClosure& a, const QuantumClosure& b, double tol = kQuantumTol);

// Finite-support subdistribution over closures; keys canonicalize and
// amplitude vectors within tol merge.
class ClosureDist {
public:
    struct Entry {
        QuantumClosure closure; // canonical
        double prob;
    };

    explicit ClosureDist(double tol = kQuantumTol) : tol_(tol) {}
    static ClosureDist dirac(const QuantumClosure& c);

    void add(const QuantumClosure& c, double p);
    void add_scaled(const ClosureDist& other, double scale);
    double mass() const;
    bool empty() const { return count_ == 0; }
    size_t size() const { return count_; }
    // Deterministic order: sorted by term key, insertion order within a key.
    std::vector<const Entry*> entries() const;
    double prob_of(const QuantumClosure& c) const;

private:
    double tol_;
    std::map<std::string, std::vector<Entry>> buckets_;
    size_t count_ = 0;
};

// Big-step evaluation of a closed well-typed quantum closure.
ClosureDist eval_closure_big(const QuantumClosure& c, const GateTable& gates = builtin_gates());

// One call-by-value step; nullopt when the term is a value.
std::optional<ClosureDist> step_closure(const QuantumClosure& c,
                                        const GateTable& gates = builtin_gates());

// Iterated step_closure until only values remain; agrees with
// eval_closure_big within tolerance.
ClosureDist normalize_closure_by_steps(const QuantumClosure& c,
                                       const GateTable& gates = builtin_gates(),
                                       int max_rounds = 100000);

double observe_closure(const QuantumClosure& c, const GateTable& gates = builtin_gates());

} // namespace linlam
