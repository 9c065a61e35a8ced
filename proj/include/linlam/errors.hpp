#pragma once

#include <stdexcept>
#include <string>

namespace linlam {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    ParseError(std::string msg, int line, int col)
        : Error("parse error at " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
          line(line), col(col) {}
    int line, col;
};

// A construct outside the selected calculus (choice outside prob, quantum
// constructs outside quantum).
struct ModeError : Error {
    explicit ModeError(const std::string& msg) : Error("mode error: " + msg) {}
};

struct TypeError : Error {
    enum class Kind {
        UnknownVariable,
        UnusedVariable,
        DuplicatedUse,
        TypeMismatch,
        UnknownGate,
        GateArity,
        AnnotationRequired,
        HoleInTerm,
        MultipleHoles,
        NoHole,
        NotClosed,
    };
    TypeError(Kind k, const std::string& msg) : Error("type error: " + msg), kind(k) {}
    Kind kind;
};

// Interaction basis lacks values for a type the checker needs to probe.
struct BasisError : Error {
    explicit BasisError(const std::string& msg) : Error("basis error: " + msg) {}
};

// Internal invariant breach (stuck well-typed term, lost probability mass...).
struct InternalError : Error {
    explicit InternalError(const std::string& msg) : Error("internal error: " + msg) {}
};

// Malformed explicit Markov chain / relation / gate file.
struct InputError : Error {
    explicit InputError(const std::string& msg) : Error("input error: " + msg) {}
};

} // namespace linlam
