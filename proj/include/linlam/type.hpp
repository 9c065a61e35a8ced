#pragma once

#include <memory>
#include <optional>
#include <string>

namespace linlam {

// Calculus selector. Det: no choice, no quantum constructs. Prob: adds
// probabilistic choice. Quantum: adds qbit/meas/new/gates, drops choice.
enum class Mode { Det, Prob, Quantum };

std::string mode_name(Mode m);
std::optional<Mode> mode_from_name(const std::string& name);

class Type;
using TypePtr = std::shared_ptr<const Type>;

// Types: bool | qbit | A -o B | A * B, plus an internal "any" placeholder
// synthesized for Omega (typable at every type). "any" unifies with
// everything structurally and never appears in user-written annotations.
class Type {
public:
    enum class Kind { Bool, Qbit, Arrow, Tensor, Any };

    Kind kind() const { return kind_; }
    const TypePtr& left() const { return left_; }   // Arrow domain / Tensor first
    const TypePtr& right() const { return right_; } // Arrow codomain / Tensor second

    static TypePtr boolean();
    static TypePtr qbit();
    static TypePtr any();
    static TypePtr arrow(TypePtr dom, TypePtr cod);
    static TypePtr tensor(TypePtr first, TypePtr second);

private:
    Type(Kind k, TypePtr l, TypePtr r) : kind_(k), left_(std::move(l)), right_(std::move(r)) {}
    Kind kind_;
    TypePtr left_, right_;
};

// Structural equality (Any only equals Any).
bool type_equal(const TypePtr& a, const TypePtr& b);

// Equality loosened so that Any matches every type, recursively.
bool type_compatible(const TypePtr& a, const TypePtr& b);

// Most specific common refinement of two compatible types; null if the
// types are incompatible. join(any, bool) = bool.
TypePtr type_join(const TypePtr& a, const TypePtr& b);

bool contains_any(const TypePtr& t);
bool contains_qbit(const TypePtr& t);

// Right-nested qbit tensor of the given width; width 1 is plain qbit.
TypePtr qbit_tensor(int width);
// Width if t is such a tensor (qbit = 1), else 0.
int qbit_tensor_width(const TypePtr& t);

// Surface syntax: bool, qbit, -o (right assoc), * (binds tighter than -o).
std::string type_to_string(const TypePtr& t);

} // namespace linlam
