#include "linlam/type.hpp"

namespace linlam {

std::string mode_name(Mode m) {
    switch (m) {
    case Mode::Det: return "det";
    case Mode::Prob: return "prob";
    case Mode::Quantum: return "quantum";
    }
    return "?";
}

std::optional<Mode> mode_from_name(const std::string& name) {
    if (name == "det") return Mode::Det;
    if (name == "prob") return Mode::Prob;
    if (name == "quantum") return Mode::Quantum;
    return std::nullopt;
}

TypePtr Type::boolean() {
    static const TypePtr t(new Type(Kind::Bool, nullptr, nullptr));
    return t;
}

TypePtr Type::qbit() {
    static const TypePtr t(new Type(Kind::Qbit, nullptr, nullptr));
    return t;
}

TypePtr Type::any() {
    static const TypePtr t(new Type(Kind::Any, nullptr, nullptr));
    return t;
}

TypePtr Type::arrow(TypePtr dom, TypePtr cod) {
    return TypePtr(new Type(Kind::Arrow, std::move(dom), std::move(cod)));
}

TypePtr Type::tensor(TypePtr first, TypePtr second) {
    return TypePtr(new Type(Kind::Tensor, std::move(first), std::move(second)));
}

bool type_equal(const TypePtr& a, const TypePtr& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b) return false;
    if (a->kind() != b->kind()) return false;
    switch (a->kind()) {
    case Type::Kind::Bool:
    case Type::Kind::Qbit:
    case Type::Kind::Any:
        return true;
    case Type::Kind::Arrow:
    case Type::Kind::Tensor:
        return type_equal(a->left(), b->left()) && type_equal(a->right(), b->right());
    }
    return false;
}

bool type_compatible(const TypePtr& a, const TypePtr& b) {
    return type_join(a, b) != nullptr;
}

TypePtr type_join(const TypePtr& a, const TypePtr& b) {
    if (!a || !b) return nullptr;
    if (a->kind() == Type::Kind::Any) return b;
    if (b->kind() == Type::Kind::Any) return a;
    if (a->kind() != b->kind()) return nullptr;
    switch (a->kind()) {
    case Type::Kind::Bool:
    case Type::Kind::Qbit:
        return a;
    case Type::Kind::Arrow: {
        TypePtr l = type_join(a->left(), b->left());
        TypePtr r = type_join(a->right(), b->right());
        if (!l || !r) return nullptr;
        if (l.get() == a->left().get() && r.get() == a->right().get()) return a;
        return Type::arrow(l, r);
    }
    case Type::Kind::Tensor: {
        TypePtr l = type_join(a->left(), b->left());
        TypePtr r = type_join(a->right(), b->right());
        if (!l || !r) return nullptr;
        if (l.get() == a->left().get() && r.get() == a->right().get()) return a;
        return Type::tensor(l, r);
    }
    case Type::Kind::Any:
        return b; // unreachable, handled above
    }
    return nullptr;
}

bool contains_any(const TypePtr& t) {
    if (!t) return false;
    switch (t->kind()) {
    case Type::Kind::Any: return true;
    case Type::Kind::Arrow:
    case Type::Kind::Tensor:
        return contains_any(t->left()) || contains_any(t->right());
    default: return false;
    }
}

bool contains_qbit(const TypePtr& t) {
    if (!t) return false;
    switch (t->kind()) {
    case Type::Kind::Qbit: return true;
    case Type::Kind::Arrow:
    case Type::Kind::Tensor:
        return contains_qbit(t->left()) || contains_qbit(t->right());
    default: return false;
    }
}

TypePtr qbit_tensor(int width) {
    TypePtr t = Type::qbit();
    for (int i = 1; i < width; ++i) t = Type::tensor(Type::qbit(), t);
    return t;
}

int qbit_tensor_width(const TypePtr& t) {
    if (!t) return 0;
    if (t->kind() == Type::Kind::Qbit) return 1;
    if (t->kind() == Type::Kind::Tensor && t->left()->kind() == Type::Kind::Qbit) {
        int rest = qbit_tensor_width(t->right());
        return rest > 0 ? rest + 1 : 0;
    }
    return 0;
}

namespace {

// prec 0: -o (right assoc), prec 1: *, prec 2: atoms
void print_type(const TypePtr& t, int prec, std::string& out) {
    switch (t->kind()) {
    case Type::Kind::Bool: out += "bool"; return;
    case Type::Kind::Qbit: out += "qbit"; return;
    case Type::Kind::Any: out += "any"; return;
    case Type::Kind::Arrow: {
        bool paren = prec > 0;
        if (paren) out += "(";
        print_type(t->left(), 1, out);
        out += " -o ";
        print_type(t->right(), 0, out);
        if (paren) out += ")";
        return;
    }
    case Type::Kind::Tensor: {
        bool paren = prec > 1;
        if (paren) out += "(";
        print_type(t->left(), 2, out);
        out += " * ";
        print_type(t->right(), 1, out);
        if (paren) out += ")";
        return;
    }
    }
}

} // namespace

std::string type_to_string(const TypePtr& t) {
    std::string out;
    print_type(t, 0, out);
    return out;
}

} // namespace linlam
