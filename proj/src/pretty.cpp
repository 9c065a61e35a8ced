#include "linlam/pretty.hpp"

namespace linlam {

namespace {

// prec 0: choice / prefix forms, 1: application, 2: atoms
void print(const TermPtr& t, int prec, std::string& out) {
    std::visit(
        [&](const auto& n) {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, VarN>) {
                out += n.name;
            } else if constexpr (std::is_same_v<N, QVarN>) {
                out += n.name;
            } else if constexpr (std::is_same_v<N, BoolN>) {
                out += n.value ? "tt" : "ff";
            } else if constexpr (std::is_same_v<N, OmegaN>) {
                out += "omega";
            } else if constexpr (std::is_same_v<N, HoleN>) {
                out += "[.]";
            } else if constexpr (std::is_same_v<N, LamN>) {
                bool paren = prec > 0;
                if (paren) out += "(";
                out += "\\" + n.binder;
                if (n.ann) out += ":" + type_to_string(n.ann);
                out += ". ";
                print(n.body, 0, out);
                if (paren) out += ")";
            } else if constexpr (std::is_same_v<N, AppN>) {
                bool paren = prec > 1;
                if (paren) out += "(";
                print(n.fun, 1, out);
                out += " ";
                print(n.arg, 2, out);
                if (paren) out += ")";
            } else if constexpr (std::is_same_v<N, IfN>) {
                bool paren = prec > 0;
                if (paren) out += "(";
                out += "if ";
                print(n.cond, 0, out);
                out += " then ";
                print(n.thn, 0, out);
                out += " else ";
                print(n.els, 0, out);
                if (paren) out += ")";
            } else if constexpr (std::is_same_v<N, LetPairN>) {
                bool paren = prec > 0;
                if (paren) out += "(";
                out += "let <" + n.left + ", " + n.right + "> = ";
                print(n.scrut, 0, out);
                out += " in ";
                print(n.body, 0, out);
                if (paren) out += ")";
            } else if constexpr (std::is_same_v<N, PairN>) {
                out += "<";
                print(n.first, 0, out);
                out += ", ";
                print(n.second, 0, out);
                out += ">";
            } else if constexpr (std::is_same_v<N, ChoiceN>) {
                bool paren = prec > 0;
                if (paren) out += "(";
                // A prefix form on the left would swallow the (+) on reparse,
                // so only a nested choice may print unparenthesized there.
                print(n.left, std::holds_alternative<ChoiceN>(n.left->node()) ? 0 : 1, out);
                out += " (+) ";
                bool right_prefix = std::holds_alternative<LamN>(n.right->node()) ||
                                    std::holds_alternative<IfN>(n.right->node()) ||
                                    std::holds_alternative<LetPairN>(n.right->node());
                print(n.right, right_prefix ? 0 : 1, out);
                if (paren) out += ")";
            } else if constexpr (std::is_same_v<N, GateN>) {
                out += n.gate + "<";
                // Flatten the right-nested pair spine back into an argument
                // list; reparsing rebuilds the same nesting.
                TermPtr a = n.arg;
                while (const auto* p = as<PairN>(a)) {
                    print(p->first, 0, out);
                    out += ", ";
                    a = p->second;
                }
                print(a, 0, out);
                out += ">";
            } else if constexpr (std::is_same_v<N, MeasN>) {
                out += "meas(";
                print(n.arg, 0, out);
                out += ")";
            } else if constexpr (std::is_same_v<N, NewN>) {
                out += "new(";
                print(n.arg, 0, out);
                out += ")";
            }
        },
        t->node());
}

} // namespace

std::string pretty(const TermPtr& t) {
    std::string out;
    print(t, 0, out);
    return out;
}

} // namespace linlam
