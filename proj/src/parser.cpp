#include "linlam/parser.hpp"

#include <cctype>
#include <optional>
#include <vector>

#include "linlam/errors.hpp"

namespace linlam {

std::set<std::string> builtin_gate_names() {
    return {"X", "Z", "H", "S", "T", "CNOT"};
}

namespace {

enum class Tok {
    Ident, Lambda, Colon, Dot, LParen, RParen, Lt, Gt, Comma, Eq,
    Choice, Arrow, Star, Hole, End
};

struct Token {
    Tok kind;
    std::string text;
    int line, col;
};

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto push = [&](Tok k, std::string t) { out.push_back({k, std::move(t), line, col}); };
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') { ++line; col = 1; ++i; continue; }
        if (std::isspace(static_cast<unsigned char>(c))) { ++col; ++i; continue; }
        if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
            while (i < text.size() && text[i] != '\n') ++i;
            continue;
        }
        if (c == '-') {
            if (i + 1 < text.size() && text[i + 1] == 'o' &&
                (i + 2 >= text.size() || !ident_char(text[i + 2]))) {
                push(Tok::Arrow, "-o");
                i += 2; col += 2;
                continue;
            }
            throw ParseError("stray '-'", line, col);
        }
        if (c == '(') {
            if (i + 2 < text.size() && text[i + 1] == '+' && text[i + 2] == ')') {
                push(Tok::Choice, "(+)");
                i += 3; col += 3;
                continue;
            }
            push(Tok::LParen, "(");
            ++i; ++col;
            continue;
        }
        if (c == '[') {
            if (i + 2 < text.size() && text[i + 1] == '.' && text[i + 2] == ']') {
                push(Tok::Hole, "[.]");
                i += 3; col += 3;
                continue;
            }
            throw ParseError("expected '[.]'", line, col);
        }
        switch (c) {
        case ')': push(Tok::RParen, ")"); ++i; ++col; continue;
        case '\\': push(Tok::Lambda, "\\"); ++i; ++col; continue;
        case ':': push(Tok::Colon, ":"); ++i; ++col; continue;
        case '.': push(Tok::Dot, "."); ++i; ++col; continue;
        case '<': push(Tok::Lt, "<"); ++i; ++col; continue;
        case '>': push(Tok::Gt, ">"); ++i; ++col; continue;
        case ',': push(Tok::Comma, ","); ++i; ++col; continue;
        case '=': push(Tok::Eq, "="); ++i; ++col; continue;
        case '*': push(Tok::Star, "*"); ++i; ++col; continue;
        default: break;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < text.size() && ident_char(text[j])) ++j;
            std::string id = text.substr(i, j - i);
            push(Tok::Ident, id);
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back({Tok::End, "", line, col});
    return out;
}

bool is_keyword(const std::string& s) {
    static const std::set<std::string> kw = {"if", "then", "else", "let", "in",
                                             "tt", "ff", "omega", "meas", "new"};
    return kw.count(s) > 0;
}

class Parser {
public:
    Parser(std::vector<Token> toks, Mode mode, const std::set<std::string>& gates)
        : toks_(std::move(toks)), mode_(mode), gates_(gates) {}

    TermPtr parse_term_all() {
        TermPtr t = parse_expr();
        expect(Tok::End, "end of input");
        return t;
    }

    TypePtr parse_type_all() {
        TypePtr t = parse_type();
        expect(Tok::End, "end of input");
        return t;
    }

private:
    const Token& peek(int k = 0) const {
        size_t i = pos_ + k;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, peek().line, peek().col);
    }
    Token expect(Tok k, const std::string& what) {
        if (peek().kind != k) fail("expected " + what);
        return next();
    }
    std::string expect_ident() {
        if (peek().kind != Tok::Ident || is_keyword(peek().text)) fail("expected identifier");
        std::string id = peek().text;
        if (!std::islower(static_cast<unsigned char>(id[0]))) fail("variables start lowercase");
        next();
        return id;
    }
    void require_mode(Mode m, const std::string& what) const {
        if (mode_ != m)
            throw ModeError(what + " requires --mode " + mode_name(m) +
                            " (current: " + mode_name(mode_) + ")");
    }

    bool at_prefix() const {
        const Token& t = peek();
        if (t.kind == Tok::Lambda) return true;
        return t.kind == Tok::Ident && (t.text == "if" || t.text == "let");
    }

    bool at_atom() const {
        const Token& t = peek();
        switch (t.kind) {
        case Tok::LParen:
        case Tok::Lt:
        case Tok::Hole:
            return true;
        case Tok::Ident:
            return !is_keyword(t.text) || t.text == "tt" || t.text == "ff" ||
                   t.text == "omega" || t.text == "meas" || t.text == "new";
        default:
            return false;
        }
    }

    TermPtr parse_expr() {
        if (at_prefix()) return parse_prefix();
        TermPtr left = parse_app();
        while (peek().kind == Tok::Choice) {
            next();
            require_mode(Mode::Prob, "choice (+)");
            if (at_prefix()) return mk_choice(left, parse_prefix());
            left = mk_choice(left, parse_app());
        }
        return left;
    }

    TermPtr parse_prefix() {
        if (peek().kind == Tok::Lambda) {
            next();
            std::string x = expect_ident();
            expect(Tok::Colon, "':' (binder annotations are required)");
            TypePtr ann = parse_type();
            expect(Tok::Dot, "'.'");
            return mk_lam(x, ann, parse_expr());
        }
        if (peek().text == "if") {
            next();
            TermPtr c = parse_expr();
            if (peek().text != "then") fail("expected 'then'");
            next();
            TermPtr t = parse_expr();
            if (peek().text != "else") fail("expected 'else'");
            next();
            return mk_if(c, t, parse_expr());
        }
        // let <x,y> = e in f
        next();
        expect(Tok::Lt, "'<'");
        std::string x = expect_ident();
        expect(Tok::Comma, "','");
        std::string y = expect_ident();
        expect(Tok::Gt, "'>'");
        expect(Tok::Eq, "'='");
        TermPtr scrut = parse_expr();
        if (peek().text != "in") fail("expected 'in'");
        next();
        return mk_letpair(x, y, scrut, parse_expr());
    }

    TermPtr parse_app() {
        TermPtr left = parse_atom();
        while (at_atom()) left = mk_app(left, parse_atom());
        return left;
    }

    // op(e) for meas/new: keeps the primitive form when e is a value,
    // otherwise expands to an annotated applied lambda.
    template <class Mk>
    TermPtr value_op(Mk mk, TermPtr arg, const TypePtr& operand_type) {
        if (is_value(arg)) return mk(arg);
        std::set<std::string> used = free_vars(arg);
        std::string x = fresh_name("w", used);
        return mk_app(mk_lam(x, operand_type, mk(mk_var(x))), arg);
    }

    TermPtr parse_atom() {
        const Token& t = peek();
        if (t.kind == Tok::LParen) {
            next();
            TermPtr e = parse_expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        if (t.kind == Tok::Hole) {
            next();
            return mk_hole();
        }
        if (t.kind == Tok::Lt) {
            next();
            TermPtr a = parse_expr();
            expect(Tok::Comma, "','");
            TermPtr b = parse_expr();
            expect(Tok::Gt, "'>'");
            return desugar_pair(a, b);
        }
        if (t.kind != Tok::Ident) fail("expected a term");
        if (t.text == "tt") { next(); return mk_bool(true); }
        if (t.text == "ff") { next(); return mk_bool(false); }
        if (t.text == "omega") { next(); return mk_omega(); }
        if (t.text == "meas" || t.text == "new") {
            bool is_meas = t.text == "meas";
            require_mode(Mode::Quantum, t.text);
            next();
            expect(Tok::LParen, "'('");
            TermPtr e = parse_expr();
            expect(Tok::RParen, "')'");
            if (is_meas) return value_op([](TermPtr v) { return mk_meas(v); }, e, Type::qbit());
            return value_op([](TermPtr v) { return mk_new(v); }, e, Type::boolean());
        }
        if (std::isupper(static_cast<unsigned char>(t.text[0]))) {
            std::string g = t.text;
            if (!gates_.count(g)) fail("unknown gate '" + g + "'");
            require_mode(Mode::Quantum, "gate application");
            next();
            expect(Tok::Lt, "'<'");
            std::vector<TermPtr> args;
            args.push_back(parse_expr());
            while (peek().kind == Tok::Comma) {
                next();
                args.push_back(parse_expr());
            }
            expect(Tok::Gt, "'>'");
            TermPtr arg = args.back();
            for (size_t i = args.size() - 1; i-- > 0;) arg = desugar_pair(args[i], arg);
            return value_op([&g](TermPtr v) { return mk_gate(g, v); }, arg,
                            qbit_tensor(static_cast<int>(args.size())));
        }
        if (is_keyword(t.text)) fail("unexpected keyword '" + t.text + "'");
        std::string name = t.text;
        next();
        return mk_var(name);
    }

    // T := P ('-o' T)?   P := A ('*' P)?   A := bool | qbit | (T)
    TypePtr parse_type() {
        TypePtr left = parse_type_prod();
        if (peek().kind == Tok::Arrow) {
            next();
            return Type::arrow(left, parse_type());
        }
        return left;
    }
    TypePtr parse_type_prod() {
        TypePtr left = parse_type_atom();
        if (peek().kind == Tok::Star) {
            next();
            return Type::tensor(left, parse_type_prod());
        }
        return left;
    }
    TypePtr parse_type_atom() {
        if (peek().kind == Tok::LParen) {
            next();
            TypePtr t = parse_type();
            expect(Tok::RParen, "')'");
            return t;
        }
        if (peek().kind == Tok::Ident) {
            if (peek().text == "bool") { next(); return Type::boolean(); }
            if (peek().text == "qbit") {
                require_mode(Mode::Quantum, "type qbit");
                next();
                return Type::qbit();
            }
        }
        fail("expected a type");
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
    Mode mode_;
    const std::set<std::string>& gates_;
};

} // namespace

TermPtr parse(const std::string& text, Mode mode, const std::set<std::string>& gate_names) {
    Parser p(tokenize(text), mode, gate_names);
    return uniquify_binders(p.parse_term_all());
}

TypePtr parse_type(const std::string& text, Mode mode) {
    Parser p(tokenize(text), mode, {});
    return p.parse_type_all();
}

} // namespace linlam
