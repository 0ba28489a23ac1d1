#include <charconv>
#include <cstdlib>
#include <optional>

#include "statevc/kernel.hpp"

namespace statevc::kernel {

namespace {

enum class Tok {
    Int,
    Float,
    String,
    Ident,
    KwDel,
    KwPrint,
    KwTrue,
    KwFalse,
    KwNone,
    KwAnd,
    KwOr,
    KwNot,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    EqEq,
    NotEq,
    Less,
    LessEq,
    Greater,
    GreaterEq,
    Assign,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Separator,
    End,
};

struct Token {
    Tok kind;
    std::string text;  // identifier name, literal spelling, or decoded string
    SourcePos pos;
};

std::string describe(const Token& t) {
    switch (t.kind) {
        case Tok::End: return "end of input";
        case Tok::Separator: return t.text == ";" ? "';'" : "end of line";
        case Tok::String: return "string literal";
        default: return "'" + t.text + "'";
    }
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_blank();
            SourcePos pos{line_, col_};
            if (at_end()) {
                out.push_back({Tok::End, "", pos});
                return out;
            }
            char c = peek();
            if (c == '\n' || c == ';') {
                advance();
                out.push_back({Tok::Separator, c == ';' ? ";" : "\n", pos});
            } else if (is_digit(c) || (c == '.' && is_digit(peek(1)))) {
                out.push_back(number(pos));
            } else if (c == '\'' || c == '"') {
                out.push_back(string(pos));
            } else if (is_ident_head(c)) {
                out.push_back(word(pos));
            } else {
                out.push_back(punct(pos));
            }
        }
    }

private:
    static bool is_digit(char c) { return c >= '0' && c <= '9'; }
    static bool is_ident_head(char c) { return c == '_' || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

    bool at_end() const { return i_ >= src_.size(); }
    char peek(std::size_t k = 0) const { return i_ + k < src_.size() ? src_[i_ + k] : '\0'; }
    char advance() {
        char c = src_[i_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_blank() {
        while (!at_end()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r') {
                advance();
            } else if (c == '#') {
                while (!at_end() && peek() != '\n') advance();
            } else {
                break;
            }
        }
    }

    Token number(SourcePos pos) {
        std::size_t start = i_;
        bool is_float = false;
        while (is_digit(peek())) advance();
        if (peek() == '.' && is_digit(peek(1))) {
            is_float = true;
            advance();
            while (is_digit(peek())) advance();
        } else if (peek() == '.' && !is_ident_head(peek(1))) {
            // "1." is a float
            is_float = true;
            advance();
        }
        if (peek() == 'e' || peek() == 'E') {
            std::size_t k = 1;
            if (peek(k) == '+' || peek(k) == '-') ++k;
            if (is_digit(peek(k))) {
                is_float = true;
                for (std::size_t j = 0; j < k; ++j) advance();
                while (is_digit(peek())) advance();
            }
        }
        std::string text(src_.substr(start, i_ - start));
        if (is_ident_head(peek())) throw SyntaxError(line_, col_, "invalid numeric literal");
        return {is_float ? Tok::Float : Tok::Int, std::move(text), pos};
    }

    Token string(SourcePos pos) {
        char quote = advance();
        std::string value;
        for (;;) {
            if (at_end() || peek() == '\n') throw SyntaxError(pos.line, pos.column, "unterminated string literal");
            char c = advance();
            if (c == quote) break;
            if (c != '\\') {
                value += c;
                continue;
            }
            if (at_end()) throw SyntaxError(pos.line, pos.column, "unterminated string literal");
            SourcePos esc{line_, col_ - 1};
            char e = advance();
            switch (e) {
                case 'n': value += '\n'; break;
                case 't': value += '\t'; break;
                case 'r': value += '\r'; break;
                case '\\': value += '\\'; break;
                case '\'': value += '\''; break;
                case '"': value += '"'; break;
                case 'x': {
                    auto hex = [](char h) -> int {
                        if (h >= '0' && h <= '9') return h - '0';
                        if (h >= 'a' && h <= 'f') return h - 'a' + 10;
                        if (h >= 'A' && h <= 'F') return h - 'A' + 10;
                        return -1;
                    };
                    int hi = hex(peek());
                    int lo = hex(peek(1));
                    if (hi < 0 || lo < 0) throw SyntaxError(esc.line, esc.column, "invalid \\x escape");
                    // strings stay valid UTF-8
                    if (hi > 7) throw SyntaxError(esc.line, esc.column, "\\x escape must be ASCII (00-7f)");
                    advance();
                    advance();
                    value += static_cast<char>(hi * 16 + lo);
                    break;
                }
                default: throw SyntaxError(esc.line, esc.column, std::string("unknown escape \\") + e);
            }
        }
        return {Tok::String, std::move(value), pos};
    }

    Token word(SourcePos pos) {
        std::size_t start = i_;
        while (is_ident_head(peek()) || is_digit(peek())) advance();
        std::string text(src_.substr(start, i_ - start));
        static const std::pair<std::string_view, Tok> keywords[] = {
            {"del", Tok::KwDel},   {"print", Tok::KwPrint}, {"True", Tok::KwTrue}, {"False", Tok::KwFalse},
            {"None", Tok::KwNone}, {"and", Tok::KwAnd},     {"or", Tok::KwOr},     {"not", Tok::KwNot},
        };
        for (const auto& [kw, tok] : keywords) {
            if (text == kw) return {tok, std::move(text), pos};
        }
        return {Tok::Ident, std::move(text), pos};
    }

    Token punct(SourcePos pos) {
        char c = advance();
        auto two = [&](char next, Tok yes, Tok no, std::string_view yes_text) -> Token {
            if (peek() == next) {
                advance();
                return {yes, std::string(yes_text), pos};
            }
            return {no, std::string(1, c), pos};
        };
        switch (c) {
            case '+': return {Tok::Plus, "+", pos};
            case '-': return {Tok::Minus, "-", pos};
            case '*': return {Tok::Star, "*", pos};
            case '/': return {Tok::Slash, "/", pos};
            case '%': return {Tok::Percent, "%", pos};
            case '(': return {Tok::LParen, "(", pos};
            case ')': return {Tok::RParen, ")", pos};
            case '[': return {Tok::LBracket, "[", pos};
            case ']': return {Tok::RBracket, "]", pos};
            case ',': return {Tok::Comma, ",", pos};
            case '=': return two('=', Tok::EqEq, Tok::Assign, "==");
            case '<': return two('=', Tok::LessEq, Tok::Less, "<=");
            case '>': return two('=', Tok::GreaterEq, Tok::Greater, ">=");
            case '!':
                if (peek() == '=') {
                    advance();
                    return {Tok::NotEq, "!=", pos};
                }
                break;
            default: break;
        }
        if (static_cast<unsigned char>(c) >= 0x80) throw SyntaxError(pos.line, pos.column, "unexpected non-ASCII character");
        throw SyntaxError(pos.line, pos.column, std::string("unexpected character '") + c + "'");
    }

    std::string_view src_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Program program() {
        Program prog;
        skip_separators();
        while (cur().kind != Tok::End) {
            prog.statements.push_back(statement());
            if (cur().kind != Tok::Separator && cur().kind != Tok::End) fail("expected end of statement");
            skip_separators();
        }
        return prog;
    }

private:
    const Token& cur() const { return toks_[i_]; }
    const Token& ahead(std::size_t k) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
    Token take() { return toks_[i_ == toks_.size() - 1 ? i_ : i_++]; }

    [[noreturn]] void fail(const std::string& what) const {
        throw SyntaxError(cur().pos.line, cur().pos.column, what + ", found " + describe(cur()));
    }

    void expect(Tok kind, std::string_view what) {
        if (cur().kind != kind) fail("expected " + std::string(what));
        take();
    }

    void skip_separators() {
        while (cur().kind == Tok::Separator) take();
    }

    Statement statement() {
        SourcePos pos = cur().pos;
        if (cur().kind == Tok::KwDel) {
            take();
            if (cur().kind != Tok::Ident) fail("expected variable name after 'del'");
            return {Delete{take().text}, pos};
        }
        if (cur().kind == Tok::KwPrint) {
            take();
            expect(Tok::LParen, "'(' after 'print'");
            Expr value = expression();
            expect(Tok::RParen, "')'");
            return {Print{std::move(value)}, pos};
        }
        if (cur().kind == Tok::Ident && ahead(1).kind == Tok::Assign) {
            std::string name = take().text;
            take();
            return {Assign{std::move(name), expression()}, pos};
        }
        return {BareExpr{expression()}, pos};
    }

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser) {
            if (++p.depth_ > kMaxDepth) p.fail("expression nested too deeply");
        }
        ~DepthGuard() { --p.depth_; }
    };

    Expr expression() {
        DepthGuard guard(*this);
        return disjunction();
    }

    static Expr binary(BinaryOp op, Expr lhs, Expr rhs) {
        SourcePos pos = lhs.pos;
        return Expr{Binary{op, std::move(lhs), std::move(rhs)}, pos};
    }

    Expr disjunction() {
        Expr lhs = conjunction();
        while (cur().kind == Tok::KwOr) {
            take();
            lhs = binary(BinaryOp::Or, std::move(lhs), conjunction());
        }
        return lhs;
    }

    Expr conjunction() {
        Expr lhs = negation();
        while (cur().kind == Tok::KwAnd) {
            take();
            lhs = binary(BinaryOp::And, std::move(lhs), negation());
        }
        return lhs;
    }

    Expr negation() {
        DepthGuard guard(*this);
        if (cur().kind == Tok::KwNot) {
            SourcePos pos = take().pos;
            return Expr{Unary{UnaryOp::Not, negation()}, pos};
        }
        return comparison();
    }

    static std::optional<BinaryOp> comparison_op(Tok t) {
        switch (t) {
            case Tok::EqEq: return BinaryOp::Eq;
            case Tok::NotEq: return BinaryOp::Ne;
            case Tok::Less: return BinaryOp::Lt;
            case Tok::LessEq: return BinaryOp::Le;
            case Tok::Greater: return BinaryOp::Gt;
            case Tok::GreaterEq: return BinaryOp::Ge;
            default: return std::nullopt;
        }
    }

    Expr comparison() {
        Expr lhs = sum();
        if (auto op = comparison_op(cur().kind)) {
            take();
            lhs = binary(*op, std::move(lhs), sum());
            if (comparison_op(cur().kind)) fail("chained comparisons are not supported");
        }
        return lhs;
    }

    Expr sum() {
        Expr lhs = term();
        while (cur().kind == Tok::Plus || cur().kind == Tok::Minus) {
            BinaryOp op = take().kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
            lhs = binary(op, std::move(lhs), term());
        }
        return lhs;
    }

    Expr term() {
        Expr lhs = unary();
        for (;;) {
            BinaryOp op;
            switch (cur().kind) {
                case Tok::Star: op = BinaryOp::Mul; break;
                case Tok::Slash: op = BinaryOp::Div; break;
                case Tok::Percent: op = BinaryOp::Mod; break;
                default: return lhs;
            }
            take();
            lhs = binary(op, std::move(lhs), unary());
        }
    }

    Expr unary() {
        DepthGuard guard(*this);
        if (cur().kind == Tok::Minus) {
            SourcePos pos = take().pos;
            return Expr{Unary{UnaryOp::Neg, unary()}, pos};
        }
        return postfix();
    }

    Expr postfix() {
        Expr e = primary();
        while (cur().kind == Tok::LBracket) {
            take();
            Expr idx = expression();
            expect(Tok::RBracket, "']'");
            SourcePos pos = e.pos;
            e = Expr{Index{std::move(e), std::move(idx)}, pos};
        }
        return e;
    }

    std::vector<Expr> items(Tok close, std::string_view close_text) {
        std::vector<Expr> out;
        if (cur().kind != close) {
            out.push_back(expression());
            while (cur().kind == Tok::Comma) {
                take();
                out.push_back(expression());
            }
        }
        expect(close, close_text);
        return out;
    }

    Expr primary() {
        const Token& t = cur();
        SourcePos pos = t.pos;
        switch (t.kind) {
            case Tok::Int: {
                std::int64_t v = 0;
                auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
                if (ec != std::errc{}) throw SyntaxError(pos.line, pos.column, "integer literal too large");
                take();
                return Expr{Literal{Value::integer(v)}, pos};
            }
            case Tok::Float: {
                double v = std::strtod(t.text.c_str(), nullptr);
                take();
                return Expr{Literal{Value::real(v)}, pos};
            }
            case Tok::String: return Expr{Literal{Value::string(take().text)}, pos};
            case Tok::KwTrue: take(); return Expr{Literal{Value::boolean(true)}, pos};
            case Tok::KwFalse: take(); return Expr{Literal{Value::boolean(false)}, pos};
            case Tok::KwNone: take(); return Expr{Literal{Value::none()}, pos};
            case Tok::Ident: {
                std::string name = take().text;
                if (cur().kind == Tok::LParen) {
                    take();
                    return Expr{Call{std::move(name), items(Tok::RParen, "')'")}, pos};
                }
                return Expr{NameRef{std::move(name)}, pos};
            }
            case Tok::LParen: {
                take();
                Expr inner = expression();
                expect(Tok::RParen, "')'");
                return inner;
            }
            case Tok::LBracket: {
                take();
                return Expr{ListExpr{items(Tok::RBracket, "']'")}, pos};
            }
            default: fail("expected expression");
        }
    }

    static constexpr int kMaxDepth = 200;

    std::vector<Token> toks_;
    std::size_t i_ = 0;
    int depth_ = 0;
};

// Binding strength used by the printer; higher binds tighter.
int precedence(const Expr& e) {
    if (const auto* b = std::get_if<Binary>(&e.node)) {
        switch (b->op) {
            case BinaryOp::Or: return 1;
            case BinaryOp::And: return 2;
            case BinaryOp::Add:
            case BinaryOp::Sub: return 5;
            case BinaryOp::Mul:
            case BinaryOp::Div:
            case BinaryOp::Mod: return 6;
            default: return 4;
        }
    }
    if (const auto* u = std::get_if<Unary>(&e.node)) return u->op == UnaryOp::Not ? 3 : 7;
    if (std::holds_alternative<Index>(e.node)) return 8;
    return 9;
}

void print_expr(std::string& out, const Expr& e);

void print_operand(std::string& out, const Expr& e, bool parens) {
    if (parens) out += '(';
    print_expr(out, e);
    if (parens) out += ')';
}

void print_list(std::string& out, const std::vector<Expr>& items) {
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        print_expr(out, items[i]);
    }
}

void print_expr(std::string& out, const Expr& e) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Literal>) {
                out += repr(n.value);
            } else if constexpr (std::is_same_v<T, NameRef>) {
                out += n.name;
            } else if constexpr (std::is_same_v<T, Unary>) {
                int self = precedence(e);
                out += n.op == UnaryOp::Not ? "not " : "-";
                print_operand(out, *n.operand, precedence(*n.operand) < self);
            } else if constexpr (std::is_same_v<T, Binary>) {
                int self = precedence(e);
                bool non_assoc = self == 4;
                print_operand(out, *n.lhs, precedence(*n.lhs) < self || (non_assoc && precedence(*n.lhs) == self));
                out += ' ';
                out += to_string(n.op);
                out += ' ';
                print_operand(out, *n.rhs, precedence(*n.rhs) <= self);
            } else if constexpr (std::is_same_v<T, Index>) {
                print_operand(out, *n.target, precedence(*n.target) < 8);
                out += '[';
                print_expr(out, *n.index);
                out += ']';
            } else if constexpr (std::is_same_v<T, Call>) {
                out += n.function;
                out += '(';
                print_list(out, n.args);
                out += ')';
            } else {
                out += '[';
                print_list(out, n.items);
                out += ']';
            }
        },
        e.node);
}

std::string location_message(int line, int column, const std::string& message) {
    return "SyntaxError: line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message;
}

}  // namespace

std::string_view to_string(BinaryOp op) {
    switch (op) {
        // clang-format off
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Mod: return "%";
        case BinaryOp::Eq:  return "==";
        case BinaryOp::Ne:  return "!=";
        case BinaryOp::Lt:  return "<";
        case BinaryOp::Le:  return "<=";
        case BinaryOp::Gt:  return ">";
        case BinaryOp::Ge:  return ">=";
        case BinaryOp::And: return "and";
        case BinaryOp::Or:  return "or";
        // clang-format on
    }
    return "?";
}

bool Call::operator==(const Call& other) const { return function == other.function && args == other.args; }
bool ListExpr::operator==(const ListExpr& other) const { return items == other.items; }

SyntaxError::SyntaxError(int line, int column, std::string message)
    : Error(ErrorCode::BadRequest, location_message(line, column, message)),
      line_(line),
      column_(column),
      detail_(std::move(message)) {}

Program parse(std::string_view source) { return Parser(Lexer(source).run()).program(); }

std::string pretty_print(const Expr& expr) {
    std::string out;
    print_expr(out, expr);
    return out;
}

std::string pretty_print(const Program& program) {
    std::string out;
    for (std::size_t i = 0; i < program.statements.size(); ++i) {
        if (i) out += '\n';
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Assign>) {
                    out += s.name + " = " + pretty_print(s.value);
                } else if constexpr (std::is_same_v<T, Delete>) {
                    out += "del " + s.name;
                } else if constexpr (std::is_same_v<T, Print>) {
                    out += "print(" + pretty_print(s.value) + ")";
                } else {
                    out += pretty_print(s.value);
                }
            },
            program.statements[i].node);
    }
    return out;
}

}  // namespace statevc::kernel
