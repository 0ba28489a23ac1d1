#pragma once

// Deterministic cell language: a small, closed, expression-oriented language
// whose interpreter is the execution oracle for consistency checks.
//
// Grammar (EBNF, see docs/cell-language.md):
//
//   program    = { sep } [ stmt { sep { sep } stmt } ] { sep } ;
//   sep        = NEWLINE | ";" ;
//   stmt       = "del" IDENT | "print" "(" expr ")" | IDENT "=" expr | expr ;
//   expr       = or ;
//   or         = and { "or" and } ;
//   and        = not { "and" not } ;
//   not        = "not" not | comparison ;
//   comparison = sum [ ("=="|"!="|"<"|"<="|">"|">=") sum ] ;
//   sum        = term { ("+"|"-") term } ;
//   term       = unary { ("*"|"/"|"%") unary } ;
//   unary      = "-" unary | postfix ;
//   postfix    = primary { "[" expr "]" } ;
//   primary    = INT | FLOAT | STRING | "True" | "False" | "None"
//              | IDENT [ "(" [ expr { "," expr } ] ")" ]
//              | "(" expr ")" | "[" [ expr { "," expr } ] "]" ;

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "statevc/error.hpp"
#include "statevc/value.hpp"

namespace statevc::kernel {

/// Owning pointer with value semantics (deep copy, deep equality).
template <class T>
class Box {
public:
    Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
    Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
    Box(Box&&) noexcept = default;
    Box& operator=(const Box& other) {
        if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
        return *this;
    }
    Box& operator=(Box&&) noexcept = default;

    const T& operator*() const { return *ptr_; }
    const T* operator->() const { return ptr_.get(); }

    friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

private:
    std::unique_ptr<T> ptr_;
};

struct SourcePos {
    int line = 1;
    int column = 1;
};

enum class UnaryOp { Neg, Not };
enum class BinaryOp { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

std::string_view to_string(BinaryOp op);

struct Expr;

struct Literal {
    Value value;
    bool operator==(const Literal&) const = default;
};
struct NameRef {
    std::string name;
    bool operator==(const NameRef&) const = default;
};
struct Unary {
    UnaryOp op;
    Box<Expr> operand;
    bool operator==(const Unary&) const = default;
};
struct Binary {
    BinaryOp op;
    Box<Expr> lhs;
    Box<Expr> rhs;
    bool operator==(const Binary&) const = default;
};
struct Index {
    Box<Expr> target;
    Box<Expr> index;
    bool operator==(const Index&) const = default;
};
struct Call {
    std::string function;
    std::vector<Expr> args;
    bool operator==(const Call&) const;
};
struct ListExpr {
    std::vector<Expr> items;
    bool operator==(const ListExpr&) const;
};

/// Equality is structural; source positions are ignored.
struct Expr {
    std::variant<Literal, NameRef, Unary, Binary, Index, Call, ListExpr> node;
    SourcePos pos;

    friend bool operator==(const Expr& a, const Expr& b) { return a.node == b.node; }
};

struct Assign {
    std::string name;
    Expr value;
    bool operator==(const Assign&) const = default;
};
struct Delete {
    std::string name;
    bool operator==(const Delete&) const = default;
};
struct Print {
    Expr value;
    bool operator==(const Print&) const = default;
};
struct BareExpr {
    Expr value;
    bool operator==(const BareExpr&) const = default;
};

struct Statement {
    std::variant<Assign, Delete, Print, BareExpr> node;
    SourcePos pos;

    friend bool operator==(const Statement& a, const Statement& b) { return a.node == b.node; }
};

struct Program {
    std::vector<Statement> statements;
    bool operator==(const Program&) const = default;
};

class SyntaxError : public Error {
public:
    SyntaxError(int line, int column, std::string message);

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    int line_;
    int column_;
    std::string detail_;
};

/// Parses cell source. Columns and lines are 1-based and count bytes.
/// Throws SyntaxError.
Program parse(std::string_view source);

/// Source text that parses back to a structurally equal program.
std::string pretty_print(const Program& program);
std::string pretty_print(const Expr& expr);

struct ExecResult {
    Environment env;
    std::string output;
    bool error = false;
};

/// Runs one cell. Prints and the value of a trailing bare expression become
/// the output (newline-joined). Parse and runtime errors are folded into the
/// output; statements before a runtime error keep their effects.
ExecResult exec_one(Environment env, std::string_view source);

struct HistoryResult {
    Environment env;
    std::vector<std::string> outputs;
    std::vector<bool> errors;
};

/// exec_one folded over an empty environment.
HistoryResult exec_history(const std::vector<std::string>& sources);

}  // namespace statevc::kernel
