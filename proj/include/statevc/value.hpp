#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace statevc {

struct Value;
using List = std::vector<Value>;

struct None {
    bool operator==(const None&) const = default;
};

/// A runtime value of the cell language.
///
/// Equality is structural and total: values of different kinds are never
/// equal, floats compare by bit pattern (all NaNs are one value), so
/// `a == b` holds exactly when `repr(a) == repr(b)`.
struct Value {
    using Storage = std::variant<None, bool, std::int64_t, double, std::string, List>;

    Storage data;

    Value() = default;

    static Value none() { return Value{}; }
    static Value boolean(bool b) { return Value{Storage{std::in_place_type<bool>, b}}; }
    static Value integer(std::int64_t i) { return Value{Storage{std::in_place_type<std::int64_t>, i}}; }
    static Value real(double d) { return Value{Storage{std::in_place_type<double>, d}}; }
    static Value string(std::string s) { return Value{Storage{std::in_place_type<std::string>, std::move(s)}}; }
    static Value list(List items) { return Value{Storage{std::in_place_type<List>, std::move(items)}}; }

    bool is_none() const { return std::holds_alternative<None>(data); }
    bool is_bool() const { return std::holds_alternative<bool>(data); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(data); }
    bool is_float() const { return std::holds_alternative<double>(data); }
    bool is_string() const { return std::holds_alternative<std::string>(data); }
    bool is_list() const { return std::holds_alternative<List>(data); }
    bool is_number() const { return is_int() || is_float(); }

    bool as_bool() const { return std::get<bool>(data); }
    std::int64_t as_int() const { return std::get<std::int64_t>(data); }
    double as_float() const { return std::get<double>(data); }
    const std::string& as_string() const { return std::get<std::string>(data); }
    const List& as_list() const { return std::get<List>(data); }

    friend bool operator==(const Value& a, const Value& b);

private:
    explicit Value(Storage s) : data(std::move(s)) {}
};

/// Shortest decimal text that parses back to the same double. Always carries
/// a '.' or an exponent so it reads as a float ("1.0", "1e+20", "inf").
std::string format_float(double d);

/// Canonical source-like representation: strings quoted, floats via
/// format_float, lists as "[a, b]".
std::string repr(const Value& v);

/// The text `print` shows: strings unquoted, everything else as repr.
std::string display(const Value& v);

/// "NoneType", "bool", "int", "float", "str" or "list".
std::string_view type_name(const Value& v);

/// Ordered variable map. Iteration follows insertion order; rebinding a name
/// keeps its slot. Equality ignores order (two environments are equal when
/// they bind the same names to equal values).
class Environment {
public:
    using Binding = std::pair<std::string, Value>;
    using const_iterator = std::vector<Binding>::const_iterator;

    const Value* find(std::string_view name) const;
    bool contains(std::string_view name) const { return find(name) != nullptr; }
    void set(std::string name, Value value);
    bool erase(std::string_view name);

    std::size_t size() const { return bindings_.size(); }
    bool empty() const { return bindings_.empty(); }
    const_iterator begin() const { return bindings_.begin(); }
    const_iterator end() const { return bindings_.end(); }

    friend bool operator==(const Environment& a, const Environment& b);

private:
    std::vector<Binding> bindings_;
};

bool is_identifier(std::string_view name);

/// Well-formed UTF-8: no overlongs, surrogates or code points past U+10FFFF.
bool is_valid_utf8(std::string_view text);

}  // namespace statevc
