#include <algorithm>
#include <cmath>
#include <functional>

#include "statevc/kernel.hpp"

namespace statevc::kernel {

namespace {

constexpr std::size_t kMaxSequenceLength = 100000;
constexpr std::size_t kMaxValueNodes = 100000;

struct RuntimeError {
    std::string text;
};

[[noreturn]] void raise(std::string kind, const std::string& message) { throw RuntimeError{kind + ": " + message}; }

[[noreturn]] void type_error(const std::string& message) { raise("TypeError", message); }

std::string quoted_type(const Value& v) { return "'" + std::string(type_name(v)) + "'"; }

template <class Op>
std::int64_t checked(Op op, std::int64_t x, std::int64_t y) {
    std::int64_t r = 0;
    if (op(x, y, &r)) raise("OverflowError", "integer overflow");
    return r;
}

constexpr auto kAdd = [](std::int64_t x, std::int64_t y, std::int64_t* r) { return __builtin_add_overflow(x, y, r); };
constexpr auto kSub = [](std::int64_t x, std::int64_t y, std::int64_t* r) { return __builtin_sub_overflow(x, y, r); };
constexpr auto kMul = [](std::int64_t x, std::int64_t y, std::int64_t* r) { return __builtin_mul_overflow(x, y, r); };

constexpr int kMaxNesting = 64;

// Counts list elements recursively, stopping once the limit is exceeded.
std::size_t node_count(const Value& v, std::size_t limit, int depth) {
    if (!v.is_list()) return 1;
    if (depth > kMaxNesting) raise("RecursionError", "list nested too deeply");
    std::size_t n = 1;
    for (const Value& item : v.as_list()) {
        n += node_count(item, limit, depth + 1);
        if (n > limit) return n;
    }
    return n;
}

Value bounded(Value v) {
    if (v.is_string() && v.as_string().size() > kMaxSequenceLength * 10) raise("MemoryError", "value too large");
    if (v.is_list() && node_count(v, kMaxValueNodes, 1) > kMaxValueNodes) raise("MemoryError", "value too large");
    return v;
}

double as_double(const Value& v) { return v.is_int() ? static_cast<double>(v.as_int()) : v.as_float(); }

bool truthy(const Value& v) {
    return std::visit(
        [](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, None>) return false;
            else if constexpr (std::is_same_v<T, std::string> || std::is_same_v<T, List>) return !x.empty();
            else return x != 0;
        },
        v.data);
}

// UTF-8 code point boundaries; the source is UTF-8 by contract.
std::vector<std::size_t> codepoint_starts(const std::string& s) {
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) starts.push_back(i);
    }
    return starts;
}

bool language_equal(const Value& a, const Value& b) {
    if (a.is_number() && b.is_number()) {
        if (a.is_int() && b.is_int()) return a.as_int() == b.as_int();
        // long double holds every int64 and every double exactly
        auto widen = [](const Value& v) { return v.is_int() ? static_cast<long double>(v.as_int()) : v.as_float(); };
        return widen(a) == widen(b);
    }
    if (a.is_list() && b.is_list()) {
        const auto& x = a.as_list();
        const auto& y = b.as_list();
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!language_equal(x[i], y[i])) return false;
        }
        return true;
    }
    if (a.data.index() != b.data.index()) return false;
    return a == b;
}

// Three-way ordering for <, <=, >, >=. Numbers, strings and lists of those.
int compare(const Value& a, const Value& b, std::string_view op) {
    if (a.is_number() && b.is_number()) {
        if (a.is_int() && b.is_int()) return a.as_int() < b.as_int() ? -1 : (a.as_int() > b.as_int() ? 1 : 0);
        long double x = a.is_int() ? static_cast<long double>(a.as_int()) : a.as_float();
        long double y = b.is_int() ? static_cast<long double>(b.as_int()) : b.as_float();
        if (std::isnan(static_cast<double>(x)) || std::isnan(static_cast<double>(y))) return 2;  // unordered
        return x < y ? -1 : (x > y ? 1 : 0);
    }
    if (a.is_string() && b.is_string()) {
        int c = a.as_string().compare(b.as_string());
        return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    if (a.is_list() && b.is_list()) {
        const auto& x = a.as_list();
        const auto& y = b.as_list();
        for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
            if (language_equal(x[i], y[i])) continue;
            return compare(x[i], y[i], op);
        }
        return x.size() < y.size() ? -1 : (x.size() > y.size() ? 1 : 0);
    }
    type_error("'" + std::string(op) + "' not supported between " + quoted_type(a) + " and " + quoted_type(b));
}

Value arithmetic(BinaryOp op, const Value& a, const Value& b) {
    auto unsupported = [&]() -> Value {
        type_error("unsupported operand types for " + std::string(to_string(op)) + ": " + quoted_type(a) + " and " +
                   quoted_type(b));
    };
    if (op == BinaryOp::Add && a.is_string() && b.is_string()) return bounded(Value::string(a.as_string() + b.as_string()));
    if (op == BinaryOp::Add && a.is_list() && b.is_list()) {
        List out = a.as_list();
        out.insert(out.end(), b.as_list().begin(), b.as_list().end());
        return bounded(Value::list(std::move(out)));
    }
    if (!a.is_number() || !b.is_number()) return unsupported();

    if ((op == BinaryOp::Div || op == BinaryOp::Mod) && as_double(b) == 0.0) raise("ZeroDivisionError", "division by zero");

    if (a.is_int() && b.is_int() && op != BinaryOp::Div) {
        std::int64_t x = a.as_int();
        std::int64_t y = b.as_int();
        std::int64_t r = 0;
        switch (op) {
            case BinaryOp::Add: return Value::integer(checked(kAdd, x, y));
            case BinaryOp::Sub: return Value::integer(checked(kSub, x, y));
            case BinaryOp::Mul: return Value::integer(checked(kMul, x, y));
            case BinaryOp::Mod: {
                if (y == -1) return Value::integer(0);
                r = x % y;
                if (r != 0 && ((r < 0) != (y < 0))) r += y;
                return Value::integer(r);
            }
            default: break;
        }
    }

    double x = as_double(a);
    double y = as_double(b);
    switch (op) {
        case BinaryOp::Add: return Value::real(x + y);
        case BinaryOp::Sub: return Value::real(x - y);
        case BinaryOp::Mul: return Value::real(x * y);
        case BinaryOp::Div: return Value::real(x / y);
        case BinaryOp::Mod: {
            double r = std::fmod(x, y);
            if (r != 0 && ((r < 0) != (y < 0))) r += y;
            return Value::real(r);
        }
        default: return unsupported();
    }
}

class Interpreter {
public:
    explicit Interpreter(Environment& env) : env_(env) {}

    Value eval(const Expr& e) {
        return std::visit([&](const auto& n) { return eval_node(n); }, e.node);
    }

private:
    Value eval_node(const Literal& n) { return n.value; }

    Value eval_node(const NameRef& n) {
        const Value* v = env_.find(n.name);
        if (v == nullptr) raise("NameError", n.name + " is not defined");
        return *v;
    }

    Value eval_node(const Unary& n) {
        Value v = eval(*n.operand);
        if (n.op == UnaryOp::Not) return Value::boolean(!truthy(v));
        if (v.is_int()) {
            return Value::integer(checked(kSub, 0, v.as_int()));
        }
        if (v.is_float()) return Value::real(-v.as_float());
        type_error("bad operand type for unary -: " + quoted_type(v));
    }

    Value eval_node(const Binary& n) {
        if (n.op == BinaryOp::And || n.op == BinaryOp::Or) {
            Value lhs = eval(*n.lhs);
            bool t = truthy(lhs);
            if ((n.op == BinaryOp::And) ? !t : t) return lhs;
            return eval(*n.rhs);
        }
        Value lhs = eval(*n.lhs);
        Value rhs = eval(*n.rhs);
        switch (n.op) {
            case BinaryOp::Eq: return Value::boolean(language_equal(lhs, rhs));
            case BinaryOp::Ne: return Value::boolean(!language_equal(lhs, rhs));
            case BinaryOp::Lt: return Value::boolean(compare(lhs, rhs, "<") == -1);
            case BinaryOp::Le: {
                int c = compare(lhs, rhs, "<=");
                return Value::boolean(c == -1 || c == 0);
            }
            case BinaryOp::Gt: return Value::boolean(compare(lhs, rhs, ">") == 1);
            case BinaryOp::Ge: {
                int c = compare(lhs, rhs, ">=");
                return Value::boolean(c == 1 || c == 0);
            }
            default: return arithmetic(n.op, lhs, rhs);
        }
    }

    static std::size_t resolve_index(const Value& idx, std::size_t size) {
        if (!idx.is_int()) type_error("indices must be integers, not " + quoted_type(idx));
        std::int64_t i = idx.as_int();
        std::int64_t n = static_cast<std::int64_t>(size);
        if (i < 0) i += n;
        if (i < 0 || i >= n) raise("IndexError", "index out of range");
        return static_cast<std::size_t>(i);
    }

    Value eval_node(const Index& n) {
        Value target = eval(*n.target);
        Value idx = eval(*n.index);
        if (target.is_list()) return target.as_list()[resolve_index(idx, target.as_list().size())];
        if (target.is_string()) {
            const std::string& s = target.as_string();
            auto starts = codepoint_starts(s);
            std::size_t k = resolve_index(idx, starts.size());
            std::size_t end = k + 1 < starts.size() ? starts[k + 1] : s.size();
            return Value::string(s.substr(starts[k], end - starts[k]));
        }
        type_error(quoted_type(target) + " object is not subscriptable");
    }

    Value eval_node(const ListExpr& n) {
        List items;
        items.reserve(n.items.size());
        for (const auto& item : n.items) items.push_back(eval(item));
        return bounded(Value::list(std::move(items)));
    }

    Value eval_node(const Call& n) {
        std::vector<Value> args;
        args.reserve(n.args.size());
        for (const auto& a : n.args) args.push_back(eval(a));
        const std::string& f = n.function;

        auto arity = [&](std::size_t lo, std::size_t hi) {
            if (args.size() < lo || args.size() > hi) {
                std::string expected = lo == hi ? std::to_string(lo) : std::to_string(lo) + " to " + std::to_string(hi);
                type_error(f + "() takes " + expected + " argument(s) (" + std::to_string(args.size()) + " given)");
            }
        };

        if (f == "len") {
            arity(1, 1);
            if (args[0].is_list()) return Value::integer(static_cast<std::int64_t>(args[0].as_list().size()));
            if (args[0].is_string()) return Value::integer(static_cast<std::int64_t>(codepoint_starts(args[0].as_string()).size()));
            type_error("object of type " + quoted_type(args[0]) + " has no len()");
        }
        if (f == "str") {
            arity(1, 1);
            return Value::string(display(args[0]));
        }
        if (f == "abs") {
            arity(1, 1);
            if (args[0].is_int()) {
                std::int64_t v = args[0].as_int();
                if (v >= 0) return args[0];
                return Value::integer(checked(kSub, 0, v));
            }
            if (args[0].is_float()) return Value::real(std::fabs(args[0].as_float()));
            type_error("bad operand type for abs(): " + quoted_type(args[0]));
        }
        if (f == "sum") {
            arity(1, 1);
            if (!args[0].is_list()) type_error(quoted_type(args[0]) + " object is not iterable");
            Value total = Value::integer(0);
            for (const Value& item : args[0].as_list()) {
                if (!item.is_number()) type_error("unsupported operand types for +: " + quoted_type(total) + " and " + quoted_type(item));
                total = arithmetic(BinaryOp::Add, total, item);
            }
            return total;
        }
        if (f == "min" || f == "max") {
            if (args.empty()) type_error(f + "() expected at least 1 argument, got 0");
            const List* items = nullptr;
            List storage;
            if (args.size() == 1) {
                if (!args[0].is_list()) type_error(quoted_type(args[0]) + " object is not iterable");
                items = &args[0].as_list();
            } else {
                storage = std::move(args);
                items = &storage;
            }
            if (items->empty()) raise("ValueError", f + "() arg is an empty sequence");
            std::size_t best = 0;
            int want = f == "min" ? -1 : 1;
            for (std::size_t i = 1; i < items->size(); ++i) {
                if (compare((*items)[i], (*items)[best], f == "min" ? "<" : ">") == want) best = i;
            }
            return (*items)[best];
        }
        if (f == "range") {
            arity(1, 3);
            for (const Value& a : args) {
                if (!a.is_int()) type_error(quoted_type(a) + " object cannot be interpreted as an integer");
            }
            std::int64_t start = 0, stop = 0, step = 1;
            if (args.size() == 1) {
                stop = args[0].as_int();
            } else {
                start = args[0].as_int();
                stop = args[1].as_int();
                if (args.size() == 3) step = args[2].as_int();
            }
            if (step == 0) raise("ValueError", "range() arg 3 must not be zero");
            long double count_ld = step > 0 ? std::ceil((static_cast<long double>(stop) - start) / step)
                                            : std::ceil((static_cast<long double>(start) - stop) / -static_cast<long double>(step));
            std::size_t count = count_ld > 0 ? static_cast<std::size_t>(count_ld) : 0;
            if (count > kMaxSequenceLength) raise("ValueError", "range() result too large");
            List out;
            out.reserve(count);
            for (std::size_t i = 0; i < count; ++i) out.push_back(Value::integer(start + static_cast<std::int64_t>(i) * step));
            return Value::list(std::move(out));
        }
        if (f == "concat") {
            if (args.empty()) type_error("concat() expected at least 1 argument, got 0");
            if (std::all_of(args.begin(), args.end(), [](const Value& v) { return v.is_string(); })) {
                std::string out;
                for (const Value& a : args) out += a.as_string();
                return bounded(Value::string(std::move(out)));
            }
            if (std::all_of(args.begin(), args.end(), [](const Value& v) { return v.is_list(); })) {
                List out;
                for (const Value& a : args) out.insert(out.end(), a.as_list().begin(), a.as_list().end());
                return bounded(Value::list(std::move(out)));
            }
            type_error("concat() arguments must be all strings or all lists");
        }
        raise("NameError", f + " is not defined");
    }

    Environment& env_;
};

}  // namespace

ExecResult exec_one(Environment env, std::string_view source) {
    ExecResult result;
    std::vector<std::string> lines;
    Program program;
    try {
        program = parse(source);
    } catch (const SyntaxError& e) {
        result.env = std::move(env);
        result.output = e.what();
        result.error = true;
        return result;
    }

    Interpreter interp(env);
    try {
        for (std::size_t i = 0; i < program.statements.size(); ++i) {
            const Statement& stmt = program.statements[i];
            const bool last = i + 1 == program.statements.size();
            std::visit(
                [&](const auto& s) {
                    using T = std::decay_t<decltype(s)>;
                    if constexpr (std::is_same_v<T, Assign>) {
                        env.set(s.name, interp.eval(s.value));
                    } else if constexpr (std::is_same_v<T, Delete>) {
                        if (!env.erase(s.name)) raise("NameError", s.name + " is not defined");
                    } else if constexpr (std::is_same_v<T, Print>) {
                        lines.push_back(display(interp.eval(s.value)));
                    } else {
                        Value v = interp.eval(s.value);
                        if (last) lines.push_back(repr(v));
                    }
                },
                stmt.node);
        }
    } catch (const RuntimeError& e) {
        lines.push_back(e.text);
        result.error = true;
    }

    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) result.output += '\n';
        result.output += lines[i];
    }
    result.env = std::move(env);
    return result;
}

HistoryResult exec_history(const std::vector<std::string>& sources) {
    HistoryResult result;
    for (const auto& src : sources) {
        ExecResult step = exec_one(std::move(result.env), src);
        result.env = std::move(step.env);
        result.outputs.push_back(std::move(step.output));
        result.errors.push_back(step.error);
    }
    return result;
}

}  // namespace statevc::kernel
