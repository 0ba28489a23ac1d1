#include "statevc/value.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace statevc {

namespace {

std::uint64_t float_bits(double d) {
    if (std::isnan(d)) return 0x7ff8000000000000ULL;
    return std::bit_cast<std::uint64_t>(d);
}

void append_quoted(std::string& out, const std::string& s) {
    const char quote = (s.find('\'') != std::string::npos && s.find('"') == std::string::npos) ? '"' : '\'';
    out += quote;
    for (unsigned char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (c == static_cast<unsigned char>(quote)) {
                    out += '\\';
                    out += static_cast<char>(c);
                } else if (c < 0x20 || c == 0x7f) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\x%02x", c);
                    out += buf;
                } else {
                    out += static_cast<char>(c);
                }
        }
    }
    out += quote;
}

void append_repr(std::string& out, const Value& v) {
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, None>) {
                out += "None";
            } else if constexpr (std::is_same_v<T, bool>) {
                out += x ? "True" : "False";
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                out += std::to_string(x);
            } else if constexpr (std::is_same_v<T, double>) {
                out += format_float(x);
            } else if constexpr (std::is_same_v<T, std::string>) {
                append_quoted(out, x);
            } else {
                out += '[';
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (i) out += ", ";
                    append_repr(out, x[i]);
                }
                out += ']';
            }
        },
        v.data);
}

}  // namespace

bool operator==(const Value& a, const Value& b) {
    if (a.data.index() != b.data.index()) return false;
    if (a.is_float()) return float_bits(a.as_float()) == float_bits(b.as_float());
    if (a.is_list()) {
        const auto& x = a.as_list();
        const auto& y = b.as_list();
        return x.size() == y.size() && std::equal(x.begin(), x.end(), y.begin());
    }
    return a.data == b.data;
}

std::string format_float(double d) {
    if (std::isnan(d)) return "nan";
    if (std::isinf(d)) return d < 0 ? "-inf" : "inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
    std::string s(buf, end);
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

std::string repr(const Value& v) {
    std::string out;
    append_repr(out, v);
    return out;
}

std::string display(const Value& v) {
    if (v.is_string()) return v.as_string();
    return repr(v);
}

std::string_view type_name(const Value& v) {
    static constexpr std::string_view names[] = {"NoneType", "bool", "int", "float", "str", "list"};
    return names[v.data.index()];
}

const Value* Environment::find(std::string_view name) const {
    auto it = std::find_if(bindings_.begin(), bindings_.end(), [&](const Binding& b) { return b.first == name; });
    return it == bindings_.end() ? nullptr : &it->second;
}

void Environment::set(std::string name, Value value) {
    auto it = std::find_if(bindings_.begin(), bindings_.end(), [&](const Binding& b) { return b.first == name; });
    if (it != bindings_.end()) {
        it->second = std::move(value);
    } else {
        bindings_.emplace_back(std::move(name), std::move(value));
    }
}

bool Environment::erase(std::string_view name) {
    auto it = std::find_if(bindings_.begin(), bindings_.end(), [&](const Binding& b) { return b.first == name; });
    if (it == bindings_.end()) return false;
    bindings_.erase(it);
    return true;
}

bool operator==(const Environment& a, const Environment& b) {
    if (a.size() != b.size()) return false;
    return std::all_of(a.begin(), a.end(), [&](const Environment::Binding& binding) {
        const Value* other = b.find(binding.first);
        return other != nullptr && *other == binding.second;
    });
}

bool is_identifier(std::string_view name) {
    auto head = [](char c) { return c == '_' || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
    auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
    return !name.empty() && head(name.front()) && std::all_of(name.begin() + 1, name.end(), tail);
}

bool is_valid_utf8(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > text.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            const auto cc = static_cast<unsigned char>(text[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        static constexpr std::uint32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
        if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += len;
    }
    return true;
}

}  // namespace statevc
