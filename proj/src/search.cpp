#include "statevc/search.hpp"

#include <algorithm>

#include "statevc/commit_store.hpp"
#include "statevc/error.hpp"

namespace statevc {

std::string_view to_string(SearchField field) {
    switch (field) {
        case SearchField::Message: return "message";
        case SearchField::Tag: return "tag";
        case SearchField::Branch: return "branch";
        case SearchField::Var: return "var";
        case SearchField::Text: return "text";
    }
    return "text";
}

namespace {

[[noreturn]] void bad_query(const std::string& why) { throw Error(ErrorCode::BadQuery, why); }

std::optional<SearchField> parse_field(std::string_view name) {
    for (auto f : {SearchField::Message, SearchField::Tag, SearchField::Branch, SearchField::Var, SearchField::Text}) {
        if (to_string(f) == name) return f;
    }
    return std::nullopt;
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

}  // namespace

SearchQuery SearchQuery::parse(std::string_view text) {
    SearchQuery q;
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_space(text[i])) {
            ++i;
            continue;
        }
        // One token: an optional `field:` prefix, then a bare or quoted needle.
        std::string head;
        std::string needle;
        bool quoted = false;
        std::optional<SearchField> field;
        while (i < text.size() && !is_space(text[i])) {
            char c = text[i];
            if (c == '"') {
                auto close = text.find('"', i + 1);
                if (close == std::string_view::npos) bad_query("unterminated quote");
                needle.append(text.substr(i + 1, close - i - 1));
                quoted = true;
                i = close + 1;
                continue;
            }
            if (c == ':' && !field && !quoted) {
                field = parse_field(needle);
                if (!field) bad_query("unknown search field '" + needle + "'");
                head = needle;
                needle.clear();
                ++i;
                continue;
            }
            needle += c;
            ++i;
        }
        if (needle.empty()) bad_query(head.empty() ? "empty search term" : "empty needle for '" + head + "'");
        q.clauses.push_back({field.value_or(SearchField::Text), std::move(needle)});
    }
    if (q.clauses.empty()) bad_query("empty query");
    return q;
}

bool contains_ignore_case(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                          [](char a, char b) { return lower(a) == lower(b); });
    return it != haystack.end();
}

bool matches(const Commit& c, const SearchClause& clause) {
    auto opt = [&](const std::optional<std::string>& s) { return s && contains_ignore_case(*s, clause.needle); };
    switch (clause.field) {
        case SearchField::Message: return opt(c.message);
        case SearchField::Tag: return opt(c.tag);
        case SearchField::Branch: return contains_ignore_case(c.branch, clause.needle);
        case SearchField::Var: return c.var_delta.contains(clause.needle) || c.var_deleted.contains(clause.needle);
        case SearchField::Text: return opt(c.message) || opt(c.tag);
    }
    return false;
}

std::vector<CommitId> search(const CommitStore& store, const SearchQuery& query) {
    std::vector<CommitId> out;
    for (const auto& id : store.commit_ids()) {
        auto commit = store.get(id);
        if (std::all_of(query.clauses.begin(), query.clauses.end(), [&](const auto& cl) { return matches(*commit, cl); })) {
            out.push_back(id);
        }
    }
    return out;
}

}  // namespace statevc
