#pragma once

// Commit search.
//
// Query syntax: whitespace-separated `field:needle` clauses, all of which
// must match. Fields are message, tag, branch, var and text; a bare term is
// a text clause. Needles may be double-quoted to include spaces.
//
//   var:prediction
//   message:"fix split" branch:main
//   baseline                      (message or tag contains "baseline")

#include <string>
#include <string_view>
#include <vector>

#include "statevc/commit.hpp"

namespace statevc {

class CommitStore;

enum class SearchField { Message, Tag, Branch, Var, Text };

std::string_view to_string(SearchField field);

struct SearchClause {
    SearchField field;
    std::string needle;

    bool operator==(const SearchClause&) const = default;
};

struct SearchQuery {
    std::vector<SearchClause> clauses;

    /// Throws Error(BadQuery) on an empty needle, an unknown field, an
    /// unterminated quote or an empty query.
    static SearchQuery parse(std::string_view text);
};

/// ASCII case-insensitive substring test.
bool contains_ignore_case(std::string_view haystack, std::string_view needle);

bool matches(const Commit& commit, const SearchClause& clause);

/// Matching commit ids in append order.
std::vector<CommitId> search(const CommitStore& store, const SearchQuery& query);

}  // namespace statevc
