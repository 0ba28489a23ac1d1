#include <gtest/gtest.h>

#include "statevc/search.hpp"
#include "statevc/session.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"
#include "support/trace_gen.hpp"

using namespace statevc;
using statevc::fixtures::TempDir;

namespace {

ErrorCode parse_error(std::string_view q) {
    try {
        SearchQuery::parse(q);
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::BadRequest;
}

}  // namespace

TEST(SearchQuery, ParsesFieldsAndQuotes) {
    const auto q = SearchQuery::parse("var:prediction message:\"fix split\" baseline");
    ASSERT_EQ(q.clauses.size(), 3u);
    EXPECT_EQ(q.clauses[0], (SearchClause{SearchField::Var, "prediction"}));
    EXPECT_EQ(q.clauses[1], (SearchClause{SearchField::Message, "fix split"}));
    EXPECT_EQ(q.clauses[2], (SearchClause{SearchField::Text, "baseline"}));
}

TEST(SearchQuery, RejectsMalformed) {
    EXPECT_EQ(parse_error("message:\"\""), ErrorCode::BadQuery);
    EXPECT_EQ(parse_error("message:"), ErrorCode::BadQuery);
    EXPECT_EQ(parse_error(""), ErrorCode::BadQuery);
    EXPECT_EQ(parse_error("   "), ErrorCode::BadQuery);
    EXPECT_EQ(parse_error("color:red"), ErrorCode::BadQuery);
    EXPECT_EQ(parse_error("tag:\"open"), ErrorCode::BadQuery);
}

TEST(SearchQuery, CaseInsensitiveContains) {
    EXPECT_TRUE(contains_ignore_case("Baseline Model", "line mod"));
    EXPECT_FALSE(contains_ignore_case("abc", "abd"));
}

TEST(Search, VarClauseFindsTouchingCommits) {
    TempDir dir;
    CommitStore store(dir.path());
    auto s = Session::open(store);
    const auto a = s.add_cell(CellKind::Code, "prediction = 1");
    const auto b = s.add_cell(CellKind::Code, "other = 2");
    const auto c = s.add_cell(CellKind::Code, "del prediction");
    const auto v1 = s.execute_cell(a);
    s.execute_cell(b);
    const auto v3 = s.execute_cell(c);
    EXPECT_EQ(search(store, SearchQuery::parse("var:prediction")), (std::vector<CommitId>{v1, v3}));
    EXPECT_TRUE(search(store, SearchQuery::parse("var:predict")).empty());
}

TEST(Search, ClausesAreConjunctive) {
    TempDir dir;
    CommitStore store(dir.path());
    auto s = Session::open(store);
    const auto a = s.add_cell(CellKind::Code, "x = 1");
    const auto v1 = s.execute_cell(a);
    s.annotate(v1, std::string("Baseline"), std::string("first model"));
    EXPECT_EQ(search(store, SearchQuery::parse("baseline var:x")), std::vector<CommitId>{v1});
    EXPECT_EQ(search(store, SearchQuery::parse("text:model branch:MAIN")), std::vector<CommitId>{v1});
    EXPECT_TRUE(search(store, SearchQuery::parse("baseline var:y")).empty());
}

class SearchOracle : public ::testing::TestWithParam<int> {};

TEST_P(SearchOracle, MatchesBruteForce) {
    TempDir dir;
    CommitStore store(dir.path());
    auto s = Session::open(store);
    fixtures::TraceRunner runner(s, static_cast<std::uint64_t>(GetParam()));
    runner.run();
    for (const std::string name : {"a", "b", "c", "d", "e", "f"})
        EXPECT_EQ(search(store, SearchQuery::parse("var:" + name)), fixtures::brute_search(store, "var", name));
    for (const std::string needle : {"message", "3", "tag1", "b1", "main"}) {
        for (const std::string field : {"message", "tag", "branch"})
            EXPECT_EQ(search(store, SearchQuery::parse(field + ":" + needle)), fixtures::brute_search(store, field, needle));
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, SearchOracle, ::testing::Range(0, 8));
