#include <gtest/gtest.h>

#include "statevc/kernel.hpp"
#include "statevc/model.hpp"

using namespace statevc;

namespace {

Cell code_cell(std::string id, std::string source, std::string output = {}, std::optional<std::int64_t> counter = {}) {
    Cell c;
    c.id = std::move(id);
    c.source = std::move(source);
    c.output = std::move(output);
    c.exec_counter = counter;
    return c;
}

std::vector<HistoryEntry> entries(std::initializer_list<std::pair<const char*, const char*>> items) {
    std::vector<HistoryEntry> out;
    for (const auto& [id, src] : items) out.push_back({id, src, static_cast<std::int64_t>(out.size()) + 1});
    return out;
}

}  // namespace

TEST(IsExecuted, SingleExecution) {
    EXPECT_EQ(is_executed(code_cell("c", "x=1"), entries({{"c", "x=1"}})), 1);
}

TEST(IsExecuted, EditedCellIsNotExecuted) {
    EXPECT_EQ(is_executed(code_cell("c", "x=2"), entries({{"c", "x=1"}})), std::nullopt);
}

TEST(IsExecuted, RerunTakesLastOccurrence) {
    const auto h = entries({{"c", "x=1"}, {"d", "y=2"}, {"c", "x=1"}});
    EXPECT_EQ(is_executed(code_cell("c", "x=1"), h), 3);
}

TEST(IsExecuted, MarkdownNeverExecuted) {
    Cell md = code_cell("c", "x=1");
    md.kind = CellKind::Markdown;
    EXPECT_EQ(is_executed(md, entries({{"c", "x=1"}})), std::nullopt);
}

TEST(Consistency, EmptyVersionIsConsistent) { EXPECT_TRUE(is_consistent(Version{})); }

TEST(Consistency, OldCodeOverNewerDataIsInconsistent) {
    // Code as it stood after the first run of `show`, data after x was
    // rebound and `show` ran again.
    CodeState c1{{code_cell("a", "x = 1"), code_cell("show", "print(x)", "1", 2)}};
    c1.cells[0].exec_counter = 1;
    const auto h9 = entries({{"a", "x = 1"}, {"show", "print(x)"}, {"b", "x = 9"}, {"show", "print(x)"}});
    DataState d9{kernel::exec_history({"x = 1", "print(x)", "x = 9", "print(x)"}).env, h9};

    const auto report = is_consistent({c1, d9});
    ASSERT_FALSE(report.consistent());
    ASSERT_EQ(report.violations.size(), 1u);
    EXPECT_EQ(report.violations[0].cell_id, "show");
    EXPECT_EQ(report.violations[0].position, 4);
    EXPECT_EQ(report.violations[0].expected, "9");
    EXPECT_EQ(report.violations[0].actual, "1");
}

TEST(Consistency, MarkdownEditsDoNotMatter) {
    CodeState code{{code_cell("a", "print(1)", "1", 1)}};
    Cell md;
    md.id = "m";
    md.kind = CellKind::Markdown;
    md.source = "# anything";
    code.cells.push_back(md);
    const auto h = entries({{"a", "print(1)"}});
    DataState data{{}, h};
    EXPECT_TRUE(is_consistent({code, data}));
    code.cells[1].source = "# changed";
    EXPECT_TRUE(is_consistent({code, data}));
}

TEST(Classify, BothAlwaysSafe) {
    const auto a = entries({{"a", "x=1"}});
    const auto b = entries({{"b", "y=1"}});
    EXPECT_EQ(classify_checkout(a, b, CheckoutMode::Both), CheckoutClass::SafeBoth);
}

TEST(Classify, CodeOnlyAlwaysUnsafe) {
    const auto a = entries({{"a", "x=1"}});
    EXPECT_EQ(classify_checkout(a, a, CheckoutMode::CodeOnly), CheckoutClass::UnsafeOnlyCode);
}

TEST(Classify, DataOnlyClasses) {
    const auto v1 = entries({{"a", "x=1"}});
    const auto v9 = entries({{"a", "x=1"}, {"b", "y=2"}, {"c", "z=3"}});
    const auto v5 = entries({{"a", "x=1"}, {"d", "w=4"}});
    EXPECT_EQ(classify_checkout(v9, v1, CheckoutMode::DataOnly), CheckoutClass::SafePastData);
    EXPECT_EQ(classify_checkout(v9, v9, CheckoutMode::DataOnly), CheckoutClass::SafePastData);
    EXPECT_EQ(classify_checkout(v1, v9, CheckoutMode::DataOnly), CheckoutClass::UnsafeFutureData);
    EXPECT_EQ(classify_checkout(v9, v5, CheckoutMode::DataOnly), CheckoutClass::UnsafeUnrelatedData);
}

TEST(Classify, PrefixComparesSourceSnapshots) {
    const auto head = entries({{"a", "x=1"}, {"b", "y=2"}});
    const auto edited = entries({{"a", "x=2"}});
    EXPECT_EQ(classify_checkout(head, edited, CheckoutMode::DataOnly), CheckoutClass::UnsafeUnrelatedData);
}

TEST(Classify, ReplayClosed) {
    DataState d{kernel::exec_history({"x = 1"}).env, entries({{"a", "x = 1"}})};
    EXPECT_TRUE(is_replay_closed(d));
    d.variables.set("y", Value::integer(0));
    EXPECT_FALSE(is_replay_closed(d));
}
