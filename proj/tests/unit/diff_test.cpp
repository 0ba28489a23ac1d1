#include <gtest/gtest.h>

#include <random>

#include "statevc/diff.hpp"
#include "statevc/session.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace statevc;
using statevc::fixtures::TempDir;

namespace {

Cell cell(std::string id, std::string source) {
    Cell c;
    c.id = std::move(id);
    c.source = std::move(source);
    return c;
}

std::size_t keeps(const std::vector<LineOp>& ops) {
    std::size_t n = 0;
    for (const auto& op : ops) n += op.kind == EditKind::Keep;
    return n;
}

std::vector<std::string> random_lines(std::mt19937_64& rng, std::size_t max_len) {
    std::uniform_int_distribution<std::size_t> len(1, max_len), sym(0, 3);
    std::vector<std::string> out(len(rng));
    for (auto& s : out) s = std::string(1, static_cast<char>('a' + sym(rng)));
    return out;
}

}  // namespace

TEST(LineDiff, SingleLineChange) {
    EXPECT_EQ(diff_text("x=1", "x=2"),
              (std::vector<LineOp>{{EditKind::Delete, "x=1"}, {EditKind::Insert, "x=2"}}));
}

TEST(LineDiff, SplitJoinInverse) {
    for (const std::string s : {"", "a", "a\n", "\n\n", "a\nb"}) EXPECT_EQ(join_lines(split_lines(s)), s);
    EXPECT_EQ(split_lines("").size(), 1u);
}

TEST(LineDiff, ApplyRejectsForeignScript) {
    const auto ops = diff_text("a\nb", "a\nc");
    EXPECT_THROW(apply_lines("q\nb", ops), Error);
}

TEST(LineDiff, MinimalAgainstLcsOracle) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 500; ++i) {
        const auto a = random_lines(rng, 12), b = random_lines(rng, 12);
        const auto ops = diff_lines(a, b);
        EXPECT_EQ(keeps(ops), fixtures::lcs_length(a, b));
        EXPECT_EQ(ops.size(), a.size() + b.size() - keeps(ops));
        EXPECT_EQ(apply_lines(join_lines(a), ops), join_lines(b));
    }
}

TEST(LineDiff, DeletionsPrecedeInsertionsInEachRun) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const auto ops = diff_lines(random_lines(rng, 10), random_lines(rng, 10));
        for (std::size_t k = 1; k < ops.size(); ++k)
            EXPECT_FALSE(ops[k - 1].kind == EditKind::Insert && ops[k].kind == EditKind::Delete);
    }
}

TEST(LineDiff, Antisymmetric) {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 200; ++i) {
        const auto a = random_lines(rng, 10), b = random_lines(rng, 10);
        const auto fwd = diff_lines(a, b), back = diff_lines(b, a);
        EXPECT_EQ(keeps(fwd), keeps(back));
        EXPECT_EQ(fwd.size(), back.size());
    }
}

TEST(CodeDiff, IdenticalIsAllKept) {
    CodeState s{{cell("a", "x=1"), cell("b", "y=2")}};
    const auto d = diff_code(s, s);
    ASSERT_EQ(d.ops.size(), 2u);
    for (const auto& op : d.ops) EXPECT_EQ(op.kind, CellOpKind::Kept);
}

TEST(CodeDiff, ModifiedCellCarriesLineScript) {
    CodeState l{{cell("a", "x=1")}}, r{{cell("a", "x=2")}};
    const auto d = diff_code(l, r);
    ASSERT_EQ(d.ops.size(), 1u);
    EXPECT_EQ(d.ops[0].kind, CellOpKind::Modified);
    EXPECT_EQ(d.ops[0].line_ops, (std::vector<LineOp>{{EditKind::Delete, "x=1"}, {EditKind::Insert, "x=2"}}));
    EXPECT_EQ(apply(d, l), r);
}

TEST(CodeDiff, InsertedCellIsOneAdd) {
    CodeState l{{cell("a", "x=1"), cell("c", "z=3")}};
    CodeState r{{cell("a", "x=1"), cell("b", "y=2"), cell("c", "z=3")}};
    const auto d = diff_code(l, r);
    ASSERT_EQ(d.ops.size(), 3u);
    EXPECT_EQ(d.ops[0].kind, CellOpKind::Kept);
    EXPECT_EQ(d.ops[1].kind, CellOpKind::Added);
    EXPECT_EQ(d.ops[1].cell.id, "b");
    EXPECT_EQ(d.ops[2].kind, CellOpKind::Kept);
    EXPECT_EQ(apply(d, l), r);
}

TEST(CodeDiff, PatchPropertyOnRandomStates) {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> n(0, 6), id(0, 7), src(0, 3);
    auto random_state = [&] {
        CodeState s;
        std::set<std::string> used;
        for (int i = n(rng); i > 0; --i) {
            auto cid = "c" + std::to_string(id(rng));
            if (!used.insert(cid).second) continue;
            s.cells.push_back(cell(cid, "v = " + std::to_string(src(rng)) + "\nprint(v)"));
        }
        return s;
    };
    for (int i = 0; i < 300; ++i) {
        const auto l = random_state(), r = random_state();
        EXPECT_EQ(apply(diff_code(l, r), l), r);
    }
}

TEST(VariableDiff, ModelFigAppExample) {
    TempDir dir;
    CommitStore store(dir.path());
    auto s = Session::open(store);
    const auto c1 = s.add_cell(CellKind::Code, "data_df = [1, 2, 3]");
    const auto c2 = s.add_cell(CellKind::Code, "model = len(data_df)");
    const auto c3 = s.add_cell(CellKind::Code, "fig = str(model)");
    const auto c4 = s.add_cell(CellKind::Code, "model = model + 1\ndel fig\napp = [model]");
    s.execute_cell(c1);
    s.execute_cell(c2);
    const auto v3 = s.execute_cell(c3);
    const auto v4 = s.execute_cell(c4);
    const auto d = diff_variables(store, v3, v4);
    EXPECT_EQ(d.changed, std::set<std::string>{"model"});
    EXPECT_EQ(d.deleted_right, std::set<std::string>{"fig"});
    EXPECT_EQ(d.added_right, std::set<std::string>{"app"});
    EXPECT_EQ(d.unchanged, std::set<std::string>{"data_df"});

    const auto same = diff_variables(store, v4, v4);
    EXPECT_TRUE(same.changed.empty() && same.added_right.empty() && same.deleted_right.empty());
    EXPECT_EQ(same.unchanged, (std::set<std::string>{"app", "data_df", "model"}));
}
