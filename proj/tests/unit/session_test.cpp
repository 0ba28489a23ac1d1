#include <gtest/gtest.h>

#include "statevc/session.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"
#include "support/trace_gen.hpp"

using namespace statevc;
using statevc::fixtures::SessionSnapshot;
using statevc::fixtures::TempDir;

namespace {

ErrorCode error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::BadRequest;
}

std::vector<std::int64_t> counters(const Session& s) {
    std::vector<std::int64_t> out;
    for (const auto& c : s.notebook().cells)
        if (c.exec_counter) out.push_back(*c.exec_counter);
    return out;
}

struct Fixture {
    TempDir dir;
    CommitStore store{dir.path()};
    Session s = Session::open(store);
};

}  // namespace

TEST(Session, OpenCreatesEmptyRoot) {
    Fixture f;
    ASSERT_EQ(f.store.size(), 1u);
    const auto root = f.store.get(f.store.commit_ids()[0]);
    EXPECT_FALSE(root->code_parent);
    EXPECT_TRUE(root->code.cells.empty());
    EXPECT_EQ(f.s.head(), (Head{root->id, root->id}));
    EXPECT_EQ(f.s.branch(), "main");
    EXPECT_TRUE(is_consistent(f.s.version()));
}

TEST(Session, FirstExecution) {
    Fixture f;
    const auto c = f.s.add_cell(CellKind::Code, "x=1");
    const auto v1 = f.s.execute_cell(c);
    const auto commit = f.store.get(v1);
    EXPECT_EQ(commit->var_delta, (std::map<std::string, Value>{{"x", Value::integer(1)}}));
    EXPECT_EQ(commit->history_tail, (HistoryEntry{c, "x=1", 1}));
    EXPECT_EQ(f.s.notebook().find(c)->exec_counter, 1);
    EXPECT_EQ(f.s.head(), (Head{v1, v1}));
    EXPECT_EQ(f.s.next_counter(), 2);
}

TEST(Session, ErroringCellStillCommits) {
    Fixture f;
    const auto c = f.s.add_cell(CellKind::Code, "a = 5\nprint(a)\nb = nope");
    const auto v = f.s.execute_cell(c);
    const auto* cell = f.store.get(v)->code.find(c);
    EXPECT_TRUE(cell->error);
    EXPECT_EQ(cell->output, "5\nNameError: nope is not defined");
    EXPECT_EQ(f.store.materialize_variables(v).size(), 1u);
    EXPECT_TRUE(is_consistent(f.s.version()));
}

TEST(Session, MarkdownCellsAreInert) {
    Fixture f;
    f.s.execute_cell(f.s.add_cell(CellKind::Code, "x = 1"));
    const auto before = f.s.history();
    const auto md = f.s.add_cell(CellKind::Markdown, "# notes");
    EXPECT_EQ(f.s.history(), before);
    EXPECT_EQ(error_of([&] { f.s.execute_cell(md); }), ErrorCode::NotCodeCell);
}

TEST(Session, RollbackRewindsCountersAndKeepsCode) {
    Fixture f;
    std::vector<CommitId> v;
    for (int i = 1; i <= 5; ++i) v.push_back(f.s.execute_cell(f.s.add_cell(CellKind::Code, "v" + std::to_string(i) + " = " + std::to_string(i))));
    const auto code_before = f.s.notebook();
    f.s.rollback_data(v[0]);
    EXPECT_EQ(counters(f.s), std::vector<std::int64_t>{1});
    EXPECT_EQ(f.s.env().size(), 1u);
    EXPECT_EQ(f.s.head(), (Head{v[4], v[0]}));
    ASSERT_EQ(f.s.notebook().cells.size(), code_before.cells.size());
    for (std::size_t i = 0; i < code_before.cells.size(); ++i)
        EXPECT_EQ(f.s.notebook().cells[i].source, code_before.cells[i].source);
    EXPECT_TRUE(is_consistent(f.s.version()));
}

TEST(Session, RollbackToHeadIsNoOp) {
    Fixture f;
    const auto v = f.s.execute_cell(f.s.add_cell(CellKind::Code, "x = 1"));
    const auto before = SessionSnapshot::of(f.s);
    EXPECT_EQ(f.s.classify(v, CheckoutMode::DataOnly), CheckoutClass::SafePastData);
    f.s.rollback_data(v);
    EXPECT_EQ(SessionSnapshot::of(f.s), before);
}

TEST(Session, SiblingAndFutureRollbacksAreRejected) {
    Fixture f;
    const auto a = f.s.add_cell(CellKind::Code, "x = 1");
    const auto b = f.s.add_cell(CellKind::Code, "y = 2");
    const auto c = f.s.add_cell(CellKind::Code, "z = 3");
    const auto v1 = f.s.execute_cell(a);
    const auto v2 = f.s.execute_cell(b);
    f.s.checkout_both(v1);
    const auto v3 = f.s.execute_cell(c);
    EXPECT_EQ(f.s.branch(), "b1");
    EXPECT_EQ(f.store.get(v3)->branch, "b1");
    EXPECT_EQ(f.store.branches().at("main"), v2);

    const auto before = SessionSnapshot::of(f.s);
    EXPECT_EQ(error_of([&] { f.s.rollback_data(v2); }), ErrorCode::UnsafeUnrelatedData);
    EXPECT_EQ(SessionSnapshot::of(f.s), before);
    EXPECT_EQ(f.store.read_head(), before.head);

    f.s.rollback_data(v1);
    EXPECT_EQ(error_of([&] { f.s.rollback_data(v3); }), ErrorCode::UnsafeFutureData);
    EXPECT_EQ(error_of([&] { f.s.checkout(v1, CheckoutMode::CodeOnly); }), ErrorCode::UnsafeOnlyCode);
}

TEST(Session, CheckoutBothRestoresCommit) {
    Fixture f;
    const auto a = f.s.add_cell(CellKind::Code, "x = 1");
    const auto v1 = f.s.execute_cell(a);
    f.s.edit_cell(a, "x = 2");
    const auto v2 = f.s.execute_cell(a);
    f.s.checkout_both(v1);
    EXPECT_EQ(f.s.notebook(), f.store.get(v1)->code);
    EXPECT_EQ(f.s.env(), f.store.materialize_variables(v1));
    EXPECT_EQ(f.s.head(), (Head{v1, v1}));
    EXPECT_TRUE(is_consistent(f.s.version()));
    const auto before = SessionSnapshot::of(f.s);
    f.s.checkout_both(v1);
    EXPECT_EQ(SessionSnapshot::of(f.s), before);
    f.s.checkout_both(v2);
    EXPECT_EQ(f.s.notebook().find(a)->source, "x = 2");
}

TEST(Session, ModifiedCellThenRollbackIsConsistent) {
    Fixture f;
    CellId c;
    CommitId d9;
    for (int i = 1; i <= 9; ++i) {
        const auto id = f.s.add_cell(CellKind::Code, "print(" + std::to_string(i) + ")\nk = " + std::to_string(i));
        d9 = f.s.execute_cell(id);
        if (i == 5) c = id;
    }
    f.s.edit_cell(c, "k = k * 10\nprint(k)");
    const auto v10 = f.s.commit_manual();
    EXPECT_EQ(f.store.get(v10)->data_parent, d9);
    const auto v11 = f.s.execute_cell(c);
    EXPECT_EQ(f.s.notebook().find(c)->output, "90");
    f.s.rollback_data(d9);
    EXPECT_EQ(f.s.head(), (Head{v11, d9}));
    EXPECT_TRUE(is_consistent(f.s.version()));
    EXPECT_FALSE(f.s.notebook().find(c)->exec_counter);
    EXPECT_TRUE(fixtures::replay_consistent(f.s.notebook(), f.s.history()));
}

TEST(Session, ExecutionAfterRollbackGetsTwoParents) {
    Fixture f;
    std::vector<CommitId> v;
    for (int i = 1; i <= 4; ++i) v.push_back(f.s.execute_cell(f.s.add_cell(CellKind::Code, "n = " + std::to_string(i))));
    f.s.rollback_data(v[0]);
    const auto v5 = f.s.execute_cell(f.s.notebook().cells[2].id);
    EXPECT_EQ(f.store.get(v5)->code_parent, v[3]);
    EXPECT_EQ(f.store.get(v5)->data_parent, v[0]);
    const auto h = f.store.history_at(v5);
    ASSERT_EQ(h.size(), 2u);
    EXPECT_EQ(h[0], f.store.history_at(v[3])[0]);
    EXPECT_EQ(f.s.head(), (Head{v5, v5}));
}

TEST(Session, RecoverRestoresState) {
    TempDir dir;
    SessionSnapshot before;
    {
        CommitStore store(dir.path());
        auto s = Session::open(store);
        std::vector<CommitId> v;
        for (int i = 1; i <= 3; ++i) v.push_back(s.execute_cell(s.add_cell(CellKind::Code, "q = " + std::to_string(i))));
        s.rollback_data(v[1]);
        before = SessionSnapshot::of(s);
    }
    CommitStore store(dir.path());
    auto s = Session::recover_latest(store);
    EXPECT_EQ(SessionSnapshot::of(s), before);
    EXPECT_TRUE(s.head().split());
    EXPECT_EQ(s.add_cell(CellKind::Code, "w = 0"), "c4");
}

TEST(Session, RecoverEmptyStore) {
    TempDir dir;
    CommitStore store(dir.path());
    EXPECT_EQ(error_of([&] { Session::recover_latest(store); }), ErrorCode::EmptyStore);
}

TEST(Session, CellOperationsValidate) {
    Fixture f;
    EXPECT_EQ(error_of([&] { f.s.edit_cell("c99", "x"); }), ErrorCode::UnknownCell);
    EXPECT_EQ(error_of([&] { f.s.add_cell(CellKind::Code, "\xff"); }), ErrorCode::BadRequest);
    const auto a = f.s.add_cell(CellKind::Code, "x = 1");
    const auto b = f.s.add_cell(CellKind::Code, "y = 1", 0);
    EXPECT_EQ(f.s.notebook().cells[0].id, b);
    f.s.move_cell(b, 1);
    EXPECT_EQ(f.s.notebook().cells[0].id, a);
    f.s.delete_cell(a);
    EXPECT_EQ(f.s.notebook().cells.size(), 1u);
    EXPECT_TRUE(f.s.dirty());
}

class SessionProperty : public ::testing::TestWithParam<int> {};

TEST_P(SessionProperty, EveryCommitAndLiveVersionIsConsistent) {
    TempDir dir;
    CommitStore store(dir.path());
    auto s = Session::open(store);
    fixtures::TraceRunner runner(s, static_cast<std::uint64_t>(GetParam()) + 9000);
    runner.run(std::nullopt, [&](std::size_t) {
        EXPECT_TRUE(is_consistent(s.version()));
        EXPECT_EQ(s.env(), kernel::exec_history(fixtures::sources_of(s.history())).env);
    });
    for (const auto& r : runner.records()) EXPECT_TRUE(r.failed_cleanly);
    for (const auto& id : store.commit_ids()) {
        const auto c = store.get(id);
        EXPECT_TRUE(fixtures::replay_consistent(c->code, store.history_at(id)));
        EXPECT_EQ(store.materialize_variables(id), fixtures::replay_env(store, id));
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, SessionProperty, ::testing::Range(0, 10));
