// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails.

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "statevc/codec.hpp"
#include "statevc/diff.hpp"
#include "statevc/history_graph.hpp"
#include "statevc/payload.hpp"
#include "statevc/search.hpp"
#include "statevc/session.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"
#include "support/trace_gen.hpp"

using namespace statevc;
using namespace statevc::fixtures;
using codec::Json;

namespace {

constexpr int kTraces = 1000;
constexpr int kFoldTraces = 200;
constexpr int kKillPoints = 20;
constexpr std::uint64_t kSeedBase = 0x5eed0000;

struct Verdict {
    bool pass = true;
    std::string first_failure;
    std::size_t checks = 0;

    void check(bool ok, const std::string& what) {
        ++checks;
        if (!ok && pass) {
            pass = false;
            first_failure = what;
        }
    }
};

std::string tag(int trace, const std::string& what) { return "trace " + std::to_string(trace) + ": " + what; }

Json row_json(const GraphRow& r) {
    Json edges = Json::array(), labels = Json::array();
    for (const auto& e : r.edges) edges.push_back({{"to", e.to.str()}, {"kind", to_string(e.kind)}});
    for (const auto& l : r.labels) labels.push_back({{"kind", to_string(l.kind)}, {"text", l.text}});
    return {{"commit", r.commit.str()}, {"row", r.row}, {"lane", r.lane}, {"edges", edges}, {"labels", labels}};
}

std::string rows_dump(const std::vector<GraphRow>& rows) {
    Json j = Json::array();
    for (const auto& r : rows) j.push_back(row_json(r));
    return j.dump();
}

/// Criteria 1, 2, 6, 7a, 8 and 10 share the randomized traces.
struct TraceSuite {
    Verdict c1, c2, c6, c7a, c8, c10;
    std::size_t commits = 0, rollbacks = 0, rejections = 0, folded = 0;

    void run_trace(int index) {
        TempDir dir;
        CommitStore store(dir.path());
        auto session = Session::open(store);
        TraceRunner runner(session, kSeedBase + static_cast<std::uint64_t>(index));
        try {
            runner.run();
        } catch (const std::exception& e) {
            c1.check(false, tag(index, std::string("trace raised ") + e.what()));
            return;
        }
        for (const auto& r : runner.records())
            c2.check(r.failed_cleanly, tag(index, "a rejected checkout changed the session"));

        const auto ids = store.commit_ids();
        commits += ids.size();

        std::map<CommitId, Environment> replayed;
        for (const auto& id : ids) {
            const auto c = store.get(id);
            const auto history = store.history_at(id);
            replayed[id] = kernel::exec_history(sources_of(history)).env;

            // 1: consistency of the persisted version, via the replay oracle
            const Version v{c->code, {replayed[id], history}};
            c1.check(is_consistent(v).consistent() && replay_consistent(c->code, history),
                     tag(index, "commit " + id.short_str() + " inconsistent"));

            // 7a: materialization equals replay
            bool same = false;
            try {
                same = store.materialize_variables(id) == replayed[id];
            } catch (const std::exception&) {
            }
            c7a.check(same, tag(index, "materialize differs from replay at " + id.short_str()));
        }

        check_rollbacks(index, session, store, ids);
        check_search(index, store, ids, replayed);

        const auto head = session.head();
        const auto layout = linearize(store, head, store.branches());
        const auto b = branch_point_count(store);
        c10.check(layout.lanes <= b + 1, tag(index, std::to_string(layout.lanes) + " lanes for " + std::to_string(b) +
                                                        " branch points"));
        c10.check(layout.rows.size() == ids.size(), tag(index, "layout lost rows"));

        if (index < kFoldTraces) {
            const auto g = fold(layout.rows, importance(store));
            const auto hidden = grouped_members(g);
            folded += hidden.size();
            c6.check(hidden == unimportant_oracle(store), tag(index, "folded set differs from oracle"));
            c6.check(rows_dump(g.expand_all()) == rows_dump(layout.rows), tag(index, "expand-all differs"));
        }
    }

    void check_rollbacks(int index, Session& session, CommitStore& store, const std::vector<CommitId>& ids) {
        const auto saved_head = store.read_head();
        const auto head_history = session.history();
        for (const auto& id : ids) {
            const auto target_history = store.history_at(id);
            const auto expected = data_only_class_oracle(head_history, target_history);
            Session copy = session;
            try {
                if (expected == CheckoutClass::SafePastData) {
                    copy.rollback_data(id);
                    ++rollbacks;
                    c2.check(is_consistent(copy.version()).consistent() &&
                                 replay_consistent(copy.notebook(), copy.history()),
                             tag(index, "rollback to " + id.short_str() + " inconsistent"));
                    c2.check(copy.head().data == id && copy.head().code == session.head().code,
                             tag(index, "rollback moved the wrong head"));
                } else {
                    const auto before = SessionSnapshot::of(copy);
                    bool rejected = false;
                    try {
                        copy.rollback_data(id);
                    } catch (const Error& e) {
                        rejected = e.code() == rejection_code(expected);
                    }
                    ++rejections;
                    c2.check(rejected, tag(index, "rollback to " + id.short_str() + " not rejected as " +
                                                      std::string(to_string(expected))));
                    c2.check(SessionSnapshot::of(copy) == before, tag(index, "rejected rollback changed state"));
                }
                bool code_only = false;
                try {
                    copy.checkout(id, CheckoutMode::CodeOnly);
                } catch (const Error& e) {
                    code_only = e.code() == ErrorCode::UnsafeOnlyCode;
                }
                c2.check(code_only, tag(index, "CodeOnly checkout accepted"));
            } catch (const std::exception& e) {
                c2.check(false, tag(index, std::string("unexpected exception ") + e.what()));
            }
        }
        if (saved_head) store.write_head(*saved_head);
    }

    void check_search(int index, const CommitStore& store, const std::vector<CommitId>& ids,
                      const std::map<CommitId, Environment>& replayed) {
        // successive materialized environments along the data parent
        std::map<std::string, std::vector<CommitId>> by_var;
        for (const auto& id : ids) {
            const auto c = store.get(id);
            const Environment empty;
            const Environment& before = c->data_parent ? replayed.at(*c->data_parent) : empty;
            const Environment& now = replayed.at(id);
            std::set<std::string> names;
            for (const auto& [n, v] : now)
                if (const auto* o = before.find(n); !o || !(*o == v)) names.insert(n);
            for (const auto& [n, v] : before)
                if (!now.contains(n)) names.insert(n);
            for (const auto& n : names) by_var[n].push_back(id);
        }
        for (const std::string name : {"a", "b", "c", "d", "e", "f"}) {
            c8.check(search(store, SearchQuery::parse("var:" + name)) == by_var[name],
                     tag(index, "var:" + name + " differs from environment scan"));
        }
        for (const std::string field : {"message", "tag", "branch"}) {
            for (const std::string needle : {"MESSAGE", "3", "tag", "b1", "ain"}) {
                c8.check(search(store, SearchQuery::parse(field + ":" + needle)) == brute_search(store, field, needle),
                         tag(index, field + ":" + needle + " differs from scan"));
            }
        }
    }
};

Verdict criterion3(std::string& detail) {
    Verdict v;
    TempDir dir;
    CommitStore store(dir.path());
    auto s = Session::open(store);
    CellId edited;
    CommitId d9;
    for (int i = 1; i <= 9; ++i) {
        const auto id = s.add_cell(CellKind::Code, "acc = " + (i == 1 ? std::string("0") : "acc + " + std::to_string(i)) +
                                                   "\nprint(acc)");
        d9 = s.execute_cell(id);
        if (i == 4) edited = id;
    }
    s.edit_cell(edited, "acc = acc * 100\nprint(acc)");
    const auto v10 = s.commit_manual();
    const auto v11 = s.execute_cell(edited);
    v.check(store.get(v10)->data_parent == d9 && store.get(v10)->code_parent == d9, "V10 parents");
    v.check(store.get(v11)->code_parent == v10 && store.get(v11)->data_parent == v10, "V11 parents");
    v.check(store.history_at(v10) == store.history_at(d9) &&
                store.materialize_variables(v10) == store.materialize_variables(d9),
            "V10 data equals D9");
    s.rollback_data(d9);
    const auto version = s.version();
    v.check(s.head() == (Head{v11, d9}), "head after rollback");
    v.check(is_consistent(version).consistent(), "is_consistent(C11, D9)");
    v.check(replay_consistent(version.code, version.data.history), "replay oracle on (C11, D9)");
    v.check(!version.code.find(edited)->exec_counter, "edited cell still counted");
    detail = "(C11, D9) consistent, edited cell uncounted";
    return v;
}

Verdict criterion4(std::string& detail) {
    Verdict v;
    TempDir dir;
    CommitStore store(dir.path());
    auto s = Session::open(store);
    const auto c1 = s.add_cell(CellKind::Code, "data_df = [1, 2, 3]");
    const auto c2 = s.add_cell(CellKind::Code, "model = len(data_df)");
    const auto c3 = s.add_cell(CellKind::Code, "fig = str(model)");
    const auto c4 = s.add_cell(CellKind::Code, "model = model + 1\ndel fig\napp = [model]");
    const auto v1 = s.execute_cell(c1);
    const auto v2 = s.execute_cell(c2);
    const auto v3 = s.execute_cell(c3);
    const auto v4 = s.execute_cell(c4);
    v.check(*store.version_table(v3) == VariableVersionTable{{"data_df", v1}, {"model", v2}, {"fig", v3}}, "table(V3)");
    v.check(*store.version_table(v4) == VariableVersionTable{{"data_df", v1}, {"model", v4}, {"app", v4}}, "table(V4)");
    const auto d = diff_variables(store, v3, v4);
    v.check(d.changed == std::set<std::string>{"model"}, "changed");
    v.check(d.deleted_right == std::set<std::string>{"fig"}, "deleted");
    v.check(d.added_right == std::set<std::string>{"app"}, "added");
    v.check(d.unchanged == std::set<std::string>{"data_df"}, "unchanged");
    detail = "tables and diff match: changed {model}, deleted {fig}, added {app}";
    return v;
}

Verdict criterion5(std::string& detail) {
    Verdict v;
    TempDir dir;
    CommitStore store(dir.path());
    auto s = Session::open(store);
    std::vector<CommitId> c;
    for (int i = 1; i <= 4; ++i)
        c.push_back(s.execute_cell(s.add_cell(CellKind::Code, "step = " + std::to_string(i))));
    s.rollback_data(c[0]);

    auto labels_of = [&](const Json& graph, const CommitId& id) {
        std::set<std::string> out;
        for (const auto& row : graph["rows"])
            if (row["commit"] == id.str())
                for (const auto& l : row["labels"]) out.insert(l["kind"].get<std::string>());
        return out;
    };
    const auto split = payload::graph(store, s.head(), false);
    v.check(labels_of(split, c[3]).count("head_code") && !labels_of(split, c[3]).count("head_data"), "head_code label");
    v.check(labels_of(split, c[0]).count("head_data") && !labels_of(split, c[0]).count("head_code"), "head_data label");

    const auto v5 = s.execute_cell(s.notebook().cells[1].id);
    v.check(store.get(v5)->code_parent == c[3], "code parent is the old tip");
    v.check(store.get(v5)->data_parent == c[0], "data parent is the rollback target");

    const auto graph = payload::graph(store, s.head(), false);
    std::set<std::string> kinds;
    for (const auto& row : graph["rows"])
        if (row["commit"] == v5.str())
            for (const auto& e : row["edges"]) kinds.insert(e["kind"].get<std::string>());
    v.check(kinds == std::set<std::string>{"code_parent", "data_parent"}, "two edge kinds");
    const auto after = labels_of(graph, v5);
    v.check(after.count("head_code") && after.count("head_data"), "labels rejoin after execution");
    detail = "V5 has code_parent and data_parent edges; split labels before the execution";
    return v;
}

Verdict criterion7b(std::string& detail) {
    Verdict v;
    TempDir dir;
    CommitStore store(dir.path());
    auto s = Session::open(store);
    std::string init;
    for (int i = 0; i < 50; ++i) init += "v" + std::to_string(i) + " = 0\n";
    s.execute_cell(s.add_cell(CellKind::Code, init));
    std::vector<CellId> bump;
    for (int i = 0; i < 50; ++i)
        bump.push_back(s.add_cell(CellKind::Code, "v" + std::to_string(i) + " = v" + std::to_string(i) + " + 1"));
    std::mt19937_64 rng(kSeedBase);
    std::uniform_int_distribution<std::size_t> pick(0, 49);
    for (int n = 0; n < 500; ++n) s.execute_cell(bump[pick(rng)]);
    const auto stored = store.stored_value_count();
    v.check(stored <= 550, std::to_string(stored) + " values stored");
    v.check(s.env() == kernel::exec_history(sources_of(s.history())).env, "final environment");
    detail = std::to_string(stored) + " values stored (bound 550)";
    return v;
}

SessionSnapshot snapshot_at(const std::filesystem::path& dir, std::uint64_t seed, std::size_t steps) {
    CommitStore store(dir);
    auto s = Session::open(store);
    TraceRunner runner(s, seed);
    runner.run(steps);
    return SessionSnapshot::of(s);
}

Verdict criterion7c(std::string& detail) {
    Verdict v;
    std::mt19937_64 rng(kSeedBase + 77);
    int done = 0;
    for (int attempt = 0; done < kKillPoints && attempt < 10 * kKillPoints; ++attempt) {
        const std::uint64_t seed = kSeedBase + 100000 + static_cast<std::uint64_t>(attempt);
        std::vector<std::size_t> quiescent;
        {
            TempDir probe;
            CommitStore store(probe.path());
            auto s = Session::open(store);
            TraceRunner runner(s, seed);
            runner.run();
            for (std::size_t i = 0; i < runner.records().size(); ++i)
                if (!runner.records()[i].dirty_after) quiescent.push_back(i + 1);
        }
        if (quiescent.empty()) continue;
        const std::size_t k = quiescent[std::uniform_int_distribution<std::size_t>(0, quiescent.size() - 1)(rng)];

        TempDir killed, reference;
        std::cout.flush();
        const pid_t pid = fork();
        if (pid == 0) {
            try {
                {
                    CommitStore store(killed.path());
                    auto s = Session::open(store);
                    TraceRunner(s, seed).run(k);
                    std::ofstream log(killed / "log.bin", std::ios::binary | std::ios::app);
                    const char torn[] = {0x7f, 0x01, 0x00, 0x00, 0x11, 0x22, 0x33, 0x44, '{', '"', 't'};
                    log.write(torn, sizeof(torn));
                    log.flush();
                    ::raise(SIGKILL);
                }
            } catch (...) {
            }
            _exit(99);
        }
        int status = 0;
        ::waitpid(pid, &status, 0);
        v.check(WIFSIGNALED(status) && WTERMSIG(status) == SIGKILL, "child did not die by SIGKILL");

        const auto expected = snapshot_at(reference.path(), seed, k);
        CommitStore store(killed.path());
        v.check(store.truncated_bytes() == 11, "torn tail not truncated at kill point " + std::to_string(done));
        const auto recovered = SessionSnapshot::of(Session::recover_latest(store));
        v.check(recovered == expected, "kill point " + std::to_string(done) + " (seed " + std::to_string(seed) +
                                           ", step " + std::to_string(k) + ") restored a different state");
        ++done;
    }
    v.check(done == kKillPoints, "only " + std::to_string(done) + " kill points");
    detail = std::to_string(done) + " kill points recovered";
    return v;
}

Verdict criterion9(std::string& detail) {
    Verdict v;
    std::mt19937_64 rng(kSeedBase + 9);
    int scenarios = 0;
    for (int t = 0; t < 50; ++t) {
        TempDir dir;
        CommitStore store(dir.path());
        auto s = Session::open(store);
        const int m = std::uniform_int_distribution<int>(1, 15)(rng);
        std::vector<CellId> cells;
        for (int i = 0; i < m + 3; ++i) cells.push_back(s.add_cell(CellKind::Code, "w" + std::to_string(i) + " = " + std::to_string(i)));
        std::shuffle(cells.begin(), cells.end(), rng);
        std::vector<CommitId> commits{s.head().data};
        for (int i = 0; i < m; ++i) commits.push_back(s.execute_cell(cells[static_cast<std::size_t>(i)]));
        const int target = std::uniform_int_distribution<int>(0, m)(rng);
        s.rollback_data(commits[static_cast<std::size_t>(target)]);

        std::multiset<std::int64_t> seen;
        for (const auto& c : s.notebook().cells)
            if (c.exec_counter) seen.insert(*c.exec_counter);
        std::multiset<std::int64_t> want;
        for (int i = 1; i <= target; ++i) want.insert(i);
        v.check(seen == want, "m=" + std::to_string(m) + " rollback to " + std::to_string(target));
        for (int i = 0; i < target; ++i)
            v.check(s.notebook().find(cells[static_cast<std::size_t>(i)])->exec_counter == i + 1, "counter on the wrong cell");
        v.check(s.next_counter() == target + 1, "next counter");
        ++scenarios;
    }
    detail = std::to_string(scenarios) + " rollbacks rewound to exactly 1..m";
    return v;
}

void report(int n, const Verdict& v, const std::string& detail, bool& all) {
    all = all && v.pass;
    std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << " ("
              << (v.pass ? detail : v.first_failure) << ")" << std::endl;
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    bool all = true;

    TraceSuite suite;
    for (int i = 0; i < kTraces; ++i) suite.run_trace(i);
    const auto suite_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::string d3, d4, d5, d7b, d7c, d9;
    const auto c3 = criterion3(d3);
    const auto c4 = criterion4(d4);
    const auto c5 = criterion5(d5);
    const auto c7b = criterion7b(d7b);
    const auto c7c = criterion7c(d7c);
    const auto c9 = criterion9(d9);

    Verdict c7;
    for (const Verdict* part : std::initializer_list<const Verdict*>{&suite.c7a, &c7b, &c7c}) c7.check(part->pass, part->first_failure);

    char secs[32];
    std::snprintf(secs, sizeof(secs), "%.1f", suite_time);
    report(1, suite.c1, std::to_string(kTraces) + " traces, " + std::to_string(suite.commits) +
                            " commits consistent in " + secs + " s", all);
    report(2, suite.c2, std::to_string(suite.rollbacks) + " safe rollbacks consistent, " +
                            std::to_string(suite.rejections) + " unsafe targets rejected with the oracle class", all);
    report(3, c3, d3, all);
    report(4, c4, d4, all);
    report(5, c5, d5, all);
    report(6, suite.c6, std::to_string(kFoldTraces) + " traces, " + std::to_string(suite.folded) +
                            " hidden commits match the oracle, expand-all identical", all);
    report(7, c7, "materialize equals replay on every commit; " + d7b + "; " + d7c, all);
    report(8, suite.c8, std::to_string(suite.c8.checks) + " queries equal brute-force scans", all);
    report(9, c9, d9, all);
    report(10, suite.c10, "lanes <= B+1 on all " + std::to_string(kTraces) + " traces", all);

    const auto total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::snprintf(secs, sizeof(secs), "%.1f", total);
    std::cout << (all ? "all criteria passed" : "some criteria failed") << " in " << secs << " s" << std::endl;
    return all ? 0 : 1;
}
