#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "statevc/api_service.hpp"
#include "statevc/commit_store.hpp"
#include "statevc/diff.hpp"
#include "statevc/error.hpp"
#include "statevc/history_graph.hpp"
#include "statevc/payload.hpp"
#include "statevc/search.hpp"
#include "statevc/session.hpp"
#include "statevc/store_lock.hpp"

namespace statevc::cli {

namespace fs = std::filesystem;
using codec::Json;

namespace {

struct Context {
    fs::path dir;
    bool json = false;
    std::ostream& out;
    std::ostream& err;

    void emit(const Json& j) const { out << j.dump(2, ' ', false, Json::error_handler_t::replace) << "\n"; }
};

/// A store opened under the advisory lock.
struct OpenStore {
    StoreLock lock;
    CommitStore store;

    OpenStore(const fs::path& dir, StoreLock::Mode mode) : lock(prepare(dir, mode), mode), store(dir) {}

    static const fs::path& prepare(const fs::path& dir, StoreLock::Mode mode) {
        if (mode == StoreLock::Mode::Shared && !fs::exists(dir / "log.bin")) {
            throw Error(ErrorCode::EmptyStore, "no store at " + dir.string() + " (run `statevc init`)");
        }
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw Error(ErrorCode::StorageIO, "cannot create " + dir.string() + ": " + ec.message());
        return dir;
    }
};

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownCommit:
        case ErrorCode::UnknownCell:
        case ErrorCode::UnknownGroup: return kUnknownId;
        case ErrorCode::UnsafeOnlyCode:
        case ErrorCode::UnsafeFutureData:
        case ErrorCode::UnsafeUnrelatedData: return kRejected;
        case ErrorCode::BadRequest:
        case ErrorCode::BadQuery:
        case ErrorCode::NotCodeCell: return kUsage;
        default: return kStoreError;
    }
}

CommitId resolve(const CommitStore& store, const std::string& text) {
    if (auto full = CommitId::parse(text); full && store.contains(*full)) return *full;
    if (auto id = store.resolve(text)) return *id;
    throw Error(ErrorCode::UnknownCommit, "unknown or ambiguous commit '" + text + "'");
}

std::string label_text(const Label& l) {
    switch (l.kind) {
        case LabelKind::HeadCode: return "HEAD:code";
        case LabelKind::HeadData: return "HEAD:data";
        case LabelKind::Branch: return l.text;
        case LabelKind::Tag: return "tag:" + l.text;
    }
    return l.text;
}

void print_row(const Context& ctx, const CommitStore& store, const GraphRow& r) {
    auto c = store.get(r.commit);
    std::string line(2 * r.lane, ' ');
    line += "* " + r.commit.short_str();
    if (!r.labels.empty()) {
        line += " (";
        for (std::size_t i = 0; i < r.labels.size(); ++i) line += (i ? ", " : "") + label_text(r.labels[i]);
        line += ")";
    }
    if (c->history_tail) {
        line += " run " + c->history_tail->cell_id + " [" + std::to_string(c->history_tail->counter) + "]";
    } else {
        line += " " + std::string(to_string(c->kind));
    }
    if (c->message) line += " \"" + *c->message + "\"";
    if (r.edges.size() == 2) line += " code<-" + r.edges[0].to.short_str() + " data<-" + r.edges[1].to.short_str();
    ctx.out << line << "\n";
}

int cmd_init(const Context& ctx) {
    OpenStore s(ctx.dir, StoreLock::Mode::Exclusive);
    Session session = Session::open(s.store);
    if (ctx.json) {
        ctx.emit(payload::head(session));
    } else {
        ctx.out << ctx.dir.string() << ": head " << session.head().code.short_str() << " on "
                << session.branch() << "\n";
    }
    return kOk;
}

int cmd_run(const Context& ctx, const std::optional<std::string>& inline_source, const std::string& file,
            const std::string& cell) {
    const int given = (inline_source ? 1 : 0) + (file.empty() ? 0 : 1) + (cell.empty() ? 0 : 1);
    if (given != 1) throw Error(ErrorCode::BadRequest, "run takes exactly one of <file>, -- 'source' or --cell <id>");

    OpenStore s(ctx.dir, StoreLock::Mode::Exclusive);
    Session session = Session::open(s.store);
    CellId id = cell;
    if (id.empty()) {
        std::string source;
        if (inline_source) {
            source = *inline_source;
        } else {
            std::ifstream in(file, std::ios::binary);
            if (!in) throw Error(ErrorCode::BadRequest, "cannot read " + file);
            std::ostringstream ss;
            ss << in.rdbuf();
            source = ss.str();
        }
        id = session.add_cell(CellKind::Code, std::move(source));
    }
    const CommitId commit = session.execute_cell(id);
    const Cell& executed = *session.notebook().find(id);
    if (ctx.json) {
        ctx.emit({{"commit", commit.str()},
                  {"cell_id", id},
                  {"counter", *executed.exec_counter},
                  {"output", executed.output},
                  {"error", executed.error}});
    } else if (!executed.output.empty()) {
        ctx.out << executed.output << "\n";
    }
    return kOk;
}

int cmd_log(const Context& ctx, bool fold) {
    OpenStore s(ctx.dir, StoreLock::Mode::Shared);
    if (s.store.empty()) throw Error(ErrorCode::EmptyStore, "store has no commits");
    const auto head = s.store.read_head();
    if (ctx.json) {
        ctx.emit(payload::graph(s.store, head, fold));
        return kOk;
    }
    const auto layout = linearize(s.store, head, s.store.branches());
    if (!fold) {
        for (const auto& r : layout.rows) print_row(ctx, s.store, r);
        return kOk;
    }
    const auto folded = statevc::fold(layout.rows, importance(s.store));
    for (const auto& item : folded.items()) {
        if (const auto* r = std::get_if<GraphRow>(&item)) {
            print_row(ctx, s.store, *r);
        } else {
            const auto& g = std::get<GroupedCommit>(item);
            ctx.out << std::string(2 * g.rows.front().lane, ' ') << "+ " << g.group_id << " (" << g.rows.size()
                    << (g.rows.size() == 1 ? " commit" : " commits") << ")\n";
        }
    }
    return kOk;
}

int cmd_checkout(const Context& ctx, const std::string& target, bool data_only, bool code_only) {
    if (data_only && code_only) throw Error(ErrorCode::BadRequest, "--data-only and --code-only are exclusive");
    OpenStore s(ctx.dir, StoreLock::Mode::Exclusive);
    Session session = Session::recover_latest(s.store);
    const CommitId id = resolve(s.store, target);
    session.checkout(id, data_only ? CheckoutMode::DataOnly : code_only ? CheckoutMode::CodeOnly : CheckoutMode::Both);
    if (ctx.json) {
        ctx.emit(payload::head(session));
    } else {
        ctx.out << "head code " << session.head().code.short_str() << ", data " << session.head().data.short_str()
                << "\n";
    }
    return kOk;
}

int cmd_tag(const Context& ctx, const std::string& target, const std::string& name, const std::optional<std::string>& message) {
    OpenStore s(ctx.dir, StoreLock::Mode::Exclusive);
    Session session = Session::recover_latest(s.store);
    const CommitId id = resolve(s.store, target);
    session.annotate(id, name, message);
    if (ctx.json) {
        ctx.emit(payload::commit(s.store, id));
    } else {
        ctx.out << id.short_str() << " tagged " << name << "\n";
    }
    return kOk;
}

int cmd_commit(const Context& ctx, const std::optional<std::string>& message, const std::optional<std::string>& tag) {
    OpenStore s(ctx.dir, StoreLock::Mode::Exclusive);
    Session session = Session::open(s.store);
    const CommitId id = session.commit_manual(message, tag);
    if (ctx.json) {
        ctx.emit({{"commit", id.str()}, {"head", payload::head(session)}});
    } else {
        ctx.out << id.short_str() << "\n";
    }
    return kOk;
}

int cmd_search(const Context& ctx, const std::vector<std::string>& terms) {
    std::string text;
    for (const auto& t : terms) text += (text.empty() ? "" : " ") + t;
    const auto query = SearchQuery::parse(text);
    OpenStore s(ctx.dir, StoreLock::Mode::Shared);
    const auto ids = search(s.store, query);
    if (ctx.json) {
        ctx.emit(payload::search(ids));
    } else {
        for (const auto& id : ids) ctx.out << id.str() << "\n";
    }
    return kOk;
}

int cmd_diff(const Context& ctx, const std::string& a_text, const std::string& b_text) {
    OpenStore s(ctx.dir, StoreLock::Mode::Shared);
    const CommitId a = resolve(s.store, a_text);
    const CommitId b = resolve(s.store, b_text);
    if (ctx.json) {
        ctx.emit(payload::diff(s.store, a, b));
        return kOk;
    }
    ctx.out << "code:\n";
    for (const auto& op : diff_code(s.store, a, b).ops) {
        ctx.out << "  " << to_string(op.kind) << " " << op.cell.id << "\n";
        for (const auto& line : op.line_ops) {
            const char* mark = line.kind == EditKind::Insert ? "+ " : line.kind == EditKind::Delete ? "- " : "  ";
            ctx.out << "    " << mark << line.text << "\n";
        }
    }
    const auto vars = diff_variables(s.store, a, b);
    ctx.out << "variables:\n";
    auto list = [&](const char* title, const std::set<std::string>& names) {
        if (names.empty()) return;
        ctx.out << "  " << title << ":";
        for (const auto& n : names) ctx.out << " " << n;
        ctx.out << "\n";
    };
    list("changed", vars.changed);
    list("added", vars.added_right);
    list("deleted", vars.deleted_right);
    list("unchanged", vars.unchanged);
    return kOk;
}

int cmd_vars(const Context& ctx, const std::string& target) {
    OpenStore s(ctx.dir, StoreLock::Mode::Shared);
    Environment env;
    if (target.empty()) {
        env = Session::recover_latest(s.store).env();
    } else {
        env = s.store.materialize_variables(resolve(s.store, target));
    }
    payload::VariablePage page;
    page.page_size = std::max<std::size_t>(env.size(), 1);
    page.repr_cap = 1u << 20;
    const Json vars = payload::variables(env, page);
    if (ctx.json) {
        ctx.emit(vars);
    } else {
        for (const auto& v : vars["variables"]) {
            ctx.out << v["name"].get<std::string>() << " (" << v["type"].get<std::string>()
                    << ") = " << v["repr"].get<std::string>() << "\n";
        }
    }
    return kOk;
}

int cmd_show(const Context& ctx, const std::string& target) {
    OpenStore s(ctx.dir, StoreLock::Mode::Shared);
    const CommitId id = resolve(s.store, target);
    if (ctx.json) {
        ctx.emit(payload::commit(s.store, id));
        return kOk;
    }
    auto c = s.store.get(id);
    ctx.out << "commit " << id.str() << "\n";
    if (c->code_parent) ctx.out << "code parent " << c->code_parent->str() << "\n";
    if (c->data_parent) ctx.out << "data parent " << c->data_parent->str() << "\n";
    ctx.out << "branch " << c->branch << "\n";
    if (c->tag) ctx.out << "tag " << *c->tag << "\n";
    if (c->message) ctx.out << "message " << *c->message << "\n";
    for (const auto& cell : c->code.cells) {
        ctx.out << "\n[" << cell.id << "] " << to_string(cell.kind);
        if (cell.exec_counter) ctx.out << " [" << *cell.exec_counter << "]";
        ctx.out << "\n" << cell.source << "\n";
        if (!cell.output.empty()) ctx.out << "-> " << cell.output << "\n";
    }
    return kOk;
}

int cmd_head(const Context& ctx) {
    OpenStore s(ctx.dir, StoreLock::Mode::Shared);
    Session session = Session::recover_latest(s.store);
    if (ctx.json) {
        ctx.emit(payload::head(session));
    } else {
        ctx.out << "code " << session.head().code.str() << "\ndata " << session.head().data.str() << "\nbranch "
                << (session.branch().empty() ? "-" : session.branch()) << "\n";
    }
    return kOk;
}

int cmd_export(const Context& ctx, const std::string& path) {
    OpenStore s(ctx.dir, StoreLock::Mode::Shared);
    const std::string text = payload::notebook_text(Session::recover_latest(s.store).notebook());
    if (path == "-") {
        ctx.out << text;
        return kOk;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text)) throw Error(ErrorCode::StorageIO, "cannot write " + path);
    if (!ctx.json) ctx.out << "wrote " << path << "\n";
    return kOk;
}

int cmd_serve(const Context& ctx, std::optional<int> port) {
    if (!port) {
        if (const char* env = std::getenv("STATEVC_PORT")) {
            try {
                port = std::stoi(env);
            } catch (const std::exception&) {
                throw Error(ErrorCode::BadRequest, "STATEVC_PORT must be a port number");
            }
        }
    }
    OpenStore s(ctx.dir, StoreLock::Mode::Exclusive);
    Session session = Session::open(s.store);
    ApiOptions options;
    options.port = port.value_or(8765);
    ApiService api(session, options);
    const int bound = api.bind();
    if (bound < 0) throw Error(ErrorCode::StorageIO, "cannot bind 127.0.0.1:" + std::to_string(options.port));
    ctx.out << "serving " << ctx.dir.string() << " on http://127.0.0.1:" << bound << "\n" << std::flush;
    api.listen();
    return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    // `run -- <source>`: everything after "--" is cell source.
    std::vector<std::string> args = raw_args;
    std::optional<std::string> inline_source;
    auto dashdash = std::find(args.begin(), args.end(), "--");
    if (dashdash != args.end() && std::find(args.begin(), dashdash, "run") != dashdash) {
        std::string source;
        for (auto it = dashdash + 1; it != args.end(); ++it) source += (it == dashdash + 1 ? "" : " ") + *it;
        inline_source = std::move(source);
        args.erase(dashdash, args.end());
    }

    CLI::App app{"Code and data versioning for notebook sessions.", "statevc"};
    app.require_subcommand(1);
    std::string store_dir = "store";
    bool json = false;
    app.add_option("--store", store_dir, "Store directory")->envname("STATEVC_STORE");
    app.add_flag("--json", json, "Machine-readable output");

    std::function<int(const Context&)> action;

    auto* init = app.add_subcommand("init", "Create a store with an empty root commit");
    init->callback([&] { action = [](const Context& c) { return cmd_init(c); }; });

    std::string run_file, run_cell;
    auto* run = app.add_subcommand("run", "Add and execute a cell: run <file> | run -- 'source' | run --cell <id>");
    run->add_option("file", run_file, "File holding the cell source");
    run->add_option("--cell", run_cell, "Re-execute an existing cell");
    run->callback([&] { action = [&](const Context& c) { return cmd_run(c, inline_source, run_file, run_cell); }; });

    bool fold = false;
    auto* log = app.add_subcommand("log", "Show the commit graph, newest first");
    log->add_flag("--fold", fold, "Fold unimportant commits");
    log->callback([&] { action = [&](const Context& c) { return cmd_log(c, fold); }; });

    std::string checkout_id;
    bool data_only = false, code_only = false;
    auto* checkout = app.add_subcommand("checkout", "Check out code and data, or roll back data only");
    checkout->add_option("id", checkout_id, "Commit id or prefix")->required();
    checkout->add_flag("--data-only", data_only, "Roll back data, keep code");
    checkout->add_flag("--code-only", code_only, "Check out code only (always rejected)");
    checkout->callback([&] { action = [&](const Context& c) { return cmd_checkout(c, checkout_id, data_only, code_only); }; });

    std::string tag_id, tag_name;
    std::optional<std::string> tag_message;
    auto* tag = app.add_subcommand("tag", "Tag a commit");
    tag->add_option("id", tag_id, "Commit id or prefix")->required();
    tag->add_option("name", tag_name, "Tag")->required();
    tag->add_option("-m,--message", tag_message, "Message");
    tag->callback([&] { action = [&](const Context& c) { return cmd_tag(c, tag_id, tag_name, tag_message); }; });

    std::optional<std::string> commit_message, commit_tag;
    auto* commit = app.add_subcommand("commit", "Create a manual commit of the current state");
    commit->add_option("-m,--message", commit_message, "Message");
    commit->add_option("-t,--tag", commit_tag, "Tag");
    commit->callback([&] { action = [&](const Context& c) { return cmd_commit(c, commit_message, commit_tag); }; });

    std::vector<std::string> terms;
    auto* search = app.add_subcommand("search", "Find commits: message:, tag:, branch:, var:, text: clauses");
    search->add_option("query", terms, "Query clauses")->required();
    search->callback([&] { action = [&](const Context& c) { return cmd_search(c, terms); }; });

    std::string diff_a, diff_b;
    auto* diff = app.add_subcommand("diff", "Diff code and variables of two commits");
    diff->add_option("a", diff_a, "Left commit")->required();
    diff->add_option("b", diff_b, "Right commit")->required();
    diff->callback([&] { action = [&](const Context& c) { return cmd_diff(c, diff_a, diff_b); }; });

    std::string vars_id;
    auto* vars = app.add_subcommand("vars", "List variables at a commit (default: the head)");
    vars->add_option("id", vars_id, "Commit id or prefix");
    vars->callback([&] { action = [&](const Context& c) { return cmd_vars(c, vars_id); }; });

    std::string show_id;
    auto* show = app.add_subcommand("show", "Show one commit");
    show->add_option("id", show_id, "Commit id or prefix")->required();
    show->callback([&] { action = [&](const Context& c) { return cmd_show(c, show_id); }; });

    auto* head = app.add_subcommand("head", "Show the head commits");
    head->callback([&] { action = [](const Context& c) { return cmd_head(c); }; });

    std::string export_path;
    auto* exp = app.add_subcommand("export", "Write the working notebook as a cell array ('-' for stdout)");
    exp->add_option("path", export_path, "Output path")->required();
    exp->callback([&] { action = [&](const Context& c) { return cmd_export(c, export_path); }; });

    std::optional<int> port;
    auto* serve = app.add_subcommand("serve", "Serve the HTTP API on 127.0.0.1");
    serve->add_option("--port", port, "Port (default 8765, env STATEVC_PORT)");
    serve->callback([&] { action = [&](const Context& c) { return cmd_serve(c, port); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "statevc: " << e.what() << "\n";
        return kUsage;
    }
    if (inline_source && !run->parsed()) {
        err << "statevc: '--' is only accepted by run\n";
        return kUsage;
    }

    const Context ctx{store_dir, json, out, err};
    try {
        return action(ctx);
    } catch (const Error& e) {
        err << "statevc: " << e.what() << "\n";
        if (json) err << payload::error(e).dump() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        err << "statevc: " << e.what() << "\n";
        return kStoreError;
    }
}

}  // namespace statevc::cli
