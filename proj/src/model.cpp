#include "statevc/model.hpp"

#include <algorithm>

#include "statevc/kernel.hpp"

namespace statevc {

std::string_view to_string(CellKind kind) { return kind == CellKind::Code ? "code" : "markdown"; }

std::optional<CellKind> parse_cell_kind(std::string_view text) {
    if (text == "code") return CellKind::Code;
    if (text == "markdown") return CellKind::Markdown;
    return std::nullopt;
}

const Cell* CodeState::find(std::string_view id) const {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& c) { return c.id == id; });
    return it == cells.end() ? nullptr : &*it;
}

Cell* CodeState::find(std::string_view id) {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& c) { return c.id == id; });
    return it == cells.end() ? nullptr : &*it;
}

std::optional<std::size_t> CodeState::position(std::string_view id) const {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& c) { return c.id == id; });
    if (it == cells.end()) return std::nullopt;
    return static_cast<std::size_t>(it - cells.begin());
}

std::string_view to_string(CheckoutClass c) {
    switch (c) {
        case CheckoutClass::SafeBoth: return "SafeBoth";
        case CheckoutClass::SafePastData: return "SafePastData";
        case CheckoutClass::UnsafeOnlyCode: return "UnsafeOnlyCode";
        case CheckoutClass::UnsafeFutureData: return "UnsafeFutureData";
        case CheckoutClass::UnsafeUnrelatedData: return "UnsafeUnrelatedData";
    }
    return "?";
}

std::string_view to_string(CheckoutMode m) {
    switch (m) {
        case CheckoutMode::Both: return "both";
        case CheckoutMode::DataOnly: return "data";
        case CheckoutMode::CodeOnly: return "code";
    }
    return "?";
}

std::optional<std::int64_t> is_executed(const Cell& cell, std::span<const HistoryEntry> history) {
    if (cell.kind != CellKind::Code) return std::nullopt;
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
        if (it->cell_id == cell.id && it->source == cell.source) return it->counter;
    }
    return std::nullopt;
}

std::vector<std::string> history_sources(std::span<const HistoryEntry> history) {
    std::vector<std::string> sources;
    sources.reserve(history.size());
    for (const auto& h : history) sources.push_back(h.source);
    return sources;
}

ConsistencyReport is_consistent(const Version& version) {
    ConsistencyReport report;
    const auto& history = version.data.history;

    std::optional<kernel::HistoryResult> replay;
    for (const Cell& cell : version.code.cells) {
        auto n = is_executed(cell, history);
        if (!n) continue;
        if (!replay) replay = kernel::exec_history(history_sources(history));
        // prefix stability: outputs[n-1] of the full replay is Exec(h[1..n])
        const std::string& expected = replay->outputs.at(static_cast<std::size_t>(*n - 1));
        if (cell.output != expected) report.violations.push_back({cell.id, *n, expected, cell.output});
    }
    return report;
}

bool is_replay_closed(const DataState& data) {
    return kernel::exec_history(history_sources(data.history)).env == data.variables;
}

bool is_history_prefix(std::span<const HistoryEntry> prefix, std::span<const HistoryEntry> whole) {
    if (prefix.size() > whole.size()) return false;
    return std::equal(prefix.begin(), prefix.end(), whole.begin(), [](const HistoryEntry& a, const HistoryEntry& b) {
        return a.cell_id == b.cell_id && a.source == b.source;
    });
}

CheckoutClass classify_checkout(std::span<const HistoryEntry> head_history,
                                std::span<const HistoryEntry> target_history,
                                CheckoutMode mode) {
    switch (mode) {
        case CheckoutMode::Both: return CheckoutClass::SafeBoth;
        case CheckoutMode::CodeOnly: return CheckoutClass::UnsafeOnlyCode;
        case CheckoutMode::DataOnly: break;
    }
    if (is_history_prefix(target_history, head_history)) return CheckoutClass::SafePastData;
    if (is_history_prefix(head_history, target_history)) return CheckoutClass::UnsafeFutureData;
    return CheckoutClass::UnsafeUnrelatedData;
}

}  // namespace statevc
