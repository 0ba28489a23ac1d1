#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "statevc/value.hpp"

namespace statevc {

using CellId = std::string;

enum class CellKind { Code, Markdown };

std::string_view to_string(CellKind kind);
std::optional<CellKind> parse_cell_kind(std::string_view text);

/// A notebook cell. `output`, `error` and `exec_counter` describe the most
/// recent execution that is still part of the data state; markdown cells
/// never carry them.
struct Cell {
    CellId id;
    CellKind kind = CellKind::Code;
    std::string source;
    std::string output;
    bool error = false;
    std::optional<std::int64_t> exec_counter;

    bool operator==(const Cell&) const = default;
};

/// Ordered cells with unique ids.
struct CodeState {
    std::vector<Cell> cells;

    const Cell* find(std::string_view id) const;
    Cell* find(std::string_view id);
    std::optional<std::size_t> position(std::string_view id) const;

    bool operator==(const CodeState&) const = default;
};

/// One executed cell: the snapshot of its source and its 1-based position.
struct HistoryEntry {
    CellId cell_id;
    std::string source;
    std::int64_t counter = 0;

    bool operator==(const HistoryEntry&) const = default;
};

/// Variables plus the execution history that produced them.
struct DataState {
    Environment variables;
    std::vector<HistoryEntry> history;

    bool operator==(const DataState&) const = default;
};

struct Version {
    CodeState code;
    DataState data;

    bool operator==(const Version&) const = default;
};

enum class CheckoutMode { Both, DataOnly, CodeOnly };

enum class CheckoutClass { SafeBoth, SafePastData, UnsafeOnlyCode, UnsafeFutureData, UnsafeUnrelatedData };

std::string_view to_string(CheckoutClass c);
std::string_view to_string(CheckoutMode m);
constexpr bool is_safe(CheckoutClass c) { return c == CheckoutClass::SafeBoth || c == CheckoutClass::SafePastData; }

/// Position (counter) of the last history entry that executed exactly this
/// cell: same id and same source. An edited cell is not executed.
std::optional<std::int64_t> is_executed(const Cell& cell, std::span<const HistoryEntry> history);

struct Violation {
    CellId cell_id;
    std::int64_t position = 0;
    std::string expected;
    std::string actual;

    bool operator==(const Violation&) const = default;
};

struct ConsistencyReport {
    std::vector<Violation> violations;

    bool consistent() const { return violations.empty(); }
    explicit operator bool() const { return consistent(); }
};

/// Every executed code cell's output must equal the output the kernel
/// produces for the history prefix ending at that cell's position.
ConsistencyReport is_consistent(const Version& version);

/// variables == replay of the history sources.
bool is_replay_closed(const DataState& data);

/// Entry-wise (cell_id, source) prefix test; counters are positional and
/// ignored.
bool is_history_prefix(std::span<const HistoryEntry> prefix, std::span<const HistoryEntry> whole);

/// Safety class of checking out `target` against the head's data history.
CheckoutClass classify_checkout(std::span<const HistoryEntry> head_history,
                                std::span<const HistoryEntry> target_history,
                                CheckoutMode mode);

std::vector<std::string> history_sources(std::span<const HistoryEntry> history);

}  // namespace statevc
