#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace statevc {

/// Closed set of machine-readable error codes shared by the library, the
/// HTTP API and the CLI.
enum class ErrorCode {
    BadRequest,
    BadQuery,
    UnknownCommit,
    UnknownCell,
    UnknownGroup,
    NotCodeCell,
    MissingParent,
    InvalidCommit,
    CorruptDelta,
    EmptyStore,
    StorageIO,
    StoreLocked,
    UnsafeOnlyCode,
    UnsafeFutureData,
    UnsafeUnrelatedData,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        // clang-format off
        case ErrorCode::BadRequest:          return "bad_request";
        case ErrorCode::BadQuery:            return "bad_query";
        case ErrorCode::UnknownCommit:       return "unknown_commit";
        case ErrorCode::UnknownCell:         return "unknown_cell";
        case ErrorCode::UnknownGroup:        return "unknown_group";
        case ErrorCode::NotCodeCell:         return "not_code_cell";
        case ErrorCode::MissingParent:       return "missing_parent";
        case ErrorCode::InvalidCommit:       return "invalid_commit";
        case ErrorCode::CorruptDelta:        return "corrupt_delta";
        case ErrorCode::EmptyStore:          return "empty_store";
        case ErrorCode::StorageIO:           return "storage_io";
        case ErrorCode::StoreLocked:         return "store_locked";
        case ErrorCode::UnsafeOnlyCode:      return "unsafe_only_code";
        case ErrorCode::UnsafeFutureData:    return "unsafe_future_data";
        case ErrorCode::UnsafeUnrelatedData: return "unsafe_unrelated_data";
        // clang-format on
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace statevc
