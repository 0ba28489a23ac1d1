#pragma once

#include <filesystem>

namespace statevc {

/// Advisory flock on `<store>/.lock`. Shared for readers, exclusive for
/// writers; never blocks. Throws Error(StoreLocked) when held elsewhere.
class StoreLock {
public:
    enum class Mode { Shared, Exclusive };

    StoreLock(const std::filesystem::path& store_dir, Mode mode);
    ~StoreLock();

    StoreLock(const StoreLock&) = delete;
    StoreLock& operator=(const StoreLock&) = delete;

private:
    int fd_ = -1;
};

}  // namespace statevc
