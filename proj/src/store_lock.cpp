#include "statevc/store_lock.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "statevc/error.hpp"

namespace statevc {

StoreLock::StoreLock(const std::filesystem::path& store_dir, Mode mode) {
    const auto path = store_dir / ".lock";
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorCode::StorageIO, "cannot open " + path.string() + ": " + std::strerror(errno));
    const int op = (mode == Mode::Shared ? LOCK_SH : LOCK_EX) | LOCK_NB;
    if (::flock(fd_, op) != 0) {
        const int err = errno;
        ::close(fd_);
        fd_ = -1;
        if (err == EWOULDBLOCK) throw Error(ErrorCode::StoreLocked, "store " + store_dir.string() + " is in use by another process");
        throw Error(ErrorCode::StorageIO, "cannot lock " + path.string() + ": " + std::strerror(err));
    }
}

StoreLock::~StoreLock() {
    if (fd_ >= 0) ::close(fd_);
}

}  // namespace statevc
