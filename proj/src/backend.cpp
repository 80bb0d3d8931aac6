#include "pario/backend.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <mutex>

namespace pario {

namespace {

constexpr std::int64_t kMapChunk = 16ll << 20;  // mapped-window granularity

[[noreturn]] void fail_errno(const std::string& what) {
    int err = errno;
    ErrorClass cls = (err == ENOENT) ? ErrorClass::NoSuchFile : ErrorClass::BackendFailure;
    throw IoError(cls, what + ": " + std::strerror(err));
}

void check_offset(std::int64_t offset) {
    if (offset < 0) {
        throw IoError(ErrorClass::BadOffset, "negative byte offset " + std::to_string(offset));
    }
}

int open_fd(const std::string& path, int amode, bool force_rdwr) {
    int flags;
    if (amode & amode::RDONLY) {
        flags = O_RDONLY;
    } else if ((amode & amode::WRONLY) && !force_rdwr) {
        flags = O_WRONLY;
    } else {
        flags = O_RDWR;
    }
    if (amode & amode::CREATE) flags |= O_CREAT;
    if (amode & amode::EXCL) flags |= O_EXCL;
    int fd = ::open(path.c_str(), flags, 0644);
    if (fd < 0) fail_errno("open '" + path + "'");
    struct stat st{};
    if (::fstat(fd, &st) != 0 || !S_ISREG(st.st_mode)) {
        ::close(fd);
        throw IoError(ErrorClass::BackendFailure, "'" + path + "' is not a regular file");
    }
    return fd;
}

std::int64_t fd_size(int fd) {
    struct stat st{};
    if (::fstat(fd, &st) != 0) fail_errno("fstat");
    return st.st_size;
}

class PositionalBackend final : public StorageBackend {
  public:
    PositionalBackend(const std::string& path, int amode)
        : amode_(amode), fd_(open_fd(path, amode, /*force_rdwr=*/false)) {}

    ~PositionalBackend() override {
        if (fd_ >= 0) ::close(fd_);
    }

    std::size_t pread(std::int64_t offset, void* buf, std::size_t len) override {
        check_ready();
        check_offset(offset);
        if (!amode_readable(amode_)) {
            throw IoError(ErrorClass::AccessModeViolation, "file not open for reading");
        }
        auto* p = static_cast<std::uint8_t*>(buf);
        std::size_t got = 0;
        while (got < len) {
            ssize_t n = ::pread(fd_, p + got, len - got, offset + got);
            if (n < 0) {
                if (errno == EINTR) continue;
                fail_errno("pread");
            }
            if (n == 0) break;  // EOF
            got += static_cast<std::size_t>(n);
        }
        return got;
    }

    void pwrite(std::int64_t offset, const void* buf, std::size_t len) override {
        check_ready();
        check_offset(offset);
        if (!amode_writable(amode_)) {
            throw IoError(ErrorClass::AccessModeViolation, "file not open for writing");
        }
        const auto* p = static_cast<const std::uint8_t*>(buf);
        std::size_t put = 0;
        while (put < len) {
            ssize_t n = ::pwrite(fd_, p + put, len - put, offset + put);
            if (n < 0) {
                if (errno == EINTR) continue;
                fail_errno("pwrite");
            }
            put += static_cast<std::size_t>(n);
        }
    }

    void flush() override {
        check_ready();
        if (::fsync(fd_) != 0) fail_errno("fsync");
    }

    std::int64_t size() const override {
        check_ready();
        return fd_size(fd_);
    }

    void truncate(std::int64_t size) override {
        check_ready();
        check_offset(size);
        if (::ftruncate(fd_, size) != 0) fail_errno("ftruncate");
    }

    void ensure_size(std::int64_t size) override {
        check_ready();
        check_offset(size);
        if (fd_size(fd_) < size) {
            if (::ftruncate(fd_, size) != 0) fail_errno("ftruncate");
        }
    }

    void on_size_changed() override {}

    void close() override {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

    Strategy strategy() const override { return Strategy::Positional; }

  private:
    void check_ready() const {
        if (fd_ < 0) throw IoError(ErrorClass::BackendFailure, "backend is closed");
    }

    const int amode_;
    int fd_ = -1;
};

// Serves positional reads and writes through an mmap'd window. The window is
// mapped in 16 MiB-aligned chunks, grown on demand, and clamped to the current
// file size (mapping pages past EOF would fault). File growth for writes uses
// an atomic one-byte positional write rather than ftruncate so a concurrent
// extension by another process is never undone.
class MappedBackend final : public StorageBackend {
  public:
    MappedBackend(const std::string& path, int amode)
        : amode_(amode), fd_(open_fd(path, amode, /*force_rdwr=*/true)) {}

    ~MappedBackend() override {
        unmap();
        if (fd_ >= 0) ::close(fd_);
    }

    std::size_t pread(std::int64_t offset, void* buf, std::size_t len) override {
        std::lock_guard lk(mu_);
        check_ready();
        check_offset(offset);
        if (!amode_readable(amode_)) {
            throw IoError(ErrorClass::AccessModeViolation, "file not open for reading");
        }
        if (len == 0) return 0;
        std::int64_t sz = fd_size(fd_);
        if (offset >= sz) return 0;
        std::size_t eff = static_cast<std::size_t>(
            std::min<std::int64_t>(static_cast<std::int64_t>(len), sz - offset));
        ensure_window(offset, static_cast<std::int64_t>(eff), sz);
        std::memcpy(buf, map_ + (offset - map_base_), eff);
        return eff;
    }

    void pwrite(std::int64_t offset, const void* buf, std::size_t len) override {
        std::lock_guard lk(mu_);
        check_ready();
        check_offset(offset);
        if (!amode_writable(amode_)) {
            throw IoError(ErrorClass::AccessModeViolation, "file not open for writing");
        }
        if (len == 0) return;
        std::int64_t end = offset + static_cast<std::int64_t>(len);
        std::int64_t sz = fd_size(fd_);
        if (sz < end) {
            grow_to(end);
            sz = fd_size(fd_);
        }
        ensure_window(offset, static_cast<std::int64_t>(len), sz);
        std::memcpy(map_ + (offset - map_base_), buf, len);
    }

    void flush() override {
        std::lock_guard lk(mu_);
        check_ready();
        if (map_ && ::msync(map_, map_len_, MS_SYNC) != 0) fail_errno("msync");
        if (::fsync(fd_) != 0) fail_errno("fsync");
    }

    std::int64_t size() const override {
        std::lock_guard lk(mu_);
        check_ready();
        return fd_size(fd_);
    }

    void truncate(std::int64_t size) override {
        std::lock_guard lk(mu_);
        check_ready();
        check_offset(size);
        unmap();
        if (::ftruncate(fd_, size) != 0) fail_errno("ftruncate");
    }

    void ensure_size(std::int64_t size) override {
        std::lock_guard lk(mu_);
        check_ready();
        check_offset(size);
        if (fd_size(fd_) < size) {
            unmap();
            if (::ftruncate(fd_, size) != 0) fail_errno("ftruncate");
        }
    }

    void on_size_changed() override {
        std::lock_guard lk(mu_);
        unmap();
    }

    void close() override {
        std::lock_guard lk(mu_);
        if (fd_ < 0) return;
        unmap();
        ::close(fd_);
        fd_ = -1;
    }

    Strategy strategy() const override { return Strategy::Mapped; }

  private:
    void check_ready() const {
        if (fd_ < 0) throw IoError(ErrorClass::BackendFailure, "backend is closed");
    }

    void unmap() {
        if (map_) {
            ::munmap(map_, map_len_);
            map_ = nullptr;
            map_base_ = 0;
            map_len_ = 0;
        }
    }

    void grow_to(std::int64_t size) {
        static const std::uint8_t zero = 0;
        ssize_t n = ::pwrite(fd_, &zero, 1, size - 1);
        if (n != 1) fail_errno("extend");
    }

    // Maps a window covering [offset, offset+len), which must lie within the
    // current file size `sz`.
    void ensure_window(std::int64_t offset, std::int64_t len, std::int64_t sz) {
        if (map_ && offset >= map_base_ &&
            offset + len <= map_base_ + static_cast<std::int64_t>(map_len_)) {
            return;
        }
        unmap();
        std::int64_t base = (offset / kMapChunk) * kMapChunk;
        std::int64_t end = ((offset + len + kMapChunk - 1) / kMapChunk) * kMapChunk;
        end = std::min(end, sz);
        int prot = PROT_READ;
        if (amode_writable(amode_)) prot |= PROT_WRITE;
        void* p = ::mmap(nullptr, static_cast<std::size_t>(end - base), prot, MAP_SHARED,
                         fd_, base);
        if (p == MAP_FAILED) fail_errno("mmap");
        map_ = static_cast<char*>(p);
        map_base_ = base;
        map_len_ = static_cast<std::size_t>(end - base);
    }

    const int amode_;
    int fd_ = -1;
    mutable std::mutex mu_;
    char* map_ = nullptr;
    std::int64_t map_base_ = 0;
    std::size_t map_len_ = 0;
};

}  // namespace

const char* strategy_name(Strategy s) {
    return s == Strategy::Positional ? "positional" : "mapped";
}

Strategy strategy_from_name(const std::string& name) {
    if (name == "positional") return Strategy::Positional;
    if (name == "mapped") return Strategy::Mapped;
    throw IoError(ErrorClass::BackendFailure, "unknown strategy '" + name + "'");
}

std::unique_ptr<StorageBackend> backend_open(const std::string& path, int amode,
                                             Strategy strategy) {
    amode_validate(amode);
    if (strategy == Strategy::Positional) {
        return std::make_unique<PositionalBackend>(path, amode);
    }
    return std::make_unique<MappedBackend>(path, amode);
}

}  // namespace pario
