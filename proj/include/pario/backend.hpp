#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "pario/types.hpp"

namespace pario {

// The two access strategies evaluated for the library. POSITIONAL issues
// pread/pwrite at explicit offsets; MAPPED serves the same operations through
// an mmap'd window that is remapped on demand. Both produce identical bytes
// for identical operation sequences.
enum class Strategy { Positional, Mapped };

const char* strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);  // "positional" | "mapped"

class StorageBackend {
  public:
    virtual ~StorageBackend() = default;

    // Positional read without any shared cursor; short at end-of-file.
    virtual std::size_t pread(std::int64_t offset, void* buf, std::size_t len) = 0;
    // Replaces bytes at [offset, offset+len); extends the file if needed.
    virtual void pwrite(std::int64_t offset, const void* buf, std::size_t len) = 0;
    // Hands buffered/mapped dirty data to the OS durably.
    virtual void flush() = 0;
    virtual std::int64_t size() const = 0;
    virtual void truncate(std::int64_t size) = 0;
    // Grows the file to at least `size` bytes (zeros); never shrinks.
    virtual void ensure_size(std::int64_t size) = 0;
    // Another process changed the file size through a coordinated operation;
    // mapped windows must be invalidated.
    virtual void on_size_changed() = 0;
    virtual void close() = 0;
    virtual Strategy strategy() const = 0;
};

// Opens a backend on an existing or to-be-created file. Honors RDONLY/WRONLY/
// RDWR plus CREATE/EXCL from the amode mask. Errors: NoSuchFile,
// AccessModeViolation, BackendFailure.
std::unique_ptr<StorageBackend> backend_open(const std::string& path, int amode,
                                             Strategy strategy);

}  // namespace pario
