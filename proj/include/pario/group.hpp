#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pario/types.hpp"

namespace pario {

namespace detail {
class GroupImpl;
}

// SPMD process-group handle: rank/size identity plus the collectives the file
// layer needs (barrier, broadcast, gather, shared counters, byte-range
// locks), all mediated by the coordinator. A Group is driven by one logical
// thread of control; the counter and lock calls may additionally be issued
// from a file handle's background transfer context.
class Group {
  public:
    // Connects and blocks until all `size` members have joined.
    static Group init(int rank, int size, const std::string& coordinator);
    // Reads PARIO_RANK, PARIO_SIZE, PARIO_COORD.
    static Group init_from_env();

    Group(const Group&) = delete;
    Group& operator=(const Group&) = delete;
    ~Group();

    int rank() const;
    int size() const;

    // No member returns before every member has entered.
    void barrier();

    // Every member returns root's payload bit-exactly.
    std::vector<std::uint8_t> broadcast(int root, const std::vector<std::uint8_t>& payload);

    // Rank-ordered vector of every member's contribution, identical on all ranks.
    std::vector<std::int64_t> all_gather(std::int64_t value);

    // Atomically adds delta to the named per-file counter, returning the prior
    // value. Fresh counters start at zero.
    std::int64_t fetch_add(std::uint64_t file_id, std::uint8_t counter, std::int64_t delta);

    // Blocks until no overlapping byte range of the same file is held.
    std::uint64_t range_lock(std::uint64_t file_id, std::uint64_t start, std::uint64_t end);
    void range_unlock(std::uint64_t token);

    // Collective registration of an open file; returns the coordinator-assigned
    // file id (same value on every rank).
    std::uint64_t register_open(const std::string& path);

    // Collective agreement check: throws IoError{GroupMismatch} on every rank
    // when the 64-bit digests differ across ranks.
    void agree(std::uint64_t digest, const std::string& what);

    // Collective shutdown; the coordinator exits after all members finalize.
    void finalize();

  private:
    explicit Group(std::unique_ptr<detail::GroupImpl> impl);
    std::unique_ptr<detail::GroupImpl> impl_;
};

// Counter ids used by the file layer.
namespace counters {
constexpr std::uint8_t kSharedPointer = 0;
}

}  // namespace pario
