#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pario/types.hpp"

namespace pario::wire {

// Coordinator wire protocol. Every frame is
//   length: u32 LE (length of tag+payload) | tag: 1 byte | payload
// and all multi-byte integers are little-endian. The ERROR class byte is the
// ErrorClass enum value.
enum Tag : std::uint8_t {
    JOIN = 0x01,             // {rank: u32}
    JOIN_ACK = 0x02,         // {size: u32}
    OPEN = 0x05,             // {pathlen: u32, path bytes}
    OPEN_ACK = 0x06,         // {fileId: u64}
    BARRIER = 0x10,          // {epoch: u64}
    BARRIER_RELEASE = 0x11,  // {epoch: u64}
    BCAST_SEND = 0x20,       // {root: u32, len: u32, bytes}
    BCAST_RECV = 0x21,       // {len: u32, bytes}
    GATHER = 0x30,           // {value: i64}
    GATHER_RESULT = 0x31,    // {n: u32, n x i64}
    FETCH_ADD = 0x40,        // {fileId: u64, counter: u8, delta: i64}
    FETCH_ADD_RESULT = 0x41, // {old: i64}
    LOCK = 0x50,             // {fileId: u64, start: u64, end: u64}
    LOCK_GRANT = 0x51,       // {token: u64}
    UNLOCK = 0x52,           // {token: u64}
    FINALIZE = 0x60,         // empty
    ERROR = 0x7F,            // {class: u8, len: u32, message bytes}
};

struct Frame {
    std::uint8_t tag = 0;
    std::vector<std::uint8_t> payload;
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v);
void put_i64(std::vector<std::uint8_t>& out, std::int64_t v);

// Serializes a frame including the length prefix.
std::vector<std::uint8_t> encode(const Frame& f);

// Reads little-endian fields off a payload; throws IoError{CoordinatorFailure}
// on truncated input.
class Cursor {
  public:
    explicit Cursor(const std::vector<std::uint8_t>& buf) : buf_(buf) {}
    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int64_t i64();
    std::vector<std::uint8_t> bytes(std::size_t n);
    std::size_t remaining() const { return buf_.size() - pos_; }

  private:
    void need(std::size_t n) const;
    const std::vector<std::uint8_t>& buf_;
    std::size_t pos_ = 0;
};

Frame make_join(std::uint32_t rank);
Frame make_join_ack(std::uint32_t size);
Frame make_open(const std::string& path);
Frame make_open_ack(std::uint64_t file_id);
Frame make_barrier(std::uint64_t epoch);
Frame make_barrier_release(std::uint64_t epoch);
Frame make_bcast_send(std::uint32_t root, const std::vector<std::uint8_t>& bytes);
Frame make_bcast_recv(const std::vector<std::uint8_t>& bytes);
Frame make_gather(std::int64_t value);
Frame make_gather_result(const std::vector<std::int64_t>& values);
Frame make_fetch_add(std::uint64_t file_id, std::uint8_t counter, std::int64_t delta);
Frame make_fetch_add_result(std::int64_t old);
Frame make_lock(std::uint64_t file_id, std::uint64_t start, std::uint64_t end);
Frame make_lock_grant(std::uint64_t token);
Frame make_unlock(std::uint64_t token);
Frame make_finalize();
Frame make_error(ErrorClass cls, const std::string& message);

}  // namespace pario::wire
