#include "pario/wire.hpp"

namespace pario::wire {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(v & 0xFF);
    out.push_back((v >> 8) & 0xFF);
    out.push_back((v >> 16) & 0xFF);
    out.push_back((v >> 24) & 0xFF);
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

void put_i64(std::vector<std::uint8_t>& out, std::int64_t v) {
    put_u64(out, static_cast<std::uint64_t>(v));
}

std::vector<std::uint8_t> encode(const Frame& f) {
    std::vector<std::uint8_t> out;
    out.reserve(5 + f.payload.size());
    put_u32(out, static_cast<std::uint32_t>(1 + f.payload.size()));
    out.push_back(f.tag);
    out.insert(out.end(), f.payload.begin(), f.payload.end());
    return out;
}

void Cursor::need(std::size_t n) const {
    if (pos_ + n > buf_.size()) {
        throw IoError(ErrorClass::CoordinatorFailure, "truncated frame payload");
    }
}

std::uint8_t Cursor::u8() {
    need(1);
    return buf_[pos_++];
}

std::uint32_t Cursor::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(buf_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
}

std::uint64_t Cursor::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(buf_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
}

std::int64_t Cursor::i64() { return static_cast<std::int64_t>(u64()); }

std::vector<std::uint8_t> Cursor::bytes(std::size_t n) {
    need(n);
    std::vector<std::uint8_t> out(buf_.begin() + pos_, buf_.begin() + pos_ + n);
    pos_ += n;
    return out;
}

Frame make_join(std::uint32_t rank) {
    Frame f{JOIN, {}};
    put_u32(f.payload, rank);
    return f;
}

Frame make_join_ack(std::uint32_t size) {
    Frame f{JOIN_ACK, {}};
    put_u32(f.payload, size);
    return f;
}

Frame make_open(const std::string& path) {
    Frame f{OPEN, {}};
    put_u32(f.payload, static_cast<std::uint32_t>(path.size()));
    f.payload.insert(f.payload.end(), path.begin(), path.end());
    return f;
}

Frame make_open_ack(std::uint64_t file_id) {
    Frame f{OPEN_ACK, {}};
    put_u64(f.payload, file_id);
    return f;
}

Frame make_barrier(std::uint64_t epoch) {
    Frame f{BARRIER, {}};
    put_u64(f.payload, epoch);
    return f;
}

Frame make_barrier_release(std::uint64_t epoch) {
    Frame f{BARRIER_RELEASE, {}};
    put_u64(f.payload, epoch);
    return f;
}

Frame make_bcast_send(std::uint32_t root, const std::vector<std::uint8_t>& bytes) {
    Frame f{BCAST_SEND, {}};
    put_u32(f.payload, root);
    put_u32(f.payload, static_cast<std::uint32_t>(bytes.size()));
    f.payload.insert(f.payload.end(), bytes.begin(), bytes.end());
    return f;
}

Frame make_bcast_recv(const std::vector<std::uint8_t>& bytes) {
    Frame f{BCAST_RECV, {}};
    put_u32(f.payload, static_cast<std::uint32_t>(bytes.size()));
    f.payload.insert(f.payload.end(), bytes.begin(), bytes.end());
    return f;
}

Frame make_gather(std::int64_t value) {
    Frame f{GATHER, {}};
    put_i64(f.payload, value);
    return f;
}

Frame make_gather_result(const std::vector<std::int64_t>& values) {
    Frame f{GATHER_RESULT, {}};
    put_u32(f.payload, static_cast<std::uint32_t>(values.size()));
    for (auto v : values) put_i64(f.payload, v);
    return f;
}

Frame make_fetch_add(std::uint64_t file_id, std::uint8_t counter, std::int64_t delta) {
    Frame f{FETCH_ADD, {}};
    put_u64(f.payload, file_id);
    f.payload.push_back(counter);
    put_i64(f.payload, delta);
    return f;
}

Frame make_fetch_add_result(std::int64_t old) {
    Frame f{FETCH_ADD_RESULT, {}};
    put_i64(f.payload, old);
    return f;
}

Frame make_lock(std::uint64_t file_id, std::uint64_t start, std::uint64_t end) {
    Frame f{LOCK, {}};
    put_u64(f.payload, file_id);
    put_u64(f.payload, start);
    put_u64(f.payload, end);
    return f;
}

Frame make_lock_grant(std::uint64_t token) {
    Frame f{LOCK_GRANT, {}};
    put_u64(f.payload, token);
    return f;
}

Frame make_unlock(std::uint64_t token) {
    Frame f{UNLOCK, {}};
    put_u64(f.payload, token);
    return f;
}

Frame make_finalize() { return Frame{FINALIZE, {}}; }

Frame make_error(ErrorClass cls, const std::string& message) {
    Frame f{ERROR, {}};
    f.payload.push_back(static_cast<std::uint8_t>(cls));
    put_u32(f.payload, static_cast<std::uint32_t>(message.size()));
    f.payload.insert(f.payload.end(), message.begin(), message.end());
    return f;
}

}  // namespace pario::wire
