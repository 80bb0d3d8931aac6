#include "pario/group.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <mutex>
#include <optional>
#include <thread>

#include "pario/wire.hpp"
#include "socket.hpp"

namespace pario {
namespace detail {

using wire::Frame;

namespace {

std::chrono::milliseconds op_timeout() {
    static const std::chrono::milliseconds timeout = [] {
        if (const char* s = std::getenv("PARIO_OP_TIMEOUT_MS")) {
            long ms = std::strtol(s, nullptr, 10);
            if (ms > 0) return std::chrono::milliseconds(ms);
        }
        return std::chrono::milliseconds(60000);
    }();
    return timeout;
}

}  // namespace

class GroupImpl {
  public:
    GroupImpl(int rank, int size, const std::string& coordinator)
        : rank_(rank), size_(size) {
        if (size < 1 || rank < 0 || rank >= size) {
            throw IoError(ErrorClass::CoordinatorFailure,
                          "rank " + std::to_string(rank) + " out of range for size " +
                              std::to_string(size));
        }
        auto [host, port] = net::parse_endpoint(coordinator);
        fd_ = net::connect_tcp(host, port);
        reader_ = std::thread([this] { read_loop(); });
        try {
            auto ack = roundtrip(wire::make_join(static_cast<std::uint32_t>(rank)),
                                 wire::JOIN_ACK);
            wire::Cursor cur(ack.payload);
            std::uint32_t coord_size = cur.u32();
            if (coord_size != static_cast<std::uint32_t>(size)) {
                throw IoError(ErrorClass::CoordinatorFailure,
                              "coordinator size " + std::to_string(coord_size) +
                                  " does not match expected " + std::to_string(size));
            }
        } catch (...) {
            // The destructor will not run for a throwing constructor; the
            // reader thread must be collected here.
            teardown();
            throw;
        }
    }

    ~GroupImpl() {
        teardown();
    }

    int rank() const { return rank_; }
    int size() const { return size_; }

    void barrier() {
        check_usable();
        std::uint64_t epoch = next_epoch_++;
        auto reply = roundtrip(wire::make_barrier(epoch), wire::BARRIER_RELEASE);
        wire::Cursor cur(reply.payload);
        if (cur.u64() != epoch) {
            fail_group(ErrorClass::CoordinatorFailure, "barrier epoch mismatch");
            throw IoError(ErrorClass::CoordinatorFailure, "barrier epoch mismatch");
        }
    }

    std::vector<std::uint8_t> broadcast(int root, const std::vector<std::uint8_t>& payload) {
        check_usable();
        if (root < 0 || root >= size_) {
            throw IoError(ErrorClass::GroupMismatch,
                          "broadcast root " + std::to_string(root) + " out of range");
        }
        const auto& bytes = (rank_ == root) ? payload : std::vector<std::uint8_t>{};
        auto reply = roundtrip(wire::make_bcast_send(static_cast<std::uint32_t>(root), bytes),
                               wire::BCAST_RECV);
        wire::Cursor cur(reply.payload);
        std::uint32_t len = cur.u32();
        return cur.bytes(len);
    }

    std::vector<std::int64_t> all_gather(std::int64_t value) {
        check_usable();
        auto reply = roundtrip(wire::make_gather(value), wire::GATHER_RESULT);
        wire::Cursor cur(reply.payload);
        std::uint32_t n = cur.u32();
        std::vector<std::int64_t> out(n);
        for (auto& v : out) v = cur.i64();
        return out;
    }

    std::int64_t fetch_add(std::uint64_t fid, std::uint8_t counter, std::int64_t delta) {
        check_usable();
        auto reply = roundtrip(wire::make_fetch_add(fid, counter, delta),
                               wire::FETCH_ADD_RESULT);
        wire::Cursor cur(reply.payload);
        return cur.i64();
    }

    std::uint64_t range_lock(std::uint64_t fid, std::uint64_t start, std::uint64_t end) {
        check_usable();
        if (start >= end) {
            throw IoError(ErrorClass::BadOffset,
                          "empty lock range [" + std::to_string(start) + "," +
                              std::to_string(end) + ")");
        }
        // One lock round-trip in flight per member: grants carry only the
        // token, so replies must be unambiguous.
        std::lock_guard lk(lock_mu_);
        auto reply = roundtrip(wire::make_lock(fid, start, end), wire::LOCK_GRANT);
        wire::Cursor cur(reply.payload);
        return cur.u64();
    }

    void range_unlock(std::uint64_t token) {
        check_usable();
        send(wire::make_unlock(token));
    }

    std::uint64_t register_open(const std::string& path) {
        check_usable();
        auto reply = roundtrip(wire::make_open(path), wire::OPEN_ACK);
        wire::Cursor cur(reply.payload);
        return cur.u64();
    }

    void agree(std::uint64_t digest, const std::string& what) {
        auto all = all_gather(static_cast<std::int64_t>(digest));
        for (auto v : all) {
            if (v != all[0]) {
                throw IoError(ErrorClass::GroupMismatch,
                              "ranks disagree on arguments of " + what);
            }
        }
    }

    void finalize() {
        if (finalized_.exchange(true)) {
            throw IoError(ErrorClass::HandleClosed, "group already finalized");
        }
        check_broken();
        auto w = enqueue_and_send(wire::make_finalize(), wire::FINALIZE);
        wait_waiter(w);  // fulfilled by coordinator closing the connection
        teardown();
    }

  private:
    struct Waiter {
        std::mutex mu;
        std::condition_variable cv;
        bool ready = false;
        Frame frame;
        std::optional<IoError> err;
    };
    using WaiterPtr = std::shared_ptr<Waiter>;

    void check_broken() {
        std::lock_guard lk(wmu_);
        if (broken_) throw IoError(broken_cls_, broken_msg_);
    }

    void check_usable() {
        if (finalized_.load()) {
            throw IoError(ErrorClass::HandleClosed, "group already finalized");
        }
        check_broken();
    }

    // Enqueues a waiter for `expect` and writes the frame, atomically with
    // respect to other senders so reply order matches queue order.
    WaiterPtr enqueue_and_send(const Frame& f, std::uint8_t expect) {
        auto w = std::make_shared<Waiter>();
        {
            std::lock_guard slk(send_mu_);
            {
                std::lock_guard wlk(wmu_);
                if (broken_) throw IoError(broken_cls_, broken_msg_);
                queue_for(expect).push_back(w);
            }
            net::write_frame(fd_.get(), f);
        }
        return w;
    }

    void send(const Frame& f) {
        std::lock_guard slk(send_mu_);
        net::write_frame(fd_.get(), f);
    }

    Frame wait_waiter(const WaiterPtr& w) {
        std::unique_lock lk(w->mu);
        if (!w->cv.wait_for(lk, op_timeout(), [&] { return w->ready; })) {
            lk.unlock();
            fail_group(ErrorClass::CoordinatorFailure, "timed out waiting for coordinator");
            throw IoError(ErrorClass::CoordinatorFailure,
                          "timed out waiting for coordinator");
        }
        if (w->err) throw *w->err;
        return std::move(w->frame);
    }

    Frame roundtrip(const Frame& f, std::uint8_t expect) {
        return wait_waiter(enqueue_and_send(f, expect));
    }

    std::deque<WaiterPtr>& queue_for(std::uint8_t tag) {
        switch (tag) {
            case wire::JOIN_ACK: return q_join_;
            case wire::BARRIER_RELEASE: return q_barrier_;
            case wire::BCAST_RECV: return q_bcast_;
            case wire::GATHER_RESULT: return q_gather_;
            case wire::FETCH_ADD_RESULT: return q_fetch_;
            case wire::LOCK_GRANT: return q_lock_;
            case wire::OPEN_ACK: return q_open_;
            case wire::FINALIZE: return q_finalize_;
            default:
                throw IoError(ErrorClass::CoordinatorFailure, "unroutable frame tag");
        }
    }

    void read_loop() {
        try {
            while (true) {
                auto f = net::read_frame(fd_.get());
                if (!f) {
                    on_eof();
                    return;
                }
                if (f->tag == wire::ERROR) {
                    wire::Cursor cur(f->payload);
                    auto cls = static_cast<ErrorClass>(cur.u8());
                    std::uint32_t len = cur.u32();
                    auto bytes = cur.bytes(len);
                    fail_group(cls, std::string(bytes.begin(), bytes.end()));
                    continue;
                }
                deliver(*f);
            }
        } catch (const std::exception& e) {
            fail_group(ErrorClass::CoordinatorFailure,
                       std::string("coordinator connection error: ") + e.what());
        }
    }

    void deliver(Frame f) {
        WaiterPtr w;
        {
            std::lock_guard lk(wmu_);
            auto& q = queue_for(f.tag);
            if (q.empty()) {
                fail_group_locked(ErrorClass::CoordinatorFailure,
                                  "unexpected frame from coordinator");
                return;
            }
            w = q.front();
            q.pop_front();
        }
        std::lock_guard lk(w->mu);
        w->frame = std::move(f);
        w->ready = true;
        w->cv.notify_all();
    }

    void on_eof() {
        WaiterPtr fin;
        {
            std::lock_guard lk(wmu_);
            if (!q_finalize_.empty()) {
                fin = q_finalize_.front();
                q_finalize_.pop_front();
            } else {
                fail_group_locked(ErrorClass::CoordinatorFailure,
                                  "coordinator closed the connection");
                return;
            }
        }
        std::lock_guard lk(fin->mu);
        fin->ready = true;
        fin->cv.notify_all();
    }

    void fail_group(ErrorClass cls, const std::string& msg) {
        std::lock_guard lk(wmu_);
        fail_group_locked(cls, msg);
    }

    // Fails every pending waiter and poisons the group. Caller holds wmu_.
    void fail_group_locked(ErrorClass cls, const std::string& msg) {
        if (!broken_) {
            broken_ = true;
            broken_cls_ = cls;
            broken_msg_ = msg;
        }
        for (auto* q : {&q_join_, &q_barrier_, &q_bcast_, &q_gather_, &q_fetch_, &q_lock_,
                        &q_open_, &q_finalize_}) {
            for (auto& w : *q) {
                std::lock_guard wl(w->mu);
                w->err = IoError(cls, msg);
                w->ready = true;
                w->cv.notify_all();
            }
            q->clear();
        }
    }

    void teardown() {
        bool expected = false;
        torn_down_.compare_exchange_strong(expected, true);
        if (expected) return;
        fd_.shutdown();
        if (reader_.joinable()) reader_.join();
        fd_.close();
    }

    const int rank_, size_;
    net::Fd fd_;
    std::thread reader_;

    std::mutex send_mu_;
    std::mutex wmu_;
    std::deque<WaiterPtr> q_join_, q_barrier_, q_bcast_, q_gather_, q_fetch_, q_lock_,
        q_open_, q_finalize_;
    bool broken_ = false;
    ErrorClass broken_cls_ = ErrorClass::CoordinatorFailure;
    std::string broken_msg_;

    std::mutex lock_mu_;
    std::uint64_t next_epoch_ = 1;
    std::atomic<bool> finalized_{false};
    std::atomic<bool> torn_down_{false};
};

}  // namespace detail

Group::Group(std::unique_ptr<detail::GroupImpl> impl) : impl_(std::move(impl)) {}
Group::~Group() = default;

Group Group::init(int rank, int size, const std::string& coordinator) {
    return Group(std::make_unique<detail::GroupImpl>(rank, size, coordinator));
}

Group Group::init_from_env() {
    const char* rank = std::getenv("PARIO_RANK");
    const char* size = std::getenv("PARIO_SIZE");
    const char* coord = std::getenv("PARIO_COORD");
    if (!rank || !size || !coord) {
        throw IoError(ErrorClass::CoordinatorFailure,
                      "PARIO_RANK/PARIO_SIZE/PARIO_COORD not set");
    }
    return init(std::atoi(rank), std::atoi(size), coord);
}

int Group::rank() const { return impl_->rank(); }
int Group::size() const { return impl_->size(); }
void Group::barrier() { impl_->barrier(); }

std::vector<std::uint8_t> Group::broadcast(int root, const std::vector<std::uint8_t>& payload) {
    return impl_->broadcast(root, payload);
}

std::vector<std::int64_t> Group::all_gather(std::int64_t value) {
    return impl_->all_gather(value);
}

std::int64_t Group::fetch_add(std::uint64_t file_id, std::uint8_t counter,
                              std::int64_t delta) {
    return impl_->fetch_add(file_id, counter, delta);
}

std::uint64_t Group::range_lock(std::uint64_t file_id, std::uint64_t start,
                                std::uint64_t end) {
    return impl_->range_lock(file_id, start, end);
}

void Group::range_unlock(std::uint64_t token) { impl_->range_unlock(token); }

std::uint64_t Group::register_open(const std::string& path) {
    return impl_->register_open(path);
}

void Group::agree(std::uint64_t digest, const std::string& what) {
    impl_->agree(digest, what);
}

void Group::finalize() { impl_->finalize(); }

}  // namespace pario
