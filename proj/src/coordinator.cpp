#include "pario/coordinator.hpp"

#include <sys/socket.h>

#include <algorithm>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "pario/wire.hpp"
#include "socket.hpp"

namespace pario {
namespace detail {

using wire::Frame;

namespace {

struct Conn {
    net::Fd fd;
    std::mutex send_mu;
    int rank = -1;
    bool finalized = false;

    void send(const Frame& f) {
        std::lock_guard lk(send_mu);
        net::write_frame(fd.get(), f);
    }
};

using ConnPtr = std::shared_ptr<Conn>;

}  // namespace

class CoordinatorImpl {
  public:
    CoordinatorImpl(int size, const std::string& host, int port) : size_(size), host_(host) {
        if (size < 1) throw IoError(ErrorClass::CoordinatorFailure, "group size must be >= 1");
        auto [fd, bound] = net::listen_tcp(host, port);
        listen_fd_ = std::move(fd);
        port_ = bound;
        acceptor_ = std::thread([this] { accept_loop(); });
    }

    ~CoordinatorImpl() { stop(); }

    int port() const { return port_; }
    std::string endpoint() const { return host_ + ":" + std::to_string(port_); }

    void wait_until_done() {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [this] { return done_ || failed_; });
    }

    bool done() const {
        std::lock_guard lk(mu_);
        return done_;
    }

    bool failed() const {
        std::lock_guard lk(mu_);
        return failed_;
    }

    void stop() {
        {
            std::lock_guard lk(mu_);
            if (stopped_) return;
            stopped_ = true;
        }
        listen_fd_.shutdown();
        listen_fd_.close();
        {
            std::lock_guard lk(mu_);
            for (auto& c : conns_) c->fd.shutdown();
        }
        if (acceptor_.joinable()) acceptor_.join();
        std::vector<std::thread> handlers;
        {
            std::lock_guard lk(mu_);
            handlers.swap(handlers_);
        }
        for (auto& t : handlers) {
            if (t.joinable()) t.join();
        }
    }

    std::vector<Coordinator::Event> events() const {
        std::lock_guard lk(mu_);
        return log_;
    }

    int leaked_lock_count() const {
        std::lock_guard lk(mu_);
        int n = 0;
        for (const auto& e : log_) {
            if (e.type == Coordinator::Event::Type::LockLeaked) ++n;
        }
        return n;
    }

  private:
    struct BcastRound {
        int arrived = 0;
        bool root_set = false;
        bool mismatch = false;
        std::uint32_t root = 0;
        std::vector<std::uint8_t> payload;
    };
    struct GatherRound {
        int arrived = 0;
        std::vector<std::int64_t> values;
    };
    struct OpenRound {
        int arrived = 0;
        bool mismatch = false;
        std::string path;
    };
    struct LockGrantRec {
        std::uint64_t token, file_id, start, end;
        int rank;
    };
    struct LockWaiter {
        std::uint64_t file_id, start, end;
        ConnPtr conn;
    };

    void accept_loop() {
        while (true) {
            int fd = ::accept(listen_fd_.get(), nullptr, nullptr);
            if (fd < 0) return;  // listener closed
            auto conn = std::make_shared<Conn>();
            conn->fd = net::Fd(fd);
            std::lock_guard lk(mu_);
            if (stopped_) return;
            conns_.push_back(conn);
            handlers_.emplace_back([this, conn] { serve(conn); });
        }
    }

    void serve(const ConnPtr& conn) {
        try {
            while (true) {
                auto frame = net::read_frame(conn->fd.get());
                if (!frame) break;  // EOF
                if (!handle(conn, *frame)) break;
            }
        } catch (const std::exception&) {
            // fall through to disconnect handling
        }
        on_disconnect(conn);
    }

    // Returns false when the connection is finished (after finalize).
    bool handle(const ConnPtr& conn, const Frame& f) {
        wire::Cursor cur(f.payload);
        switch (f.tag) {
            case wire::JOIN: return on_join(conn, cur.u32());
            case wire::BARRIER: return on_barrier(conn, cur.u64());
            case wire::BCAST_SEND: {
                std::uint32_t root = cur.u32();
                std::uint32_t len = cur.u32();
                return on_bcast(conn, root, cur.bytes(len));
            }
            case wire::GATHER: return on_gather(conn, cur.i64());
            case wire::OPEN: {
                std::uint32_t len = cur.u32();
                auto bytes = cur.bytes(len);
                return on_open(conn, std::string(bytes.begin(), bytes.end()));
            }
            case wire::FETCH_ADD: {
                std::uint64_t fid = cur.u64();
                std::uint8_t counter = cur.u8();
                std::int64_t delta = cur.i64();
                return on_fetch_add(conn, fid, counter, delta);
            }
            case wire::LOCK: {
                std::uint64_t fid = cur.u64();
                std::uint64_t start = cur.u64();
                std::uint64_t end = cur.u64();
                return on_lock(conn, fid, start, end);
            }
            case wire::UNLOCK: return on_unlock(conn, cur.u64());
            case wire::FINALIZE: return on_finalize(conn);
            default:
                conn->send(wire::make_error(ErrorClass::CoordinatorFailure,
                                            "unexpected frame tag"));
                return true;
        }
    }

    bool on_join(const ConnPtr& conn, std::uint32_t rank) {
        std::vector<ConnPtr> to_ack;
        {
            std::lock_guard lk(mu_);
            if (rank >= static_cast<std::uint32_t>(size_) || members_.count(rank)) {
                conn->send(wire::make_error(ErrorClass::CoordinatorFailure,
                                            "duplicate or out-of-range rank " +
                                                std::to_string(rank)));
                return false;
            }
            conn->rank = static_cast<int>(rank);
            members_[rank] = conn;
            log_event({Coordinator::Event::Type::MemberJoined, conn->rank, 0, 0, 0, 0, ""});
            if (static_cast<int>(members_.size()) == size_) {
                for (auto& [r, c] : members_) to_ack.push_back(c);
            }
        }
        for (auto& c : to_ack) c->send(wire::make_join_ack(static_cast<std::uint32_t>(size_)));
        return true;
    }

    bool require_member(const ConnPtr& conn) {
        if (conn->rank < 0) {
            conn->send(wire::make_error(ErrorClass::CoordinatorFailure, "not joined"));
            return false;
        }
        return true;
    }

    bool on_barrier(const ConnPtr& conn, std::uint64_t epoch) {
        if (!require_member(conn)) return true;
        std::vector<ConnPtr> release;
        {
            std::lock_guard lk(mu_);
            if (failed_) return true;
            int& count = barrier_counts_[epoch];
            ++count;
            if (count == size_) {
                barrier_counts_.erase(epoch);
                log_event({Coordinator::Event::Type::BarrierReleased, -1, 0, epoch, 0, 0, ""});
                for (auto& [r, c] : members_) release.push_back(c);
            }
        }
        for (auto& c : release) c->send(wire::make_barrier_release(epoch));
        return true;
    }

    bool on_bcast(const ConnPtr& conn, std::uint32_t root, std::vector<std::uint8_t> bytes) {
        if (!require_member(conn)) return true;
        std::vector<ConnPtr> targets;
        std::optional<BcastRound> complete;
        {
            std::lock_guard lk(mu_);
            if (failed_) return true;
            std::uint64_t round = bcast_seq_[conn->rank]++;
            auto& r = bcast_rounds_[round];
            if (!r.root_set) {
                r.root_set = true;
                r.root = root;
            } else if (r.root != root) {
                r.mismatch = true;
            }
            if (root < static_cast<std::uint32_t>(size_) &&
                conn->rank == static_cast<int>(root)) {
                r.payload = std::move(bytes);
            }
            if (root >= static_cast<std::uint32_t>(size_)) r.mismatch = true;
            if (++r.arrived == size_) {
                complete = std::move(r);
                bcast_rounds_.erase(round);
                for (auto& [rk, c] : members_) targets.push_back(c);
            }
        }
        if (complete) {
            if (complete->mismatch) {
                fan_error(targets, ErrorClass::GroupMismatch,
                          "broadcast root disagreement");
            } else {
                auto reply = wire::make_bcast_recv(complete->payload);
                for (auto& c : targets) c->send(reply);
            }
        }
        return true;
    }

    bool on_gather(const ConnPtr& conn, std::int64_t value) {
        if (!require_member(conn)) return true;
        std::vector<ConnPtr> targets;
        std::optional<std::vector<std::int64_t>> result;
        {
            std::lock_guard lk(mu_);
            if (failed_) return true;
            std::uint64_t round = gather_seq_[conn->rank]++;
            auto& r = gather_rounds_[round];
            if (r.values.empty()) r.values.assign(size_, 0);
            r.values[conn->rank] = value;
            if (++r.arrived == size_) {
                result = std::move(r.values);
                gather_rounds_.erase(round);
                for (auto& [rk, c] : members_) targets.push_back(c);
            }
        }
        if (result) {
            auto reply = wire::make_gather_result(*result);
            for (auto& c : targets) c->send(reply);
        }
        return true;
    }

    bool on_open(const ConnPtr& conn, std::string path) {
        if (!require_member(conn)) return true;
        std::vector<ConnPtr> targets;
        bool complete = false, mismatch = false;
        std::uint64_t file_id = 0;
        {
            std::lock_guard lk(mu_);
            if (failed_) return true;
            std::uint64_t round = open_seq_[conn->rank]++;
            auto& r = open_rounds_[round];
            if (r.arrived == 0) {
                r.path = std::move(path);
            } else if (r.path != path) {
                r.mismatch = true;
            }
            if (++r.arrived == size_) {
                complete = true;
                mismatch = r.mismatch;
                if (!mismatch) {
                    file_id = next_file_id_++;
                    log_event({Coordinator::Event::Type::FileOpened, conn->rank, file_id,
                               0, 0, 0, r.path});
                }
                open_rounds_.erase(round);
                for (auto& [rk, c] : members_) targets.push_back(c);
            }
        }
        if (complete) {
            if (mismatch) {
                fan_error(targets, ErrorClass::GroupMismatch, "open path disagreement");
            } else {
                auto reply = wire::make_open_ack(file_id);
                for (auto& c : targets) c->send(reply);
            }
        }
        return true;
    }

    bool on_fetch_add(const ConnPtr& conn, std::uint64_t fid, std::uint8_t counter,
                      std::int64_t delta) {
        if (!require_member(conn)) return true;
        std::int64_t old;
        {
            std::lock_guard lk(mu_);
            auto& v = counters_[{fid, counter}];  // fresh counters start at zero
            old = v;
            v += delta;
        }
        conn->send(wire::make_fetch_add_result(old));
        return true;
    }

    bool overlaps_granted(std::uint64_t fid, std::uint64_t start, std::uint64_t end) const {
        for (const auto& g : grants_) {
            if (g.file_id == fid && start < g.end && g.start < end) return true;
        }
        return false;
    }

    bool on_lock(const ConnPtr& conn, std::uint64_t fid, std::uint64_t start,
                 std::uint64_t end) {
        if (!require_member(conn)) return true;
        if (start >= end) {
            conn->send(wire::make_error(ErrorClass::BadOffset, "empty lock range"));
            return true;
        }
        std::optional<std::uint64_t> token;
        {
            std::lock_guard lk(mu_);
            if (failed_) return true;
            if (!overlaps_granted(fid, start, end)) {
                token = next_token_++;
                grants_.push_back({*token, fid, start, end, conn->rank});
                log_event({Coordinator::Event::Type::LockGranted, conn->rank, fid, start,
                           end, *token, ""});
            } else {
                lock_waiters_.push_back({fid, start, end, conn});
            }
        }
        if (token) conn->send(wire::make_lock_grant(*token));
        return true;
    }

    bool on_unlock(const ConnPtr& conn, std::uint64_t token) {
        if (!require_member(conn)) return true;
        release_token(token);
        return true;
    }

    void release_token(std::uint64_t token) {
        std::vector<std::pair<ConnPtr, std::uint64_t>> granted;
        {
            std::lock_guard lk(mu_);
            auto it = std::find_if(grants_.begin(), grants_.end(),
                                   [&](const LockGrantRec& g) { return g.token == token; });
            if (it == grants_.end()) return;
            log_event({Coordinator::Event::Type::LockReleased, it->rank, it->file_id,
                       it->start, it->end, token, ""});
            grants_.erase(it);
            grant_waiters_locked(granted);
        }
        for (auto& [c, t] : granted) c->send(wire::make_lock_grant(t));
    }

    // Grants every queued waiter whose range is now free. FIFO scan; caller
    // holds mu_ and performs the sends afterwards.
    void grant_waiters_locked(std::vector<std::pair<ConnPtr, std::uint64_t>>& granted) {
        bool progress = true;
        while (progress) {
            progress = false;
            for (auto it = lock_waiters_.begin(); it != lock_waiters_.end(); ++it) {
                if (!overlaps_granted(it->file_id, it->start, it->end)) {
                    std::uint64_t token = next_token_++;
                    grants_.push_back({token, it->file_id, it->start, it->end,
                                       it->conn->rank});
                    log_event({Coordinator::Event::Type::LockGranted, it->conn->rank,
                               it->file_id, it->start, it->end, token, ""});
                    granted.emplace_back(it->conn, token);
                    lock_waiters_.erase(it);
                    progress = true;
                    break;
                }
            }
        }
    }

    bool on_finalize(const ConnPtr& conn) {
        if (!require_member(conn)) return true;
        bool all_done = false;
        {
            std::lock_guard lk(mu_);
            if (conn->finalized) return true;
            conn->finalized = true;
            log_event({Coordinator::Event::Type::MemberFinalized, conn->rank, 0, 0, 0, 0, ""});
            if (++finalized_ == size_) {
                // Release leaked locks before shutdown.
                for (const auto& g : grants_) {
                    log_event({Coordinator::Event::Type::LockLeaked, g.rank, g.file_id,
                               g.start, g.end, g.token, ""});
                    std::fprintf(stderr,
                                 "pario-coordinator: rank %d leaked lock [%llu,%llu) on "
                                 "file %llu, releasing\n",
                                 g.rank, static_cast<unsigned long long>(g.start),
                                 static_cast<unsigned long long>(g.end),
                                 static_cast<unsigned long long>(g.file_id));
                }
                grants_.clear();
                done_ = true;
                all_done = true;
                cv_.notify_all();
            }
        }
        if (all_done) {
            // Closing the connections is the members' completion signal.
            std::lock_guard lk(mu_);
            for (auto& [r, c] : members_) c->fd.shutdown();
        }
        return false;
    }

    void on_disconnect(const ConnPtr& conn) {
        std::vector<ConnPtr> targets;
        {
            std::lock_guard lk(mu_);
            conn->fd.close();
            if (done_ || stopped_ || conn->finalized || conn->rank < 0) return;
            if (!failed_) {
                failed_ = true;
                log_event({Coordinator::Event::Type::Failure, conn->rank, 0, 0, 0, 0,
                           "member disconnected before finalize"});
                for (auto& [r, c] : members_) {
                    if (c != conn) targets.push_back(c);
                }
                cv_.notify_all();
            }
        }
        fan_error(targets, ErrorClass::CoordinatorFailure,
                  "group member disconnected before finalize");
    }

    void fan_error(const std::vector<ConnPtr>& targets, ErrorClass cls,
                   const std::string& msg) {
        auto frame = wire::make_error(cls, msg);
        for (auto& c : targets) {
            try {
                c->send(frame);
            } catch (const std::exception&) {
                // member already gone
            }
        }
    }

    void log_event(Coordinator::Event e) { log_.push_back(std::move(e)); }

    const int size_;
    const std::string host_;
    int port_ = 0;

    net::Fd listen_fd_;
    std::thread acceptor_;

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::vector<std::thread> handlers_;
    std::vector<ConnPtr> conns_;
    std::map<std::uint32_t, ConnPtr> members_;
    std::map<std::uint64_t, int> barrier_counts_;
    std::map<int, std::uint64_t> bcast_seq_, gather_seq_, open_seq_;
    std::map<std::uint64_t, BcastRound> bcast_rounds_;
    std::map<std::uint64_t, GatherRound> gather_rounds_;
    std::map<std::uint64_t, OpenRound> open_rounds_;
    std::map<std::pair<std::uint64_t, std::uint8_t>, std::int64_t> counters_;
    std::vector<LockGrantRec> grants_;
    std::deque<LockWaiter> lock_waiters_;
    std::uint64_t next_file_id_ = 1;
    std::uint64_t next_token_ = 1;
    int finalized_ = 0;
    bool done_ = false;
    bool failed_ = false;
    bool stopped_ = false;
    std::vector<Coordinator::Event> log_;
};

}  // namespace detail

Coordinator::Coordinator(int size, const std::string& host, int port)
    : impl_(std::make_unique<detail::CoordinatorImpl>(size, host, port)) {}

Coordinator::~Coordinator() = default;

int Coordinator::port() const { return impl_->port(); }
std::string Coordinator::endpoint() const { return impl_->endpoint(); }
void Coordinator::wait_until_done() { impl_->wait_until_done(); }
bool Coordinator::done() const { return impl_->done(); }
bool Coordinator::failed() const { return impl_->failed(); }
void Coordinator::stop() { impl_->stop(); }
std::vector<Coordinator::Event> Coordinator::events() const { return impl_->events(); }
int Coordinator::leaked_lock_count() const { return impl_->leaked_lock_count(); }

}  // namespace pario
