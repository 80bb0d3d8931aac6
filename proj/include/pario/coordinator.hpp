#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace pario {

namespace detail {
class CoordinatorImpl;
}

// Rendezvous service for one SPMD group: join, barrier, broadcast, gather,
// shared counters, byte-range locks. Members connect over TCP and speak the
// framed protocol in pario/wire.hpp. The coordinator serves members
// concurrently and serializes all state mutations; it shuts itself down once
// every member has sent FINALIZE.
class Coordinator {
  public:
    struct Event {
        enum class Type {
            MemberJoined,
            FileOpened,
            BarrierReleased,
            LockGranted,
            LockReleased,
            LockLeaked,
            MemberFinalized,
            Failure,
        };
        Type type;
        int rank = -1;
        std::uint64_t file_id = 0;
        std::uint64_t a = 0;  // lock start / barrier epoch
        std::uint64_t b = 0;  // lock end
        std::uint64_t token = 0;
        std::string text;     // path / failure detail
    };

    // Starts listening immediately; port 0 picks an ephemeral port.
    explicit Coordinator(int size, const std::string& host = "127.0.0.1", int port = 0);
    ~Coordinator();

    Coordinator(const Coordinator&) = delete;
    Coordinator& operator=(const Coordinator&) = delete;

    int port() const;
    std::string endpoint() const;  // "host:port"

    // Blocks until all members finalized or the group failed.
    void wait_until_done();
    bool done() const;
    bool failed() const;

    // Forces shutdown; pending members see their connections drop.
    void stop();

    // Snapshot of the event log (appended in serialization order).
    std::vector<Event> events() const;
    int leaked_lock_count() const;

  private:
    std::unique_ptr<detail::CoordinatorImpl> impl_;
};

}  // namespace pario
