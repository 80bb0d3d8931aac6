#pragma once

// Internal TCP helpers for the coordinator protocol. Not installed.

#include <optional>
#include <string>
#include <utility>

#include "pario/wire.hpp"

namespace pario::net {

class Fd {
  public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(Fd&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
    Fd& operator=(Fd&& o) noexcept;
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() { close(); }

    int get() const { return fd_; }
    bool valid() const { return fd_ >= 0; }
    int release();
    void close();
    // Wakes any thread blocked in recv on this fd.
    void shutdown();

  private:
    int fd_ = -1;
};

// "host:port" -> (host, port); throws IoError{CoordinatorFailure} on junk.
std::pair<std::string, int> parse_endpoint(const std::string& endpoint);

// Connects to host:port; throws IoError{CoordinatorFailure} on failure.
Fd connect_tcp(const std::string& host, int port);

// Binds and listens; port 0 picks an ephemeral port. Returns (fd, bound port).
std::pair<Fd, int> listen_tcp(const std::string& host, int port);

void send_all(int fd, const void* data, std::size_t len);
// Returns false on clean EOF before any byte; throws on mid-read EOF or error.
bool recv_all(int fd, void* data, std::size_t len);

void write_frame(int fd, const wire::Frame& f);
// nullopt on clean EOF at a frame boundary.
std::optional<wire::Frame> read_frame(int fd);

}  // namespace pario::net
