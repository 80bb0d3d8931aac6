#include "socket.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace pario::net {

namespace {

[[noreturn]] void fail(const std::string& what) {
    throw IoError(ErrorClass::CoordinatorFailure, what + ": " + std::strerror(errno));
}

constexpr std::size_t kMaxFrame = 64u << 20;  // sanity bound on frame size

}  // namespace

Fd& Fd::operator=(Fd&& o) noexcept {
    if (this != &o) {
        close();
        fd_ = o.fd_;
        o.fd_ = -1;
    }
    return *this;
}

int Fd::release() {
    int fd = fd_;
    fd_ = -1;
    return fd;
}

void Fd::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

void Fd::shutdown() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

std::pair<std::string, int> parse_endpoint(const std::string& endpoint) {
    auto colon = endpoint.rfind(':');
    if (colon == std::string::npos || colon + 1 >= endpoint.size()) {
        throw IoError(ErrorClass::CoordinatorFailure,
                      "malformed endpoint '" + endpoint + "', expected host:port");
    }
    int port = 0;
    try {
        port = std::stoi(endpoint.substr(colon + 1));
    } catch (const std::exception&) {
        throw IoError(ErrorClass::CoordinatorFailure,
                      "malformed port in endpoint '" + endpoint + "'");
    }
    return {endpoint.substr(0, colon), port};
}

namespace {

sockaddr_in make_addr(const std::string& host, int port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        throw IoError(ErrorClass::CoordinatorFailure, "bad host address '" + host + "'");
    }
    return addr;
}

}  // namespace

Fd connect_tcp(const std::string& host, int port) {
    Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (!fd.valid()) fail("socket");
    sockaddr_in addr = make_addr(host, port);
    if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        fail("connect to " + host + ":" + std::to_string(port));
    }
    int one = 1;
    ::setsockopt(fd.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return fd;
}

std::pair<Fd, int> listen_tcp(const std::string& host, int port) {
    Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (!fd.valid()) fail("socket");
    int one = 1;
    ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr = make_addr(host, port);
    if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        fail("bind " + host + ":" + std::to_string(port));
    }
    if (::listen(fd.get(), 64) != 0) fail("listen");
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    if (::getsockname(fd.get(), reinterpret_cast<sockaddr*>(&bound), &len) != 0) {
        fail("getsockname");
    }
    return {std::move(fd), ntohs(bound.sin_port)};
}

void send_all(int fd, const void* data, std::size_t len) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    while (len > 0) {
        ssize_t n = ::send(fd, p, len, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail("send");
        }
        p += n;
        len -= static_cast<std::size_t>(n);
    }
}

bool recv_all(int fd, void* data, std::size_t len) {
    auto* p = static_cast<std::uint8_t*>(data);
    std::size_t got = 0;
    while (got < len) {
        ssize_t n = ::recv(fd, p + got, len - got, 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail("recv");
        }
        if (n == 0) {
            if (got == 0) return false;
            throw IoError(ErrorClass::CoordinatorFailure, "connection closed mid-frame");
        }
        got += static_cast<std::size_t>(n);
    }
    return true;
}

void write_frame(int fd, const wire::Frame& f) {
    auto bytes = wire::encode(f);
    send_all(fd, bytes.data(), bytes.size());
}

std::optional<wire::Frame> read_frame(int fd) {
    std::uint8_t hdr[4];
    if (!recv_all(fd, hdr, 4)) return std::nullopt;
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len |= std::uint32_t(hdr[i]) << (8 * i);
    if (len == 0 || len > kMaxFrame) {
        throw IoError(ErrorClass::CoordinatorFailure,
                      "bad frame length " + std::to_string(len));
    }
    wire::Frame f;
    if (!recv_all(fd, &f.tag, 1)) {
        throw IoError(ErrorClass::CoordinatorFailure, "connection closed mid-frame");
    }
    f.payload.resize(len - 1);
    if (len > 1 && !recv_all(fd, f.payload.data(), f.payload.size())) {
        throw IoError(ErrorClass::CoordinatorFailure, "connection closed mid-frame");
    }
    return f;
}

}  // namespace pario::net
