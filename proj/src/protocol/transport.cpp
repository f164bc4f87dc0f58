// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/protocol/transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

#include "emf/error.hpp"

namespace emf::protocol {

namespace {

[[noreturn]] void closed(const std::string& why) { fail(ErrorCode::TransportClosed, why); }

struct Pipe {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::uint8_t> bytes;
    bool closed = false;
};

struct LoopbackState {
    Pipe a_to_b;
    Pipe b_to_a;

    void close_all() {
        for (Pipe* p : {&a_to_b, &b_to_a}) {
            {
                std::lock_guard lock(p->mu);
                p->closed = true;
            }
            p->cv.notify_all();
        }
    }
};

class LoopbackStream final : public Stream {
public:
    LoopbackStream(std::shared_ptr<LoopbackState> state, Pipe* out, Pipe* in)
        : state_(std::move(state)), out_(out), in_(in) {}
    ~LoopbackStream() override { close(); }

    void write_all(std::span<const std::uint8_t> bytes) override {
        {
            std::lock_guard lock(out_->mu);
            if (out_->closed) closed("loopback peer closed");
            out_->bytes.insert(out_->bytes.end(), bytes.begin(), bytes.end());
        }
        out_->cv.notify_all();
    }

    void read_exact(std::span<std::uint8_t> out) override {
        std::unique_lock lock(in_->mu);
        std::size_t got = 0;
        while (got < out.size()) {
            in_->cv.wait(lock, [&] { return !in_->bytes.empty() || in_->closed; });
            if (in_->bytes.empty()) closed("loopback stream closed");
            while (got < out.size() && !in_->bytes.empty()) {
                out[got++] = in_->bytes.front();
                in_->bytes.pop_front();
            }
        }
    }

    void close() override { state_->close_all(); }

private:
    std::shared_ptr<LoopbackState> state_;
    Pipe* out_;
    Pipe* in_;
};

class TcpStream final : public Stream {
public:
    explicit TcpStream(int fd) : fd_(fd) {
        int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    }
    ~TcpStream() override {
        close();
        ::close(fd_);
    }

    void write_all(std::span<const std::uint8_t> bytes) override {
        std::size_t sent = 0;
        while (sent < bytes.size()) {
            const auto n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) closed(std::string("tcp send failed: ") + std::strerror(errno));
            sent += static_cast<std::size_t>(n);
        }
    }

    void read_exact(std::span<std::uint8_t> out) override {
        std::size_t got = 0;
        while (got < out.size()) {
            const auto n = ::recv(fd_, out.data() + got, out.size() - got, 0);
            if (n < 0 && errno == EINTR) continue;
            if (n == 0) closed("tcp peer closed the connection");
            if (n < 0) closed(std::string("tcp recv failed: ") + std::strerror(errno));
            got += static_cast<std::size_t>(n);
        }
    }

    void close() override {
        if (!shut_.exchange(true)) ::shutdown(fd_, SHUT_RDWR);
    }

private:
    int fd_;
    std::atomic<bool> shut_{false};
};

sockaddr_in resolve(const HostPort& addr) {
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(addr.port);
    const std::string host = addr.host.empty() ? "127.0.0.1" : addr.host;
    if (host == "0.0.0.0" || host == "*") {
        sa.sin_addr.s_addr = htonl(INADDR_ANY);
        return sa;
    }
    if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) == 1) return sa;
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
        fail(ErrorCode::InvalidArgument, "cannot resolve host '" + host + "'");
    }
    sa.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
    ::freeaddrinfo(res);
    return sa;
}

}  // namespace

std::pair<std::unique_ptr<Stream>, std::unique_ptr<Stream>> make_loopback_pair() {
    auto state = std::make_shared<LoopbackState>();
    auto a = std::make_unique<LoopbackStream>(state, &state->a_to_b, &state->b_to_a);
    auto b = std::make_unique<LoopbackStream>(state, &state->b_to_a, &state->a_to_b);
    return {std::move(a), std::move(b)};
}

HostPort parse_host_port(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos) fail(ErrorCode::InvalidArgument, "address '" + text + "' must be host:port");
    HostPort hp;
    hp.host = text.substr(0, colon);
    if (hp.host.empty()) hp.host = "127.0.0.1";
    try {
        const int port = std::stoi(text.substr(colon + 1));
        if (port < 0 || port > 65535) throw std::out_of_range("port");
        hp.port = static_cast<std::uint16_t>(port);
    } catch (const std::exception&) {
        fail(ErrorCode::InvalidArgument, "address '" + text + "' has an invalid port");
    }
    return hp;
}

std::unique_ptr<Stream> tcp_connect(const HostPort& addr, std::chrono::milliseconds timeout) {
    const sockaddr_in sa = resolve(addr);
    const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) closed(std::string("socket failed: ") + std::strerror(errno));

    const int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(fd, reinterpret_cast<const sockaddr*>(&sa), sizeof(sa));
    if (rc < 0 && errno == EINPROGRESS) {
        pollfd p{fd, POLLOUT, 0};
        rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
        if (rc == 1) {
            int err = 0;
            socklen_t len = sizeof(err);
            ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
            rc = err == 0 ? 0 : -1;
            errno = err;
        } else {
            rc = -1;
            if (errno == 0) errno = ETIMEDOUT;
        }
    }
    if (rc != 0) {
        const std::string why = std::strerror(errno);
        ::close(fd);
        closed("cannot connect to " + addr.host + ":" + std::to_string(addr.port) + ": " + why);
    }
    ::fcntl(fd, F_SETFL, flags);
    return std::make_unique<TcpStream>(fd);
}

TcpListener::TcpListener(const HostPort& addr) {
    const sockaddr_in sa = resolve(addr);
    fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd_ < 0) closed(std::string("socket failed: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd_, reinterpret_cast<const sockaddr*>(&sa), sizeof(sa)) != 0 || ::listen(fd_, 16) != 0) {
        const std::string why = std::strerror(errno);
        ::close(fd_);
        fd_ = -1;
        fail(ErrorCode::InvalidArgument, "cannot listen on " + addr.host + ":" + std::to_string(addr.port) + ": " + why);
    }
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() {
    close();
    if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Stream> TcpListener::accept() {
    while (true) {
        const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd >= 0) return std::make_unique<TcpStream>(fd);
        if (errno == EINTR || errno == ECONNABORTED) continue;
        return nullptr;
    }
}

void TcpListener::close() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void write_message(Stream& s, const Message& m) {
    const auto bytes = encode_message(m);
    s.write_all(bytes);
}

Message read_message(Stream& s) {
    std::vector<std::uint8_t> frame(4);
    s.read_exact(frame);
    const std::size_t header_len =
        (std::size_t{frame[0]} << 24) | (std::size_t{frame[1]} << 16) | (std::size_t{frame[2]} << 8) | frame[3];
    if (header_len > kMaxHeaderBytes) fail(ErrorCode::ProtocolViolation, "header length exceeds 1 MiB", 0);
    frame.resize(4 + header_len);
    s.read_exact(std::span(frame).subspan(4));

    std::size_t payload_len = 0;
    try {
        const auto header = Json::parse(frame.begin() + 4, frame.end());
        payload_len = header.value("payload_length", std::size_t{0});
    } catch (const Json::exception& e) {
        fail(ErrorCode::ProtocolViolation, std::string("unreadable header: ") + e.what(), 4);
    }
    if (payload_len > kMaxPayloadBytes) fail(ErrorCode::ProtocolViolation, "payload exceeds limit", 4);
    frame.resize(4 + header_len + payload_len);
    s.read_exact(std::span(frame).subspan(4 + header_len));
    return decode_message(frame);
}

}  // namespace emf::protocol
