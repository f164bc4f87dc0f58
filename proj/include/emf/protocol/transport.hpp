// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>

#include "emf/protocol/message.hpp"

namespace emf::protocol {

/// Reliable ordered byte stream. Reads and writes throw TransportClosed once
/// either side closes. close() may be called from another thread to unblock
/// a pending read.
class Stream {
public:
    virtual ~Stream() = default;
    virtual void write_all(std::span<const std::uint8_t> bytes) = 0;
    virtual void read_exact(std::span<std::uint8_t> out) = 0;
    virtual void close() = 0;
};

/// Two connected in-process endpoints with the same framing semantics as TCP.
std::pair<std::unique_ptr<Stream>, std::unique_ptr<Stream>> make_loopback_pair();

struct HostPort {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;
};

/// Parses "host:port" (host may be empty, meaning 127.0.0.1).
HostPort parse_host_port(const std::string& text);

std::unique_ptr<Stream> tcp_connect(const HostPort& addr, std::chrono::milliseconds timeout);

class TcpListener {
public:
    explicit TcpListener(const HostPort& addr);
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    std::uint16_t port() const { return port_; }
    /// Blocks; returns nullptr once the listener is closed.
    std::unique_ptr<Stream> accept();
    void close();

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

void write_message(Stream& s, const Message& m);
/// Reads one frame; enforces the header and payload limits before allocating.
Message read_message(Stream& s);

}  // namespace emf::protocol
