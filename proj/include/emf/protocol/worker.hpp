// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <string>

#include "emf/core/types.hpp"
#include "emf/protocol/link.hpp"
#include "emf/protocol/message.hpp"
#include "emf/protocol/transport.hpp"

namespace emf::protocol {

using ExpertBehavior = std::function<VideoClip(const std::string& sub_prompt, const GenerationParams& params)>;

struct ExpertCapabilities {
    std::string expert_id;
    std::set<TaskKind> task_kinds{TaskKind::Atomic, TaskKind::Temporal, TaskKind::Spatial};
    std::uint64_t max_resolution = 1920u * 1080u;
    /// Self-declared link profile, used for latency-aware routing.
    std::optional<LinkParams> link;

    Json to_json() const;
    static ExpertCapabilities from_json(const Json& j);
};

struct WorkerOptions {
    ExpertCapabilities capabilities;
    LinkParams link;
    std::chrono::milliseconds heartbeat_interval{1000};
    /// Wall-clock milliseconds slept per simulated link millisecond.
    double sleep_scale = 1.0;
    /// Outbound message types subject to link drops.
    std::set<MessageType> lossy_types{MessageType::Hello,    MessageType::HelloAck, MessageType::Progress,
                                      MessageType::Result,   MessageType::Error,    MessageType::Heartbeat,
                                      MessageType::Generate};
};

/// An edge expert. Requests are served one at a time across all connections;
/// every outbound message passes through the simulated link first.
class Worker {
public:
    Worker(WorkerOptions options, ExpertBehavior behavior);

    /// Serves a connection opened by the orchestrator: waits for HELLO,
    /// answers HELLO_ACK with capabilities. Returns when the stream closes or
    /// stop() is called.
    void serve(Stream& stream);

    /// Serves a connection the worker opened towards the orchestrator: sends
    /// HELLO with capabilities, then behaves as serve().
    void serve_dial_in(Stream& stream);

    void stop();
    bool stopped() const { return stopped_.load(); }

    std::uint64_t invocations() const { return invocations_.load(); }
    const WorkerOptions& options() const { return options_; }

private:
    void serve_loop(Stream& stream, bool expect_hello);
    void send(Stream& stream, std::mutex& write_mu, const Message& m);
    void handle_generate(Stream& stream, std::mutex& write_mu, const Message& m);

    WorkerOptions options_;
    ExpertBehavior behavior_;
    std::mutex link_mu_;
    LinkSimulator link_;
    std::mutex generate_mu_;
    std::atomic<bool> stopped_{false};
    std::atomic<std::uint64_t> invocations_{0};
};

/// Accept loop on a TCP listener; each connection is served on its own
/// thread. Returns after stop_flag is set and the listener is closed.
void run_worker(TcpListener& listener, Worker& worker);

}  // namespace emf::protocol
