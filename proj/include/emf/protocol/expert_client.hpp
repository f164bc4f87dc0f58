// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "emf/core/types.hpp"
#include "emf/protocol/transport.hpp"
#include "emf/protocol/worker.hpp"

namespace emf::protocol {

/// Orchestrator end of one worker connection. A background reader thread
/// consumes HEARTBEAT/PROGRESS and hands RESULT/ERROR to the single pending
/// request.
class ExpertClient {
public:
    using HeartbeatFn = std::function<void(const std::string& expert_id)>;
    using DisconnectFn = std::function<void(const std::string& expert_id)>;

    /// Orchestrator-initiated connection: sends HELLO and waits for HELLO_ACK.
    static std::shared_ptr<ExpertClient> connect(std::unique_ptr<Stream> stream, std::chrono::milliseconds timeout,
                                                 HeartbeatFn on_heartbeat = {}, DisconnectFn on_disconnect = {});

    /// Worker-initiated connection: waits for HELLO and answers HELLO_ACK.
    static std::shared_ptr<ExpertClient> accept(std::unique_ptr<Stream> stream, std::chrono::milliseconds timeout,
                                                HeartbeatFn on_heartbeat = {}, DisconnectFn on_disconnect = {});

    ~ExpertClient();
    ExpertClient(const ExpertClient&) = delete;
    ExpertClient& operator=(const ExpertClient&) = delete;

    const ExpertCapabilities& capabilities() const { return caps_; }
    const std::string& expert_id() const { return caps_.expert_id; }

    /// Sends GENERATE and waits for RESULT. Throws ExpertTimeout,
    /// ExpertFailed (worker ERROR), TransportClosed or MalformedContainer.
    VideoClip generate(const std::string& request_id, const std::string& sub_prompt, const GenerationParams& params,
                       const Digest& cache_key, std::chrono::milliseconds timeout);

    bool alive() const { return alive_.load(); }
    void close();

private:
    ExpertClient(std::unique_ptr<Stream> stream, HeartbeatFn on_heartbeat, DisconnectFn on_disconnect);
    void start_reader();
    void reader_loop();
    std::string locked_expert_id();
    Message await_reply(const std::string& request_id, MessageType want_a, MessageType want_b,
                        std::chrono::milliseconds timeout);

    std::unique_ptr<Stream> stream_;
    HeartbeatFn on_heartbeat_;
    DisconnectFn on_disconnect_;
    ExpertCapabilities caps_;

    std::mutex request_mu_;  // one request in flight per connection
    std::mutex write_mu_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::string awaiting_id_;
    bool awaiting_handshake_ = false;
    std::optional<Message> reply_;
    std::atomic<bool> alive_{true};
    std::thread reader_;
};

}  // namespace emf::protocol
