// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/protocol/expert_client.hpp"

#include "emf/core/container.hpp"
#include "emf/core/json.hpp"
#include "emf/error.hpp"

namespace emf::protocol {

ExpertClient::ExpertClient(std::unique_ptr<Stream> stream, HeartbeatFn on_heartbeat, DisconnectFn on_disconnect)
    : stream_(std::move(stream)), on_heartbeat_(std::move(on_heartbeat)), on_disconnect_(std::move(on_disconnect)) {}

ExpertClient::~ExpertClient() {
    close();
    if (reader_.joinable()) reader_.join();
}

void ExpertClient::close() {
    alive_.store(false);
    stream_->close();
    cv_.notify_all();
}

std::string ExpertClient::locked_expert_id() {
    std::lock_guard lock(mu_);
    return caps_.expert_id;
}

void ExpertClient::start_reader() {
    reader_ = std::thread([this] { reader_loop(); });
}

void ExpertClient::reader_loop() {
    try {
        while (true) {
            Message m = read_message(*stream_);
            if (m.type == MessageType::Heartbeat) {
                const std::string id = locked_expert_id();
                if (on_heartbeat_ && !id.empty()) on_heartbeat_(id);
                continue;
            }
            std::lock_guard lock(mu_);
            const bool handshake = awaiting_handshake_ && (m.type == MessageType::HelloAck || m.type == MessageType::Hello);
            const bool answer = !awaiting_id_.empty() && m.request_id == awaiting_id_ &&
                                (m.type == MessageType::Result || m.type == MessageType::Error);
            if (handshake || answer) {
                reply_ = std::move(m);
                cv_.notify_all();
            }
            // PROGRESS and replies to abandoned requests are dropped here.
        }
    } catch (const Error&) {
    }
    alive_.store(false);
    cv_.notify_all();
    const std::string id = locked_expert_id();
    if (on_disconnect_ && !id.empty()) on_disconnect_(id);
}

Message ExpertClient::await_reply(const std::string& request_id, MessageType want_a, MessageType want_b,
                                  std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    const bool got = cv_.wait_for(lock, timeout, [&] { return reply_.has_value() || !alive_.load(); });
    awaiting_id_.clear();
    awaiting_handshake_ = false;
    if (reply_) {
        Message m = std::move(*reply_);
        reply_.reset();
        if (m.type != want_a && m.type != want_b) {
            fail(ErrorCode::ProtocolViolation, "unexpected " + std::string(to_string(m.type)));
        }
        return m;
    }
    if (!got) {
        fail(ErrorCode::ExpertTimeout, "no reply within " + std::to_string(timeout.count()) + " ms" +
                                           (request_id.empty() ? std::string() : " for request " + request_id));
    }
    fail(ErrorCode::TransportClosed, "connection to expert closed");
}

std::shared_ptr<ExpertClient> ExpertClient::connect(std::unique_ptr<Stream> stream, std::chrono::milliseconds timeout,
                                                    HeartbeatFn on_heartbeat, DisconnectFn on_disconnect) {
    std::shared_ptr<ExpertClient> c(new ExpertClient(std::move(stream), std::move(on_heartbeat), std::move(on_disconnect)));
    {
        std::lock_guard lock(c->mu_);
        c->awaiting_handshake_ = true;
    }
    c->start_reader();
    try {
        {
            std::lock_guard lock(c->write_mu_);
            write_message(*c->stream_, Message{MessageType::Hello, {}, Json{{"role", "orchestrator"}, {"version", 1}}, {}});
        }
        const Message ack = c->await_reply({}, MessageType::HelloAck, MessageType::HelloAck, timeout);
        auto caps = ExpertCapabilities::from_json(ack.body);
        std::lock_guard lock(c->mu_);
        c->caps_ = std::move(caps);
    } catch (...) {
        c->close();
        throw;
    }
    return c;
}

std::shared_ptr<ExpertClient> ExpertClient::accept(std::unique_ptr<Stream> stream, std::chrono::milliseconds timeout,
                                                   HeartbeatFn on_heartbeat, DisconnectFn on_disconnect) {
    std::shared_ptr<ExpertClient> c(new ExpertClient(std::move(stream), std::move(on_heartbeat), std::move(on_disconnect)));
    {
        std::lock_guard lock(c->mu_);
        c->awaiting_handshake_ = true;
    }
    c->start_reader();
    try {
        const Message hello = c->await_reply({}, MessageType::Hello, MessageType::Hello, timeout);
        auto caps = ExpertCapabilities::from_json(hello.body);
        {
            std::lock_guard lock(c->mu_);
            c->caps_ = std::move(caps);
        }
        std::lock_guard lock(c->write_mu_);
        write_message(*c->stream_, Message{MessageType::HelloAck, {}, Json{{"accepted", true}}, {}});
    } catch (...) {
        c->close();
        throw;
    }
    return c;
}

VideoClip ExpertClient::generate(const std::string& request_id, const std::string& sub_prompt,
                                 const GenerationParams& params, const Digest& cache_key,
                                 std::chrono::milliseconds timeout) {
    std::lock_guard one_request(request_mu_);
    if (!alive_.load()) fail(ErrorCode::TransportClosed, "connection to expert " + caps_.expert_id + " is closed");
    {
        std::lock_guard lock(mu_);
        awaiting_id_ = request_id;
        reply_.reset();
    }
    {
        const Json body{{"sub_prompt", sub_prompt}, {"params", params}, {"cache_key", cache_key.hex()}};
        std::lock_guard lock(write_mu_);
        write_message(*stream_, Message{MessageType::Generate, request_id, body, {}});
    }
    const Message reply = await_reply(request_id, MessageType::Result, MessageType::Error, timeout);
    if (reply.type == MessageType::Error) {
        fail(ErrorCode::ExpertFailed, "expert " + caps_.expert_id + " reported " + reply.body.value("code", "error") +
                                          ": " + reply.body.value("message", ""));
    }
    VideoClip clip = decode_clip(reply.payload);
    if (clip.params.width != params.width || clip.params.height != params.height ||
        clip.params.frame_count != params.frame_count) {
        fail(ErrorCode::ExpertFailed, "expert " + caps_.expert_id + " returned a clip with the wrong shape");
    }
    return clip;
}

}  // namespace emf::protocol
