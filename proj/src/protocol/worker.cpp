// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/protocol/worker.hpp"

#include <condition_variable>
#include <thread>
#include <vector>

#include "emf/core/container.hpp"
#include "emf/core/json.hpp"
#include "emf/error.hpp"

namespace emf::protocol {

Json ExpertCapabilities::to_json() const {
    Json kinds = Json::array();
    for (TaskKind k : task_kinds) kinds.push_back(std::string(emf::to_string(k)));
    Json j{{"expert_id", expert_id}, {"task_kinds", kinds}, {"max_resolution", max_resolution}};
    if (link) {
        j["link"] = Json{{"latency_ms", link->latency_ms},
                         {"bandwidth_bps", link->bandwidth_bps},
                         {"drop_probability", link->drop_probability}};
    }
    return j;
}

ExpertCapabilities ExpertCapabilities::from_json(const Json& j) {
    ExpertCapabilities c;
    c.expert_id = j.at("expert_id").get<std::string>();
    c.task_kinds.clear();
    for (const auto& k : j.at("task_kinds")) c.task_kinds.insert(parse_task_kind(k.get<std::string>()));
    c.max_resolution = j.value("max_resolution", c.max_resolution);
    if (c.expert_id.empty()) fail(ErrorCode::ProtocolViolation, "capabilities carry an empty expert_id");
    if (j.contains("link")) {
        const auto& l = j.at("link");
        LinkParams p;
        p.latency_ms = l.value("latency_ms", p.latency_ms);
        p.bandwidth_bps = l.value("bandwidth_bps", p.bandwidth_bps);
        p.drop_probability = l.value("drop_probability", p.drop_probability);
        c.link = p;
    }
    return c;
}

Worker::Worker(WorkerOptions options, ExpertBehavior behavior)
    : options_(std::move(options)), behavior_(std::move(behavior)), link_(options_.link) {
    options_.link.validate();
    if (!options_.capabilities.link) options_.capabilities.link = options_.link;
}

void Worker::serve(Stream& stream) { serve_loop(stream, true); }

void Worker::serve_dial_in(Stream& stream) { serve_loop(stream, false); }

void Worker::stop() { stopped_.store(true); }

void Worker::send(Stream& stream, std::mutex& write_mu, const Message& m) {
    const auto bytes = encode_message(m);
    std::lock_guard link_lock(link_mu_);
    const auto outcome = link_.transfer(bytes.size());
    if (!outcome.delivered && options_.lossy_types.count(m.type) != 0) return;
    if (options_.sleep_scale > 0.0 && outcome.elapsed_ms > 0) {
        std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(
            static_cast<double>(outcome.elapsed_ms) * options_.sleep_scale));
    }
    std::lock_guard write_lock(write_mu);
    stream.write_all(bytes);
}

void Worker::handle_generate(Stream& stream, std::mutex& write_mu, const Message& m) {
    auto error_reply = [&](const std::string& code, const std::string& message) {
        send(stream, write_mu, Message{MessageType::Error, m.request_id, Json{{"code", code}, {"message", message}}, {}});
    };

    std::string sub_prompt;
    GenerationParams params;
    try {
        sub_prompt = m.body.at("sub_prompt").get<std::string>();
        params = m.body.at("params").get<GenerationParams>();
        params.validate();
        if (std::uint64_t{params.width} * params.height > options_.capabilities.max_resolution) {
            fail(ErrorCode::InvalidArgument, "requested resolution exceeds this expert's maximum");
        }
    } catch (const Json::exception& e) {
        error_reply("invalid_request", std::string("malformed GENERATE body: ") + e.what());
        return;
    } catch (const Error& e) {
        error_reply("invalid_request", e.what());
        return;
    }

    std::lock_guard one_at_a_time(generate_mu_);
    send(stream, write_mu, Message{MessageType::Progress, m.request_id, Json{{"fraction", 0.0}}, {}});
    invocations_.fetch_add(1);
    std::vector<std::uint8_t> container;
    try {
        VideoClip clip = behavior_(sub_prompt, params);
        container = encode_clip(clip);
    } catch (const Error& e) {
        error_reply(std::string(to_string(e.code())), e.what());
        return;
    } catch (const std::exception& e) {
        error_reply("generation_failed", e.what());
        return;
    }
    const Json body{{"expert_id", options_.capabilities.expert_id}, {"container_bytes", container.size()}};
    send(stream, write_mu, Message{MessageType::Result, m.request_id, body, std::move(container)});
}

void Worker::serve_loop(Stream& stream, bool expect_hello) {
    std::mutex write_mu;
    std::mutex hb_mu;
    std::condition_variable hb_cv;
    bool done = false;

    std::thread heartbeat([&] {
        std::unique_lock lock(hb_mu);
        while (!done) {
            if (hb_cv.wait_for(lock, options_.heartbeat_interval, [&] { return done; })) break;
            lock.unlock();
            try {
                const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now().time_since_epoch());
                send(stream, write_mu,
                     Message{MessageType::Heartbeat, {},
                             Json{{"expert_id", options_.capabilities.expert_id}, {"timestamp_ms", now.count()}},
                             {}});
            } catch (const Error&) {
                lock.lock();
                break;
            }
            lock.lock();
        }
    });

    try {
        if (!expect_hello) {
            send(stream, write_mu, Message{MessageType::Hello, {}, options_.capabilities.to_json(), {}});
        }
        while (!stopped_.load()) {
            const Message m = read_message(stream);
            switch (m.type) {
                case MessageType::Hello:
                    send(stream, write_mu, Message{MessageType::HelloAck, m.request_id, options_.capabilities.to_json(), {}});
                    break;
                case MessageType::Generate:
                    handle_generate(stream, write_mu, m);
                    break;
                default:
                    break;  // HELLO_ACK, HEARTBEAT and stray replies need no answer
            }
        }
    } catch (const Error&) {
        // Closed stream or a framing violation: drop the connection.
    }

    {
        std::lock_guard lock(hb_mu);
        done = true;
    }
    hb_cv.notify_all();
    stream.close();
    heartbeat.join();
}

void run_worker(TcpListener& listener, Worker& worker) {
    std::vector<std::thread> connections;
    std::vector<std::shared_ptr<Stream>> streams;
    std::mutex mu;
    while (!worker.stopped()) {
        std::shared_ptr<Stream> s = listener.accept();
        if (!s) break;
        std::lock_guard lock(mu);
        streams.push_back(s);
        connections.emplace_back([&worker, s] { worker.serve(*s); });
    }
    worker.stop();
    {
        std::lock_guard lock(mu);
        for (auto& s : streams) s->close();
    }
    for (auto& t : connections) t.join();
}

}  // namespace emf::protocol
