// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <thread>

#include "emf/core/canonical.hpp"
#include "emf/core/container.hpp"
#include "emf/error.hpp"
#include "emf/metrics/metrics.hpp"
#include "emf/protocol/expert_client.hpp"
#include "emf/protocol/link.hpp"
#include "emf/protocol/message.hpp"
#include "emf/protocol/mock_expert.hpp"
#include "emf/protocol/transport.hpp"
#include "emf/protocol/worker.hpp"
#include "message_fuzz.hpp"
#include "test_util.hpp"

namespace emf::protocol {
namespace {

using namespace std::chrono_literals;

// ---- framing -------------------------------------------------------------

using testing::random_message;

TEST(Message, HelloRoundTrip) {
    Message m{MessageType::Hello, {}, Json{{"expert_id", "e1"}, {"task_kinds", {"atomic"}}}, {}};
    EXPECT_EQ(decode_message(encode_message(m)), m);
}

TEST(Message, ResultWithClipPayload) {
    const auto clip = testing::solid_clip(4, 4, 2, {10, 20, 30});
    Message m{MessageType::Result, new_request_id(), Json{{"expert_id", "e1"}}, encode_clip(clip)};
    const auto back = decode_message(encode_message(m));
    EXPECT_EQ(back.payload, m.payload);
    EXPECT_EQ(decode_clip(back.payload), clip);
}

TEST(Message, HeaderLengthBeyondBytes) {
    auto bytes = encode_message(Message{MessageType::Heartbeat, {}, Json::object(), {}});
    bytes.resize(bytes.size() - 1);
    try {
        decode_message(bytes);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ProtocolViolation);
        EXPECT_TRUE(e.offset().has_value());
    }
}

TEST(Message, OversizeHeaderRejectedBeforeParsing) {
    std::vector<std::uint8_t> bytes{0x00, 0x10, 0x00, 0x01};  // 1 MiB + 1
    bytes.resize(4 + (std::size_t{1} << 20) + 1, ' ');
    try {
        decode_message(bytes);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ProtocolViolation);
        EXPECT_EQ(*e.offset(), 0u);
    }
}

TEST(Message, PayloadLengthMismatch) {
    auto bytes = encode_message(Message{MessageType::Progress, new_request_id(), Json::object(), {1, 2, 3}});
    bytes.push_back(4);
    EXPECT_THROW(decode_message(bytes), Error);
    bytes.resize(bytes.size() - 2);
    EXPECT_THROW(decode_message(bytes), Error);
}

TEST(Message, RequestIdRules) {
    EXPECT_TRUE(requires_request_id(MessageType::Generate));
    EXPECT_TRUE(requires_request_id(MessageType::Error));
    EXPECT_FALSE(requires_request_id(MessageType::Heartbeat));
    EXPECT_THROW(encode_message(Message{MessageType::Generate, "not-a-uuid", Json::object(), {}}), Error);
    EXPECT_THROW(encode_message(Message{MessageType::Result, "", Json::object(), {}}), Error);
    EXPECT_TRUE(is_uuid(new_request_id()));
    EXPECT_FALSE(is_uuid("123e4567-e89b-12d3-a456-42661417400"));
    EXPECT_TRUE(is_uuid("123e4567-e89b-12d3-a456-426614174000"));
    EXPECT_NE(new_request_id(), new_request_id());
}

TEST(Message, FuzzRoundTripAndMutation) {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 2000; ++i) {
        const Message m = random_message(rng);
        auto bytes = encode_message(m);
        ASSERT_EQ(decode_message(bytes), m);
        // Flip a byte: the decoder either accepts a valid frame or reports a
        // ProtocolViolation; nothing else escapes.
        bytes[rng() % bytes.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
        try {
            const Message again = decode_message(bytes);
            ASSERT_EQ(decode_message(encode_message(again)), again);
        } catch (const Error& e) {
            ASSERT_EQ(e.code(), ErrorCode::ProtocolViolation);
        }
    }
}

TEST(Message, StreamFramingOverLoopback) {
    auto [a, b] = make_loopback_pair();
    std::mt19937_64 rng(1);
    std::vector<Message> sent;
    for (int i = 0; i < 50; ++i) sent.push_back(random_message(rng));
    std::thread writer([&, &a = a] {
        for (const auto& m : sent) write_message(*a, m);
    });
    for (const auto& m : sent) EXPECT_EQ(read_message(*b), m);
    writer.join();
    a->close();
    EXPECT_THROW(read_message(*b), Error);
}

// ---- link simulator ------------------------------------------------------

struct TransferCase {
    std::uint64_t bytes;
    std::uint64_t latency_ms;
    std::uint64_t bandwidth_bps;
    std::uint64_t expected_ms;  // computed by hand
};

TEST(Link, HandComputedTable) {
    const TransferCase cases[] = {
        {1048576, 10, 1048576, 1010},                 // 10 + 1000
        {0, 5, 10'000'000, 5},                        // zero payload
        {1, 0, 1000, 1},                              // exactly 1 ms
        {1, 0, 3, 334},                               // ceil(333.33)
        {1500, 20, 10'000'000, 21},                   // ceil(0.15) = 1
        {10'000'000, 20, 10'000'000, 1020},           // 1 s of payload
        {7, 3, 2, 3503},                              // 3500 ms exact
        {1'000'001, 0, 1'000'000, 1001},              // ceil(1000.001)
        {1048576, 50, 104'857'600, 60},               // 100 MiB/s
        {123'456'789, 7, 1, 123'456'789'007},         // 1 B/s, no overflow
    };
    for (const auto& c : cases) {
        LinkParams link;
        link.latency_ms = c.latency_ms;
        link.bandwidth_bps = c.bandwidth_bps;
        link.drop_probability = 0.0;
        std::mt19937_64 rng(0);
        const auto out = simulate_transfer(c.bytes, link, rng);
        EXPECT_TRUE(out.delivered);
        EXPECT_EQ(out.elapsed_ms, c.expected_ms) << c.bytes << " bytes";
        EXPECT_EQ(transfer_time_ms(c.bytes, link), c.expected_ms);
    }
}

TEST(Link, NeverDropsAtZero) {
    LinkSimulator sim(LinkParams{20, 10'000'000, 0.0, 17});
    for (int i = 0; i < 10000; ++i) ASSERT_TRUE(sim.transfer(100).delivered);
}

TEST(Link, SeededDropSequenceReproducible) {
    auto run = [](std::uint64_t seed) {
        LinkSimulator sim(LinkParams{1, 1000, 0.3, seed});
        std::vector<bool> seq;
        for (int i = 0; i < 2000; ++i) seq.push_back(sim.transfer(10).delivered);
        return seq;
    };
    const auto a = run(42);
    EXPECT_EQ(a, run(42));
    EXPECT_NE(a, run(43));
    const auto dropped = std::count(a.begin(), a.end(), false);
    EXPECT_NEAR(static_cast<double>(dropped) / 2000.0, 0.3, 0.05);
}

TEST(Link, OneDrawPerTransfer) {
    LinkParams link{0, 1, 0.5, 0};
    std::mt19937_64 a(9);
    std::mt19937_64 b(9);
    simulate_transfer(1, link, a);
    b();
    EXPECT_EQ(a(), b());
}

TEST(Link, Validation) {
    EXPECT_THROW((LinkParams{0, 0, 0.0, 0}).validate(), Error);
    EXPECT_THROW((LinkParams{0, 1, -0.1, 0}).validate(), Error);
    EXPECT_THROW((LinkParams{0, 1, 1.5, 0}).validate(), Error);
    EXPECT_NO_THROW((LinkParams{0, 1, 1.0, 0}).validate());
}

// ---- mock expert ---------------------------------------------------------

GenerationParams params8() {
    GenerationParams p;
    p.width = 32;
    p.height = 32;
    p.frame_count = 8;
    return p;
}

TEST(MockExpert, OneTrackPresentEveryFrame) {
    const auto clip = mock_generate("school teacher teaching", params8());
    ASSERT_EQ(clip.tracks.size(), 1u);
    EXPECT_EQ(clip.tracks[0].label, "school teacher");
    EXPECT_EQ(clip.tracks[0].present_count(), 8u);
    EXPECT_NO_THROW(clip.validate());
}

TEST(MockExpert, SecondSubjectIsLost) {
    const auto clip = mock_generate("student studying while teacher teaching", params8());
    ASSERT_EQ(clip.tracks.size(), 1u);
    EXPECT_EQ(clip.tracks[0].label, "student");
}

TEST(MockExpert, Deterministic) {
    EXPECT_EQ(encode_clip(mock_generate("a cat walking", params8())),
              encode_clip(mock_generate("A  cat walking!", params8())));
    auto p = params8();
    p.seed = 1;
    EXPECT_NE(mock_generate("a cat walking", params8()).frames, mock_generate("a cat walking", p).frames);
}

TEST(MockExpert, SubjectMovesLeftToRight) {
    const auto clip = mock_generate("a dog running", params8());
    const auto& boxes = clip.tracks[0].boxes;
    EXPECT_EQ(boxes.front()->x, 0);
    EXPECT_EQ(boxes.back()->x + boxes.back()->w, 32);
    for (std::size_t i = 1; i < boxes.size(); ++i) EXPECT_GE(boxes[i]->x, boxes[i - 1]->x);
    EXPECT_EQ(boxes[0]->w, 8);
}

TEST(MockExpert, FramesAreNonDegenerate) {
    std::mt19937_64 rng(4);
    const std::vector<std::string> prompts{"a cat walking", "school teacher teaching", "two students reading books",
                                           "a robot dancing", "the principal speaking while students listening"};
    for (const auto& pr : prompts) {
        auto p = params8();
        p.seed = rng();
        const auto clip = mock_generate(pr, p);
        metrics::MetricsConfig cfg;
        for (const auto& f : clip.frames) {
            std::size_t clipped = 0;
            for (std::size_t i = 0; i < f.pixels.size(); i += 3) {
                for (int c = 0; c < 3; ++c) {
                    if (f.pixels[i + c] == 0 || f.pixels[i + c] == 255) {
                        ++clipped;
                        break;
                    }
                }
            }
            EXPECT_LT(static_cast<double>(clipped) / (32.0 * 32.0), 0.01);
            EXPECT_GT(metrics::laplacian_variance(f, 32, 32), 0.0);
        }
    }
}

TEST(MockExpert, DegeneratePrompt) {
    try {
        mock_generate("walking", params8());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegeneratePrompt);
    }
}

// ---- worker and client ---------------------------------------------------

WorkerOptions fast_options(const std::string& id) {
    WorkerOptions o;
    o.capabilities.expert_id = id;
    o.sleep_scale = 0.0;
    o.heartbeat_interval = 50ms;
    return o;
}

ExpertBehavior mock_behavior() {
    return [](const std::string& p, const GenerationParams& params) { return mock_generate(p, params); };
}

// Reads until a message of one of the given types arrives.
Message read_until(Stream& s, std::initializer_list<MessageType> want) {
    while (true) {
        Message m = read_message(s);
        for (auto t : want) {
            if (m.type == t) return m;
        }
    }
}

TEST(Worker, RawProtocolExchange) {
    auto [orch, work] = make_loopback_pair();
    Worker worker(fast_options("e1"), mock_behavior());
    std::thread serving([&, &w = work] { worker.serve(*w); });

    write_message(*orch, Message{MessageType::Hello, {}, Json::object(), {}});
    const Message ack = read_until(*orch, {MessageType::HelloAck});
    EXPECT_EQ(ack.body.at("expert_id"), "e1");
    EXPECT_EQ(ack.body.at("task_kinds").size(), 3u);

    const auto id = new_request_id();
    GenerationParams p = params8();
    write_message(*orch, Message{MessageType::Generate, id, Json{{"sub_prompt", "a cat walking"}, {"params", p}}, {}});
    const Message progress = read_until(*orch, {MessageType::Progress, MessageType::Result});
    EXPECT_EQ(progress.type, MessageType::Progress);
    EXPECT_EQ(progress.request_id, id);
    const Message result = read_until(*orch, {MessageType::Result, MessageType::Error});
    ASSERT_EQ(result.type, MessageType::Result);
    EXPECT_EQ(result.request_id, id);
    EXPECT_EQ(decode_clip(result.payload), mock_generate("a cat walking", p));

    // Malformed params produce ERROR and the connection stays usable.
    const auto bad = new_request_id();
    Json bad_params = p;
    bad_params["width"] = 3;
    write_message(*orch, Message{MessageType::Generate, bad, Json{{"sub_prompt", "a cat"}, {"params", bad_params}}, {}});
    const Message err = read_until(*orch, {MessageType::Error, MessageType::Result});
    EXPECT_EQ(err.type, MessageType::Error);
    EXPECT_EQ(err.request_id, bad);

    const auto again = new_request_id();
    write_message(*orch, Message{MessageType::Generate, again, Json{{"sub_prompt", "a dog"}, {"params", p}}, {}});
    EXPECT_EQ(read_until(*orch, {MessageType::Result, MessageType::Error}).type, MessageType::Result);

    // Heartbeats keep flowing while idle.
    EXPECT_EQ(read_until(*orch, {MessageType::Heartbeat}).body.at("expert_id"), "e1");
    EXPECT_EQ(worker.invocations(), 2u);

    orch->close();
    serving.join();
}

TEST(Worker, ClientGenerateOverLoopback) {
    auto [orch, work] = make_loopback_pair();
    Worker worker(fast_options("e1"), mock_behavior());
    std::thread serving([&, &w = work] { worker.serve(*w); });
    std::atomic<int> beats{0};
    auto client = ExpertClient::connect(std::move(orch), 2000ms, [&](const std::string&) { ++beats; });
    EXPECT_EQ(client->expert_id(), "e1");
    ASSERT_TRUE(client->capabilities().link.has_value());
    EXPECT_EQ(client->capabilities().link->latency_ms, 20u);

    const auto p = params8();
    const auto clip = client->generate(new_request_id(), "a cat walking", p, cache_key("a cat walking", p), 5000ms);
    EXPECT_EQ(clip, mock_generate("a cat walking", p));
    std::this_thread::sleep_for(200ms);
    EXPECT_GT(beats.load(), 0);

    try {
        auto bad = p;
        bad.width = 4096;
        bad.height = 4096;
        client->generate(new_request_id(), "a cat", bad, cache_key("a cat", bad), 5000ms);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ExpertFailed);
    }
    client->close();
    serving.join();
}

TEST(Worker, DroppedResultTimesOut) {
    auto [orch, work] = make_loopback_pair();
    auto opts = fast_options("lossy");
    opts.link.drop_probability = 1.0;
    opts.lossy_types = {MessageType::Result};
    Worker worker(opts, mock_behavior());
    std::thread serving([&, &w = work] { worker.serve(*w); });
    auto client = ExpertClient::connect(std::move(orch), 2000ms);
    const auto p = params8();
    try {
        client->generate(new_request_id(), "a cat", p, cache_key("a cat", p), 300ms);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ExpertTimeout);
    }
    EXPECT_EQ(worker.invocations(), 1u);
    client->close();
    serving.join();
}

TEST(Worker, TcpListenerAndConnect) {
    TcpListener listener(parse_host_port("127.0.0.1:0"));
    ASSERT_GT(listener.port(), 0);
    Worker worker(fast_options("tcp-1"), mock_behavior());
    std::thread serving([&] { run_worker(listener, worker); });

    auto client = ExpertClient::connect(tcp_connect(HostPort{"127.0.0.1", listener.port()}, 2000ms), 2000ms);
    EXPECT_EQ(client->expert_id(), "tcp-1");
    const auto p = params8();
    EXPECT_EQ(client->generate(new_request_id(), "a robot dancing", p, cache_key("a robot dancing", p), 5000ms),
              mock_generate("a robot dancing", p));
    client->close();
    worker.stop();
    listener.close();
    serving.join();
}

TEST(Worker, DialInHandshake) {
    auto [orch, work] = make_loopback_pair();
    Worker worker(fast_options("dial-1"), mock_behavior());
    std::thread serving([&, &w = work] { worker.serve_dial_in(*w); });
    std::atomic<bool> gone{false};
    auto client = ExpertClient::accept(std::move(orch), 2000ms, {}, [&](const std::string& id) {
        EXPECT_EQ(id, "dial-1");
        gone = true;
    });
    EXPECT_EQ(client->expert_id(), "dial-1");
    const auto p = params8();
    EXPECT_NO_THROW(client->generate(new_request_id(), "a cat", p, cache_key("a cat", p), 5000ms));
    worker.stop();
    work->close();
    serving.join();
    for (int i = 0; i < 100 && !gone; ++i) std::this_thread::sleep_for(10ms);
    EXPECT_TRUE(gone.load());
    EXPECT_FALSE(client->alive());
}

TEST(Transport, ParseHostPort) {
    EXPECT_EQ(parse_host_port("10.0.0.1:80").host, "10.0.0.1");
    EXPECT_EQ(parse_host_port(":9000").host, "127.0.0.1");
    EXPECT_EQ(parse_host_port(":9000").port, 9000);
    EXPECT_THROW(parse_host_port("nope"), Error);
    EXPECT_THROW(parse_host_port("h:99999"), Error);
}

TEST(Transport, ConnectRefused) {
    TcpListener l(parse_host_port("127.0.0.1:0"));
    const auto port = l.port();
    l.close();
    EXPECT_THROW(tcp_connect(HostPort{"127.0.0.1", port}, 500ms), Error);
}

}  // namespace
}  // namespace emf::protocol
