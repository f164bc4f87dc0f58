// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <atomic>
#include <map>
#include <random>
#include <thread>

#include "emf/core/canonical.hpp"
#include "emf/error.hpp"
#include "emf/registry/dedup_cache.hpp"
#include "emf/registry/registry.hpp"

namespace emf::registry {
namespace {

using namespace std::chrono_literals;

ExpertDescriptor expert(const std::string& id, std::set<TaskKind> kinds = {TaskKind::Atomic, TaskKind::Temporal,
                                                                           TaskKind::Spatial}) {
    ExpertDescriptor d;
    d.expert_id = id;
    d.task_kinds_served = std::move(kinds);
    return d;
}

SubTask task(const std::string& prompt = "a cat") {
    SubTask t;
    t.sub_prompt = prompt;
    t.slot = TimeSlot{0};
    t.cache_key = cache_key(prompt, GenerationParams{});
    return t;
}

void expect_code(const std::function<void()>& fn, ErrorCode code) {
    try {
        fn();
        FAIL() << "expected " << to_string(code);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

TEST(Registry, RegisterAndDuplicate) {
    Registry r;
    r.register_expert(expert("e1"));
    ASSERT_EQ(r.list().size(), 1u);
    EXPECT_EQ(r.list()[0].expert_id, "e1");
    EXPECT_GT(r.list()[0].last_heartbeat.count(), 0);
    expect_code([&] { r.register_expert(expert("e1")); }, ErrorCode::DuplicateExpert);
}

TEST(Registry, MultiGateNeedsEveryKindCovered) {
    Registry r;
    const RoutingPolicy multi{RoutingStrategy::RoundRobin, GateTopology::MultiGate};
    const std::set<TaskKind> kinds{TaskKind::Atomic, TaskKind::Temporal, TaskKind::Spatial};
    r.register_expert(expert("a", {TaskKind::Atomic}));
    r.register_expert(expert("t", {TaskKind::Temporal}));
    expect_code([&] { r.validate_policy(multi, kinds); }, ErrorCode::NoEligibleExpert);
    r.register_expert(expert("s", {TaskKind::Spatial}));
    EXPECT_NO_THROW(r.validate_policy(multi, kinds));
}

TEST(Select, RoundRobinRotation) {
    Registry r;
    r.register_expert(expert("e2"));
    r.register_expert(expert("e1"));
    const RoutingPolicy rr;
    std::vector<std::string> picks;
    for (int i = 0; i < 4; ++i) {
        picks.push_back(r.acquire(task(), TaskKind::Atomic, rr, GenerationParams{}));
        r.release(picks.back(), true);
    }
    EXPECT_EQ(picks, (std::vector<std::string>{"e1", "e2", "e1", "e2"}));
}

TEST(Select, RoundRobinFairness) {
    Registry r;
    for (int i = 0; i < 5; ++i) r.register_expert(expert("e" + std::to_string(i)));
    std::map<std::string, int> counts;
    for (int i = 0; i < 5 * 7; ++i) {
        const auto id = r.acquire(task(), TaskKind::Temporal, RoutingPolicy{}, GenerationParams{});
        r.release(id, true);
        ++counts[id];
    }
    for (const auto& [id, n] : counts) EXPECT_EQ(n, 7) << id;
}

TEST(Select, LeastLoaded) {
    RegistrySnapshot snap;
    auto e1 = expert("e1");
    e1.inflight = 3;
    auto e2 = expert("e2");
    e2.inflight = 0;
    snap.experts = {e1, e2};
    const RoutingPolicy ll{RoutingStrategy::LeastLoaded, GateTopology::SingleGate};
    EXPECT_EQ(select_expert(task(), TaskKind::Atomic, ll, snap, GenerationParams{}), "e2");
    snap.experts[1].inflight = 3;
    EXPECT_EQ(select_expert(task(), TaskKind::Atomic, ll, snap, GenerationParams{}), "e1");  // tie by id
}

TEST(Select, LatencyAwareMatchesFormula) {
    auto e1 = expert("e1");
    e1.link.latency_ms = 10;
    e1.link.bandwidth_bps = 10'000'000;
    auto e2 = expert("e2");
    e2.link.latency_ms = 50;
    e2.link.bandwidth_bps = 100'000'000;
    const std::uint64_t payload = 1 << 20;
    // Independent estimates: latency + 1000 * bytes / bandwidth.
    const double est1 = 10.0 + 1000.0 * payload / 10'000'000.0;
    const double est2 = 50.0 + 1000.0 * payload / 100'000'000.0;
    EXPECT_NEAR(estimated_service_ms(e1, payload), est1, 1e-9);
    EXPECT_NEAR(estimated_service_ms(e2, payload), est2, 1e-9);
    const std::string expected = est1 < est2 ? "e1" : "e2";
    EXPECT_EQ(expected, "e2");

    // Params chosen so the raw frame payload is exactly 1 MiB.
    GenerationParams p;
    p.width = 512;
    p.height = 512;
    p.frame_count = 4;
    ASSERT_EQ(p.raw_bytes() / 3, payload);
    RegistrySnapshot snap;
    snap.experts = {e1, e2};
    const RoutingPolicy la{RoutingStrategy::LatencyAware, GateTopology::SingleGate};
    EXPECT_EQ(select_expert(task(), TaskKind::Atomic, la, snap, p), "e2");
}

TEST(Select, MultiGateHonorsKinds) {
    Registry r;
    r.register_expert(expert("a-temporal", {TaskKind::Temporal}));
    r.register_expert(expert("b-spatial", {TaskKind::Spatial}));
    r.register_expert(expert("c-both", {TaskKind::Temporal, TaskKind::Spatial}));
    const RoutingPolicy multi{RoutingStrategy::RoundRobin, GateTopology::MultiGate};
    for (int i = 0; i < 20; ++i) {
        const auto t = r.acquire(task(), TaskKind::Temporal, multi, GenerationParams{});
        EXPECT_NE(t, "b-spatial");
        r.release(t, true);
        const auto s = r.acquire(task(), TaskKind::Spatial, multi, GenerationParams{});
        EXPECT_NE(s, "a-temporal");
        r.release(s, true);
    }
    expect_code([&] { r.acquire(task(), TaskKind::Atomic, multi, GenerationParams{}); }, ErrorCode::NoEligibleExpert);
}

TEST(Select, PureOverSnapshot) {
    Registry r;
    for (int i = 0; i < 4; ++i) r.register_expert(expert("e" + std::to_string(i)));
    r.acquire(task(), TaskKind::Atomic, RoutingPolicy{}, GenerationParams{});
    const auto snap = r.snapshot();
    for (auto strategy : {RoutingStrategy::RoundRobin, RoutingStrategy::LeastLoaded, RoutingStrategy::LatencyAware}) {
        const RoutingPolicy p{strategy, GateTopology::SingleGate};
        const auto first = select_expert(task(), TaskKind::Atomic, p, snap, GenerationParams{});
        for (int i = 0; i < 10; ++i) EXPECT_EQ(select_expert(task(), TaskKind::Atomic, p, snap, GenerationParams{}), first);
    }
}

TEST(Select, ExcludeAndResolution) {
    RegistrySnapshot snap;
    auto small = expert("small");
    small.max_resolution = 16 * 16;
    snap.experts = {expert("big"), small};
    GenerationParams p;
    p.width = 64;
    p.height = 64;
    EXPECT_EQ(select_expert(task(), TaskKind::Atomic, RoutingPolicy{}, snap, p), "big");
    expect_code([&] { select_expert(task(), TaskKind::Atomic, RoutingPolicy{}, snap, p, {"big"}); },
                ErrorCode::NoEligibleExpert);
}

TEST(Liveness, HeartbeatExpireReregister) {
    Registry r(RegistryConfig{100ms, 3});
    r.register_expert(expert("e1"));
    const auto t0 = r.list()[0].last_heartbeat;
    r.heartbeat("e1", t0 + 250ms);
    EXPECT_TRUE(r.expire(t0 + 250ms).empty());
    EXPECT_TRUE(r.expire(t0 + 550ms).empty());           // exactly 3 intervals: still live
    EXPECT_EQ(r.expire(t0 + 551ms), (std::vector<std::string>{"e1"}));
    EXPECT_FALSE(r.contains("e1"));
    expect_code([&] { r.heartbeat("e1", t0); }, ErrorCode::UnknownExpert);
    expect_code([&] { r.acquire(task(), TaskKind::Atomic, RoutingPolicy{}, GenerationParams{}); },
                ErrorCode::NoEligibleExpert);
    r.register_expert(expert("e1"));
    EXPECT_EQ(r.acquire(task(), TaskKind::Atomic, RoutingPolicy{}, GenerationParams{}), "e1");
}

TEST(Registry, InflightAccounting) {
    Registry r;
    r.register_expert(expert("e1"));
    const auto id = r.acquire(task(), TaskKind::Atomic, RoutingPolicy{}, GenerationParams{});
    EXPECT_EQ(r.list()[0].inflight, 1u);
    r.release(id, true);
    EXPECT_EQ(r.list()[0].inflight, 0u);
    EXPECT_EQ(r.list()[0].total_served, 1u);
}

TEST(Registry, ParseEnums) {
    EXPECT_EQ(parse_routing_strategy("latency_aware"), RoutingStrategy::LatencyAware);
    EXPECT_EQ(parse_gate_topology("multi_gate"), GateTopology::MultiGate);
    EXPECT_THROW(parse_routing_strategy("random"), Error);
}

// ---- dedup cache ---------------------------------------------------------

ClipPtr dummy_clip() { return std::make_shared<const VideoClip>(); }

Digest key(const std::string& s) { return cache_key(s, GenerationParams{}); }

TEST(Dedup, FiveConcurrentOneLeader) {
    DedupCache cache;
    std::atomic<int> leaders{0};
    std::atomic<int> followers{0};
    std::atomic<int> got{0};
    std::vector<std::thread> threads;
    std::mutex mu;
    std::condition_variable cv;
    int arrived = 0;
    for (int i = 0; i < 5; ++i) {
        threads.emplace_back([&] {
            {
                std::unique_lock lock(mu);
                ++arrived;
                cv.notify_all();
                cv.wait(lock, [&] { return arrived == 5; });
            }
            auto acq = cache.acquire_or_wait(key("shared"));
            if (auto* leader = std::get_if<DedupCache::Leader>(&acq)) {
                ++leaders;
                std::this_thread::sleep_for(20ms);
                leader->publish(dummy_clip());
                ++got;
            } else {
                ++followers;
                if (std::get<DedupCache::Follower>(acq).get()) ++got;
            }
        });
    }
    for (auto& t : threads) t.join();
    EXPECT_EQ(leaders.load(), 1);
    EXPECT_EQ(followers.load(), 4);
    EXPECT_EQ(got.load(), 5);
}

TEST(Dedup, ReadyEntryGivesImmediateFollower) {
    DedupCache cache;
    {
        auto acq = cache.acquire_or_wait(key("a"));
        std::get<DedupCache::Leader>(acq).publish(dummy_clip());
    }
    auto acq = cache.acquire_or_wait(key("a"));
    auto* f = std::get_if<DedupCache::Follower>(&acq);
    ASSERT_NE(f, nullptr);
    EXPECT_TRUE(f->was_ready);
    EXPECT_NE(f->get(), nullptr);
    EXPECT_TRUE(cache.peek(key("a")).has_value());
}

TEST(Dedup, LeaderFailurePropagatesThenNewLeader) {
    DedupCache cache;
    auto lead = cache.acquire_or_wait(key("x"));
    auto follow = cache.acquire_or_wait(key("x"));
    ASSERT_TRUE(std::holds_alternative<DedupCache::Follower>(follow));
    std::get<DedupCache::Leader>(lead).fail("boom");
    expect_code([&] { std::get<DedupCache::Follower>(follow).get(); }, ErrorCode::LeaderFailed);
    auto next = cache.acquire_or_wait(key("x"));
    EXPECT_TRUE(std::holds_alternative<DedupCache::Leader>(next));
}

TEST(Dedup, AbandonedLeaderFailsFollowers) {
    DedupCache cache;
    std::optional<DedupCache::Acquisition> lead(cache.acquire_or_wait(key("y")));
    auto follow = cache.acquire_or_wait(key("y"));
    lead.reset();
    expect_code([&] { std::get<DedupCache::Follower>(follow).get(); }, ErrorCode::LeaderFailed);
    EXPECT_EQ(cache.pending_count(), 0u);
}

TEST(Dedup, LruEvictsReadyOnly) {
    DedupCache cache(2);
    for (const char* k : {"a", "b"}) std::get<DedupCache::Leader>(cache.acquire_or_wait(key(k))).publish(dummy_clip());
    auto pending = cache.acquire_or_wait(key("p"));  // never evicted while pending
    cache.acquire_or_wait(key("a"));                 // a is now most recent
    std::get<DedupCache::Leader>(cache.acquire_or_wait(key("c"))).publish(dummy_clip());
    EXPECT_EQ(cache.ready_count(), 2u);
    EXPECT_TRUE(cache.peek(key("a")).has_value());
    EXPECT_FALSE(cache.peek(key("b")).has_value());
    EXPECT_EQ(cache.pending_count(), 1u);
    std::get<DedupCache::Leader>(pending).publish(dummy_clip());
}

TEST(Dedup, ManyKeysManyThreadsOneLeaderEach) {
    DedupCache cache;
    std::mutex mu;
    std::map<std::string, int> leaders;
    std::vector<std::thread> threads;
    for (int t = 0; t < 16; ++t) {
        threads.emplace_back([&, t] {
            std::mt19937_64 rng(static_cast<std::uint64_t>(t));
            for (int i = 0; i < 200; ++i) {
                const std::string k = "k" + std::to_string(rng() % 20);
                auto acq = cache.acquire_or_wait(key(k));
                if (auto* l = std::get_if<DedupCache::Leader>(&acq)) {
                    {
                        std::lock_guard lock(mu);
                        ++leaders[k];
                    }
                    l->publish(dummy_clip());
                } else {
                    std::get<DedupCache::Follower>(acq).get();
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    for (const auto& [k, n] : leaders) EXPECT_EQ(n, 1) << k;
}

}  // namespace
}  // namespace emf::registry
