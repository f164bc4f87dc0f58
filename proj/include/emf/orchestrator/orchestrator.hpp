// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "emf/gate/gate.hpp"
#include "emf/merge/merger.hpp"
#include "emf/metrics/metrics.hpp"
#include "emf/orchestrator/job.hpp"
#include "emf/orchestrator/journal.hpp"
#include "emf/orchestrator/pool.hpp"
#include "emf/registry/dedup_cache.hpp"
#include "emf/registry/registry.hpp"

namespace emf::orchestrator {

struct OrchestratorConfig {
    gate::GateConfig gate;
    metrics::MetricsConfig metrics;
    registry::RoutingPolicy policy;
    int max_retries = 2;  // extra attempts on next-best experts
    std::chrono::milliseconds subtask_timeout{30000};
    std::uint32_t crossfade_frames = 0;
    merge::KeyingConfig keying;
    std::size_t max_concurrent_jobs = 4;
    std::size_t cache_capacity = 1024;
    std::size_t payload_ceiling = kDefaultPayloadCeiling;

    void validate() const;
};

/// Slots of `plan` rewritten for the opposite merge strategy, keeping the
/// subtask order: time slices become layers z = 0..n-1 (z0 full, then
/// left/right halves in turn) and layers ranked by z become time slices.
/// Atomic plans are unchanged.
DecompositionPlan swap_strategy(const DecompositionPlan& plan);

/// Gate -> dedup/route -> dispatch -> merge -> evaluate -> persist.
class Orchestrator {
public:
    Orchestrator(OrchestratorConfig cfg, ExpertPool& pool, Journal& journal);
    ~Orchestrator();
    Orchestrator(const Orchestrator&) = delete;
    Orchestrator& operator=(const Orchestrator&) = delete;

    /// Runs a job to completion on the calling thread. Pipeline failures
    /// end in a Failed record rather than an exception.
    JobRecord run_job(const PromptSpec& prompt, PipelineMode mode = PipelineMode::Correct,
                      std::optional<registry::RoutingPolicy> policy = std::nullopt);

    /// Validates, records a Pending job and queues it. Throws InvalidArgument.
    std::string submit(const PromptSpec& prompt, PipelineMode mode = PipelineMode::Correct,
                       std::optional<registry::RoutingPolicy> policy = std::nullopt);
    /// Blocks until no submitted job is queued or running.
    void wait_idle();

    /// Throws UnknownJob.
    JobRecord job(const std::string& job_id) const;
    /// Merged container bytes of a Done job. Throws UnknownJob.
    std::vector<std::uint8_t> clip_bytes(const JobRecord& record) const;

    /// GENERATE messages sent for a cache key, across retries.
    std::uint64_t invocations(const Digest& cache_key) const;
    std::uint64_t total_invocations() const;

    const OrchestratorConfig& config() const { return cfg_; }
    ExpertPool& pool() { return pool_; }
    Journal& journal() { return journal_; }
    registry::DedupCache& cache() { return cache_; }

private:
    struct Dispatched {
        registry::ClipPtr clip;
        RoutingEntry entry;
    };
    JobRecord execute(JobRecord record, const registry::RoutingPolicy& policy);
    Dispatched dispatch(const SubTask& task, TaskKind kind, const GenerationParams& params,
                        const registry::RoutingPolicy& policy);
    registry::ClipPtr generate_as_leader(const SubTask& task, TaskKind kind, const GenerationParams& params,
                                         const registry::RoutingPolicy& policy, RoutingEntry& entry);
    void persist(JobRecord& record);
    void lane_loop();

    OrchestratorConfig cfg_;
    ExpertPool& pool_;
    Journal& journal_;
    registry::DedupCache cache_;

    mutable std::mutex counters_mu_;
    std::unordered_map<Digest, std::uint64_t> invocations_;
    std::uint64_t total_invocations_ = 0;

    std::mutex queue_mu_;
    std::condition_variable queue_cv_;
    std::condition_variable idle_cv_;
    std::deque<std::pair<JobRecord, registry::RoutingPolicy>> queue_;
    std::size_t running_ = 0;
    bool stopping_ = false;
    std::vector<std::thread> lanes_;
};

}  // namespace emf::orchestrator
