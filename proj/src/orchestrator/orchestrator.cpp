// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/orchestrator/orchestrator.hpp"

#include <algorithm>
#include <future>

#include "emf/core/container.hpp"
#include "emf/error.hpp"
#include "emf/protocol/message.hpp"

namespace emf::orchestrator {

namespace {

bool retryable(ErrorCode c) {
    switch (c) {
        case ErrorCode::ExpertTimeout:
        case ErrorCode::ExpertFailed:
        case ErrorCode::TransportClosed:
        case ErrorCode::MalformedContainer:
        case ErrorCode::ProtocolViolation:
        case ErrorCode::UnknownExpert:
            return true;
        default:
            return false;
    }
}

std::uint64_t elapsed_since(std::chrono::steady_clock::time_point start) {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count());
}

}  // namespace

void OrchestratorConfig::validate() const {
    gate.validate();
    metrics.validate();
    if (max_retries < 0) fail(ErrorCode::InvalidArgument, "max_retries must be non-negative");
    if (subtask_timeout.count() <= 0) fail(ErrorCode::InvalidArgument, "subtask_timeout must be positive");
    if (max_concurrent_jobs == 0) fail(ErrorCode::InvalidArgument, "max_concurrent_jobs must be at least 1");
    if (cache_capacity == 0) fail(ErrorCode::InvalidArgument, "cache_capacity must be at least 1");
}

DecompositionPlan swap_strategy(const DecompositionPlan& plan) {
    if (plan.kind == TaskKind::Atomic) return plan;
    // Rank of each subtask by its current slot; subtask order is preserved.
    std::vector<std::size_t> order(plan.subtasks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto slot_index = [&](std::size_t i) -> std::uint32_t {
        const auto& slot = plan.subtasks[i].slot;
        if (const auto* t = std::get_if<TimeSlot>(&slot)) return t->time_index;
        return std::get<LayerSlot>(slot).z_index;
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return slot_index(a) < slot_index(b); });

    DecompositionPlan out = plan;
    out.kind = plan.kind == TaskKind::Temporal ? TaskKind::Spatial : TaskKind::Temporal;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        auto& task = out.subtasks[order[rank]];
        const auto r = static_cast<std::uint32_t>(rank);
        if (out.kind == TaskKind::Spatial) {
            const Anchor anchor = r == 0 ? Anchor::Full : ((r - 1) % 2 == 0 ? Anchor::LeftHalf : Anchor::RightHalf);
            task.slot = LayerSlot{r, anchor};
        } else {
            task.slot = TimeSlot{r};
        }
    }
    return out;
}

Orchestrator::Orchestrator(OrchestratorConfig cfg, ExpertPool& pool, Journal& journal)
    : cfg_(std::move(cfg)), pool_(pool), journal_(journal), cache_(cfg_.cache_capacity) {
    cfg_.validate();
    for (std::size_t i = 0; i < cfg_.max_concurrent_jobs; ++i) {
        lanes_.emplace_back([this] { lane_loop(); });
    }
}

Orchestrator::~Orchestrator() {
    {
        std::lock_guard lock(queue_mu_);
        stopping_ = true;
    }
    queue_cv_.notify_all();
    for (auto& t : lanes_) t.join();
}

void Orchestrator::persist(JobRecord& record) {
    record.updated_at_ms = wall_clock_ms();
    journal_.persist(record);
}

JobRecord Orchestrator::run_job(const PromptSpec& prompt, PipelineMode mode,
                                std::optional<registry::RoutingPolicy> policy) {
    JobRecord record;
    record.job_id = protocol::new_request_id();
    record.prompt = prompt;
    record.mode = mode;
    record.created_at_ms = wall_clock_ms();
    persist(record);
    return execute(std::move(record), policy.value_or(cfg_.policy));
}

std::string Orchestrator::submit(const PromptSpec& prompt, PipelineMode mode,
                                 std::optional<registry::RoutingPolicy> policy) {
    prompt.validate(cfg_.payload_ceiling);
    JobRecord record;
    record.job_id = protocol::new_request_id();
    record.prompt = prompt;
    record.mode = mode;
    record.created_at_ms = wall_clock_ms();
    persist(record);
    const std::string id = record.job_id;
    {
        std::lock_guard lock(queue_mu_);
        queue_.emplace_back(std::move(record), policy.value_or(cfg_.policy));
    }
    queue_cv_.notify_one();
    return id;
}

void Orchestrator::wait_idle() {
    std::unique_lock lock(queue_mu_);
    idle_cv_.wait(lock, [this] { return queue_.empty() && running_ == 0; });
}

void Orchestrator::lane_loop() {
    while (true) {
        std::pair<JobRecord, registry::RoutingPolicy> item;
        {
            std::unique_lock lock(queue_mu_);
            queue_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
            if (queue_.empty()) return;
            item = std::move(queue_.front());
            queue_.pop_front();
            ++running_;
        }
        execute(std::move(item.first), item.second);
        {
            std::lock_guard lock(queue_mu_);
            --running_;
        }
        idle_cv_.notify_all();
    }
}

JobRecord Orchestrator::job(const std::string& job_id) const { return journal_.load(job_id); }

std::vector<std::uint8_t> Orchestrator::clip_bytes(const JobRecord& record) const {
    if (record.status != JobStatus::Done) fail(ErrorCode::UnknownJob, "job " + record.job_id + " has no clip yet");
    return journal_.read_clip(record.merged_clip_ref);
}

std::uint64_t Orchestrator::invocations(const Digest& cache_key) const {
    std::lock_guard lock(counters_mu_);
    auto it = invocations_.find(cache_key);
    return it == invocations_.end() ? 0 : it->second;
}

std::uint64_t Orchestrator::total_invocations() const {
    std::lock_guard lock(counters_mu_);
    return total_invocations_;
}

JobRecord Orchestrator::execute(JobRecord record, const registry::RoutingPolicy& policy) {
    try {
        record.prompt.validate(cfg_.payload_ceiling);
        const DecompositionPlan classified = gate::plan_prompt(record.prompt, cfg_.gate);
        record.subjects = classified.subjects();
        const DecompositionPlan plan = record.mode == PipelineMode::SingleDeviceBaseline
                                           ? gate::decompose(record.prompt, TaskKind::Atomic, cfg_.gate)
                                           : classified;
        record.plan = plan;
        record.status = JobStatus::Generating;
        persist(record);

        if (policy.gate_mode == registry::GateTopology::MultiGate) {
            pool_.registry().validate_policy(policy, {plan.kind});
        }

        std::vector<std::future<Dispatched>> pending;
        for (const auto& task : plan.subtasks) {
            pending.push_back(std::async(std::launch::async, [this, &task, &plan, &record, &policy] {
                return dispatch(task, plan.kind, record.prompt.params, policy);
            }));
        }
        std::vector<Dispatched> results;
        std::exception_ptr first_error;
        for (auto& f : pending) {
            try {
                results.push_back(f.get());
            } catch (...) {
                if (!first_error) first_error = std::current_exception();
            }
        }
        if (first_error) std::rethrow_exception(first_error);

        for (const auto& d : results) record.routing.push_back(d.entry);
        record.status = JobStatus::Merging;
        persist(record);

        const DecompositionPlan merge_layout =
            record.mode == PipelineMode::MismatchedMerge ? swap_strategy(plan) : plan;
        merge::MergePlan mp;
        mp.strategy = merge_layout.kind;
        mp.crossfade_frames = cfg_.crossfade_frames;
        mp.keying = cfg_.keying;
        for (std::size_t i = 0; i < merge_layout.subtasks.size(); ++i) {
            mp.inputs.push_back(merge::MergeInput{merge_layout.subtasks[i], *results[i].clip});
        }
        const VideoClip merged = merge::merge(mp);

        record.report = metrics::evaluate_with_subjects(merged, record.prompt, record.subjects, cfg_.metrics);
        record.merged_clip_ref = journal_.store_clip(encode_clip(merged));
        record.status = JobStatus::Done;
        persist(record);
    } catch (const Error& e) {
        record.status = JobStatus::Failed;
        record.failure_reason = e.what();
        persist(record);
    } catch (const std::exception& e) {
        record.status = JobStatus::Failed;
        record.failure_reason = std::string("Internal: ") + e.what();
        persist(record);
    }
    return record;
}

Orchestrator::Dispatched Orchestrator::dispatch(const SubTask& task, TaskKind kind, const GenerationParams& params,
                                                const registry::RoutingPolicy& policy) {
    const auto start = std::chrono::steady_clock::now();
    Dispatched out;
    out.entry.cache_key = task.cache_key;
    // A second round covers a leader that failed while we waited on it.
    for (int round = 0; round < 2; ++round) {
        auto acquisition = cache_.acquire_or_wait(task.cache_key);
        if (auto* follower = std::get_if<registry::DedupCache::Follower>(&acquisition)) {
            try {
                out.clip = follower->get();
            } catch (const Error& e) {
                if (e.code() == ErrorCode::LeaderFailed && round == 0) continue;
                throw;
            }
            out.entry.reused = true;
            out.entry.expert_id = out.clip->provenance.empty() ? std::string() : out.clip->provenance.front().expert_id;
            out.entry.elapsed_ms = elapsed_since(start);
            return out;
        }
        auto& leader = std::get<registry::DedupCache::Leader>(acquisition);
        try {
            out.clip = generate_as_leader(task, kind, params, policy, out.entry);
        } catch (const Error& e) {
            leader.fail(e.what());
            throw;
        }
        leader.publish(out.clip);
        out.entry.elapsed_ms = elapsed_since(start);
        return out;
    }
    fail(ErrorCode::LeaderFailed, "generation of " + task.cache_key.hex() + " failed twice");
}

registry::ClipPtr Orchestrator::generate_as_leader(const SubTask& task, TaskKind kind, const GenerationParams& params,
                                                   const registry::RoutingPolicy& policy, RoutingEntry& entry) {
    auto& reg = pool_.registry();
    std::set<std::string> tried;
    std::optional<Error> last;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        std::string expert_id;
        try {
            expert_id = reg.acquire(task, kind, policy, params, tried);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::NoEligibleExpert && last) throw *last;
            throw;
        }
        tried.insert(expert_id);
        try {
            auto client = pool_.get(expert_id);
            {
                std::lock_guard lock(counters_mu_);
                ++invocations_[task.cache_key];
                ++total_invocations_;
            }
            ++entry.attempts;
            VideoClip clip = client->generate(protocol::new_request_id(), task.sub_prompt, params, task.cache_key,
                                              cfg_.subtask_timeout);
            reg.release(expert_id, true);
            clip.provenance = {Provenance{task.cache_key, expert_id}};
            entry.expert_id = expert_id;
            return std::make_shared<const VideoClip>(std::move(clip));
        } catch (const Error& e) {
            reg.release(expert_id, false);
            if (!retryable(e.code())) throw;
            last = e;
        }
    }
    throw *last;
}

}  // namespace emf::orchestrator
