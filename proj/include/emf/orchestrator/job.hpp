// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emf/core/hash.hpp"
#include "emf/core/json.hpp"
#include "emf/core/types.hpp"

namespace emf::orchestrator {

enum class JobStatus { Pending, Generating, Merging, Done, Failed };

std::string_view to_string(JobStatus s);
JobStatus parse_job_status(std::string_view text);

/// How a job is dispatched and merged.
enum class PipelineMode { Correct, MismatchedMerge, SingleDeviceBaseline };

std::string_view to_string(PipelineMode m);  // correct | mismatch | single
PipelineMode parse_pipeline_mode(std::string_view text);

struct RoutingEntry {
    Digest cache_key;
    std::string expert_id;
    bool reused = false;
    std::uint64_t elapsed_ms = 0;
    std::uint32_t attempts = 0;  // GENERATE messages sent, 0 when reused

    bool operator==(const RoutingEntry&) const = default;
};

struct JobRecord {
    std::string job_id;
    PromptSpec prompt;
    PipelineMode mode = PipelineMode::Correct;
    std::optional<DecompositionPlan> plan;  // the dispatched plan
    std::vector<std::string> subjects;      // evaluation subjects
    std::vector<RoutingEntry> routing;
    std::string merged_clip_ref;            // clips/<sha256>.emv
    std::optional<QualityReport> report;
    JobStatus status = JobStatus::Pending;
    std::string failure_reason;             // "<ErrorCode>: message" when Failed
    std::int64_t created_at_ms = 0;         // Unix epoch milliseconds
    std::int64_t updated_at_ms = 0;

    /// Done needs a report and clip reference; routing matches the plan.
    void validate() const;

    bool operator==(const JobRecord&) const = default;
};

void to_json(Json& j, const RoutingEntry& r);
void from_json(const Json& j, RoutingEntry& r);
void to_json(Json& j, const JobRecord& r);
void from_json(const Json& j, JobRecord& r);

std::int64_t wall_clock_ms();

}  // namespace emf::orchestrator
