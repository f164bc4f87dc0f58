// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/orchestrator/job.hpp"

#include <chrono>

#include "emf/error.hpp"

namespace emf::orchestrator {

std::string_view to_string(JobStatus s) {
    switch (s) {
        case JobStatus::Pending: return "pending";
        case JobStatus::Generating: return "generating";
        case JobStatus::Merging: return "merging";
        case JobStatus::Done: return "done";
        case JobStatus::Failed: return "failed";
    }
    return "pending";
}

JobStatus parse_job_status(std::string_view text) {
    if (text == "pending") return JobStatus::Pending;
    if (text == "generating") return JobStatus::Generating;
    if (text == "merging") return JobStatus::Merging;
    if (text == "done") return JobStatus::Done;
    if (text == "failed") return JobStatus::Failed;
    fail(ErrorCode::InvalidArgument, "unknown job status '" + std::string(text) + "'");
}

std::string_view to_string(PipelineMode m) {
    switch (m) {
        case PipelineMode::Correct: return "correct";
        case PipelineMode::MismatchedMerge: return "mismatch";
        case PipelineMode::SingleDeviceBaseline: return "single";
    }
    return "correct";
}

PipelineMode parse_pipeline_mode(std::string_view text) {
    if (text == "correct") return PipelineMode::Correct;
    if (text == "mismatch") return PipelineMode::MismatchedMerge;
    if (text == "single") return PipelineMode::SingleDeviceBaseline;
    fail(ErrorCode::InvalidArgument, "unknown mode '" + std::string(text) + "' (expected correct, mismatch or single)");
}

void JobRecord::validate() const {
    if (status == JobStatus::Done) {
        if (!report || merged_clip_ref.empty() || !plan) {
            fail(ErrorCode::InvalidArgument, "done job " + job_id + " lacks a report, plan or clip reference");
        }
        if (routing.size() != plan->subtasks.size()) {
            fail(ErrorCode::InvalidArgument, "job " + job_id + " routing length differs from subtask count");
        }
    }
}

void to_json(Json& j, const RoutingEntry& r) {
    j = Json{{"cache_key", r.cache_key.hex()},
             {"expert_id", r.expert_id},
             {"reused", r.reused},
             {"elapsed_ms", r.elapsed_ms},
             {"attempts", r.attempts}};
}

void from_json(const Json& j, RoutingEntry& r) {
    r.cache_key = Digest::from_hex(j.at("cache_key").get<std::string>());
    j.at("expert_id").get_to(r.expert_id);
    j.at("reused").get_to(r.reused);
    j.at("elapsed_ms").get_to(r.elapsed_ms);
    r.attempts = j.value("attempts", 0u);
}

void to_json(Json& j, const JobRecord& r) {
    j = Json{{"job_id", r.job_id},
             {"prompt", r.prompt},
             {"mode", std::string(to_string(r.mode))},
             {"plan", r.plan ? Json(*r.plan) : Json(nullptr)},
             {"subjects", r.subjects},
             {"routing", r.routing},
             {"merged_clip_ref", r.merged_clip_ref.empty() ? Json(nullptr) : Json(r.merged_clip_ref)},
             {"report", r.report ? Json(*r.report) : Json(nullptr)},
             {"status", std::string(to_string(r.status))},
             {"failure_reason", r.failure_reason.empty() ? Json(nullptr) : Json(r.failure_reason)},
             {"created_at_ms", r.created_at_ms},
             {"updated_at_ms", r.updated_at_ms}};
}

void from_json(const Json& j, JobRecord& r) {
    j.at("job_id").get_to(r.job_id);
    j.at("prompt").get_to(r.prompt);
    r.mode = parse_pipeline_mode(j.value("mode", std::string("correct")));
    const auto& plan = j.at("plan");
    r.plan = plan.is_null() ? std::nullopt : std::optional<DecompositionPlan>(plan.get<DecompositionPlan>());
    j.at("subjects").get_to(r.subjects);
    j.at("routing").get_to(r.routing);
    const auto& ref = j.at("merged_clip_ref");
    r.merged_clip_ref = ref.is_null() ? std::string() : ref.get<std::string>();
    const auto& report = j.at("report");
    r.report = report.is_null() ? std::nullopt : std::optional<QualityReport>(report.get<QualityReport>());
    r.status = parse_job_status(j.at("status").get<std::string>());
    const auto& reason = j.at("failure_reason");
    r.failure_reason = reason.is_null() ? std::string() : reason.get<std::string>();
    j.at("created_at_ms").get_to(r.created_at_ms);
    j.at("updated_at_ms").get_to(r.updated_at_ms);
}

std::int64_t wall_clock_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

}  // namespace emf::orchestrator
