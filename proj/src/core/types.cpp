// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/core/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "emf/error.hpp"

namespace emf {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) {
        fail(ErrorCode::InvalidArgument, message);
    }
}

bool is_trimmed_empty(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

void GenerationParams::validate(std::size_t payload_ceiling) const {
    require(width > 0 && width % 2 == 0, "params.width must be positive and even");
    require(height > 0 && height % 2 == 0, "params.height must be positive and even");
    require(frame_count >= 2, "params.frame_count must be at least 2");
    require(std::isfinite(fps) && fps > 0.0, "params.fps must be positive");
    require(raw_bytes() <= payload_ceiling,
            "params exceed the payload ceiling of " + std::to_string(payload_ceiling) + " bytes");
}

std::string_view to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::Atomic: return "atomic";
        case TaskKind::Temporal: return "temporal";
        case TaskKind::Spatial: return "spatial";
    }
    return "atomic";
}

TaskKind parse_task_kind(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "atomic") return TaskKind::Atomic;
    if (lower == "temporal") return TaskKind::Temporal;
    if (lower == "spatial") return TaskKind::Spatial;
    fail(ErrorCode::InvalidArgument, "unknown task kind '" + std::string(text) + "'");
}

std::string_view to_string(Anchor anchor) {
    switch (anchor) {
        case Anchor::Full: return "full";
        case Anchor::LeftHalf: return "left_half";
        case Anchor::RightHalf: return "right_half";
        case Anchor::TopHalf: return "top_half";
        case Anchor::BottomHalf: return "bottom_half";
    }
    return "full";
}

Anchor parse_anchor(std::string_view text) {
    if (text == "full") return Anchor::Full;
    if (text == "left_half") return Anchor::LeftHalf;
    if (text == "right_half") return Anchor::RightHalf;
    if (text == "top_half") return Anchor::TopHalf;
    if (text == "bottom_half") return Anchor::BottomHalf;
    fail(ErrorCode::InvalidArgument, "unknown anchor '" + std::string(text) + "'");
}

std::string_view to_string(PlanOrigin origin) {
    return origin == PlanOrigin::RuleBased ? "rule_based" : "external_llm";
}

PlanOrigin parse_plan_origin(std::string_view text) {
    if (text == "rule_based") return PlanOrigin::RuleBased;
    if (text == "external_llm") return PlanOrigin::ExternalLLM;
    fail(ErrorCode::InvalidArgument, "unknown plan origin '" + std::string(text) + "'");
}

void DecompositionPlan::validate() const {
    require(!subtasks.empty(), "plan has no subtasks");
    for (const auto& t : subtasks) {
        require(!is_trimmed_empty(t.sub_prompt), "plan has an empty sub-prompt");
    }
    switch (kind) {
        case TaskKind::Atomic:
            require(subtasks.size() == 1, "atomic plan must have exactly one subtask");
            require(std::holds_alternative<TimeSlot>(subtasks[0].slot), "atomic subtask must carry a time slot");
            break;
        case TaskKind::Temporal: {
            std::vector<std::uint32_t> indices;
            for (const auto& t : subtasks) {
                const auto* slot = std::get_if<TimeSlot>(&t.slot);
                require(slot != nullptr, "temporal subtask must carry a time slot");
                indices.push_back(slot->time_index);
            }
            std::sort(indices.begin(), indices.end());
            for (std::size_t i = 0; i < indices.size(); ++i) {
                require(indices[i] == i, "temporal time indices must be contiguous from 0");
            }
            break;
        }
        case TaskKind::Spatial: {
            std::set<std::uint32_t> seen;
            int bases = 0;
            for (const auto& t : subtasks) {
                const auto* slot = std::get_if<LayerSlot>(&t.slot);
                require(slot != nullptr, "spatial subtask must carry a layer slot");
                require(seen.insert(slot->z_index).second, "spatial z indices must be distinct");
                if (slot->z_index == 0) {
                    require(slot->anchor == Anchor::Full, "spatial base layer must use the full anchor");
                    ++bases;
                }
            }
            require(bases == 1, "spatial plan needs exactly one base layer");
            break;
        }
    }
}

std::vector<std::string> DecompositionPlan::subjects() const {
    std::vector<std::string> out;
    for (const auto& t : subtasks) {
        for (const auto& s : t.subjects) {
            if (std::find(out.begin(), out.end(), s) == out.end()) {
                out.push_back(s);
            }
        }
    }
    return out;
}

void PromptSpec::validate(std::size_t payload_ceiling) const {
    require(!is_trimmed_empty(text), "prompt text is empty");
    params.validate(payload_ceiling);
    std::set<std::string> seen;
    for (const auto& s : declared_subjects) {
        require(!s.empty(), "declared subject is empty");
        require(std::none_of(s.begin(), s.end(), [](unsigned char c) { return std::isupper(c) != 0; }),
                "declared subject '" + s + "' must be lowercase");
        require(seen.insert(s).second, "declared subject '" + s + "' is duplicated");
    }
}

bool Box::inside(std::uint32_t width, std::uint32_t height) const {
    return w >= 1 && h >= 1 && x >= 0 && y >= 0 && std::int64_t{x} + w <= std::int64_t{width} &&
           std::int64_t{y} + h <= std::int64_t{height};
}

std::size_t SubjectTrack::present_count() const {
    return static_cast<std::size_t>(std::count_if(boxes.begin(), boxes.end(), [](const auto& b) { return b.has_value(); }));
}

void VideoClip::validate() const {
    require(params.width > 0 && params.height > 0, "clip dimensions must be positive");
    require(params.frame_count >= 1, "clip has no frames");
    require(frames.size() == params.frame_count, "clip frame list length differs from frame_count");
    const std::size_t expected = params.frame_bytes();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        require(frames[i].pixels.size() == expected, "frame " + std::to_string(i) + " has the wrong byte length");
    }
    for (const auto& t : tracks) {
        require(t.boxes.size() == params.frame_count, "track '" + t.label + "' length differs from frame_count");
        for (const auto& b : t.boxes) {
            if (b) {
                require(b->inside(params.width, params.height), "track '" + t.label + "' has a box out of bounds");
            }
        }
    }
}

QualityReport QualityReport::from_scores(double imaging, double background, double subject, double overall) {
    QualityReport r;
    r.imaging_quality = imaging;
    r.background_consistency = background;
    r.subject_consistency = subject;
    r.overall_consistency = overall;
    r.average_quality = (imaging + background + subject + overall) / 4.0;
    return r;
}

}  // namespace emf
