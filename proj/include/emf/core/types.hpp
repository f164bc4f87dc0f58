// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "emf/core/hash.hpp"

namespace emf {

inline constexpr std::size_t kDefaultPayloadCeiling = std::size_t{64} << 20;

struct GenerationParams {
    std::uint32_t width = 64;
    std::uint32_t height = 64;
    std::uint32_t frame_count = 16;
    double fps = 8.0;
    std::uint64_t seed = 0;

    std::size_t frame_bytes() const { return std::size_t{width} * height * 3; }
    std::size_t raw_bytes() const { return frame_bytes() * frame_count; }

    /// Throws InvalidArgument naming the offending field.
    void validate(std::size_t payload_ceiling = kDefaultPayloadCeiling) const;

    bool operator==(const GenerationParams&) const = default;
};

enum class TaskKind { Atomic, Temporal, Spatial };

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view text);

enum class Anchor { Full, LeftHalf, RightHalf, TopHalf, BottomHalf };

std::string_view to_string(Anchor anchor);
Anchor parse_anchor(std::string_view text);

struct TimeSlot {
    std::uint32_t time_index = 0;
    bool operator==(const TimeSlot&) const = default;
};

struct LayerSlot {
    std::uint32_t z_index = 0;
    Anchor anchor = Anchor::Full;
    bool operator==(const LayerSlot&) const = default;
};

using Slot = std::variant<TimeSlot, LayerSlot>;

struct SubTask {
    std::string sub_prompt;
    Slot slot;
    std::vector<std::string> subjects;
    Digest cache_key;

    bool operator==(const SubTask&) const = default;
};

enum class PlanOrigin { RuleBased, ExternalLLM };

std::string_view to_string(PlanOrigin origin);
PlanOrigin parse_plan_origin(std::string_view text);

struct DecompositionPlan {
    TaskKind kind = TaskKind::Atomic;
    std::vector<SubTask> subtasks;
    PlanOrigin origin = PlanOrigin::RuleBased;

    /// Checks the per-kind slot invariants; throws InvalidArgument.
    void validate() const;
    /// Subject labels of all subtasks, first occurrence order, deduplicated.
    std::vector<std::string> subjects() const;

    bool operator==(const DecompositionPlan&) const = default;
};

struct PromptSpec {
    std::string text;
    GenerationParams params;
    std::vector<std::string> declared_subjects;

    void validate(std::size_t payload_ceiling = kDefaultPayloadCeiling) const;

    bool operator==(const PromptSpec&) const = default;
};

struct Box {
    std::int32_t x = 0;
    std::int32_t y = 0;
    std::int32_t w = 1;
    std::int32_t h = 1;

    bool contains(std::int32_t px, std::int32_t py) const {
        return px >= x && px < x + w && py >= y && py < y + h;
    }
    bool inside(std::uint32_t width, std::uint32_t height) const;

    bool operator==(const Box&) const = default;
};

struct SubjectTrack {
    std::string label;
    std::vector<std::optional<Box>> boxes;  // one entry per frame

    std::size_t present_count() const;

    bool operator==(const SubjectTrack&) const = default;
};

struct Frame {
    std::vector<std::uint8_t> pixels;  // row-major RGB

    bool operator==(const Frame&) const = default;
};

struct Provenance {
    Digest cache_key;
    std::string expert_id;

    bool operator==(const Provenance&) const = default;
};

struct VideoClip {
    GenerationParams params;
    std::vector<Frame> frames;
    std::vector<SubjectTrack> tracks;
    std::vector<Provenance> provenance;

    /// Dimension, frame-count and track-bound checks. Does not apply the
    /// payload ceiling (merged clips may legitimately exceed it).
    void validate() const;

    bool operator==(const VideoClip&) const = default;
};

struct QualityReport {
    double imaging_quality = 0.0;
    double background_consistency = 0.0;
    double subject_consistency = 0.0;
    double overall_consistency = 0.0;
    double average_quality = 0.0;

    static QualityReport from_scores(double imaging, double background, double subject, double overall);

    bool operator==(const QualityReport&) const = default;
};

inline std::size_t pixel_offset(std::uint32_t width, std::uint32_t x, std::uint32_t y) {
    return (std::size_t{y} * width + x) * 3;
}

}  // namespace emf
