// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "emf/core/types.hpp"

namespace emf::merge {

struct MergeInput {
    SubTask task;
    VideoClip clip;
};

struct KeyingConfig {
    std::array<std::uint8_t, 3> key_color{0, 255, 0};
    int tolerance = 32;  // per channel
};

struct MergePlan {
    TaskKind strategy = TaskKind::Atomic;  // Atomic = passthrough
    std::vector<MergeInput> inputs;
    std::uint32_t crossfade_frames = 0;    // Temporal only
    KeyingConfig keying;
};

/// Rescales one clip to the target width/height (nearest neighbour, boxes
/// rounded half up) and resamples it to the target fps (nearest frame).
/// The clip keeps its own duration and seed.
VideoClip harmonize_clip(const VideoClip& clip, const GenerationParams& target);

/// Throws EmptyClip for an empty list or a clip without frames.
std::vector<VideoClip> harmonize(const std::vector<VideoClip>& clips, const GenerationParams& target);

/// Pixel rectangle of an anchor inside a width x height frame.
Box anchor_rect(Anchor anchor, std::uint32_t width, std::uint32_t height);

/// Concatenates in time-index order, optionally crossfading `crossfade_frames`
/// frames at each cut. Throws SlotGap, EmptyClip, MergeError.
VideoClip merge_temporal(const MergePlan& plan);

/// Keys layers z >= 1 onto the z = 0 full-frame base inside their anchor
/// rectangles, trimming to the shortest input. Throws NoBaseLayer,
/// EmptyClip, MergeError.
VideoClip merge_spatial(const MergePlan& plan);

/// Dispatches on plan.strategy.
VideoClip merge(const MergePlan& plan);

}  // namespace emf::merge
