// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "emf/core/types.hpp"

namespace emf {

// EMV1 layout:
//   "EMV1" | u32 BE header length | JSON header | frame payload
// The header carries params, tracks and provenance; the payload is exactly
// frame_count * width * height * 3 bytes.
inline constexpr std::uint8_t kContainerMagic[4] = {0x45, 0x4D, 0x56, 0x31};

std::vector<std::uint8_t> encode_clip(const VideoClip& clip);

/// Throws MalformedContainer with the byte offset of the first problem.
VideoClip decode_clip(std::span<const std::uint8_t> bytes);

}  // namespace emf
