// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "emf/core/types.hpp"

namespace emf::protocol {

/// Procedural stand-in for a text-to-video expert.
///
/// Renders a constant background colour derived from the canonical prompt and
/// exactly one subject, the first subject phrase found in the prompt, as a
/// solid square of side min(width, height) / 4 sweeping left to right. Any
/// further subjects in the prompt are neither drawn nor tracked, which mimics
/// a single generator losing track of secondary subjects. Seeded noise of
/// +/-2 per channel keeps the frames away from degenerate metric values.
///
/// Colour channels are drawn from {16, 48, ..., 240} so noise never leaves
/// the 8-bin histogram cell of the base colour and never clips.
///
/// Throws DegeneratePrompt when no subject phrase can be extracted.
VideoClip mock_generate(std::string_view sub_prompt, const GenerationParams& params);

/// Palette colour the mock uses for a label (subject or prompt background).
std::array<std::uint8_t, 3> mock_palette_color(std::string_view label);

}  // namespace emf::protocol
