// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "emf/core/hash.hpp"
#include "emf/core/types.hpp"

namespace emf {

/// Lowercases, drops punctuation, collapses whitespace runs to one space and
/// trims. ASCII alphanumerics are kept; bytes >= 0x80 pass through untouched
/// so UTF-8 words survive.
std::string canonicalize_prompt(std::string_view text);

/// Splits canonical text on single spaces.
std::vector<std::string> split_words(std::string_view canonical);

/// SHA-256 over a domain tag, the canonical sub-prompt and the params in a
/// fixed big-endian field order (width, height, frame_count, fps bits, seed).
Digest cache_key(std::string_view sub_prompt, const GenerationParams& params);

}  // namespace emf
