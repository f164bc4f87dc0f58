// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/protocol/mock_expert.hpp"

#include <algorithm>
#include <random>

#include "emf/core/canonical.hpp"
#include "emf/error.hpp"
#include "emf/gate/gate.hpp"

namespace emf::protocol {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t leading_u64(const Digest& d) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | d.bytes[i];
    return v;
}

}  // namespace

std::array<std::uint8_t, 3> mock_palette_color(std::string_view label) {
    const Digest d = sha256(label);
    std::array<std::uint8_t, 3> c{};
    for (int ch = 0; ch < 3; ++ch) {
        c[ch] = static_cast<std::uint8_t>(32 * (d.bytes[ch] % 8) + 16);
    }
    return c;
}

VideoClip mock_generate(std::string_view sub_prompt, const GenerationParams& params) {
    params.validate();
    const std::string canonical = canonicalize_prompt(sub_prompt);
    const auto subjects = gate::extract_subjects(canonical);
    if (subjects.empty()) {
        fail(ErrorCode::DegeneratePrompt, "no subject phrase in '" + canonical + "'");
    }
    const std::string& subject = subjects.front();

    const auto background = mock_palette_color("background:" + canonical);
    auto foreground = mock_palette_color("subject:" + subject);
    if (foreground == background) {
        // Keep the subject distinguishable from the scene.
        foreground[0] = static_cast<std::uint8_t>((foreground[0] + 128) % 256);
    }

    const std::uint32_t w = params.width;
    const std::uint32_t h = params.height;
    const std::int32_t side = std::max<std::int32_t>(1, static_cast<std::int32_t>(std::min(w, h) / 4));
    const std::int32_t travel = static_cast<std::int32_t>(w) - side;
    const std::int32_t top = (static_cast<std::int32_t>(h) - side) / 2;

    std::mt19937_64 rng(splitmix64(params.seed ^ leading_u64(sha256(canonical))));

    VideoClip clip;
    clip.params = params;
    clip.frames.resize(params.frame_count);
    SubjectTrack track;
    track.label = subject;

    const std::uint32_t last = params.frame_count - 1;
    for (std::uint32_t f = 0; f < params.frame_count; ++f) {
        // Integer rounding of f * travel / last.
        const std::int32_t left =
            static_cast<std::int32_t>((2 * std::int64_t{f} * travel + last) / (2 * std::int64_t{last}));
        const Box box{left, top, side, side};
        track.boxes.emplace_back(box);

        auto& px = clip.frames[f].pixels;
        px.resize(params.frame_bytes());
        for (std::uint32_t y = 0; y < h; ++y) {
            for (std::uint32_t x = 0; x < w; ++x) {
                const bool inside = box.contains(static_cast<std::int32_t>(x), static_cast<std::int32_t>(y));
                const auto& base = inside ? foreground : background;
                const std::uint64_t r = rng();
                const std::size_t o = pixel_offset(w, x, y);
                for (int ch = 0; ch < 3; ++ch) {
                    const int noise = static_cast<int>((r >> (8 * ch)) % 5) - 2;
                    px[o + ch] = static_cast<std::uint8_t>(std::clamp(base[ch] + noise, 0, 255));
                }
            }
        }
    }
    clip.tracks.push_back(std::move(track));
    return clip;
}

}  // namespace emf::protocol
