// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "emf/core/types.hpp"

namespace emf::testing {

inline VideoClip solid_clip(std::uint32_t w, std::uint32_t h, std::uint32_t frames, std::array<std::uint8_t, 3> rgb,
                            double fps = 8.0) {
    VideoClip c;
    c.params.width = w;
    c.params.height = h;
    c.params.frame_count = frames;
    c.params.fps = fps;
    c.frames.resize(frames);
    for (auto& f : c.frames) {
        f.pixels.resize(std::size_t{w} * h * 3);
        for (std::size_t i = 0; i < f.pixels.size(); i += 3) {
            f.pixels[i] = rgb[0];
            f.pixels[i + 1] = rgb[1];
            f.pixels[i + 2] = rgb[2];
        }
    }
    return c;
}

inline void set_pixel(VideoClip& c, std::size_t f, std::uint32_t x, std::uint32_t y, std::array<std::uint8_t, 3> rgb) {
    const std::size_t o = pixel_offset(c.params.width, x, y);
    c.frames[f].pixels[o] = rgb[0];
    c.frames[f].pixels[o + 1] = rgb[1];
    c.frames[f].pixels[o + 2] = rgb[2];
}

inline std::array<std::uint8_t, 3> get_pixel(const VideoClip& c, std::size_t f, std::uint32_t x, std::uint32_t y) {
    const std::size_t o = pixel_offset(c.params.width, x, y);
    return {c.frames[f].pixels[o], c.frames[f].pixels[o + 1], c.frames[f].pixels[o + 2]};
}

inline void fill_box(VideoClip& c, std::size_t f, const Box& b, std::array<std::uint8_t, 3> rgb) {
    for (std::int32_t y = b.y; y < b.y + b.h; ++y) {
        for (std::int32_t x = b.x; x < b.x + b.w; ++x) {
            set_pixel(c, f, static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y), rgb);
        }
    }
}

struct RandomClipOptions {
    std::uint32_t min_side = 2;
    std::uint32_t max_side = 32;  // both even-rounded
    std::uint32_t min_frames = 2;
    std::uint32_t max_frames = 8;
    std::size_t max_tracks = 3;
    std::vector<std::string> labels{"a cat", "a dog", "school teacher", "student"};
};

inline std::uint32_t pick(std::mt19937_64& rng, std::uint32_t lo, std::uint32_t hi) {
    return std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng);
}

/// Valid clip with mixed content: flat regions, gradients, saturated pixels
/// and noise, plus random tracks whose boxes come and go.
inline VideoClip random_clip(std::mt19937_64& rng, const RandomClipOptions& o = {}) {
    VideoClip c;
    c.params.width = 2 * pick(rng, (o.min_side + 1) / 2, o.max_side / 2);
    c.params.height = 2 * pick(rng, (o.min_side + 1) / 2, o.max_side / 2);
    c.params.frame_count = pick(rng, o.min_frames, o.max_frames);
    c.params.fps = static_cast<double>(pick(rng, 1, 30));
    c.params.seed = rng();
    const std::uint32_t W = c.params.width;
    const std::uint32_t H = c.params.height;
    const std::uint32_t style = pick(rng, 0, 3);
    std::array<std::uint8_t, 3> base{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                                     static_cast<std::uint8_t>(rng())};
    c.frames.resize(c.params.frame_count);
    for (auto& f : c.frames) {
        f.pixels.resize(c.params.frame_bytes());
        for (std::uint32_t y = 0; y < H; ++y) {
            for (std::uint32_t x = 0; x < W; ++x) {
                for (int ch = 0; ch < 3; ++ch) {
                    int v = 0;
                    switch (style) {
                        case 0: v = static_cast<int>(rng() % 256); break;
                        case 1: v = base[ch] + static_cast<int>(rng() % 5) - 2; break;
                        case 2: v = static_cast<int>((x * 255) / W + ch * 40 + y); break;
                        default: v = ((x + y) % 2 == 0) ? 0 : 255; break;
                    }
                    f.pixels[pixel_offset(W, x, y) + ch] = static_cast<std::uint8_t>(std::clamp(v, 0, 255) % 256);
                }
            }
        }
    }
    const std::size_t ntracks = pick(rng, 0, static_cast<std::uint32_t>(o.max_tracks));
    for (std::size_t t = 0; t < ntracks; ++t) {
        SubjectTrack tr;
        tr.label = o.labels[rng() % o.labels.size()];
        for (std::uint32_t f = 0; f < c.params.frame_count; ++f) {
            if (rng() % 4 == 0) {
                tr.boxes.emplace_back(std::nullopt);
                continue;
            }
            Box b;
            b.x = static_cast<std::int32_t>(pick(rng, 0, W - 1));
            b.y = static_cast<std::int32_t>(pick(rng, 0, H - 1));
            b.w = static_cast<std::int32_t>(pick(rng, 1, W - static_cast<std::uint32_t>(b.x)));
            b.h = static_cast<std::int32_t>(pick(rng, 1, H - static_cast<std::uint32_t>(b.y)));
            tr.boxes.emplace_back(b);
        }
        c.tracks.push_back(std::move(tr));
    }
    return c;
}

inline PromptSpec make_prompt(std::string text, std::vector<std::string> subjects = {}, GenerationParams params = {}) {
    PromptSpec p;
    p.text = std::move(text);
    p.declared_subjects = std::move(subjects);
    p.params = params;
    return p;
}

}  // namespace emf::testing
