// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/core/canonical.hpp"

#include <bit>
#include <cctype>
#include <cstdint>

namespace emf {

std::string canonicalize_prompt(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isspace(c) != 0) {
            pending_space = !out.empty();
            continue;
        }
        const bool keep = std::isalnum(c) != 0 || c >= 0x80;
        if (!keep) {
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

std::vector<std::string> split_words(std::string_view canonical) {
    std::vector<std::string> words;
    std::size_t start = 0;
    while (start < canonical.size()) {
        auto end = canonical.find(' ', start);
        if (end == std::string_view::npos) end = canonical.size();
        if (end > start) words.emplace_back(canonical.substr(start, end - start));
        start = end + 1;
    }
    return words;
}

namespace {

void put_u32(Sha256& h, std::uint32_t v) {
    const std::uint8_t b[4] = {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
                               static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
    h.update(std::span<const std::uint8_t>(b, 4));
}

void put_u64(Sha256& h, std::uint64_t v) {
    put_u32(h, static_cast<std::uint32_t>(v >> 32));
    put_u32(h, static_cast<std::uint32_t>(v));
}

}  // namespace

Digest cache_key(std::string_view sub_prompt, const GenerationParams& params) {
    const std::string canonical = canonicalize_prompt(sub_prompt);
    Sha256 h;
    h.update(std::string_view("emf.subtask.v1", 15));  // includes the terminating NUL as separator
    put_u32(h, static_cast<std::uint32_t>(canonical.size()));
    h.update(canonical);
    put_u32(h, params.width);
    put_u32(h, params.height);
    put_u32(h, params.frame_count);
    put_u64(h, std::bit_cast<std::uint64_t>(params.fps));
    put_u64(h, params.seed);
    return h.finish();
}

}  // namespace emf
