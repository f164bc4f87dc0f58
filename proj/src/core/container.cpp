// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/core/container.hpp"

#include <algorithm>
#include <cstring>
#include <limits>

#include "emf/core/json.hpp"
#include "emf/error.hpp"

namespace emf {

namespace {

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32_be(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

[[noreturn]] void malformed(const std::string& why, std::size_t offset) {
    fail(ErrorCode::MalformedContainer, why, offset);
}

}  // namespace

std::vector<std::uint8_t> encode_clip(const VideoClip& clip) {
    clip.validate();
    Json header{{"format", "EMV1"}, {"params", clip.params}, {"tracks", clip.tracks}, {"provenance", clip.provenance}};
    const std::string text = header.dump();

    std::vector<std::uint8_t> out(std::begin(kContainerMagic), std::end(kContainerMagic));
    out.reserve(8 + text.size() + clip.params.raw_bytes());
    put_u32_be(out, static_cast<std::uint32_t>(text.size()));
    out.insert(out.end(), text.begin(), text.end());
    for (const auto& f : clip.frames) {
        out.insert(out.end(), f.pixels.begin(), f.pixels.end());
    }
    return out;
}

VideoClip decode_clip(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) malformed("truncated magic", bytes.size());
    if (std::memcmp(bytes.data(), kContainerMagic, 4) != 0) malformed("bad magic", 0);
    if (bytes.size() < 8) malformed("truncated header length", bytes.size());

    const std::size_t header_len = get_u32_be(bytes.data() + 4);
    const std::size_t header_end = 8 + header_len;
    if (header_end > bytes.size()) malformed("header length exceeds container size", 4);

    Json header;
    try {
        header = Json::parse(bytes.begin() + 8, bytes.begin() + static_cast<std::ptrdiff_t>(header_end));
    } catch (const Json::parse_error& e) {
        malformed(std::string("header is not valid JSON: ") + e.what(), 8 + (e.byte > 0 ? e.byte - 1 : 0));
    }

    VideoClip clip;
    try {
        if (!header.is_object()) malformed("header is not an object", 8);
        if (header.value("format", std::string{}) != "EMV1") malformed("header format tag is not EMV1", 8);
        header.at("params").get_to(clip.params);
        header.at("tracks").get_to(clip.tracks);
        header.at("provenance").get_to(clip.provenance);
    } catch (const Json::exception& e) {
        malformed(std::string("header field error: ") + e.what(), 8);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::MalformedContainer) throw;
        malformed(e.what(), 8);
    }

    try {
        clip.params.validate(std::numeric_limits<std::size_t>::max());
    } catch (const Error& e) {
        malformed(e.what(), 8);
    }

    const std::size_t available = bytes.size() - header_end;
    const auto wide_payload = static_cast<unsigned __int128>(clip.params.width) * clip.params.height * 3 *
                              clip.params.frame_count;
    if (wide_payload > available) malformed("truncated frame payload", bytes.size());
    const std::size_t frame_bytes = clip.params.frame_bytes();
    const std::size_t payload = frame_bytes * clip.params.frame_count;
    if (available < payload) malformed("truncated frame payload", bytes.size());
    if (available > payload) malformed("trailing bytes after frame payload", header_end + payload);

    clip.frames.resize(clip.params.frame_count);
    for (std::size_t i = 0; i < clip.frames.size(); ++i) {
        const auto* begin = bytes.data() + header_end + i * frame_bytes;
        clip.frames[i].pixels.assign(begin, begin + frame_bytes);
    }

    try {
        clip.validate();
    } catch (const Error& e) {
        malformed(e.what(), 8);
    }
    return clip;
}

}  // namespace emf
