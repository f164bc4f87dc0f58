// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/merge/merger.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>

#include "emf/error.hpp"

namespace emf::merge {

namespace {

// floor(v * num / den + 1/2) for non-negative v.
std::int32_t scale_half_up(std::int64_t v, std::int64_t num, std::int64_t den) {
    return static_cast<std::int32_t>((2 * v * num + den) / (2 * den));
}

// ceil(v * num / den) for non-negative v.
std::int32_t scale_ceil(std::int64_t v, std::int64_t num, std::int64_t den) {
    return static_cast<std::int32_t>((v * num + den - 1) / den);
}

Box clamp_box(Box b, std::uint32_t width, std::uint32_t height) {
    const auto W = static_cast<std::int32_t>(width);
    const auto H = static_cast<std::int32_t>(height);
    b.x = std::clamp(b.x, 0, W - 1);
    b.y = std::clamp(b.y, 0, H - 1);
    b.w = std::clamp(b.w, 1, W - b.x);
    b.h = std::clamp(b.h, 1, H - b.y);
    return b;
}

Box bounding_union(const Box& a, const Box& b) {
    const std::int32_t x0 = std::min(a.x, b.x);
    const std::int32_t y0 = std::min(a.y, b.y);
    const std::int32_t x1 = std::max(a.x + a.w, b.x + b.w);
    const std::int32_t y1 = std::max(a.y + a.h, b.y + b.h);
    return Box{x0, y0, x1 - x0, y1 - y0};
}

VideoClip rescale(const VideoClip& clip, std::uint32_t dw, std::uint32_t dh) {
    const std::uint32_t sw = clip.params.width;
    const std::uint32_t sh = clip.params.height;
    VideoClip out;
    out.params = clip.params;
    out.params.width = dw;
    out.params.height = dh;
    out.provenance = clip.provenance;

    std::vector<std::uint32_t> xmap(dw);
    std::vector<std::uint32_t> ymap(dh);
    for (std::uint32_t x = 0; x < dw; ++x) xmap[x] = static_cast<std::uint32_t>(std::uint64_t{x} * sw / dw);
    for (std::uint32_t y = 0; y < dh; ++y) ymap[y] = static_cast<std::uint32_t>(std::uint64_t{y} * sh / dh);

    out.frames.resize(clip.frames.size());
    for (std::size_t f = 0; f < clip.frames.size(); ++f) {
        const auto& src = clip.frames[f].pixels;
        auto& dst = out.frames[f].pixels;
        dst.resize(std::size_t{dw} * dh * 3);
        for (std::uint32_t y = 0; y < dh; ++y) {
            for (std::uint32_t x = 0; x < dw; ++x) {
                const std::size_t s = pixel_offset(sw, xmap[x], ymap[y]);
                const std::size_t d = pixel_offset(dw, x, y);
                dst[d] = src[s];
                dst[d + 1] = src[s + 1];
                dst[d + 2] = src[s + 2];
            }
        }
    }
    for (const auto& t : clip.tracks) {
        SubjectTrack nt;
        nt.label = t.label;
        for (const auto& b : t.boxes) {
            if (!b) {
                nt.boxes.emplace_back(std::nullopt);
                continue;
            }
            Box s{scale_half_up(b->x, dw, sw), scale_half_up(b->y, dh, sh), scale_half_up(b->w, dw, sw),
                  scale_half_up(b->h, dh, sh)};
            nt.boxes.emplace_back(clamp_box(s, dw, dh));
        }
        out.tracks.push_back(std::move(nt));
    }
    return out;
}

VideoClip resample(const VideoClip& clip, double target_fps) {
    const double ratio = clip.params.fps / target_fps;
    const std::size_t n = clip.frames.size();
    const auto m = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(static_cast<double>(n) * target_fps / clip.params.fps)));
    std::vector<std::size_t> index(m);
    for (std::size_t i = 0; i < m; ++i) {
        index[i] = std::min(n - 1, static_cast<std::size_t>(std::floor(static_cast<double>(i) * ratio)));
    }
    VideoClip out;
    out.params = clip.params;
    out.params.fps = target_fps;
    out.params.frame_count = static_cast<std::uint32_t>(m);
    out.provenance = clip.provenance;
    out.frames.reserve(m);
    for (std::size_t i : index) out.frames.push_back(clip.frames[i]);
    for (const auto& t : clip.tracks) {
        SubjectTrack nt;
        nt.label = t.label;
        for (std::size_t i : index) nt.boxes.push_back(t.boxes[i]);
        out.tracks.push_back(std::move(nt));
    }
    return out;
}

template <typename SlotT>
const SlotT& slot_of(const MergeInput& in, const char* what) {
    const auto* s = std::get_if<SlotT>(&in.task.slot);
    if (s == nullptr) fail(ErrorCode::MergeError, std::string("input is missing a ") + what);
    return *s;
}

void append_provenance(std::vector<Provenance>& out, const std::vector<Provenance>& add, bool dedupe) {
    for (const auto& p : add) {
        if (dedupe && std::find(out.begin(), out.end(), p) != out.end()) continue;
        out.push_back(p);
    }
}

}  // namespace

VideoClip harmonize_clip(const VideoClip& clip, const GenerationParams& target) {
    if (clip.frames.empty()) fail(ErrorCode::EmptyClip, "clip has no frames");
    if (target.width == 0 || target.height == 0 || !(target.fps > 0.0)) {
        fail(ErrorCode::InvalidArgument, "harmonize target must have positive dimensions and fps");
    }
    VideoClip out = clip;
    if (out.params.width != target.width || out.params.height != target.height) {
        out = rescale(out, target.width, target.height);
    }
    if (out.params.fps != target.fps) {
        out = resample(out, target.fps);
    }
    return out;
}

std::vector<VideoClip> harmonize(const std::vector<VideoClip>& clips, const GenerationParams& target) {
    if (clips.empty()) fail(ErrorCode::EmptyClip, "nothing to harmonize");
    std::vector<VideoClip> out;
    out.reserve(clips.size());
    for (const auto& c : clips) out.push_back(harmonize_clip(c, target));
    return out;
}

Box anchor_rect(Anchor anchor, std::uint32_t width, std::uint32_t height) {
    const auto W = static_cast<std::int32_t>(width);
    const auto H = static_cast<std::int32_t>(height);
    switch (anchor) {
        case Anchor::Full: return Box{0, 0, W, H};
        case Anchor::LeftHalf: return Box{0, 0, W / 2, H};
        case Anchor::RightHalf: return Box{W / 2, 0, W - W / 2, H};
        case Anchor::TopHalf: return Box{0, 0, W, H / 2};
        case Anchor::BottomHalf: return Box{0, H / 2, W, H - H / 2};
    }
    return Box{0, 0, W, H};
}

VideoClip merge_temporal(const MergePlan& plan) {
    if (plan.inputs.empty()) fail(ErrorCode::EmptyClip, "temporal merge has no inputs");
    std::vector<const MergeInput*> ordered;
    for (const auto& in : plan.inputs) ordered.push_back(&in);
    std::stable_sort(ordered.begin(), ordered.end(), [](const MergeInput* a, const MergeInput* b) {
        return slot_of<TimeSlot>(*a, "time slot").time_index < slot_of<TimeSlot>(*b, "time slot").time_index;
    });
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        const auto idx = slot_of<TimeSlot>(*ordered[i], "time slot").time_index;
        if (idx != i) {
            fail(ErrorCode::SlotGap, "time indices are not contiguous: expected " + std::to_string(i) + ", found " +
                                         std::to_string(idx));
        }
    }
    if (ordered.front()->clip.frames.empty()) fail(ErrorCode::EmptyClip, "first clip has no frames");

    const GenerationParams target = ordered.front()->clip.params;
    std::vector<VideoClip> clips;
    for (const auto* in : ordered) clips.push_back(harmonize_clip(in->clip, target));

    const std::uint32_t c = plan.crossfade_frames;
    for (const auto& clip : clips) {
        if (clip.frames.size() < c) {
            fail(ErrorCode::MergeError, "crossfade of " + std::to_string(c) + " frames exceeds a clip of " +
                                            std::to_string(clip.frames.size()) + " frames");
        }
    }

    VideoClip out;
    out.params = target;
    std::vector<std::size_t> offsets;
    for (std::size_t i = 0; i < clips.size(); ++i) {
        const auto& clip = clips[i];
        const std::size_t overlap = i == 0 ? 0 : c;
        const std::size_t offset = out.frames.size() - overlap;
        offsets.push_back(offset);
        for (std::size_t k = 1; k <= overlap; ++k) {
            auto& a = out.frames[offset + k - 1].pixels;
            const auto& b = clip.frames[k - 1].pixels;
            const std::uint32_t wb = static_cast<std::uint32_t>(k);
            const std::uint32_t wa = c + 1 - wb;
            for (std::size_t p = 0; p < a.size(); ++p) {
                a[p] = static_cast<std::uint8_t>((a[p] * wa + b[p] * wb + (c + 1) / 2) / (c + 1));
            }
        }
        for (std::size_t j = overlap; j < clip.frames.size(); ++j) out.frames.push_back(clip.frames[j]);
        append_provenance(out.provenance, clip.provenance, false);
    }
    out.params.frame_count = static_cast<std::uint32_t>(out.frames.size());

    // One output track per label; same-label tracks from different slots join.
    std::map<std::string, std::size_t> by_label;
    for (std::size_t i = 0; i < clips.size(); ++i) {
        for (const auto& t : clips[i].tracks) {
            auto [it, inserted] = by_label.emplace(t.label, out.tracks.size());
            if (inserted) {
                out.tracks.push_back(SubjectTrack{t.label, std::vector<std::optional<Box>>(out.frames.size())});
            }
            auto& dst = out.tracks[it->second].boxes;
            for (std::size_t j = 0; j < t.boxes.size(); ++j) {
                if (!t.boxes[j]) continue;
                auto& slot = dst[offsets[i] + j];
                slot = slot ? bounding_union(*slot, *t.boxes[j]) : *t.boxes[j];
            }
        }
    }
    return out;
}

VideoClip merge_spatial(const MergePlan& plan) {
    if (plan.inputs.empty()) fail(ErrorCode::EmptyClip, "spatial merge has no inputs");
    std::vector<const MergeInput*> ordered;
    std::set<std::uint32_t> z_seen;
    const MergeInput* base = nullptr;
    for (const auto& in : plan.inputs) {
        const auto& slot = slot_of<LayerSlot>(in, "layer slot");
        if (!z_seen.insert(slot.z_index).second) {
            fail(ErrorCode::MergeError, "duplicate z index " + std::to_string(slot.z_index));
        }
        if (slot.z_index == 0 && slot.anchor == Anchor::Full) base = &in;
        ordered.push_back(&in);
    }
    if (base == nullptr) fail(ErrorCode::NoBaseLayer, "spatial merge needs a z=0 full-frame layer");
    std::sort(ordered.begin(), ordered.end(), [](const MergeInput* a, const MergeInput* b) {
        return std::get<LayerSlot>(a->task.slot).z_index < std::get<LayerSlot>(b->task.slot).z_index;
    });

    const GenerationParams target = base->clip.params;
    std::vector<VideoClip> clips;
    std::size_t n = SIZE_MAX;
    for (const auto* in : ordered) {
        clips.push_back(harmonize_clip(in->clip, target));
        n = std::min(n, clips.back().frames.size());
    }

    const std::uint32_t W = target.width;
    const std::uint32_t H = target.height;
    VideoClip out;
    out.params = target;
    out.params.frame_count = static_cast<std::uint32_t>(n);
    out.frames.assign(clips[0].frames.begin(), clips[0].frames.begin() + static_cast<std::ptrdiff_t>(n));
    for (const auto& t : clips[0].tracks) {
        out.tracks.push_back(SubjectTrack{t.label, {t.boxes.begin(), t.boxes.begin() + static_cast<std::ptrdiff_t>(n)}});
    }
    append_provenance(out.provenance, clips[0].provenance, true);

    const auto& key = plan.keying.key_color;
    for (std::size_t li = 1; li < clips.size(); ++li) {
        const auto& layer = clips[li];
        const Box R = anchor_rect(std::get<LayerSlot>(ordered[li]->task.slot).anchor, W, H);
        const bool tracked = !layer.tracks.empty();

        std::vector<std::uint32_t> xmap(static_cast<std::size_t>(R.w));
        std::vector<std::uint32_t> ymap(static_cast<std::size_t>(R.h));
        for (std::int32_t dx = 0; dx < R.w; ++dx) xmap[dx] = static_cast<std::uint32_t>(std::int64_t{dx} * W / R.w);
        for (std::int32_t dy = 0; dy < R.h; ++dy) ymap[dy] = static_cast<std::uint32_t>(std::int64_t{dy} * H / R.h);

        for (std::size_t f = 0; f < n; ++f) {
            const auto& src = layer.frames[f].pixels;
            auto& dst = out.frames[f].pixels;
            for (std::int32_t dy = 0; dy < R.h; ++dy) {
                for (std::int32_t dx = 0; dx < R.w; ++dx) {
                    const std::uint32_t sx = xmap[dx];
                    const std::uint32_t sy = ymap[dy];
                    const std::size_t s = pixel_offset(W, sx, sy);
                    bool foreground = false;
                    if (tracked) {
                        for (const auto& t : layer.tracks) {
                            const auto& b = t.boxes[f];
                            if (b && b->contains(static_cast<std::int32_t>(sx), static_cast<std::int32_t>(sy))) {
                                foreground = true;
                                break;
                            }
                        }
                    } else {
                        for (int ch = 0; ch < 3; ++ch) {
                            if (std::abs(int{src[s + ch]} - int{key[ch]}) > plan.keying.tolerance) foreground = true;
                        }
                    }
                    if (!foreground) continue;
                    const std::size_t d = pixel_offset(W, static_cast<std::uint32_t>(R.x + dx),
                                                       static_cast<std::uint32_t>(R.y + dy));
                    dst[d] = src[s];
                    dst[d + 1] = src[s + 1];
                    dst[d + 2] = src[s + 2];
                }
            }
        }

        for (const auto& t : layer.tracks) {
            SubjectTrack nt;
            nt.label = t.label;
            for (std::size_t f = 0; f < n; ++f) {
                const auto& b = t.boxes[f];
                if (!b) {
                    nt.boxes.emplace_back(std::nullopt);
                    continue;
                }
                const std::int32_t x0 = R.x + scale_ceil(b->x, R.w, W);
                const std::int32_t x1 = R.x + scale_ceil(std::int64_t{b->x} + b->w, R.w, W);
                const std::int32_t y0 = R.y + scale_ceil(b->y, R.h, H);
                const std::int32_t y1 = R.y + scale_ceil(std::int64_t{b->y} + b->h, R.h, H);
                nt.boxes.emplace_back(clamp_box(Box{x0, y0, x1 - x0, y1 - y0}, W, H));
            }
            out.tracks.push_back(std::move(nt));
        }
        append_provenance(out.provenance, layer.provenance, true);
    }
    return out;
}

VideoClip merge(const MergePlan& plan) {
    switch (plan.strategy) {
        case TaskKind::Temporal: return merge_temporal(plan);
        case TaskKind::Spatial: return merge_spatial(plan);
        case TaskKind::Atomic:
            if (plan.inputs.size() != 1) fail(ErrorCode::MergeError, "passthrough merge needs exactly one input");
            if (plan.inputs.front().clip.frames.empty()) fail(ErrorCode::EmptyClip, "clip has no frames");
            return plan.inputs.front().clip;
    }
    fail(ErrorCode::MergeError, "unknown merge strategy");
}

}  // namespace emf::merge
