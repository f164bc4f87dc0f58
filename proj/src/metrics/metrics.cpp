// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/metrics/metrics.hpp"

#include <httplib.h>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>

#include "emf/core/container.hpp"
#include "emf/core/json.hpp"
#include "emf/core/url.hpp"
#include "emf/error.hpp"

namespace emf::metrics {

namespace {

std::uint8_t gray(const std::uint8_t* p) {
    return static_cast<std::uint8_t>((299u * p[0] + 587u * p[1] + 114u * p[2] + 500u) / 1000u);
}

// Mask of pixels covered by any of the given boxes at frame f.
std::vector<std::uint8_t> box_mask(const std::vector<const SubjectTrack*>& tracks, std::size_t f,
                                   std::uint32_t width, std::uint32_t height) {
    std::vector<std::uint8_t> mask(std::size_t{width} * height, 0);
    for (const auto* t : tracks) {
        const auto& b = t->boxes[f];
        if (!b) continue;
        const std::int32_t x1 = std::min<std::int32_t>(b->x + b->w, static_cast<std::int32_t>(width));
        const std::int32_t y1 = std::min<std::int32_t>(b->y + b->h, static_cast<std::int32_t>(height));
        for (std::int32_t y = std::max(b->y, 0); y < y1; ++y) {
            for (std::int32_t x = std::max(b->x, 0); x < x1; ++x) {
                mask[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)] = 1;
            }
        }
    }
    return mask;
}

std::string base64(const std::vector<std::uint8_t>& bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

double external_score(const VideoClip& clip, const PromptSpec& prompt, const ExternalScorerConfig& cfg) {
    const UrlParts url = split_url(cfg.endpoint);
    httplib::Client client(url.origin);
    if (!client.is_valid()) fail(ErrorCode::ScorerUnavailable, "invalid scorer endpoint '" + cfg.endpoint + "'");
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    const Json body{{"prompt", prompt.text}, {"clip_base64", base64(encode_clip(clip))}};
    auto res = client.Post(url.path.empty() ? "/" : url.path, body.dump(), "application/json");
    if (!res) fail(ErrorCode::ScorerUnavailable, "scorer request failed: " + httplib::to_string(res.error()));
    if (res->status / 100 != 2) fail(ErrorCode::ScorerUnavailable, "scorer returned HTTP " + std::to_string(res->status));
    try {
        const double s = Json::parse(res->body).at("score").get<double>();
        if (!std::isfinite(s)) fail(ErrorCode::ScorerUnavailable, "scorer returned a non-finite score");
        return std::clamp(s, 0.0, 1.0);
    } catch (const Json::exception& e) {
        fail(ErrorCode::ScorerUnavailable, std::string("scorer reply is malformed: ") + e.what());
    }
}

}  // namespace

std::string_view to_string(ScorerMode mode) { return mode == ScorerMode::OracleLabels ? "oracle_labels" : "external"; }

ScorerMode parse_scorer_mode(std::string_view text) {
    if (text == "oracle_labels") return ScorerMode::OracleLabels;
    if (text == "external") return ScorerMode::External;
    fail(ErrorCode::InvalidArgument, "unknown scorer mode '" + std::string(text) + "'");
}

void MetricsConfig::validate() const {
    if (hist_bins < 2 || hist_bins > 256) fail(ErrorCode::InvalidArgument, "hist_bins must be in [2, 256]");
    if (!(sharpness_constant > 0.0) || !std::isfinite(sharpness_constant)) {
        fail(ErrorCode::InvalidArgument, "sharpness_constant must be positive");
    }
    if (clip_low >= clip_high) fail(ErrorCode::InvalidArgument, "clip_low must be below clip_high");
    if (!(presence_threshold >= 0.0 && presence_threshold <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "presence_threshold must be in [0, 1]");
    }
    if (scorer == ScorerMode::External && external.endpoint.empty()) {
        fail(ErrorCode::InvalidArgument, "external scorer needs an endpoint");
    }
}

FeatureVector color_histogram(const Frame& frame, std::uint32_t width, std::uint32_t height,
                              const std::vector<std::uint8_t>& mask, std::uint32_t bins) {
    std::vector<std::uint64_t> counts(std::size_t{3} * bins, 0);
    std::uint64_t total = 0;
    const std::size_t n = std::size_t{width} * height;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask.empty() && mask[i] == 0) continue;
        ++total;
        for (std::size_t c = 0; c < 3; ++c) {
            counts[c * bins + frame.pixels[i * 3 + c] * bins / 256]++;
        }
    }
    FeatureVector out(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out[i] = total == 0 ? 1.0 / bins : static_cast<double>(counts[i]) / static_cast<double>(total);
    }
    return out;
}

double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
    if (a.size() != b.size()) fail(ErrorCode::InvalidArgument, "feature vectors differ in length");
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

double laplacian_variance(const Frame& frame, std::uint32_t width, std::uint32_t height) {
    if (width < 3 || height < 3) return 0.0;
    std::vector<std::int32_t> g(std::size_t{width} * height);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = gray(&frame.pixels[i * 3]);
    // Exact integer moments, one division at the end.
    __int128 s1 = 0;
    __int128 s2 = 0;
    __int128 n = 0;
    for (std::uint32_t y = 1; y + 1 < height; ++y) {
        for (std::uint32_t x = 1; x + 1 < width; ++x) {
            const std::size_t i = std::size_t{y} * width + x;
            const std::int64_t l = g[i - 1] + g[i + 1] + g[i - width] + g[i + width] - 4 * g[i];
            s1 += l;
            s2 += l * l;
            ++n;
        }
    }
    const __int128 num = n * s2 - s1 * s1;
    return static_cast<double>(num) / (static_cast<double>(n) * static_cast<double>(n));
}

double imaging_quality(const VideoClip& clip, const MetricsConfig& cfg) {
    if (clip.frames.empty()) return 0.0;
    const std::size_t pixels = std::size_t{clip.params.width} * clip.params.height;
    double sum = 0.0;
    for (const auto& f : clip.frames) {
        std::size_t clipped = 0;
        for (std::size_t i = 0; i < pixels; ++i) {
            const std::uint8_t* p = &f.pixels[i * 3];
            for (int c = 0; c < 3; ++c) {
                if (p[c] <= cfg.clip_low || p[c] >= cfg.clip_high) {
                    ++clipped;
                    break;
                }
            }
        }
        const double exposure = 1.0 - static_cast<double>(clipped) / static_cast<double>(pixels);
        const double v = laplacian_variance(f, clip.params.width, clip.params.height);
        const double sharpness = v / (v + cfg.sharpness_constant);
        sum += 0.5 * exposure + 0.5 * sharpness;
    }
    return sum / static_cast<double>(clip.frames.size());
}

double background_consistency(const VideoClip& clip, const MetricsConfig& cfg) {
    if (clip.frames.size() < 2) fail(ErrorCode::TooFewFrames, "background consistency needs at least 2 frames");
    std::vector<const SubjectTrack*> all;
    for (const auto& t : clip.tracks) all.push_back(&t);
    const std::uint32_t W = clip.params.width;
    const std::uint32_t H = clip.params.height;

    auto features = [&](std::size_t f) {
        std::vector<std::uint8_t> mask;
        if (!all.empty()) {
            mask = box_mask(all, f, W, H);
            for (auto& m : mask) m = m ? 0 : 1;
        }
        return color_histogram(clip.frames[f], W, H, mask, cfg.hist_bins);
    };

    double sum = 0.0;
    FeatureVector prev = features(0);
    for (std::size_t f = 1; f < clip.frames.size(); ++f) {
        FeatureVector cur = features(f);
        sum += cosine_similarity(prev, cur);
        prev = std::move(cur);
    }
    return sum / static_cast<double>(clip.frames.size() - 1);
}

double subject_consistency(const VideoClip& clip, const std::vector<std::string>& subjects, const MetricsConfig& cfg) {
    if (subjects.empty()) fail(ErrorCode::InvalidArgument, "subject consistency needs at least one subject");
    const std::uint32_t W = clip.params.width;
    const std::uint32_t H = clip.params.height;
    double total = 0.0;
    for (const auto& label : subjects) {
        std::vector<const SubjectTrack*> tracks;
        for (const auto& t : clip.tracks) {
            if (t.label == label) tracks.push_back(&t);
        }
        std::vector<std::size_t> present;
        for (std::size_t f = 0; f < clip.frames.size(); ++f) {
            if (std::any_of(tracks.begin(), tracks.end(), [f](const SubjectTrack* t) { return t->boxes[f].has_value(); })) {
                present.push_back(f);
            }
        }
        if (present.size() < 2) continue;
        double sum = 0.0;
        FeatureVector prev = color_histogram(clip.frames[present[0]], W, H, box_mask(tracks, present[0], W, H), cfg.hist_bins);
        for (std::size_t k = 1; k < present.size(); ++k) {
            FeatureVector cur =
                color_histogram(clip.frames[present[k]], W, H, box_mask(tracks, present[k], W, H), cfg.hist_bins);
            sum += cosine_similarity(prev, cur);
            prev = std::move(cur);
        }
        total += sum / static_cast<double>(present.size() - 1);
    }
    return total / static_cast<double>(subjects.size());
}

std::vector<std::string> prompt_subjects(const PromptSpec& prompt, const gate::GateConfig& gate_cfg) {
    if (!prompt.declared_subjects.empty()) return prompt.declared_subjects;
    return gate::extract_subjects(prompt.text, gate_cfg);
}

namespace {

double label_recall(const VideoClip& clip, const std::vector<std::string>& subjects, double threshold) {
    if (subjects.empty()) return 0.0;
    const double n = static_cast<double>(clip.frames.size());
    std::size_t hits = 0;
    for (const auto& label : subjects) {
        std::size_t present = 0;
        for (std::size_t f = 0; f < clip.frames.size(); ++f) {
            for (const auto& t : clip.tracks) {
                if (t.label == label && t.boxes[f]) {
                    ++present;
                    break;
                }
            }
        }
        if (n > 0 && static_cast<double>(present) >= threshold * n) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(subjects.size());
}

double overall_for(const VideoClip& clip, const PromptSpec& prompt, const std::vector<std::string>& subjects,
                   const MetricsConfig& cfg) {
    if (cfg.scorer == ScorerMode::External) return external_score(clip, prompt, cfg.external);
    return label_recall(clip, subjects, cfg.presence_threshold);
}

}  // namespace

double overall_consistency(const VideoClip& clip, const PromptSpec& prompt, const MetricsConfig& cfg,
                           const gate::GateConfig& gate_cfg) {
    return overall_for(clip, prompt, prompt_subjects(prompt, gate_cfg), cfg);
}

QualityReport evaluate_with_subjects(const VideoClip& clip, const PromptSpec& prompt,
                                     const std::vector<std::string>& subjects, const MetricsConfig& cfg) {
    cfg.validate();
    return QualityReport::from_scores(imaging_quality(clip, cfg), background_consistency(clip, cfg),
                                      subject_consistency(clip, subjects, cfg), overall_for(clip, prompt, subjects, cfg));
}

QualityReport evaluate(const VideoClip& clip, const PromptSpec& prompt, const MetricsConfig& cfg,
                       const gate::GateConfig& gate_cfg) {
    return evaluate_with_subjects(clip, prompt, prompt_subjects(prompt, gate_cfg), cfg);
}

}  // namespace emf::metrics
