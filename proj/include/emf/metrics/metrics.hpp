// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "emf/core/types.hpp"
#include "emf/gate/gate.hpp"

namespace emf::metrics {

enum class ScorerMode { OracleLabels, External };

std::string_view to_string(ScorerMode mode);
ScorerMode parse_scorer_mode(std::string_view text);

struct ExternalScorerConfig {
    std::string endpoint;  // http(s)://host:port/path
    std::chrono::milliseconds timeout{10000};
};

struct MetricsConfig {
    std::uint32_t hist_bins = 8;
    double sharpness_constant = 100.0;
    std::uint8_t clip_low = 0;
    std::uint8_t clip_high = 255;
    double presence_threshold = 0.5;
    ScorerMode scorer = ScorerMode::OracleLabels;
    ExternalScorerConfig external;

    void validate() const;
};

/// Per-channel histograms (R, G, B), each L1-normalized; 3 * bins values.
using FeatureVector = std::vector<double>;

/// Histogram over the pixels where `mask` is non-zero (all pixels if empty).
/// An empty region yields the uniform histogram.
FeatureVector color_histogram(const Frame& frame, std::uint32_t width, std::uint32_t height,
                              const std::vector<std::uint8_t>& mask, std::uint32_t bins = 8);

/// Cosine similarity clamped to [0, 1].
double cosine_similarity(const FeatureVector& a, const FeatureVector& b);

/// Population variance of the 4-neighbour Laplacian over the interior of
/// the grayscale frame; 0 when the frame has no interior.
double laplacian_variance(const Frame& frame, std::uint32_t width, std::uint32_t height);

double imaging_quality(const VideoClip& clip, const MetricsConfig& cfg = {});

/// Throws TooFewFrames below two frames.
double background_consistency(const VideoClip& clip, const MetricsConfig& cfg = {});

double subject_consistency(const VideoClip& clip, const std::vector<std::string>& subjects,
                           const MetricsConfig& cfg = {});

/// Declared subjects if any, otherwise the gate's extraction from the text.
std::vector<std::string> prompt_subjects(const PromptSpec& prompt, const gate::GateConfig& gate_cfg = {});

/// External mode throws ScorerUnavailable when the endpoint fails.
double overall_consistency(const VideoClip& clip, const PromptSpec& prompt, const MetricsConfig& cfg = {},
                           const gate::GateConfig& gate_cfg = {});

QualityReport evaluate(const VideoClip& clip, const PromptSpec& prompt, const MetricsConfig& cfg = {},
                       const gate::GateConfig& gate_cfg = {});

/// As evaluate, with the subject list supplied by the caller.
QualityReport evaluate_with_subjects(const VideoClip& clip, const PromptSpec& prompt,
                                     const std::vector<std::string>& subjects, const MetricsConfig& cfg = {});

}  // namespace emf::metrics
