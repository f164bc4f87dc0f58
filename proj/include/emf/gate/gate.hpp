// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emf/core/types.hpp"

namespace emf::gate {

enum class GateMode { RuleBased, ExternalLLM, LLMWithRuleFallback };

std::string_view to_string(GateMode mode);
GateMode parse_gate_mode(std::string_view text);

struct LLMEndpointConfig {
    std::string base_url;  // e.g. https://api.openai.com/v1
    std::string model_name = "gpt-3.5-turbo-0125";
    std::string api_key;   // falls back to $EMF_LLM_API_KEY when empty
    std::chrono::milliseconds timeout{10000};
    int max_retries = 2;

    void validate() const;
};

struct GateConfig {
    std::vector<std::string> temporal_markers{"and then", "then", "after that", "followed by", "afterwards"};
    std::vector<std::string> spatial_markers{"while", "meanwhile", "as", "at the same time"};
    // Leading phrases that frame the request rather than describe the scene.
    std::vector<std::string> framing_prefixes{"a video of", "a clip of", "video of"};
    GateMode mode = GateMode::RuleBased;
    std::optional<LLMEndpointConfig> llm;

    void validate() const;
};

/// Rule-based classification of already-canonical or raw text.
TaskKind classify_text(std::string_view text, const GateConfig& cfg = {});

/// Mode-aware classification. ExternalLLM asks the endpoint; the fallback
/// mode reverts to rules when the endpoint fails.
TaskKind classify(const PromptSpec& prompt, const GateConfig& cfg = {});

/// Rule-based decomposition into subtasks for a (possibly forced) kind.
/// Throws DegeneratePrompt when no non-empty clause remains.
DecompositionPlan decompose(const PromptSpec& prompt, TaskKind kind, const GateConfig& cfg = {});

/// classify + decompose honoring `cfg.mode`.
DecompositionPlan plan_prompt(const PromptSpec& prompt, const GateConfig& cfg = {});

/// Subject phrase of one clause: the words before the first word ending in
/// "ing", or the whole clause when there is none.
std::string clause_subject(const std::vector<std::string>& words);

/// Every subject phrase in `text`, split at all temporal and spatial markers,
/// first-occurrence order, deduplicated, empty phrases skipped.
std::vector<std::string> extract_subjects(std::string_view text, const GateConfig& cfg = {});

/// Builds a plan from clause texts with the standard slot layout: time
/// indices for Temporal/Atomic, base layer plus round-robin halves for Spatial.
DecompositionPlan build_plan(const PromptSpec& prompt, TaskKind kind, const std::vector<std::string>& clauses,
                             PlanOrigin origin, const GateConfig& cfg = {});

}  // namespace emf::gate
