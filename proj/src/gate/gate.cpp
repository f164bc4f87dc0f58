// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/gate/gate.hpp"

#include <algorithm>
#include <cctype>

#include "emf/core/canonical.hpp"
#include "emf/error.hpp"
#include "emf/gate/llm_client.hpp"

namespace emf::gate {

namespace {

using Words = std::vector<std::string>;

struct Span {
    std::size_t begin;
    std::size_t end;
};

std::vector<Words> marker_words(const std::vector<std::string>& markers) {
    std::vector<Words> out;
    for (const auto& m : markers) {
        auto w = split_words(canonicalize_prompt(m));
        if (!w.empty()) out.push_back(std::move(w));
    }
    // Longest first; ties resolved lexicographically so matching is stable.
    std::sort(out.begin(), out.end(), [](const Words& a, const Words& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a < b;
    });
    return out;
}

bool matches_at(const Words& words, std::size_t i, const Words& marker) {
    if (i + marker.size() > words.size()) return false;
    return std::equal(marker.begin(), marker.end(), words.begin() + static_cast<std::ptrdiff_t>(i));
}

/// Marker occurrences that separate two non-empty word runs.
std::vector<Span> find_separators(const Words& words, const std::vector<Words>& markers) {
    std::vector<Span> hits;
    std::size_t i = 0;
    while (i < words.size()) {
        bool matched = false;
        for (const auto& m : markers) {
            if (i > 0 && i + m.size() < words.size() && matches_at(words, i, m)) {
                hits.push_back({i, i + m.size()});
                i += m.size();
                matched = true;
                break;
            }
        }
        if (!matched) ++i;
    }
    return hits;
}

std::vector<Words> split_at(const Words& words, const std::vector<Span>& seps) {
    std::vector<Words> clauses;
    std::size_t start = 0;
    for (const auto& s : seps) {
        clauses.emplace_back(words.begin() + static_cast<std::ptrdiff_t>(start),
                             words.begin() + static_cast<std::ptrdiff_t>(s.begin));
        start = s.end;
    }
    clauses.emplace_back(words.begin() + static_cast<std::ptrdiff_t>(start), words.end());
    std::erase_if(clauses, [](const Words& c) { return c.empty(); });
    return clauses;
}

Words strip_framing(Words words, const GateConfig& cfg) {
    for (const auto& prefix : marker_words(cfg.framing_prefixes)) {
        if (matches_at(words, 0, prefix)) {
            words.erase(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(prefix.size()));
            break;
        }
    }
    return words;
}

std::string join(const Words& words) {
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out.push_back(' ');
        out += w;
    }
    return out;
}

bool ends_with_ing(const std::string& w) { return w.size() >= 3 && w.compare(w.size() - 3, 3, "ing") == 0; }

bool contains_phrase(const Words& clause, const std::string& phrase) {
    const auto needle = split_words(canonicalize_prompt(phrase));
    if (needle.empty()) return false;
    for (std::size_t i = 0; i + needle.size() <= clause.size(); ++i) {
        if (matches_at(clause, i, needle)) return true;
    }
    return false;
}

void require_lowercase_markers(const std::vector<std::string>& markers, const char* name) {
    if (markers.empty()) {
        fail(ErrorCode::InvalidArgument, std::string("gate ") + name + " list is empty");
    }
    for (const auto& m : markers) {
        if (m.empty() || std::any_of(m.begin(), m.end(), [](unsigned char c) { return std::isupper(c) != 0; })) {
            fail(ErrorCode::InvalidArgument, std::string("gate ") + name + " entry '" + m + "' must be non-empty lowercase");
        }
    }
}

}  // namespace

std::string_view to_string(GateMode mode) {
    switch (mode) {
        case GateMode::RuleBased: return "rule_based";
        case GateMode::ExternalLLM: return "external_llm";
        case GateMode::LLMWithRuleFallback: return "llm_with_rule_fallback";
    }
    return "rule_based";
}

GateMode parse_gate_mode(std::string_view text) {
    if (text == "rule_based") return GateMode::RuleBased;
    if (text == "external_llm") return GateMode::ExternalLLM;
    if (text == "llm_with_rule_fallback") return GateMode::LLMWithRuleFallback;
    fail(ErrorCode::InvalidArgument, "unknown gate mode '" + std::string(text) + "'");
}

void LLMEndpointConfig::validate() const {
    if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
        fail(ErrorCode::InvalidArgument, "llm.base_url must start with http:// or https://");
    }
    if (timeout.count() <= 0) fail(ErrorCode::InvalidArgument, "llm.timeout must be positive");
    if (max_retries < 0) fail(ErrorCode::InvalidArgument, "llm.max_retries must be non-negative");
}

void GateConfig::validate() const {
    require_lowercase_markers(temporal_markers, "temporal_markers");
    require_lowercase_markers(spatial_markers, "spatial_markers");
    if (mode != GateMode::RuleBased) {
        if (!llm) fail(ErrorCode::InvalidArgument, "gate mode needs an llm endpoint");
        llm->validate();
    }
}

TaskKind classify_text(std::string_view text, const GateConfig& cfg) {
    const auto words = strip_framing(split_words(canonicalize_prompt(text)), cfg);
    if (!find_separators(words, marker_words(cfg.temporal_markers)).empty()) return TaskKind::Temporal;
    if (!find_separators(words, marker_words(cfg.spatial_markers)).empty()) return TaskKind::Spatial;
    return TaskKind::Atomic;
}

TaskKind classify(const PromptSpec& prompt, const GateConfig& cfg) {
    if (cfg.mode == GateMode::RuleBased) return classify_text(prompt.text, cfg);
    return plan_prompt(prompt, cfg).kind;
}

std::string clause_subject(const std::vector<std::string>& words) {
    Words subject;
    for (const auto& w : words) {
        if (ends_with_ing(w)) break;
        subject.push_back(w);
    }
    return join(subject);
}

std::vector<std::string> extract_subjects(std::string_view text, const GateConfig& cfg) {
    const auto words = strip_framing(split_words(canonicalize_prompt(text)), cfg);
    auto markers = marker_words(cfg.temporal_markers);
    auto spatial = marker_words(cfg.spatial_markers);
    markers.insert(markers.end(), spatial.begin(), spatial.end());
    std::stable_sort(markers.begin(), markers.end(), [](const Words& a, const Words& b) { return a.size() > b.size(); });

    std::vector<std::string> subjects;
    for (const auto& clause : split_at(words, find_separators(words, markers))) {
        auto s = clause_subject(clause);
        if (!s.empty() && std::find(subjects.begin(), subjects.end(), s) == subjects.end()) {
            subjects.push_back(std::move(s));
        }
    }
    return subjects;
}

DecompositionPlan build_plan(const PromptSpec& prompt, TaskKind kind, const std::vector<std::string>& clauses,
                             PlanOrigin origin, const GateConfig& cfg) {
    std::vector<Words> clause_words;
    for (const auto& c : clauses) {
        auto w = strip_framing(split_words(canonicalize_prompt(c)), cfg);
        if (!w.empty()) clause_words.push_back(std::move(w));
    }
    if (clause_words.empty()) {
        fail(ErrorCode::DegeneratePrompt, "prompt decomposes into zero non-empty clauses");
    }
    if (kind == TaskKind::Atomic && clause_words.size() != 1) {
        fail(ErrorCode::InvalidArgument, "atomic plan needs exactly one clause");
    }

    DecompositionPlan plan;
    plan.kind = kind;
    plan.origin = origin;
    for (std::size_t i = 0; i < clause_words.size(); ++i) {
        SubTask t;
        t.sub_prompt = join(clause_words[i]);
        if (kind == TaskKind::Spatial) {
            const Anchor anchor = i == 0 ? Anchor::Full : ((i - 1) % 2 == 0 ? Anchor::LeftHalf : Anchor::RightHalf);
            t.slot = LayerSlot{static_cast<std::uint32_t>(i), anchor};
        } else {
            t.slot = TimeSlot{static_cast<std::uint32_t>(i)};
        }
        for (const auto& declared : prompt.declared_subjects) {
            if (contains_phrase(clause_words[i], declared)) t.subjects.push_back(declared);
        }
        if (t.subjects.empty()) {
            auto s = clause_subject(clause_words[i]);
            if (!s.empty()) t.subjects.push_back(std::move(s));
        }
        t.cache_key = cache_key(t.sub_prompt, prompt.params);
        plan.subtasks.push_back(std::move(t));
    }
    plan.validate();
    return plan;
}

DecompositionPlan decompose(const PromptSpec& prompt, TaskKind kind, const GateConfig& cfg) {
    const auto words = strip_framing(split_words(canonicalize_prompt(prompt.text)), cfg);
    std::vector<Words> clauses;
    switch (kind) {
        case TaskKind::Atomic:
            clauses.push_back(words);
            break;
        case TaskKind::Temporal:
            clauses = split_at(words, find_separators(words, marker_words(cfg.temporal_markers)));
            break;
        case TaskKind::Spatial:
            clauses = split_at(words, find_separators(words, marker_words(cfg.spatial_markers)));
            break;
    }
    std::vector<std::string> texts;
    for (const auto& c : clauses) {
        if (!c.empty()) texts.push_back(join(c));
    }
    return build_plan(prompt, kind, texts, PlanOrigin::RuleBased, cfg);
}

DecompositionPlan plan_prompt(const PromptSpec& prompt, const GateConfig& cfg) {
    switch (cfg.mode) {
        case GateMode::RuleBased:
            return decompose(prompt, classify_text(prompt.text, cfg), cfg);
        case GateMode::ExternalLLM:
            if (!cfg.llm) fail(ErrorCode::GateUnavailable, "no llm endpoint configured");
            return llm_decompose(prompt, *cfg.llm);
        case GateMode::LLMWithRuleFallback:
            if (cfg.llm) {
                try {
                    return llm_decompose(prompt, *cfg.llm);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::GateUnavailable && e.code() != ErrorCode::MalformedLLMResponse) throw;
                }
            }
            return decompose(prompt, classify_text(prompt.text, cfg), cfg);
    }
    return decompose(prompt, classify_text(prompt.text, cfg), cfg);
}

}  // namespace emf::gate
