// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emf/core/json.hpp"
#include "emf/core/types.hpp"
#include "emf/orchestrator/job.hpp"

namespace emf::orchestrator {

class Orchestrator;

struct ExperimentSpec {
    std::vector<PromptSpec> corpus;
    std::vector<PipelineMode> modes{PipelineMode::Correct};
    std::uint32_t trials = 1;
    std::uint64_t seed = 0;
    /// Jobs in flight at once; 1 runs one job at a time in corpus order.
    std::size_t lanes = 1;

    void validate() const;
};

struct ExperimentRow {
    PipelineMode mode = PipelineMode::Correct;
    std::size_t prompt_index = 0;
    std::uint32_t trial = 0;
    std::string prompt;
    std::uint64_t seed = 0;
    std::string kind;                       // dispatched plan kind
    std::vector<std::string> subjects;      // evaluation subjects
    std::vector<std::string> track_labels;  // distinct labels in the merged clip
    bool ok = false;
    QualityReport report;
    std::string failure;
};

struct ModeSummary {
    PipelineMode mode = PipelineMode::Correct;
    std::size_t jobs = 0;
    std::size_t failures = 0;
    QualityReport mean;  // over successful rows
};

/// Per-prompt metrics and per-mode means. Routing and timing are left out so
/// the report depends only on the corpus, modes, trials and seed.
struct ExperimentReport {
    std::uint64_t seed = 0;
    std::uint32_t trials = 1;
    std::vector<ExperimentRow> rows;  // mode order, then prompt, then trial
    std::vector<ModeSummary> summaries;

    const ModeSummary* summary(PipelineMode mode) const;
    Json to_json() const;
    /// Fixed-width table of the per-mode means plus drops against correct.
    std::string to_table() const;
};

/// Seed of one (prompt, trial) cell, the same across modes so modes share
/// generated sub-clips.
std::uint64_t cell_seed(std::uint64_t seed, std::size_t prompt_index, std::uint32_t trial);

ExperimentReport run_experiment(const ExperimentSpec& spec, Orchestrator& orchestrator);

/// One prompt per line; blank lines and lines starting with '#' are skipped.
/// "text | a, b" declares subjects a and b. Every prompt gets `params`.
std::vector<PromptSpec> parse_corpus(const std::string& text, const GenerationParams& params = {});
std::vector<PromptSpec> load_corpus(const std::filesystem::path& file, const GenerationParams& params = {});

void to_json(Json& j, const ExperimentSpec& s);
void from_json(const Json& j, ExperimentSpec& s);

}  // namespace emf::orchestrator
