// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/orchestrator/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "emf/core/container.hpp"
#include "emf/error.hpp"
#include "emf/orchestrator/orchestrator.hpp"

namespace emf::orchestrator {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

Json row_json(const ExperimentRow& r) {
    Json j{{"mode", std::string(to_string(r.mode))},
           {"prompt_index", r.prompt_index},
           {"trial", r.trial},
           {"prompt", r.prompt},
           {"seed", r.seed},
           {"kind", r.kind},
           {"subjects", r.subjects},
           {"track_labels", r.track_labels},
           {"ok", r.ok}};
    if (r.ok) {
        j["report"] = r.report;
    } else {
        j["failure"] = r.failure;
    }
    return j;
}

}  // namespace

void ExperimentSpec::validate() const {
    if (corpus.empty()) fail(ErrorCode::InvalidArgument, "experiment corpus is empty");
    if (modes.empty()) fail(ErrorCode::InvalidArgument, "experiment needs at least one mode");
    if (trials < 1) fail(ErrorCode::InvalidArgument, "trials must be at least 1");
    if (lanes < 1) fail(ErrorCode::InvalidArgument, "lanes must be at least 1");
    for (const auto& p : corpus) p.validate();
}

std::uint64_t cell_seed(std::uint64_t seed, std::size_t prompt_index, std::uint32_t trial) {
    return splitmix64(splitmix64(seed ^ splitmix64(prompt_index)) ^ trial);
}

const ModeSummary* ExperimentReport::summary(PipelineMode mode) const {
    for (const auto& s : summaries) {
        if (s.mode == mode) return &s;
    }
    return nullptr;
}

Json ExperimentReport::to_json() const {
    Json rows_j = Json::array();
    for (const auto& r : rows) rows_j.push_back(row_json(r));
    Json sums = Json::array();
    for (const auto& s : summaries) {
        sums.push_back(Json{{"mode", std::string(emf::orchestrator::to_string(s.mode))},
                            {"jobs", s.jobs},
                            {"failures", s.failures},
                            {"mean", s.mean}});
    }
    return Json{{"seed", seed}, {"trials", trials}, {"summaries", sums}, {"rows", rows_j}};
}

std::string ExperimentReport::to_table() const {
    std::ostringstream out;
    out << pad_right("mode", 10) << pad_left("jobs", 6) << pad_left("failed", 8) << pad_left("imaging", 10)
        << pad_left("background", 12) << pad_left("subject", 10) << pad_left("overall", 10) << pad_left("average", 10)
        << "\n";
    for (const auto& s : summaries) {
        out << pad_right(std::string(emf::orchestrator::to_string(s.mode)), 10) << pad_left(std::to_string(s.jobs), 6)
            << pad_left(std::to_string(s.failures), 8) << pad_left(fixed(s.mean.imaging_quality, 4), 10)
            << pad_left(fixed(s.mean.background_consistency, 4), 12)
            << pad_left(fixed(s.mean.subject_consistency, 4), 10) << pad_left(fixed(s.mean.overall_consistency, 4), 10)
            << pad_left(fixed(s.mean.average_quality, 4), 10) << "\n";
    }
    if (const auto* correct = summary(PipelineMode::Correct)) {
        for (const auto& s : summaries) {
            if (s.mode == PipelineMode::Correct) continue;
            const double drop = correct->mean.average_quality - s.mean.average_quality;
            const double rel = correct->mean.average_quality > 0 ? 100.0 * drop / correct->mean.average_quality : 0.0;
            const double subj = correct->mean.subject_consistency - s.mean.subject_consistency;
            out << "correct - " << emf::orchestrator::to_string(s.mode) << ": average_quality "
                << fixed(100.0 * drop, 2) << " pp (" << fixed(rel, 2) << "% relative), subject_consistency "
                << fixed(100.0 * subj, 2) << " pp\n";
        }
    }
    return out.str();
}

ExperimentReport run_experiment(const ExperimentSpec& spec, Orchestrator& orchestrator) {
    spec.validate();
    ExperimentReport report;
    report.seed = spec.seed;
    report.trials = spec.trials;
    for (PipelineMode mode : spec.modes) {
        for (std::size_t i = 0; i < spec.corpus.size(); ++i) {
            for (std::uint32_t t = 0; t < spec.trials; ++t) {
                ExperimentRow row;
                row.mode = mode;
                row.prompt_index = i;
                row.trial = t;
                row.prompt = spec.corpus[i].text;
                row.seed = cell_seed(spec.seed, i, t);
                report.rows.push_back(std::move(row));
            }
        }
    }

    auto run_row = [&](ExperimentRow& row) {
        PromptSpec prompt = spec.corpus[row.prompt_index];
        prompt.params.seed = row.seed;
        const JobRecord rec = orchestrator.run_job(prompt, row.mode);
        row.subjects = rec.subjects;
        if (rec.plan) row.kind = std::string(emf::to_string(rec.plan->kind));
        if (rec.status == JobStatus::Done && rec.report) {
            row.ok = true;
            row.report = *rec.report;
            const VideoClip clip = decode_clip(orchestrator.clip_bytes(rec));
            for (const auto& t : clip.tracks) {
                if (std::find(row.track_labels.begin(), row.track_labels.end(), t.label) == row.track_labels.end()) {
                    row.track_labels.push_back(t.label);
                }
            }
        } else {
            row.failure = rec.failure_reason;
        }
    };

    if (spec.lanes <= 1) {
        for (auto& row : report.rows) run_row(row);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> lanes;
        for (std::size_t l = 0; l < spec.lanes; ++l) {
            lanes.emplace_back([&] {
                for (std::size_t k = next++; k < report.rows.size(); k = next++) run_row(report.rows[k]);
            });
        }
        for (auto& t : lanes) t.join();
    }

    for (PipelineMode mode : spec.modes) {
        ModeSummary s;
        s.mode = mode;
        double sums[4] = {0, 0, 0, 0};
        std::size_t ok = 0;
        for (const auto& r : report.rows) {
            if (r.mode != mode) continue;
            ++s.jobs;
            if (!r.ok) {
                ++s.failures;
                continue;
            }
            ++ok;
            sums[0] += r.report.imaging_quality;
            sums[1] += r.report.background_consistency;
            sums[2] += r.report.subject_consistency;
            sums[3] += r.report.overall_consistency;
        }
        if (ok > 0) {
            const double n = static_cast<double>(ok);
            s.mean = QualityReport::from_scores(sums[0] / n, sums[1] / n, sums[2] / n, sums[3] / n);
        }
        report.summaries.push_back(s);
    }
    return report;
}

std::vector<PromptSpec> parse_corpus(const std::string& text, const GenerationParams& params) {
    std::vector<PromptSpec> out;
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        PromptSpec p;
        p.params = params;
        const auto bar = t.find('|');
        p.text = trim(t.substr(0, bar));
        if (bar != std::string::npos) {
            std::istringstream subjects(t.substr(bar + 1));
            std::string s;
            while (std::getline(subjects, s, ',')) {
                s = trim(s);
                if (!s.empty()) p.declared_subjects.push_back(s);
            }
        }
        try {
            p.validate();
        } catch (const Error& e) {
            fail(ErrorCode::InvalidArgument, std::string("corpus line ") + std::to_string(n) + ": " + e.what(), n);
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<PromptSpec> load_corpus(const std::filesystem::path& file, const GenerationParams& params) {
    std::ifstream in(file);
    if (!in) fail(ErrorCode::InvalidArgument, "cannot read corpus file " + file.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_corpus(text.str(), params);
}

void to_json(Json& j, const ExperimentSpec& s) {
    Json modes = Json::array();
    for (auto m : s.modes) modes.push_back(std::string(to_string(m)));
    j = Json{{"corpus", s.corpus}, {"modes", modes}, {"trials", s.trials}, {"seed", s.seed}, {"lanes", s.lanes}};
}

void from_json(const Json& j, ExperimentSpec& s) {
    j.at("corpus").get_to(s.corpus);
    s.modes.clear();
    if (j.contains("modes")) {
        for (const auto& m : j.at("modes")) s.modes.push_back(parse_pipeline_mode(m.get<std::string>()));
    } else {
        s.modes.push_back(parse_pipeline_mode(j.value("mode", std::string("correct"))));
    }
    s.trials = j.value("trials", 1u);
    s.seed = j.value("seed", std::uint64_t{0});
    s.lanes = j.value("lanes", std::size_t{1});
}

}  // namespace emf::orchestrator
