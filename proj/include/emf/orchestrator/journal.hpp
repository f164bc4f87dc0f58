// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "emf/orchestrator/job.hpp"

namespace emf::orchestrator {

struct JournalScan {
    std::map<std::string, JobRecord> records;  // latest line per job wins
    std::vector<std::size_t> corrupt_lines;    // 1-based
};

struct JobFilter {
    std::optional<JobStatus> status;
    std::size_t offset = 0;
    std::size_t limit = 100;
};

struct JobPage {
    std::vector<JobRecord> jobs;  // ordered by created_at, then job_id
    std::size_t total = 0;        // matches before paging
};

/// Append-only job journal (`jobs.log`, one JSON record per line) plus a
/// content-addressed clip store (`clips/<sha256>.emv`). An empty data_dir
/// keeps everything in memory.
class Journal {
public:
    explicit Journal(std::filesystem::path data_dir = {});

    /// Reads the journal file leniently; corrupt lines are skipped.
    static JournalScan scan(const std::filesystem::path& journal_file);
    /// As scan(), but throws CorruptJournal at the first bad line.
    static void check(const std::filesystem::path& journal_file);

    void persist(const JobRecord& record);
    /// Throws UnknownJob.
    JobRecord load(const std::string& job_id) const;
    bool contains(const std::string& job_id) const;
    JobPage list_jobs(const JobFilter& filter = {}) const;

    /// Stores container bytes, returns the reference "clips/<sha256>.emv".
    std::string store_clip(const std::vector<std::uint8_t>& container);
    /// Throws UnknownJob when the reference is not stored.
    std::vector<std::uint8_t> read_clip(const std::string& ref) const;

    const std::filesystem::path& data_dir() const { return dir_; }
    std::filesystem::path journal_file() const { return dir_ / "jobs.log"; }
    bool in_memory() const { return dir_.empty(); }
    /// Line numbers skipped when the journal was opened.
    const std::vector<std::size_t>& corrupt_lines() const { return corrupt_lines_; }

private:
    std::filesystem::path dir_;
    mutable std::mutex mu_;
    std::map<std::string, JobRecord> records_;
    std::map<std::string, std::vector<std::uint8_t>> memory_clips_;
    std::vector<std::size_t> corrupt_lines_;
};

}  // namespace emf::orchestrator
