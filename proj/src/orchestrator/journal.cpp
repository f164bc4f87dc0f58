// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/orchestrator/journal.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "emf/core/hash.hpp"
#include "emf/error.hpp"

namespace emf::orchestrator {

namespace fs = std::filesystem;

namespace {

std::optional<JobRecord> parse_line(const std::string& line) {
    try {
        auto j = Json::parse(line);
        auto r = j.get<JobRecord>();
        if (r.job_id.empty()) return std::nullopt;
        return r;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

bool valid_clip_ref(const std::string& ref) {
    if (ref.size() != 6 + 64 + 4 || ref.rfind("clips/", 0) != 0 || ref.substr(70) != ".emv") return false;
    return std::all_of(ref.begin() + 6, ref.begin() + 70,
                       [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

}  // namespace

JournalScan Journal::scan(const fs::path& journal_file) {
    JournalScan out;
    std::ifstream in(journal_file);
    if (!in) return out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        if (auto r = parse_line(line)) {
            out.records[r->job_id] = std::move(*r);
        } else {
            out.corrupt_lines.push_back(n);
        }
    }
    return out;
}

void Journal::check(const fs::path& journal_file) {
    const auto s = scan(journal_file);
    if (!s.corrupt_lines.empty()) {
        fail(ErrorCode::CorruptJournal, "journal " + journal_file.string() + " has a corrupt record",
             s.corrupt_lines.front());
    }
}

Journal::Journal(fs::path data_dir) : dir_(std::move(data_dir)) {
    if (dir_.empty()) return;
    fs::create_directories(dir_ / "clips");
    auto s = scan(journal_file());
    records_ = std::move(s.records);
    corrupt_lines_ = std::move(s.corrupt_lines);
}

void Journal::persist(const JobRecord& record) {
    record.validate();
    std::lock_guard lock(mu_);
    if (!dir_.empty()) {
        // One write per record keeps lines whole under a crash between records.
        const std::string line = Json(record).dump() + "\n";
        std::ofstream out(journal_file(), std::ios::app | std::ios::binary);
        out.write(line.data(), static_cast<std::streamsize>(line.size()));
        out.flush();
        if (!out) fail(ErrorCode::InvalidArgument, "cannot append to " + journal_file().string());
    }
    records_[record.job_id] = record;
}

JobRecord Journal::load(const std::string& job_id) const {
    std::lock_guard lock(mu_);
    auto it = records_.find(job_id);
    if (it == records_.end()) fail(ErrorCode::UnknownJob, "no job with id '" + job_id + "'");
    return it->second;
}

bool Journal::contains(const std::string& job_id) const {
    std::lock_guard lock(mu_);
    return records_.count(job_id) != 0;
}

JobPage Journal::list_jobs(const JobFilter& filter) const {
    std::vector<JobRecord> all;
    {
        std::lock_guard lock(mu_);
        for (const auto& [id, r] : records_) {
            if (!filter.status || r.status == *filter.status) all.push_back(r);
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const JobRecord& a, const JobRecord& b) {
        return a.created_at_ms != b.created_at_ms ? a.created_at_ms < b.created_at_ms : a.job_id < b.job_id;
    });
    JobPage page;
    page.total = all.size();
    for (std::size_t i = filter.offset; i < all.size() && page.jobs.size() < filter.limit; ++i) {
        page.jobs.push_back(std::move(all[i]));
    }
    return page;
}

std::string Journal::store_clip(const std::vector<std::uint8_t>& container) {
    const std::string ref = "clips/" + sha256(container).hex() + ".emv";
    std::lock_guard lock(mu_);
    if (dir_.empty()) {
        memory_clips_.emplace(ref, container);
        return ref;
    }
    const fs::path target = dir_ / ref;
    if (fs::exists(target)) return ref;
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(container.data()), static_cast<std::streamsize>(container.size()));
        if (!out) fail(ErrorCode::InvalidArgument, "cannot write " + tmp.string());
    }
    fs::rename(tmp, target);
    return ref;
}

std::vector<std::uint8_t> Journal::read_clip(const std::string& ref) const {
    if (!valid_clip_ref(ref)) fail(ErrorCode::UnknownJob, "malformed clip reference '" + ref + "'");
    std::lock_guard lock(mu_);
    if (dir_.empty()) {
        auto it = memory_clips_.find(ref);
        if (it == memory_clips_.end()) fail(ErrorCode::UnknownJob, "no stored clip '" + ref + "'");
        return it->second;
    }
    std::ifstream in(dir_ / ref, std::ios::binary);
    if (!in) fail(ErrorCode::UnknownJob, "no stored clip '" + ref + "'");
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace emf::orchestrator
