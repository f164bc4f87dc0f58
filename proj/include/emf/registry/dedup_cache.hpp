// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <future>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>

#include "emf/core/hash.hpp"
#include "emf/core/types.hpp"

namespace emf::registry {

using ClipPtr = std::shared_ptr<const VideoClip>;

/// Single-flight cache of generated sub-clips keyed by subtask cache key.
/// The first requester of a key becomes the leader and must publish or fail;
/// everyone else waits on the leader's result. Ready entries are evicted in
/// least-recently-used order beyond `capacity`; pending entries never are.
class DedupCache {
public:
    class Leader {
    public:
        Leader(Leader&& other) noexcept;
        Leader& operator=(Leader&&) = delete;
        Leader(const Leader&) = delete;
        ~Leader();  // an unresolved leader fails its followers

        const Digest& key() const { return key_; }
        void publish(ClipPtr clip);
        void fail(const std::string& reason);

    private:
        friend class DedupCache;
        Leader(DedupCache* cache, Digest key, std::shared_ptr<std::promise<ClipPtr>> promise);

        DedupCache* cache_;
        Digest key_;
        std::shared_ptr<std::promise<ClipPtr>> promise_;
    };

    struct Follower {
        std::shared_future<ClipPtr> result;
        bool was_ready = false;

        /// Blocks until published; throws LeaderFailed.
        ClipPtr get() const { return result.get(); }
    };

    using Acquisition = std::variant<Leader, Follower>;

    explicit DedupCache(std::size_t capacity = 1024);

    Acquisition acquire_or_wait(const Digest& key);

    std::optional<ClipPtr> peek(const Digest& key);
    std::size_t ready_count() const;
    std::size_t pending_count() const;
    std::size_t capacity() const { return capacity_; }

private:
    struct Entry {
        std::shared_future<ClipPtr> future;
        bool ready = false;
        std::list<Digest>::iterator lru;
    };

    void finish(const Digest& key, const std::shared_ptr<std::promise<ClipPtr>>& promise, ClipPtr clip,
                const std::string* failure);

    std::size_t capacity_;
    mutable std::mutex mu_;
    std::unordered_map<Digest, Entry> entries_;
    std::list<Digest> lru_;  // front = most recent, ready entries only
};

}  // namespace emf::registry
