// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/registry/dedup_cache.hpp"

#include "emf/error.hpp"

namespace emf::registry {

DedupCache::Leader::Leader(DedupCache* cache, Digest key, std::shared_ptr<std::promise<ClipPtr>> promise)
    : cache_(cache), key_(key), promise_(std::move(promise)) {}

DedupCache::Leader::Leader(Leader&& other) noexcept
    : cache_(other.cache_), key_(other.key_), promise_(std::move(other.promise_)) {
    other.cache_ = nullptr;
}

DedupCache::Leader::~Leader() {
    if (cache_ != nullptr && promise_) {
        fail("leader abandoned the generation");
    }
}

void DedupCache::Leader::publish(ClipPtr clip) {
    if (cache_ == nullptr || !promise_) return;
    cache_->finish(key_, promise_, std::move(clip), nullptr);
    promise_.reset();
}

void DedupCache::Leader::fail(const std::string& reason) {
    if (cache_ == nullptr || !promise_) return;
    cache_->finish(key_, promise_, nullptr, &reason);
    promise_.reset();
}

DedupCache::DedupCache(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

DedupCache::Acquisition DedupCache::acquire_or_wait(const Digest& key) {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it != entries_.end()) {
        if (it->second.ready) {
            lru_.splice(lru_.begin(), lru_, it->second.lru);
        }
        return Follower{it->second.future, it->second.ready};
    }
    auto promise = std::make_shared<std::promise<ClipPtr>>();
    Entry e;
    e.future = promise->get_future().share();
    entries_.emplace(key, std::move(e));
    return Leader(this, key, std::move(promise));
}

void DedupCache::finish(const Digest& key, const std::shared_ptr<std::promise<ClipPtr>>& promise, ClipPtr clip,
                        const std::string* failure) {
    {
        std::lock_guard lock(mu_);
        auto it = entries_.find(key);
        if (failure != nullptr) {
            if (it != entries_.end() && !it->second.ready) entries_.erase(it);
        } else if (it != entries_.end()) {
            it->second.ready = true;
            lru_.push_front(key);
            it->second.lru = lru_.begin();
            while (lru_.size() > capacity_) {
                entries_.erase(lru_.back());
                lru_.pop_back();
            }
        }
    }
    // Followers are woken outside the lock.
    if (failure != nullptr) {
        promise->set_exception(std::make_exception_ptr(Error(ErrorCode::LeaderFailed, *failure)));
    } else {
        promise->set_value(std::move(clip));
    }
}

std::optional<ClipPtr> DedupCache::peek(const Digest& key) {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end() || !it->second.ready) return std::nullopt;
    return it->second.future.get();
}

std::size_t DedupCache::ready_count() const {
    std::lock_guard lock(mu_);
    return lru_.size();
}

std::size_t DedupCache::pending_count() const {
    std::lock_guard lock(mu_);
    return entries_.size() - lru_.size();
}

}  // namespace emf::registry
