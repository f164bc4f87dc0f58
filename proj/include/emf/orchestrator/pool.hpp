// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "emf/protocol/expert_client.hpp"
#include "emf/protocol/worker.hpp"
#include "emf/registry/registry.hpp"

namespace emf::orchestrator {

/// Live expert connections keyed by expert id, mirrored into a registry.
/// Heartbeats refresh liveness; a closed connection unregisters its expert.
class ExpertPool {
public:
    explicit ExpertPool(registry::Registry& registry);
    ~ExpertPool();
    ExpertPool(const ExpertPool&) = delete;
    ExpertPool& operator=(const ExpertPool&) = delete;

    /// Handshakes over an orchestrator-opened stream and registers the expert.
    /// Throws DuplicateExpert, ExpertTimeout, TransportClosed.
    std::string connect(std::unique_ptr<protocol::Stream> stream,
                        std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));
    /// Handshakes over a worker-opened stream (dial-in) and registers it.
    std::string accept(std::unique_ptr<protocol::Stream> stream,
                       std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));

    /// Throws UnknownExpert.
    std::shared_ptr<protocol::ExpertClient> get(const std::string& expert_id) const;
    void remove(const std::string& expert_id);
    /// Drops experts whose heartbeats lapsed; returns their ids.
    std::vector<std::string> expire();
    std::vector<std::string> ids() const;
    std::size_t size() const;

    registry::Registry& registry() { return registry_; }

private:
    std::string add(std::shared_ptr<protocol::ExpertClient> client);
    void on_heartbeat(const std::string& expert_id);
    void on_disconnect(const std::string& expert_id);
    void reap();

    registry::Registry& registry_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<protocol::ExpertClient>> clients_;
    // Connections that died on their own reader thread; released later from
    // another thread so a reader never joins itself.
    std::vector<std::shared_ptr<protocol::ExpertClient>> graveyard_;
};

struct LocalWorkerSpec {
    protocol::WorkerOptions options;
    protocol::ExpertBehavior behavior;  // empty = mock expert
};

/// In-process workers joined to a pool over loopback streams.
class LocalCluster {
public:
    LocalCluster(ExpertPool& pool, std::vector<LocalWorkerSpec> specs);
    ~LocalCluster();
    LocalCluster(const LocalCluster&) = delete;
    LocalCluster& operator=(const LocalCluster&) = delete;

    /// `count` mock workers "expert-1".."expert-N", default link, distinct
    /// link seeds, no real sleeping.
    static std::vector<LocalWorkerSpec> mock_specs(std::size_t count, double sleep_scale = 0.0);

    protocol::Worker& worker(std::size_t i) { return *workers_.at(i); }
    std::size_t size() const { return workers_.size(); }
    std::uint64_t total_invocations() const;
    /// Stops every worker and closes their streams.
    void shutdown();

private:
    ExpertPool& pool_;
    std::vector<std::unique_ptr<protocol::Worker>> workers_;
    std::vector<std::shared_ptr<protocol::Stream>> worker_streams_;
    std::vector<std::thread> threads_;
    bool shut_down_ = false;
};

}  // namespace emf::orchestrator
