// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "emf/core/json.hpp"
#include "emf/gateway/config.hpp"
#include "emf/orchestrator/experiment.hpp"
#include "emf/orchestrator/journal.hpp"
#include "emf/orchestrator/orchestrator.hpp"
#include "emf/orchestrator/pool.hpp"
#include "emf/protocol/transport.hpp"
#include "emf/registry/registry.hpp"

namespace httplib {
class Server;
}

namespace emf::gateway {

/// Error body of every non-2xx response. Codes: invalid_body, unknown_job,
/// unknown_experiment, wrong_state, no_eligible_expert, not_found, internal.
struct ApiError {
    int http_status = 500;
    std::string code = "internal";
    std::string message;
    Json detail = Json::object();

    Json to_json() const;
};

/// Parsed POST /v1/jobs body. Throws ApiError (400).
struct JobRequest {
    PromptSpec prompt;
    orchestrator::PipelineMode mode = orchestrator::PipelineMode::Correct;
    std::optional<registry::RoutingPolicy> policy;
};
JobRequest parse_job_request(const Json& body);

/// Parsed POST /v1/experiments body. Corpus entries are strings or
/// {text, subjects?, params?} objects. Throws ApiError (400).
orchestrator::ExperimentSpec parse_experiment_request(const Json& body);

/// One gateway process: registry, expert pool, journal, orchestrator, the
/// HTTP API, the worker dial-in listener and the liveness sweeper.
class Service {
public:
    explicit Service(ServiceConfig cfg);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Connects configured workers, starts local workers and binds the
    /// listeners. Throws InvalidArgument when a listener cannot bind.
    void start();
    void stop();
    /// Blocks until stop() is called from another thread.
    void wait();

    std::uint16_t port() const { return port_; }
    std::uint16_t worker_port() const;

    registry::Registry& registry() { return registry_; }
    orchestrator::ExpertPool& pool() { return *pool_; }
    orchestrator::Journal& journal() { return *journal_; }
    orchestrator::Orchestrator& orchestrator() { return *orchestrator_; }
    const ServiceConfig& config() const { return cfg_; }

private:
    struct ExperimentState {
        std::string status = "running";  // running | done | failed
        std::optional<orchestrator::ExperimentReport> report;
        std::string failure;
    };

    void install_routes();
    void dial_in_loop();
    void sweep_loop();
    std::string submit_idempotent(const std::string& key, const JobRequest& req);

    ServiceConfig cfg_;
    registry::Registry registry_;
    std::unique_ptr<orchestrator::ExpertPool> pool_;
    std::unique_ptr<orchestrator::Journal> journal_;
    std::unique_ptr<orchestrator::Orchestrator> orchestrator_;
    std::unique_ptr<orchestrator::LocalCluster> local_;
    std::unique_ptr<httplib::Server> http_;
    std::unique_ptr<protocol::TcpListener> worker_listener_;
    std::uint16_t port_ = 0;

    std::thread http_thread_;
    std::thread dial_in_thread_;
    std::thread sweep_thread_;

    std::mutex mu_;
    std::condition_variable stop_cv_;
    bool started_ = false;
    bool stopped_ = false;
    std::map<std::string, std::string> idempotency_;
    std::map<std::string, ExperimentState> experiments_;
    std::vector<std::thread> experiment_threads_;
};

}  // namespace emf::gateway
