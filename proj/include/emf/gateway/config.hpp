// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "emf/core/json.hpp"
#include "emf/orchestrator/orchestrator.hpp"
#include "emf/registry/registry.hpp"

namespace emf::gateway {

struct WorkerEndpoint {
    std::string address;  // host:port of an emf-worker listener
};

/// Everything a gateway process needs. See docs/config.md for the schema.
struct ServiceConfig {
    std::string data_dir;         // empty = in-memory journal
    std::string listen = "127.0.0.1:8080";
    std::string worker_listen;    // dial-in listener, empty = disabled
    std::vector<WorkerEndpoint> workers;
    std::size_t local_workers = 0;  // in-process mock experts
    registry::RegistryConfig registry;
    orchestrator::OrchestratorConfig orchestrator;

    void validate() const;
};

/// Strict parse: unknown keys are rejected with their path in the message.
ServiceConfig parse_service_config(const Json& j);
/// Reads a JSON config file; `EMF_DATA_DIR` fills data_dir when the file
/// leaves it unset.
ServiceConfig load_service_config(const std::filesystem::path& file);
/// Defaults plus `EMF_DATA_DIR`.
ServiceConfig default_service_config();

Json to_json(const registry::ExpertDescriptor& d);
Json to_json(const registry::RoutingPolicy& p);
registry::RoutingPolicy parse_policy(const Json& j);

}  // namespace emf::gateway
