// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "emf/core/types.hpp"
#include "emf/protocol/link.hpp"

namespace emf::registry {

using Millis = std::chrono::milliseconds;

struct ExpertDescriptor {
    std::string expert_id;
    std::set<TaskKind> task_kinds_served{TaskKind::Atomic, TaskKind::Temporal, TaskKind::Spatial};
    std::uint64_t max_resolution = 1920u * 1080u;  // width * height
    protocol::LinkParams link;
    std::uint32_t inflight = 0;
    std::uint64_t total_served = 0;
    Millis last_heartbeat{0};

    bool operator==(const ExpertDescriptor&) const = default;
};

enum class RoutingStrategy { RoundRobin, LeastLoaded, LatencyAware };
enum class GateTopology { SingleGate, MultiGate };

std::string_view to_string(RoutingStrategy s);
RoutingStrategy parse_routing_strategy(std::string_view text);
std::string_view to_string(GateTopology g);
GateTopology parse_gate_topology(std::string_view text);

struct RoutingPolicy {
    RoutingStrategy strategy = RoutingStrategy::RoundRobin;
    GateTopology gate_mode = GateTopology::SingleGate;

    bool operator==(const RoutingPolicy&) const = default;
};

/// Everything selection depends on. `cursors` holds the last expert chosen by
/// each round-robin gate ("*" for the single gate, the kind name otherwise).
struct RegistrySnapshot {
    std::vector<ExpertDescriptor> experts;  // ordered by expert_id
    std::map<std::string, std::string> cursors;
};

struct RegistryConfig {
    Millis heartbeat_interval{1000};
    int liveness_intervals = 3;
};

/// Estimated service time: latency + payload / bandwidth, in milliseconds.
double estimated_service_ms(const ExpertDescriptor& e, std::uint64_t payload_bytes);

std::string gate_key(TaskKind kind, const RoutingPolicy& policy);

/// Pure selection over a snapshot. Throws NoEligibleExpert.
std::string select_expert(const SubTask& task, TaskKind kind, const RoutingPolicy& policy,
                          const RegistrySnapshot& snapshot, const GenerationParams& params,
                          const std::set<std::string>& exclude = {});

class Registry {
public:
    explicit Registry(RegistryConfig cfg = {});

    /// Throws DuplicateExpert. A zero last_heartbeat is replaced by now().
    void register_expert(ExpertDescriptor d);
    void unregister(const std::string& expert_id);
    bool contains(const std::string& expert_id) const;

    std::vector<ExpertDescriptor> list() const;
    RegistrySnapshot snapshot() const;

    /// Selects, advances the round-robin cursor and bumps inflight in one
    /// critical section.
    std::string acquire(const SubTask& task, TaskKind kind, const RoutingPolicy& policy,
                        const GenerationParams& params, const std::set<std::string>& exclude = {});
    void release(const std::string& expert_id, bool served);

    /// Throws UnknownExpert.
    void heartbeat(const std::string& expert_id, Millis timestamp);
    std::vector<std::string> expire(Millis now);

    /// MultiGate requires a live expert for every kind in use. Throws
    /// NoEligibleExpert naming the uncovered kind.
    void validate_policy(const RoutingPolicy& policy, const std::set<TaskKind>& kinds_in_use) const;

    Millis now() const;
    const RegistryConfig& config() const { return cfg_; }

private:
    RegistryConfig cfg_;
    mutable std::mutex mu_;
    std::map<std::string, ExpertDescriptor> experts_;
    std::map<std::string, std::string> cursors_;
};

}  // namespace emf::registry
