// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/registry/registry.hpp"

#include <algorithm>
#include <limits>

#include "emf/error.hpp"

namespace emf::registry {

std::string_view to_string(RoutingStrategy s) {
    switch (s) {
        case RoutingStrategy::RoundRobin: return "round_robin";
        case RoutingStrategy::LeastLoaded: return "least_loaded";
        case RoutingStrategy::LatencyAware: return "latency_aware";
    }
    return "round_robin";
}

RoutingStrategy parse_routing_strategy(std::string_view text) {
    if (text == "round_robin") return RoutingStrategy::RoundRobin;
    if (text == "least_loaded") return RoutingStrategy::LeastLoaded;
    if (text == "latency_aware") return RoutingStrategy::LatencyAware;
    fail(ErrorCode::InvalidArgument, "unknown routing strategy '" + std::string(text) + "'");
}

std::string_view to_string(GateTopology g) { return g == GateTopology::SingleGate ? "single_gate" : "multi_gate"; }

GateTopology parse_gate_topology(std::string_view text) {
    if (text == "single_gate") return GateTopology::SingleGate;
    if (text == "multi_gate") return GateTopology::MultiGate;
    fail(ErrorCode::InvalidArgument, "unknown gate topology '" + std::string(text) + "'");
}

double estimated_service_ms(const ExpertDescriptor& e, std::uint64_t payload_bytes) {
    return static_cast<double>(e.link.latency_ms) +
           1000.0 * static_cast<double>(payload_bytes) / static_cast<double>(e.link.bandwidth_bps);
}

std::string gate_key(TaskKind kind, const RoutingPolicy& policy) {
    return policy.gate_mode == GateTopology::SingleGate ? std::string("*") : std::string(to_string(kind));
}

std::string select_expert(const SubTask& /*task*/, TaskKind kind, const RoutingPolicy& policy,
                          const RegistrySnapshot& snapshot, const GenerationParams& params,
                          const std::set<std::string>& exclude) {
    const std::uint64_t resolution = std::uint64_t{params.width} * params.height;
    std::vector<const ExpertDescriptor*> eligible;
    for (const auto& e : snapshot.experts) {
        if (exclude.count(e.expert_id) != 0) continue;
        if (e.max_resolution < resolution) continue;
        if (policy.gate_mode == GateTopology::MultiGate && e.task_kinds_served.count(kind) == 0) continue;
        eligible.push_back(&e);
    }
    if (eligible.empty()) {
        fail(ErrorCode::NoEligibleExpert, "no live expert can serve a " + std::string(to_string(kind)) + " subtask");
    }
    std::sort(eligible.begin(), eligible.end(),
              [](const auto* a, const auto* b) { return a->expert_id < b->expert_id; });

    switch (policy.strategy) {
        case RoutingStrategy::RoundRobin: {
            const auto it = snapshot.cursors.find(gate_key(kind, policy));
            if (it == snapshot.cursors.end()) return eligible.front()->expert_id;
            for (const auto* e : eligible) {
                if (e->expert_id > it->second) return e->expert_id;
            }
            return eligible.front()->expert_id;
        }
        case RoutingStrategy::LeastLoaded: {
            const auto* best = eligible.front();
            for (const auto* e : eligible) {
                if (e->inflight < best->inflight) best = e;
            }
            return best->expert_id;
        }
        case RoutingStrategy::LatencyAware: {
            const std::uint64_t payload = params.raw_bytes();
            const auto* best = eligible.front();
            double best_ms = estimated_service_ms(*best, payload);
            for (const auto* e : eligible) {
                const double ms = estimated_service_ms(*e, payload);
                if (ms < best_ms) {
                    best = e;
                    best_ms = ms;
                }
            }
            return best->expert_id;
        }
    }
    return eligible.front()->expert_id;
}

Registry::Registry(RegistryConfig cfg) : cfg_(cfg) {}

Millis Registry::now() const {
    return std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now().time_since_epoch());
}

void Registry::register_expert(ExpertDescriptor d) {
    if (d.expert_id.empty()) fail(ErrorCode::InvalidArgument, "expert_id is empty");
    d.link.validate();
    std::lock_guard lock(mu_);
    if (experts_.count(d.expert_id) != 0) {
        fail(ErrorCode::DuplicateExpert, "expert '" + d.expert_id + "' is already registered");
    }
    if (d.last_heartbeat.count() == 0) d.last_heartbeat = now();
    experts_.emplace(d.expert_id, std::move(d));
}

void Registry::unregister(const std::string& expert_id) {
    std::lock_guard lock(mu_);
    experts_.erase(expert_id);
}

bool Registry::contains(const std::string& expert_id) const {
    std::lock_guard lock(mu_);
    return experts_.count(expert_id) != 0;
}

std::vector<ExpertDescriptor> Registry::list() const {
    std::lock_guard lock(mu_);
    std::vector<ExpertDescriptor> out;
    out.reserve(experts_.size());
    for (const auto& [id, e] : experts_) out.push_back(e);
    return out;
}

RegistrySnapshot Registry::snapshot() const {
    std::lock_guard lock(mu_);
    RegistrySnapshot s;
    for (const auto& [id, e] : experts_) s.experts.push_back(e);
    s.cursors = cursors_;
    return s;
}

std::string Registry::acquire(const SubTask& task, TaskKind kind, const RoutingPolicy& policy,
                              const GenerationParams& params, const std::set<std::string>& exclude) {
    std::lock_guard lock(mu_);
    RegistrySnapshot s;
    for (const auto& [id, e] : experts_) s.experts.push_back(e);
    s.cursors = cursors_;
    auto id = select_expert(task, kind, policy, s, params, exclude);
    cursors_[gate_key(kind, policy)] = id;
    experts_.at(id).inflight += 1;
    return id;
}

void Registry::release(const std::string& expert_id, bool served) {
    std::lock_guard lock(mu_);
    auto it = experts_.find(expert_id);
    if (it == experts_.end()) return;  // evicted while the request was in flight
    if (it->second.inflight > 0) it->second.inflight -= 1;
    if (served) it->second.total_served += 1;
}

void Registry::heartbeat(const std::string& expert_id, Millis timestamp) {
    std::lock_guard lock(mu_);
    auto it = experts_.find(expert_id);
    if (it == experts_.end()) fail(ErrorCode::UnknownExpert, "heartbeat from unknown expert '" + expert_id + "'");
    it->second.last_heartbeat = std::max(it->second.last_heartbeat, timestamp);
}

std::vector<std::string> Registry::expire(Millis now) {
    const Millis window = cfg_.heartbeat_interval * cfg_.liveness_intervals;
    std::lock_guard lock(mu_);
    std::vector<std::string> evicted;
    for (auto it = experts_.begin(); it != experts_.end();) {
        if (now - it->second.last_heartbeat > window) {
            evicted.push_back(it->first);
            it = experts_.erase(it);
        } else {
            ++it;
        }
    }
    return evicted;
}

void Registry::validate_policy(const RoutingPolicy& policy, const std::set<TaskKind>& kinds_in_use) const {
    if (policy.gate_mode != GateTopology::MultiGate) return;
    std::lock_guard lock(mu_);
    for (TaskKind k : kinds_in_use) {
        const bool covered = std::any_of(experts_.begin(), experts_.end(),
                                         [k](const auto& kv) { return kv.second.task_kinds_served.count(k) != 0; });
        if (!covered) {
            fail(ErrorCode::NoEligibleExpert, "multi-gate policy has no expert for kind " + std::string(to_string(k)));
        }
    }
}

}  // namespace emf::registry
