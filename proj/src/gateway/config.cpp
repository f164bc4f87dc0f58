// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/gateway/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "emf/error.hpp"

namespace emf::gateway {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& why) {
    fail(ErrorCode::InvalidArgument, "config " + path + ": " + why);
}

void only_keys(const Json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) bad(path, "must be an object");
    for (const auto& [k, v] : j.items()) {
        if (allowed.count(k) == 0) bad(path + "." + k, "unknown key");
    }
}

template <typename T>
void read(const Json& j, const char* key, T& out, const std::string& path) {
    if (!j.contains(key)) return;
    try {
        j.at(key).get_to(out);
    } catch (const Json::exception& e) {
        bad(path + "." + key, e.what());
    }
}

void read_ms(const Json& j, const char* key, std::chrono::milliseconds& out, const std::string& path) {
    std::int64_t ms = out.count();
    read(j, key, ms, path);
    out = std::chrono::milliseconds(ms);
}

void parse_gate(const Json& j, gate::GateConfig& g) {
    only_keys(j, "gate", {"mode", "temporal_markers", "spatial_markers", "framing_prefixes", "llm"});
    std::string mode(gate::to_string(g.mode));
    read(j, "mode", mode, "gate");
    g.mode = gate::parse_gate_mode(mode);
    read(j, "temporal_markers", g.temporal_markers, "gate");
    read(j, "spatial_markers", g.spatial_markers, "gate");
    read(j, "framing_prefixes", g.framing_prefixes, "gate");
    if (j.contains("llm")) {
        const auto& l = j.at("llm");
        only_keys(l, "gate.llm", {"base_url", "model_name", "api_key", "timeout_ms", "max_retries"});
        gate::LLMEndpointConfig c;
        read(l, "base_url", c.base_url, "gate.llm");
        read(l, "model_name", c.model_name, "gate.llm");
        read(l, "api_key", c.api_key, "gate.llm");
        read_ms(l, "timeout_ms", c.timeout, "gate.llm");
        read(l, "max_retries", c.max_retries, "gate.llm");
        g.llm = c;
    }
}

void parse_metrics(const Json& j, metrics::MetricsConfig& m) {
    only_keys(j, "metrics",
              {"hist_bins", "sharpness_constant", "clip_low", "clip_high", "presence_threshold", "scorer", "external"});
    read(j, "hist_bins", m.hist_bins, "metrics");
    read(j, "sharpness_constant", m.sharpness_constant, "metrics");
    read(j, "clip_low", m.clip_low, "metrics");
    read(j, "clip_high", m.clip_high, "metrics");
    read(j, "presence_threshold", m.presence_threshold, "metrics");
    std::string scorer(metrics::to_string(m.scorer));
    read(j, "scorer", scorer, "metrics");
    m.scorer = metrics::parse_scorer_mode(scorer);
    if (j.contains("external")) {
        const auto& e = j.at("external");
        only_keys(e, "metrics.external", {"endpoint", "timeout_ms"});
        read(e, "endpoint", m.external.endpoint, "metrics.external");
        read_ms(e, "timeout_ms", m.external.timeout, "metrics.external");
    }
}

void parse_orchestrator(const Json& j, orchestrator::OrchestratorConfig& o) {
    only_keys(j, "orchestrator",
              {"max_retries", "subtask_timeout_ms", "crossfade_frames", "max_concurrent_jobs", "cache_capacity",
               "payload_ceiling_bytes"});
    read(j, "max_retries", o.max_retries, "orchestrator");
    read_ms(j, "subtask_timeout_ms", o.subtask_timeout, "orchestrator");
    read(j, "crossfade_frames", o.crossfade_frames, "orchestrator");
    read(j, "max_concurrent_jobs", o.max_concurrent_jobs, "orchestrator");
    read(j, "cache_capacity", o.cache_capacity, "orchestrator");
    read(j, "payload_ceiling_bytes", o.payload_ceiling, "orchestrator");
}

}  // namespace

void ServiceConfig::validate() const {
    if (listen.empty()) fail(ErrorCode::InvalidArgument, "config listen: address is empty");
    if (registry.heartbeat_interval.count() <= 0) {
        fail(ErrorCode::InvalidArgument, "config registry.heartbeat_interval_ms must be positive");
    }
    if (registry.liveness_intervals < 1) {
        fail(ErrorCode::InvalidArgument, "config registry.liveness_intervals must be at least 1");
    }
    for (const auto& w : workers) {
        if (w.address.empty()) fail(ErrorCode::InvalidArgument, "config workers: address is empty");
    }
    orchestrator.validate();
}

registry::RoutingPolicy parse_policy(const Json& j) {
    only_keys(j, "policy", {"strategy", "gate_mode"});
    registry::RoutingPolicy p;
    if (j.contains("strategy")) p.strategy = registry::parse_routing_strategy(j.at("strategy").get<std::string>());
    if (j.contains("gate_mode")) p.gate_mode = registry::parse_gate_topology(j.at("gate_mode").get<std::string>());
    return p;
}

ServiceConfig parse_service_config(const Json& j) {
    only_keys(j, "root",
              {"data_dir", "listen", "worker_listen", "workers", "local_workers", "registry", "policy", "gate",
               "metrics", "orchestrator", "keying"});
    ServiceConfig c;
    read(j, "data_dir", c.data_dir, "root");
    read(j, "listen", c.listen, "root");
    read(j, "worker_listen", c.worker_listen, "root");
    read(j, "local_workers", c.local_workers, "root");
    if (j.contains("workers")) {
        if (!j.at("workers").is_array()) bad("workers", "must be an array");
        for (const auto& w : j.at("workers")) {
            only_keys(w, "workers[]", {"address"});
            WorkerEndpoint e;
            read(w, "address", e.address, "workers[]");
            c.workers.push_back(e);
        }
    }
    if (j.contains("registry")) {
        const auto& r = j.at("registry");
        only_keys(r, "registry", {"heartbeat_interval_ms", "liveness_intervals"});
        read_ms(r, "heartbeat_interval_ms", c.registry.heartbeat_interval, "registry");
        read(r, "liveness_intervals", c.registry.liveness_intervals, "registry");
    }
    try {
        if (j.contains("policy")) c.orchestrator.policy = parse_policy(j.at("policy"));
    } catch (const Json::exception& e) {
        bad("policy", e.what());
    }
    if (j.contains("gate")) parse_gate(j.at("gate"), c.orchestrator.gate);
    if (j.contains("metrics")) parse_metrics(j.at("metrics"), c.orchestrator.metrics);
    if (j.contains("orchestrator")) parse_orchestrator(j.at("orchestrator"), c.orchestrator);
    if (j.contains("keying")) {
        const auto& k = j.at("keying");
        only_keys(k, "keying", {"key_color", "tolerance"});
        read(k, "key_color", c.orchestrator.keying.key_color, "keying");
        read(k, "tolerance", c.orchestrator.keying.tolerance, "keying");
    }
    c.validate();
    return c;
}

ServiceConfig default_service_config() {
    ServiceConfig c;
    if (const char* dir = std::getenv("EMF_DATA_DIR")) c.data_dir = dir;
    return c;
}

ServiceConfig load_service_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) fail(ErrorCode::InvalidArgument, "cannot read config file " + file.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        fail(ErrorCode::InvalidArgument, "config file " + file.string() + " is not valid JSON: " + e.what(), e.byte);
    }
    ServiceConfig c = parse_service_config(j);
    if (c.data_dir.empty()) {
        if (const char* dir = std::getenv("EMF_DATA_DIR")) c.data_dir = dir;
    }
    return c;
}

Json to_json(const registry::ExpertDescriptor& d) {
    Json kinds = Json::array();
    for (TaskKind k : d.task_kinds_served) kinds.push_back(std::string(emf::to_string(k)));
    return Json{{"expert_id", d.expert_id},
                {"task_kinds", kinds},
                {"max_resolution", d.max_resolution},
                {"link",
                 {{"latency_ms", d.link.latency_ms},
                  {"bandwidth_bps", d.link.bandwidth_bps},
                  {"drop_probability", d.link.drop_probability}}},
                {"inflight", d.inflight},
                {"total_served", d.total_served},
                {"last_heartbeat_ms", d.last_heartbeat.count()}};
}

Json to_json(const registry::RoutingPolicy& p) {
    return Json{{"strategy", std::string(registry::to_string(p.strategy))},
                {"gate_mode", std::string(registry::to_string(p.gate_mode))}};
}

}  // namespace emf::gateway
