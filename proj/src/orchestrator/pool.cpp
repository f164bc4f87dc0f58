// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/orchestrator/pool.hpp"

#include "emf/error.hpp"
#include "emf/protocol/mock_expert.hpp"

namespace emf::orchestrator {

using protocol::ExpertClient;

ExpertPool::ExpertPool(registry::Registry& registry) : registry_(registry) {}

ExpertPool::~ExpertPool() {
    std::map<std::string, std::shared_ptr<ExpertClient>> clients;
    std::vector<std::shared_ptr<ExpertClient>> graveyard;
    {
        std::lock_guard lock(mu_);
        clients.swap(clients_);
        graveyard.swap(graveyard_);
    }
    for (auto& [id, c] : clients) {
        registry_.unregister(id);
        c->close();
    }
    // Destructors join the reader threads here, outside the lock.
}

std::string ExpertPool::connect(std::unique_ptr<protocol::Stream> stream, std::chrono::milliseconds timeout) {
    return add(ExpertClient::connect(
        std::move(stream), timeout, [this](const std::string& id) { on_heartbeat(id); },
        [this](const std::string& id) { on_disconnect(id); }));
}

std::string ExpertPool::accept(std::unique_ptr<protocol::Stream> stream, std::chrono::milliseconds timeout) {
    return add(ExpertClient::accept(
        std::move(stream), timeout, [this](const std::string& id) { on_heartbeat(id); },
        [this](const std::string& id) { on_disconnect(id); }));
}

std::string ExpertPool::add(std::shared_ptr<ExpertClient> client) {
    reap();
    const auto& caps = client->capabilities();
    registry::ExpertDescriptor d;
    d.expert_id = caps.expert_id;
    d.task_kinds_served = caps.task_kinds;
    d.max_resolution = caps.max_resolution;
    if (caps.link) d.link = *caps.link;
    try {
        std::lock_guard lock(mu_);
        registry_.register_expert(d);
        clients_[d.expert_id] = client;
    } catch (...) {
        client->close();
        throw;
    }
    if (!client->alive()) remove(d.expert_id);
    return d.expert_id;
}

std::shared_ptr<ExpertClient> ExpertPool::get(const std::string& expert_id) const {
    std::lock_guard lock(mu_);
    auto it = clients_.find(expert_id);
    if (it == clients_.end()) fail(ErrorCode::UnknownExpert, "no connection to expert '" + expert_id + "'");
    return it->second;
}

void ExpertPool::remove(const std::string& expert_id) {
    std::shared_ptr<ExpertClient> victim;
    {
        std::lock_guard lock(mu_);
        auto it = clients_.find(expert_id);
        if (it == clients_.end()) return;
        victim = std::move(it->second);
        clients_.erase(it);
        registry_.unregister(expert_id);
    }
    victim->close();
}

std::vector<std::string> ExpertPool::expire() {
    reap();
    auto gone = registry_.expire(registry_.now());
    for (const auto& id : gone) {
        std::shared_ptr<ExpertClient> victim;
        {
            std::lock_guard lock(mu_);
            auto it = clients_.find(id);
            if (it == clients_.end()) continue;
            victim = std::move(it->second);
            clients_.erase(it);
        }
        victim->close();
    }
    return gone;
}

std::vector<std::string> ExpertPool::ids() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [id, c] : clients_) out.push_back(id);
    return out;
}

std::size_t ExpertPool::size() const {
    std::lock_guard lock(mu_);
    return clients_.size();
}

void ExpertPool::on_heartbeat(const std::string& expert_id) {
    try {
        registry_.heartbeat(expert_id, registry_.now());
    } catch (const Error&) {
        // Heartbeat raced with registration or removal.
    }
}

void ExpertPool::on_disconnect(const std::string& expert_id) {
    std::lock_guard lock(mu_);
    auto it = clients_.find(expert_id);
    if (it == clients_.end() || it->second->alive()) return;
    graveyard_.push_back(std::move(it->second));
    clients_.erase(it);
    registry_.unregister(expert_id);
}

void ExpertPool::reap() {
    std::vector<std::shared_ptr<ExpertClient>> dead;
    {
        std::lock_guard lock(mu_);
        dead.swap(graveyard_);
    }
}

LocalCluster::LocalCluster(ExpertPool& pool, std::vector<LocalWorkerSpec> specs) : pool_(pool) {
    try {
        for (auto& spec : specs) {
            protocol::ExpertBehavior behavior = spec.behavior;
            if (!behavior) {
                behavior = [](const std::string& sub_prompt, const GenerationParams& params) {
                    return protocol::mock_generate(sub_prompt, params);
                };
            }
            auto worker = std::make_unique<protocol::Worker>(spec.options, std::move(behavior));
            auto [orchestrator_end, worker_end] = protocol::make_loopback_pair();
            std::shared_ptr<protocol::Stream> ws(std::move(worker_end));
            auto* w = worker.get();
            threads_.emplace_back([w, ws] { w->serve(*ws); });
            workers_.push_back(std::move(worker));
            worker_streams_.push_back(ws);
            pool_.connect(std::move(orchestrator_end));
        }
    } catch (...) {
        shutdown();
        throw;
    }
}

LocalCluster::~LocalCluster() { shutdown(); }

std::vector<LocalWorkerSpec> LocalCluster::mock_specs(std::size_t count, double sleep_scale) {
    std::vector<LocalWorkerSpec> out;
    for (std::size_t i = 0; i < count; ++i) {
        LocalWorkerSpec s;
        s.options.capabilities.expert_id = "expert-" + std::to_string(i + 1);
        s.options.link.seed = i + 1;
        s.options.sleep_scale = sleep_scale;
        out.push_back(std::move(s));
    }
    return out;
}

std::uint64_t LocalCluster::total_invocations() const {
    std::uint64_t n = 0;
    for (const auto& w : workers_) n += w->invocations();
    return n;
}

void LocalCluster::shutdown() {
    if (shut_down_) return;
    shut_down_ = true;
    for (auto& w : workers_) w->stop();
    for (auto& s : worker_streams_) s->close();
    for (auto& t : threads_) {
        if (t.joinable()) t.join();
    }
}

}  // namespace emf::orchestrator
