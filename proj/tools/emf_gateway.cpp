// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "cli.hpp"
#include "emf/error.hpp"
#include "emf/gateway/service.hpp"

int main(int argc, char** argv) {
    using namespace emf;
    cli::block_shutdown_signals();
    CLI::App app{"emf-gateway: job API, expert registry and orchestrator"};
    std::string config;
    std::string listen;
    std::string worker_listen;
    std::string data_dir;
    std::vector<std::string> workers;
    std::size_t local_workers = 0;
    app.add_option("--config", config, "JSON config file");
    app.add_option("--listen", listen, "HTTP listen address host:port (default 127.0.0.1:8080)");
    app.add_option("--worker-listen", worker_listen, "host:port accepting worker dial-in connections");
    app.add_option("--data-dir", data_dir, "journal and clip directory (env EMF_DATA_DIR)");
    app.add_option("--worker", workers, "emf-worker address to connect to; repeatable");
    app.add_option("--local-workers", local_workers, "in-process mock experts to start");
    if (int rc = cli::parse_or_exit(app, argc, argv); rc >= 0) return rc;

    try {
        auto cfg = config.empty() ? gateway::default_service_config() : gateway::load_service_config(config);
        if (!listen.empty()) cfg.listen = listen;
        if (!worker_listen.empty()) cfg.worker_listen = worker_listen;
        if (!data_dir.empty()) cfg.data_dir = data_dir;
        for (const auto& w : workers) cfg.workers.push_back(gateway::WorkerEndpoint{w});
        if (local_workers > 0) cfg.local_workers = local_workers;

        gateway::Service service(cfg);
        service.start();
        std::cerr << Json{{"event", "gateway_listening"},
                          {"port", service.port()},
                          {"worker_port", service.worker_port()},
                          {"data_dir", cfg.data_dir}}
                         .dump()
                  << std::endl;
        cli::wait_for_shutdown_signal();
        service.stop();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitUser;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitServer;
    }
    return cli::kExitOk;
}
