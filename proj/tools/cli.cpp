// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <iterator>
#include <thread>

#include "emf/core/container.hpp"
#include "emf/core/json.hpp"
#include "emf/error.hpp"
#include "emf/gateway/config.hpp"
#include "emf/metrics/metrics.hpp"
#include "emf/protocol/mock_expert.hpp"
#include "emf/protocol/transport.hpp"
#include "emf/protocol/worker.hpp"

namespace emf::cli {

namespace {

sigset_t shutdown_set() {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    return set;
}

}  // namespace

void block_shutdown_signals() {
    sigset_t set = shutdown_set();
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    std::signal(SIGPIPE, SIG_IGN);
}

void wait_for_shutdown_signal() {
    sigset_t set = shutdown_set();
    int sig = 0;
    sigwait(&set, &sig);
}

int parse_or_exit(CLI::App& app, int argc, char** argv) {
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUser;
    }
    return -1;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        const auto b = cur.find_first_not_of(' ');
        const auto e = cur.find_last_not_of(' ');
        if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
        cur.clear();
    };
    for (char c : text) {
        if (c == ',') {
            flush();
        } else {
            cur.push_back(c);
        }
    }
    flush();
    return out;
}

void add_worker_options(CLI::App& app, WorkerArgs& a) {
    app.add_option("--listen", a.listen, "host:port to accept orchestrator connections on");
    app.add_option("--connect", a.connect, "gateway worker listener (host:port) to dial into");
    app.add_option("--expert-id", a.expert_id, "expert identity")->required();
    app.add_option("--kinds", a.kinds, "comma list of task kinds served")->capture_default_str();
    app.add_option("--latency-ms", a.latency_ms, "simulated link latency")->capture_default_str();
    app.add_option("--bandwidth-bps", a.bandwidth_bps, "simulated link bandwidth, bytes/s")->capture_default_str();
    app.add_option("--drop", a.drop, "per-message drop probability in [0,1]")->capture_default_str();
    app.add_option("--seed", a.seed, "link simulator seed")->capture_default_str();
    app.add_option("--heartbeat-ms", a.heartbeat_ms, "heartbeat interval")->capture_default_str();
    app.add_option("--max-resolution", a.max_resolution, "largest width*height served")->capture_default_str();
    app.add_option("--sleep-scale", a.sleep_scale, "wall-clock ms slept per simulated ms")->capture_default_str();
}

int run_worker(const WorkerArgs& a) {
    if (a.listen.empty() == a.connect.empty()) {
        std::cerr << "error: give exactly one of --listen or --connect\n";
        return kExitUser;
    }
    protocol::WorkerOptions opts;
    try {
        opts.capabilities.expert_id = a.expert_id;
        opts.capabilities.task_kinds.clear();
        for (const auto& k : split_list(a.kinds)) opts.capabilities.task_kinds.insert(parse_task_kind(k));
        if (opts.capabilities.task_kinds.empty()) fail(ErrorCode::InvalidArgument, "--kinds is empty");
        opts.capabilities.max_resolution = a.max_resolution;
        opts.link.latency_ms = a.latency_ms;
        opts.link.bandwidth_bps = a.bandwidth_bps;
        opts.link.drop_probability = a.drop;
        opts.link.seed = a.seed;
        opts.link.validate();
        opts.heartbeat_interval = std::chrono::milliseconds(a.heartbeat_ms);
        opts.sleep_scale = a.sleep_scale;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUser;
    }
    protocol::Worker worker(opts, [](const std::string& p, const GenerationParams& params) {
        return protocol::mock_generate(p, params);
    });

    if (!a.listen.empty()) {
        std::unique_ptr<protocol::TcpListener> listener;
        try {
            listener = std::make_unique<protocol::TcpListener>(protocol::parse_host_port(a.listen));
        } catch (const Error& e) {
            std::cerr << "error: --listen " << a.listen << ": " << e.what() << "\n";
            return kExitUser;
        }
        std::cerr << Json{{"event", "worker_listening"}, {"expert_id", a.expert_id}, {"port", listener->port()}}.dump()
                  << std::endl;
        std::thread serving([&] { protocol::run_worker(*listener, worker); });
        wait_for_shutdown_signal();
        worker.stop();
        listener->close();
        serving.join();
        return kExitOk;
    }

    std::mutex mu;
    std::shared_ptr<protocol::Stream> current;
    std::thread dialing([&] {
        auto backoff = std::chrono::milliseconds(200);
        while (!worker.stopped()) {
            try {
                std::shared_ptr<protocol::Stream> s(
                    protocol::tcp_connect(protocol::parse_host_port(a.connect), std::chrono::milliseconds(5000)));
                {
                    std::lock_guard lock(mu);
                    current = s;
                }
                std::cerr << Json{{"event", "worker_connected"}, {"expert_id", a.expert_id}, {"gateway", a.connect}}.dump()
                          << std::endl;
                backoff = std::chrono::milliseconds(200);
                worker.serve_dial_in(*s);
            } catch (const Error& e) {
                std::cerr << Json{{"event", "worker_connect_failed"}, {"reason", e.what()}}.dump() << std::endl;
            }
            if (worker.stopped()) break;
            std::this_thread::sleep_for(backoff);
            backoff = std::min(backoff * 2, std::chrono::milliseconds(5000));
        }
    });
    wait_for_shutdown_signal();
    worker.stop();
    {
        std::lock_guard lock(mu);
        if (current) current->close();
    }
    dialing.join();
    return kExitOk;
}

void add_eval_options(CLI::App& app, EvalArgs& a) {
    app.add_option("clip", a.clip, "EMV1 container file")->required();
    app.add_option("--prompt", a.prompt, "prompt the clip was generated for")->required();
    app.add_option("--subjects", a.subjects, "comma list of subjects (default: extracted from the prompt)");
    app.add_option("--config", a.config, "service config file for metric and gate settings");
}

int run_eval(const EvalArgs& a) {
    std::ifstream in(a.clip, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot read clip file " << a.clip << "\n";
        return kExitUser;
    }
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        const auto cfg = a.config.empty() ? gateway::default_service_config() : gateway::load_service_config(a.config);
        const VideoClip clip = decode_clip(bytes);
        PromptSpec prompt;
        prompt.text = a.prompt;
        prompt.declared_subjects = split_list(a.subjects);
        prompt.validate();
        const auto subjects = metrics::prompt_subjects(prompt, cfg.orchestrator.gate);
        const auto report = metrics::evaluate_with_subjects(clip, prompt, subjects, cfg.orchestrator.metrics);
        std::cout << Json{{"subjects", subjects}, {"report", report}}.dump(2) << "\n";
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::ScorerUnavailable ? kExitServer : kExitUser;
    }
}

}  // namespace emf::cli
