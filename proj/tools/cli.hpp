// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace emf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUser = 1;
inline constexpr int kExitServer = 2;

/// Blocks SIGINT/SIGTERM for every thread started afterwards; call first.
void block_shutdown_signals();
/// Waits for SIGINT or SIGTERM.
void wait_for_shutdown_signal();

/// Parses argv; returns an exit code when the program should stop now
/// (help or a bad flag), -1 to continue.
int parse_or_exit(CLI::App& app, int argc, char** argv);

struct WorkerArgs {
    std::string listen;
    std::string connect;
    std::string expert_id;
    std::string kinds = "atomic,temporal,spatial";
    std::uint64_t latency_ms = 20;
    std::uint64_t bandwidth_bps = 10'000'000;
    double drop = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t heartbeat_ms = 1000;
    std::uint64_t max_resolution = 1920u * 1080u;
    double sleep_scale = 1.0;
};
void add_worker_options(CLI::App& app, WorkerArgs& args);
int run_worker(const WorkerArgs& args);

struct EvalArgs {
    std::string clip;
    std::string prompt;
    std::string subjects;
    std::string config;
};
void add_eval_options(CLI::App& app, EvalArgs& args);
int run_eval(const EvalArgs& args);

std::vector<std::string> split_list(const std::string& text);

}  // namespace emf::cli
