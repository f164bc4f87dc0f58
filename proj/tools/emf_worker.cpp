// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

int main(int argc, char** argv) {
    emf::cli::block_shutdown_signals();
    CLI::App app{"emf-worker: mock edge expert speaking the EMF wire protocol"};
    emf::cli::WorkerArgs args;
    emf::cli::add_worker_options(app, args);
    if (int rc = emf::cli::parse_or_exit(app, argc, argv); rc >= 0) return rc;
    return emf::cli::run_worker(args);
}
