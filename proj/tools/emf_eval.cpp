// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"emf-eval: score an EMV1 clip"};
    emf::cli::EvalArgs args;
    emf::cli::add_eval_options(app, args);
    if (int rc = emf::cli::parse_or_exit(app, argc, argv); rc >= 0) return rc;
    return emf::cli::run_eval(args);
}
