// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "cli.hpp"
#include "emf/core/container.hpp"
#include "emf/core/url.hpp"
#include "emf/error.hpp"
#include "emf/gateway/config.hpp"
#include "emf/orchestrator/experiment.hpp"
#include "emf/orchestrator/orchestrator.hpp"

using namespace emf;
using namespace emf::cli;

namespace {

struct Reply {
    int status = 0;
    std::string body;
    std::string content_type;
};

// Thrown for transport failures and non-2xx replies; carries the exit code.
struct CommandError {
    int exit_code;
    std::string message;
};

std::string default_server() {
    const char* env = std::getenv("EMF_SERVER");
    return env != nullptr ? env : "http://127.0.0.1:8080";
}

Reply http_call(const std::string& server, const std::string& method, const std::string& path, const std::string& body = "",
                const httplib::Headers& headers = {}) {
    const UrlParts url = split_url(server);
    httplib::Client client(url.origin);
    if (!client.is_valid()) throw CommandError{kExitUser, "--server " + server + " is not a valid URL"};
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(60, 0);
    const std::string full = url.path + path;
    httplib::Result res = method == "POST" ? client.Post(full, headers, body, "application/json") : client.Get(full, headers);
    if (!res) {
        throw CommandError{kExitServer, "cannot reach server " + server + ": " + httplib::to_string(res.error())};
    }
    Reply r{res->status, res->body, res->get_header_value("Content-Type")};
    if (r.status / 100 != 2) {
        std::string message = "HTTP " + std::to_string(r.status);
        try {
            const Json err = Json::parse(r.body).at("error");
            message = err.at("code").get<std::string>() + ": " + err.at("message").get<std::string>();
        } catch (const std::exception&) {
        }
        throw CommandError{r.status >= 500 ? kExitServer : kExitUser, message};
    }
    return r;
}

struct ParamArgs {
    std::uint32_t width = 64;
    std::uint32_t height = 64;
    std::uint32_t frames = 16;
    double fps = 8.0;
    std::uint64_t seed = 0;
};

void add_param_options(CLI::App& app, ParamArgs& p) {
    app.add_option("--width", p.width, "frame width in pixels")->capture_default_str();
    app.add_option("--height", p.height, "frame height in pixels")->capture_default_str();
    app.add_option("--frames", p.frames, "frames per sub-clip")->capture_default_str();
    app.add_option("--fps", p.fps, "frame rate")->capture_default_str();
}

GenerationParams to_params(const ParamArgs& p) {
    GenerationParams g;
    g.width = p.width;
    g.height = p.height;
    g.frame_count = p.frames;
    g.fps = p.fps;
    g.seed = p.seed;
    return g;
}

std::vector<orchestrator::PipelineMode> parse_modes(const std::string& text) {
    if (text == "all") {
        return {orchestrator::PipelineMode::Correct, orchestrator::PipelineMode::MismatchedMerge,
                orchestrator::PipelineMode::SingleDeviceBaseline};
    }
    std::vector<orchestrator::PipelineMode> out;
    for (const auto& m : split_list(text)) out.push_back(orchestrator::parse_pipeline_mode(m));
    if (out.empty()) fail(ErrorCode::InvalidArgument, "--mode is empty");
    return out;
}

int print_experiment(const Json& report_json, const std::string& table, const std::string& json_out) {
    std::cout << table;
    if (!json_out.empty()) {
        std::ofstream out(json_out, std::ios::binary | std::ios::trunc);
        out << report_json.dump(2) << "\n";
        if (!out) throw CommandError{kExitUser, "cannot write --json " + json_out};
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    block_shutdown_signals();
    CLI::App app{"emf: submit jobs, inspect results, run experiments, serve and score clips"};
    app.require_subcommand(1);
    std::string server = default_server();
    app.add_option("--server", server, "gateway base URL (env EMF_SERVER)")->capture_default_str();

    // submit
    auto* submit = app.add_subcommand("submit", "submit a prompt; prints the job id");
    std::string prompt_text;
    std::string subjects;
    std::string mode = "correct";
    std::string strategy;
    std::string topology;
    std::string idem_key;
    bool wait = false;
    ParamArgs params;
    submit->add_option("prompt", prompt_text, "prompt text")->required();
    submit->add_option("--subjects", subjects, "comma list of declared subjects");
    submit->add_option("--mode", mode, "correct, mismatch or single")->capture_default_str();
    submit->add_option("--strategy", strategy, "round_robin, least_loaded or latency_aware");
    submit->add_option("--gate-mode", topology, "single_gate or multi_gate");
    submit->add_option("--idempotency-key", idem_key, "resubmissions with the same key return the same job");
    submit->add_option("--seed", params.seed, "generation seed")->capture_default_str();
    submit->add_flag("--wait", wait, "poll until the job finishes and print its record");
    add_param_options(*submit, params);

    // status / fetch / experts
    auto* status = app.add_subcommand("status", "print a job record");
    std::string job_id;
    status->add_option("job_id", job_id, "job id")->required();
    auto* fetch = app.add_subcommand("fetch", "download a finished job's clip");
    std::string out_path;
    fetch->add_option("job_id", job_id, "job id")->required();
    fetch->add_option("-o,--output", out_path, "output file")->required();
    auto* experts = app.add_subcommand("experts", "list live experts");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "run a merge-strategy experiment and print the metric table");
    std::string exp_mode = "correct";
    std::string corpus;
    std::uint64_t exp_seed = 0;
    std::uint32_t trials = 1;
    std::size_t lanes = 1;
    std::size_t workers = 3;
    std::string json_out;
    std::string config;
    bool remote = false;
    ParamArgs exp_params;
    experiment->add_option("--mode", exp_mode, "correct, mismatch, single, a comma list, or all")->capture_default_str();
    experiment->add_option("--corpus", corpus, "corpus file, one prompt per line")->required();
    experiment->add_option("--seed", exp_seed, "experiment seed")->capture_default_str();
    experiment->add_option("--trials", trials, "trials per prompt")->capture_default_str();
    experiment->add_option("--lanes", lanes, "jobs in flight at once")->capture_default_str();
    experiment->add_option("--workers", workers, "in-process mock workers (local runs)")->capture_default_str();
    experiment->add_option("--json", json_out, "also write the full report as JSON");
    experiment->add_option("--config", config, "service config for gate, metric and routing settings");
    experiment->add_flag("--remote", remote, "run on the gateway at --server instead of in-process");
    add_param_options(*experiment, exp_params);

    // worker / eval
    auto* worker = app.add_subcommand("worker", "run a mock edge expert");
    WorkerArgs worker_args;
    add_worker_options(*worker, worker_args);
    auto* eval = app.add_subcommand("eval", "score a clip file");
    EvalArgs eval_args;
    add_eval_options(*eval, eval_args);

    if (int rc = parse_or_exit(app, argc, argv); rc >= 0) return rc;

    try {
        if (*worker) return run_worker(worker_args);
        if (*eval) return run_eval(eval_args);

        if (*submit) {
            if (prompt_text.find_first_not_of(" \t\r\n") == std::string::npos) {
                std::cerr << "error: prompt is empty; pass the prompt text as the first argument to submit\n";
                return kExitUser;
            }
            Json body{{"prompt", prompt_text},
                      {"params", to_params(params)},
                      {"mode", mode}};
            const auto subj = split_list(subjects);
            if (!subj.empty()) body["subjects"] = subj;
            if (!strategy.empty() || !topology.empty()) {
                Json policy = Json::object();
                if (!strategy.empty()) policy["strategy"] = strategy;
                if (!topology.empty()) policy["gate_mode"] = topology;
                body["policy"] = policy;
            }
            httplib::Headers headers;
            if (!idem_key.empty()) headers.emplace("Idempotency-Key", idem_key);
            const Reply r = http_call(server, "POST", "/v1/jobs", body.dump(), headers);
            const std::string id = Json::parse(r.body).at("job_id").get<std::string>();
            std::cout << id << "\n";
            if (!wait) return kExitOk;
            while (true) {
                const Json rec = Json::parse(http_call(server, "GET", "/v1/jobs/" + id).body);
                const auto st = rec.at("status").get<std::string>();
                if (st == "done" || st == "failed") {
                    std::cout << rec.dump(2) << "\n";
                    return st == "done" ? kExitOk : kExitServer;
                }
                std::this_thread::sleep_for(std::chrono::milliseconds(100));
            }
        }
        if (*status) {
            std::cout << Json::parse(http_call(server, "GET", "/v1/jobs/" + job_id).body).dump(2) << "\n";
            return kExitOk;
        }
        if (*fetch) {
            const Reply r = http_call(server, "GET", "/v1/jobs/" + job_id + "/video");
            std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
            out.write(r.body.data(), static_cast<std::streamsize>(r.body.size()));
            if (!out) {
                std::cerr << "error: cannot write -o " << out_path << "\n";
                return kExitUser;
            }
            std::cout << out_path << " (" << r.body.size() << " bytes)\n";
            return kExitOk;
        }
        if (*experts) {
            std::cout << Json::parse(http_call(server, "GET", "/v1/experts").body).dump(2) << "\n";
            return kExitOk;
        }
        if (*experiment) {
            orchestrator::ExperimentSpec spec;
            spec.modes = parse_modes(exp_mode);
            spec.corpus = orchestrator::load_corpus(corpus, to_params(exp_params));
            spec.seed = exp_seed;
            spec.trials = trials;
            spec.lanes = lanes;
            spec.validate();
            if (remote) {
                Json body = spec;
                const Reply r = http_call(server, "POST", "/v1/experiments", body.dump());
                const std::string id = Json::parse(r.body).at("experiment_id").get<std::string>();
                while (true) {
                    const Json st = Json::parse(http_call(server, "GET", "/v1/experiments/" + id).body);
                    const auto s = st.at("status").get<std::string>();
                    if (s == "done") return print_experiment(st.at("report"), st.at("table").get<std::string>(), json_out);
                    if (s == "failed") throw CommandError{kExitServer, "experiment failed: " + st.value("failure", "")};
                    std::this_thread::sleep_for(std::chrono::milliseconds(200));
                }
            }
            if (workers == 0) {
                std::cerr << "error: --workers must be at least 1\n";
                return kExitUser;
            }
            auto svc = config.empty() ? gateway::default_service_config() : gateway::load_service_config(config);
            registry::Registry reg(svc.registry);
            orchestrator::ExpertPool pool(reg);
            orchestrator::LocalCluster cluster(pool, orchestrator::LocalCluster::mock_specs(workers));
            orchestrator::Journal journal;  // experiments stay in memory
            orchestrator::Orchestrator orch(svc.orchestrator, pool, journal);
            const auto report = orchestrator::run_experiment(spec, orch);
            cluster.shutdown();
            return print_experiment(report.to_json(), report.to_table(), json_out);
        }
    } catch (const CommandError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.exit_code;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUser;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitServer;
    }
    return kExitUser;
}
