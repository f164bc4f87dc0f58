// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/gateway/service.hpp"

#include <httplib.h>

#include <cstdio>
#include <iostream>

#include "emf/error.hpp"
#include "emf/protocol/message.hpp"

namespace emf::gateway {

using orchestrator::JobStatus;

namespace {

ApiError api_error(int status, std::string code, std::string message, Json detail = Json::object()) {
    return ApiError{status, std::move(code), std::move(message), std::move(detail)};
}

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const ApiError& e) { send_json(res, e.http_status, e.to_json()); }

Json parse_body(const httplib::Request& req) {
    try {
        Json j = Json::parse(req.body);
        if (!j.is_object()) throw api_error(400, "invalid_body", "request body must be a JSON object");
        return j;
    } catch (const Json::parse_error& e) {
        throw api_error(400, "invalid_body", std::string("request body is not valid JSON: ") + e.what(),
                        Json{{"byte", e.byte}});
    }
}

GenerationParams parse_params(const Json& j) {
    GenerationParams p;
    if (!j.is_object()) throw api_error(400, "invalid_body", "params must be an object", Json{{"field", "params"}});
    for (const auto& [k, v] : j.items()) {
        if (k != "width" && k != "height" && k != "frame_count" && k != "fps" && k != "seed") {
            throw api_error(400, "invalid_body", "unknown params field '" + k + "'", Json{{"field", "params." + k}});
        }
    }
    try {
        p.width = j.value("width", p.width);
        p.height = j.value("height", p.height);
        p.frame_count = j.value("frame_count", p.frame_count);
        p.fps = j.value("fps", p.fps);
        p.seed = j.value("seed", p.seed);
    } catch (const Json::exception& e) {
        throw api_error(400, "invalid_body", std::string("params: ") + e.what(), Json{{"field", "params"}});
    }
    return p;
}

PromptSpec parse_prompt_fields(const Json& j, const char* text_key) {
    PromptSpec p;
    if (!j.contains(text_key) || !j.at(text_key).is_string()) {
        throw api_error(400, "invalid_body", std::string(text_key) + " must be a string", Json{{"field", text_key}});
    }
    p.text = j.at(text_key).get<std::string>();
    if (j.contains("params")) p.params = parse_params(j.at("params"));
    if (j.contains("subjects")) {
        const auto& s = j.at("subjects");
        if (!s.is_array() || !std::all_of(s.begin(), s.end(), [](const Json& v) { return v.is_string(); })) {
            throw api_error(400, "invalid_body", "subjects must be a list of strings", Json{{"field", "subjects"}});
        }
        p.declared_subjects = s.get<std::vector<std::string>>();
    }
    try {
        p.validate();
    } catch (const Error& e) {
        throw api_error(400, "invalid_body", e.what());
    }
    return p;
}

std::string path_param(const httplib::Request& req) { return req.matches.size() > 1 ? req.matches[1].str() : ""; }

}  // namespace

Json ApiError::to_json() const {
    return Json{{"error", {{"http_status", http_status}, {"code", code}, {"message", message}, {"detail", detail}}}};
}

JobRequest parse_job_request(const Json& body) {
    for (const auto& [k, v] : body.items()) {
        if (k != "prompt" && k != "params" && k != "subjects" && k != "policy" && k != "mode") {
            throw api_error(400, "invalid_body", "unknown field '" + k + "'", Json{{"field", k}});
        }
    }
    JobRequest r;
    r.prompt = parse_prompt_fields(body, "prompt");
    try {
        if (body.contains("mode")) r.mode = orchestrator::parse_pipeline_mode(body.at("mode").get<std::string>());
        if (body.contains("policy")) r.policy = parse_policy(body.at("policy"));
    } catch (const Error& e) {
        throw api_error(400, "invalid_body", e.what());
    } catch (const Json::exception& e) {
        throw api_error(400, "invalid_body", e.what());
    }
    return r;
}

orchestrator::ExperimentSpec parse_experiment_request(const Json& body) {
    for (const auto& [k, v] : body.items()) {
        if (k != "corpus" && k != "mode" && k != "modes" && k != "trials" && k != "seed" && k != "lanes" &&
            k != "params") {
            throw api_error(400, "invalid_body", "unknown field '" + k + "'", Json{{"field", k}});
        }
    }
    orchestrator::ExperimentSpec spec;
    const GenerationParams defaults = body.contains("params") ? parse_params(body.at("params")) : GenerationParams{};
    if (!body.contains("corpus") || !body.at("corpus").is_array()) {
        throw api_error(400, "invalid_body", "corpus must be a list", Json{{"field", "corpus"}});
    }
    for (const auto& item : body.at("corpus")) {
        if (item.is_string()) {
            PromptSpec p;
            p.text = item.get<std::string>();
            p.params = defaults;
            try {
                p.validate();
            } catch (const Error& e) {
                throw api_error(400, "invalid_body", e.what(), Json{{"field", "corpus"}});
            }
            spec.corpus.push_back(std::move(p));
        } else if (item.is_object()) {
            Json copy = item;
            if (!copy.contains("params")) copy["params"] = Json(defaults);
            spec.corpus.push_back(parse_prompt_fields(copy, "text"));
        } else {
            throw api_error(400, "invalid_body", "corpus entries must be strings or objects", Json{{"field", "corpus"}});
        }
    }
    try {
        if (body.contains("modes")) {
            spec.modes.clear();
            for (const auto& m : body.at("modes")) spec.modes.push_back(orchestrator::parse_pipeline_mode(m.get<std::string>()));
        } else if (body.contains("mode")) {
            spec.modes = {orchestrator::parse_pipeline_mode(body.at("mode").get<std::string>())};
        }
        spec.trials = body.value("trials", spec.trials);
        spec.seed = body.value("seed", spec.seed);
        spec.lanes = body.value("lanes", spec.lanes);
        spec.validate();
    } catch (const Error& e) {
        throw api_error(400, "invalid_body", e.what());
    } catch (const Json::exception& e) {
        throw api_error(400, "invalid_body", e.what());
    }
    return spec;
}

Service::Service(ServiceConfig cfg) : cfg_(std::move(cfg)), registry_(cfg_.registry) {
    cfg_.validate();
    pool_ = std::make_unique<orchestrator::ExpertPool>(registry_);
    journal_ = std::make_unique<orchestrator::Journal>(cfg_.data_dir);
    orchestrator_ = std::make_unique<orchestrator::Orchestrator>(cfg_.orchestrator, *pool_, *journal_);
    http_ = std::make_unique<httplib::Server>();
    install_routes();
}

Service::~Service() { stop(); }

std::uint16_t Service::worker_port() const { return worker_listener_ ? worker_listener_->port() : 0; }

void Service::start() {
    {
        std::lock_guard lock(mu_);
        if (started_) return;
        started_ = true;
    }
    for (const auto& w : cfg_.workers) {
        pool_->connect(protocol::tcp_connect(protocol::parse_host_port(w.address), std::chrono::milliseconds(5000)));
    }
    if (cfg_.local_workers > 0) {
        auto specs = orchestrator::LocalCluster::mock_specs(cfg_.local_workers, 0.0);
        for (auto& s : specs) s.options.heartbeat_interval = cfg_.registry.heartbeat_interval;
        local_ = std::make_unique<orchestrator::LocalCluster>(*pool_, std::move(specs));
    }
    if (!cfg_.worker_listen.empty()) {
        worker_listener_ = std::make_unique<protocol::TcpListener>(protocol::parse_host_port(cfg_.worker_listen));
        dial_in_thread_ = std::thread([this] { dial_in_loop(); });
    }
    const auto addr = protocol::parse_host_port(cfg_.listen);
    if (addr.port == 0) {
        const int p = http_->bind_to_any_port(addr.host);
        if (p <= 0) fail(ErrorCode::InvalidArgument, "cannot bind HTTP listener on " + cfg_.listen);
        port_ = static_cast<std::uint16_t>(p);
    } else {
        if (!http_->bind_to_port(addr.host, addr.port)) {
            fail(ErrorCode::InvalidArgument, "cannot bind HTTP listener on " + cfg_.listen);
        }
        port_ = addr.port;
    }
    http_thread_ = std::thread([this] { http_->listen_after_bind(); });
    sweep_thread_ = std::thread([this] { sweep_loop(); });
}

void Service::stop() {
    {
        std::lock_guard lock(mu_);
        if (stopped_) return;
        stopped_ = true;
    }
    stop_cv_.notify_all();
    if (http_) http_->stop();
    if (http_thread_.joinable()) http_thread_.join();
    if (worker_listener_) worker_listener_->close();
    if (dial_in_thread_.joinable()) dial_in_thread_.join();
    if (sweep_thread_.joinable()) sweep_thread_.join();
    std::vector<std::thread> experiments;
    {
        std::lock_guard lock(mu_);
        experiments.swap(experiment_threads_);
    }
    for (auto& t : experiments) t.join();
    orchestrator_->wait_idle();
    if (local_) local_->shutdown();
}

void Service::wait() {
    std::unique_lock lock(mu_);
    stop_cv_.wait(lock, [this] { return stopped_; });
}

void Service::dial_in_loop() {
    while (true) {
        auto stream = worker_listener_->accept();
        if (!stream) return;
        try {
            pool_->accept(std::move(stream));
        } catch (const Error& e) {
            std::lock_guard lock(mu_);
            std::cerr << Json{{"event", "dial_in_rejected"}, {"reason", e.what()}}.dump() << std::endl;
        }
    }
}

void Service::sweep_loop() {
    std::unique_lock lock(mu_);
    while (!stopped_) {
        stop_cv_.wait_for(lock, cfg_.registry.heartbeat_interval, [this] { return stopped_; });
        if (stopped_) break;
        lock.unlock();
        pool_->expire();
        lock.lock();
    }
}

std::string Service::submit_idempotent(const std::string& key, const JobRequest& req) {
    if (key.empty()) return orchestrator_->submit(req.prompt, req.mode, req.policy);
    std::lock_guard lock(mu_);
    auto it = idempotency_.find(key);
    if (it != idempotency_.end()) return it->second;
    const std::string id = orchestrator_->submit(req.prompt, req.mode, req.policy);
    idempotency_.emplace(key, id);
    return id;
}

void Service::install_routes() {
    auto& svr = *http_;

    svr.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
        const Json line{{"ts_ms", orchestrator::wall_clock_ms()},
                        {"method", req.method},
                        {"path", req.path},
                        {"status", res.status},
                        {"remote", req.remote_addr}};
        std::lock_guard lock(mu_);
        std::cerr << line.dump() << std::endl;
    });

    svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "unexpected failure";
        try {
            std::rethrow_exception(ep);
        } catch (const ApiError& e) {
            send_error(res, e);
            return;
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        send_error(res, api_error(500, "internal", what));
    });

    svr.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty()) return;
        send_error(res, api_error(res.status, res.status == 404 ? "not_found" : "internal",
                                  "no route for " + req.method + " " + req.path));
    });

    svr.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, Json{{"status", "ok"}});
    });

    svr.Post("/v1/jobs", [this](const httplib::Request& req, httplib::Response& res) {
        const JobRequest jr = parse_job_request(parse_body(req));
        const std::uint64_t pixels = std::uint64_t{jr.prompt.params.width} * jr.prompt.params.height;
        const auto experts = registry_.list();
        const bool eligible = std::any_of(experts.begin(), experts.end(),
                                          [&](const registry::ExpertDescriptor& d) { return d.max_resolution >= pixels; });
        if (!eligible) {
            throw api_error(503, "no_eligible_expert", "no live expert can serve this request",
                            Json{{"experts", experts.size()}, {"pixels", pixels}});
        }
        const std::string id = submit_idempotent(req.get_header_value("Idempotency-Key"), jr);
        send_json(res, 202, Json{{"job_id", id}});
    });

    svr.Get("/v1/jobs", [this](const httplib::Request& req, httplib::Response& res) {
        orchestrator::JobFilter filter;
        try {
            if (req.has_param("status")) filter.status = orchestrator::parse_job_status(req.get_param_value("status"));
            if (req.has_param("offset")) filter.offset = std::stoul(req.get_param_value("offset"));
            if (req.has_param("limit")) filter.limit = std::stoul(req.get_param_value("limit"));
        } catch (const std::exception& e) {
            throw api_error(400, "invalid_body", std::string("bad query parameter: ") + e.what());
        }
        const auto page = journal_->list_jobs(filter);
        send_json(res, 200, Json{{"total", page.total}, {"jobs", page.jobs}});
    });

    svr.Get(R"(/v1/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = path_param(req);
        if (!journal_->contains(id)) throw api_error(404, "unknown_job", "no job with id '" + id + "'");
        send_json(res, 200, Json(journal_->load(id)));
    });

    svr.Get(R"(/v1/jobs/([^/]+)/video)", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = path_param(req);
        if (!journal_->contains(id)) throw api_error(404, "unknown_job", "no job with id '" + id + "'");
        const auto rec = journal_->load(id);
        if (rec.status != JobStatus::Done) {
            throw api_error(409, "wrong_state", "job is " + std::string(orchestrator::to_string(rec.status)),
                            Json{{"status", std::string(orchestrator::to_string(rec.status))}});
        }
        const auto bytes = orchestrator_->clip_bytes(rec);
        res.status = 200;
        res.set_content(std::string(bytes.begin(), bytes.end()), "application/octet-stream");
    });

    svr.Get("/v1/experts", [this](const httplib::Request&, httplib::Response& res) {
        Json list = Json::array();
        for (const auto& d : registry_.list()) list.push_back(to_json(d));
        send_json(res, 200, Json{{"experts", list}});
    });

    svr.Post("/v1/experiments", [this](const httplib::Request& req, httplib::Response& res) {
        const auto spec = parse_experiment_request(parse_body(req));
        if (registry_.list().empty()) throw api_error(503, "no_eligible_expert", "no live experts");
        const std::string id = protocol::new_request_id();
        std::lock_guard lock(mu_);
        if (stopped_) throw api_error(503, "internal", "service is stopping");
        experiments_[id] = ExperimentState{};
        experiment_threads_.emplace_back([this, id, spec] {
            ExperimentState done;
            try {
                done.report = orchestrator::run_experiment(spec, *orchestrator_);
                done.status = "done";
            } catch (const std::exception& e) {
                done.status = "failed";
                done.failure = e.what();
            }
            std::lock_guard inner(mu_);
            experiments_[id] = std::move(done);
        });
        send_json(res, 202, Json{{"experiment_id", id}});
    });

    svr.Get(R"(/v1/experiments/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = path_param(req);
        std::lock_guard lock(mu_);
        auto it = experiments_.find(id);
        if (it == experiments_.end()) {
            throw api_error(404, "unknown_experiment", "no experiment with id '" + id + "'");
        }
        Json body{{"experiment_id", id}, {"status", it->second.status}};
        if (it->second.report) {
            body["report"] = it->second.report->to_json();
            body["table"] = it->second.report->to_table();
        }
        if (!it->second.failure.empty()) body["failure"] = it->second.failure;
        send_json(res, 200, body);
    });
}

}  // namespace emf::gateway
